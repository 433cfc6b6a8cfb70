#include <iostream>
#include <string>
#include <vector>

#include "signoise/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return signoise::cli::run(args, std::cout, std::cerr);
}
