#include "signoise/errors.hpp"

namespace signoise {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

std::string insufficient_message(std::size_t available, std::size_t required,
                                 const std::vector<std::string>& offenders) {
  std::string msg = "insufficient checkpoints: need " + std::to_string(required) +
                    ", have " + std::to_string(available);
  if (!offenders.empty()) msg += " (models: " + join(offenders) + ")";
  return msg;
}

}  // namespace

ParseError::ParseError(std::string file, std::size_t line, const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

UnknownModelError::UnknownModelError(const std::string& model_id, const std::string& context)
    : Error(context + "unknown model_id '" + model_id + "'") {}

InsufficientCheckpointsError::InsufficientCheckpointsError(std::size_t available,
                                                           std::size_t required,
                                                           std::vector<std::string> offenders)
    : Error(insufficient_message(available, required, offenders)),
      available_(available),
      required_(required),
      offenders_(std::move(offenders)) {}

}  // namespace signoise
