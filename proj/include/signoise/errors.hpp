#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace signoise {

/// Base class for every data-level failure. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed input row. Carries the file and 1-based line of the record.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class UnknownModelError : public Error {
 public:
  explicit UnknownModelError(const std::string& model_id, const std::string& context = {});
};

/// A curve (or set of curves) is shorter than an operation needs.
class InsufficientCheckpointsError : public Error {
 public:
  InsufficientCheckpointsError(std::size_t available, std::size_t required,
                               std::vector<std::string> offenders = {});

  std::size_t available() const noexcept { return available_; }
  std::size_t required() const noexcept { return required_; }
  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  std::size_t available_;
  std::size_t required_;
  std::vector<std::string> offenders_;
};

/// Precondition violation on numeric input (too few values, near-zero mean, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class TieError : public Error {
 public:
  using Error::Error;
};

}  // namespace signoise
