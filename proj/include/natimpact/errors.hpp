#ifndef NATIMPACT_ERRORS_HPP
#define NATIMPACT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace natimpact {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed corpus input. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Sample too short or constant for the requested statistic.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

class EmptySampleError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

/// A ratio indicator whose normaliser is zero.
class DivisionDegenerateError : public Error {
 public:
  using Error::Error;
};

class NoArticlesError : public Error {
 public:
  using Error::Error;
};

class CiUnavailableError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace natimpact

#endif  // NATIMPACT_ERRORS_HPP
