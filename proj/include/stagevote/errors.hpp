#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stagevote {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Input whose overall layout is not recognised (e.g. a bad CSV header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A quantity that is undefined for the given input (zero voters, all-zero row, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace stagevote
