#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace relimp {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text (bad field count, reserved names, unparseable numbers).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_ = 0;
};

// Structurally valid input that violates a semantic precondition
// (unknown symbol, empty corpus, vocabulary mismatch, undefined conditional).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced during numeric work (training divergence etc).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace relimp
