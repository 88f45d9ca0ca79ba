#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recbench {

// Base of every error raised by the library. `category()` is a short stable
// tag that the CLI prints in front of the message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual const char* category() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  const char* category() const noexcept override { return "parse"; }
  // 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "schema"; }
};

class DataError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "data"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

class CheckpointError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "checkpoint"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "io"; }
};

}  // namespace recbench
