#pragma once

#include <stdexcept>
#include <string>

namespace mcseg {

enum class ErrorKind {
  Format,      // malformed or truncated file contents
  Data,        // well-formed input that violates a data invariant
  Argument,    // caller passed values outside an operation's contract
  Config,      // invalid or inconsistent configuration
  Io,          // the filesystem refused a read or write
  Size,        // problem too large for an exhaustive routine
  Definedness  // quantity undefined for the given input (e.g. zero mass)
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::Argument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error(ErrorKind::Size, what) {}
};

class DefinednessError : public Error {
 public:
  explicit DefinednessError(const std::string& what) : Error(ErrorKind::Definedness, what) {}
};

}  // namespace mcseg
