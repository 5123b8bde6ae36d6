#pragma once

#include <stdexcept>
#include <string>

namespace hbe {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatch, non-finite values, unsorted input.
class InputError : public Error {
public:
  using Error::Error;
};

// Arguments outside the region where a bound or theorem applies.
class DomainError : public Error {
public:
  using Error::Error;
};

// Sample or table budget exhausted.
class ResourceError : public Error {
public:
  ResourceError(const std::string& what, unsigned long long used)
      : Error(what), samples_used(used) {}
  unsigned long long samples_used;
};

// Parameter combination that cannot be instantiated.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Bad magic, version or truncated binary data.
class FormatError : public Error {
public:
  using Error::Error;
};

// Text input that fails to parse; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line_no)
      : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

} // namespace hbe
