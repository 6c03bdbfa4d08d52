#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmad {

/// Root of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A statistic that is mathematically undefined for the given input
/// (zero variance, no comparable pairs, ...). Never silently mapped to 0.
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

/// Model output that could not be decoded. Carries the raw text so the
/// caller can decide on repair or degradation.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int last_status)
      : Error(what), last_status_(last_status) {}
  /// HTTP status of the last attempt, or -1 when no response arrived.
  int last_status() const noexcept { return last_status_; }

 private:
  int last_status_;
};

class CacheMissError : public Error {
 public:
  explicit CacheMissError(std::string digest)
      : Error("replay cache miss for digest " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

class ScriptMissError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. line is 1-based; 0 when not line-specific.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mmad
