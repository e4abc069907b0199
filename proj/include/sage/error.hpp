#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sage {

/// Failure category. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  validation = 1,
  io = 2,
  degenerate = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DimensionError : public ValidationError {
 public:
  explicit DimensionError(const std::string& what) : ValidationError(what) {}
};

/// Malformed SMAP/BMSK file; carries the byte offset where decoding failed.
class FormatError : public ValidationError {
 public:
  FormatError(const std::string& reason, std::uint64_t offset)
      : ValidationError(reason + " (byte offset " + std::to_string(offset) + ")"), reason_(reason), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Input for which a metric or normalization is undefined (zero mass, constant map).
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

/// Failure raised inside a perception provider, tagged with the provider's identity.
class ProviderError : public Error {
 public:
  ProviderError(ErrorKind kind, const std::string& provider, const std::string& what)
      : Error(kind, "provider '" + provider + "': " + what), provider_(provider) {}

  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

}  // namespace sage
