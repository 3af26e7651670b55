#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relcomp {

/// Error categories. Each maps to one process exit code of the CLI.
enum class ErrorKind {
  kDomain,                ///< Argument outside the operation's domain.
  kModel,                 ///< Model is structurally invalid for the request.
  kIntegrity,             ///< Compressed data violates its invariants.
  kNumeric,               ///< A distribution failed a normalization check.
  kUndefinedConditional,  ///< Conditioning event has probability zero.
  kIo,                    ///< File could not be read or written.
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(ErrorKind::kModel, what) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what)
      : Error(ErrorKind::kIntegrity, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

class UndefinedConditionalError : public Error {
 public:
  explicit UndefinedConditionalError(const std::string& what)
      : Error(ErrorKind::kUndefinedConditional, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Process exit code for an error category (0 is reserved for success,
/// 1 for unexpected failures, 64 for command-line usage errors).
int exit_code(ErrorKind kind) noexcept;

std::string_view to_string(ErrorKind kind) noexcept;

}  // namespace relcomp
