#include "relcomp/error.hpp"

namespace relcomp {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain:
      return 2;
    case ErrorKind::kModel:
      return 3;
    case ErrorKind::kIntegrity:
      return 4;
    case ErrorKind::kNumeric:
      return 5;
    case ErrorKind::kUndefinedConditional:
      return 6;
    case ErrorKind::kIo:
      return 7;
  }
  return 1;
}

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain:
      return "domain error";
    case ErrorKind::kModel:
      return "model error";
    case ErrorKind::kIntegrity:
      return "integrity error";
    case ErrorKind::kNumeric:
      return "numeric error";
    case ErrorKind::kUndefinedConditional:
      return "undefined conditional";
    case ErrorKind::kIo:
      return "i/o error";
  }
  return "error";
}

}  // namespace relcomp
