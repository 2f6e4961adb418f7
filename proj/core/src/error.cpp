#include "verilab/error.hpp"

namespace verilab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::index: return "index error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::resource: return "resource error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace verilab
