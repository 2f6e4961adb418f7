#pragma once

#include <stdexcept>
#include <string>
#include <type_traits>
#include <string_view>

namespace verilab {

enum class ErrorKind {
  dimension,
  index,
  numeric,
  contract,
  config,
  io,
  parse,
  resource,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  /// The message without the "<kind> error: " prefix that what() carries.
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

/// Same as above, building the message only on failure.
template <class MakeMessage>
  requires std::is_invocable_r_v<std::string, MakeMessage>
inline void require(bool condition, ErrorKind kind, MakeMessage&& make_message) {
  if (!condition) fail(kind, make_message());
}

}  // namespace verilab
