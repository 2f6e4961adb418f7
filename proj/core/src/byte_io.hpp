#pragma once

// Little-endian encoding helpers shared by the model and dataset file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "verilab/error.hpp"

namespace verilab::detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Sequential reader over a byte buffer; every failure reports its byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - offset_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      fail(ErrorKind::parse, std::string("truncated input at byte offset ") + std::to_string(offset_) +
                                 " while reading " + what);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(take(1, what)[0]); }

  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }

  std::uint64_t u64(const char* what) {
    auto b = take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  /// Bytes up to (excluding) the next '\n', which is consumed.
  std::string_view line(const char* what) {
    const auto end = bytes_.find('\n', offset_);
    if (end == std::string_view::npos)
      fail(ErrorKind::parse, std::string("missing newline after byte offset ") + std::to_string(offset_) +
                                 " while reading " + what);
    auto out = bytes_.substr(offset_, end - offset_);
    offset_ = end + 1;
    return out;
  }

  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorKind::parse, message + " at byte offset " + std::to_string(offset_));
  }

 private:
  std::string_view bytes_;
  std::size_t offset_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace verilab::detail
