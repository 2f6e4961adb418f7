#include <charconv>
#include <cmath>
#include <sstream>

#include "byte_io.hpp"
#include "verilab/datasets.hpp"

namespace verilab {

namespace {

constexpr std::string_view kMagic = "VLDS";
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::string encode_dataset(const Dataset& data) {
  data.validate();
  std::string out(kMagic);
  out.push_back(static_cast<char>(kVersion));
  const std::size_t n = data.size(), d = data.dim();
  detail::put_u32(out, static_cast<std::uint32_t>(n));
  detail::put_u32(out, static_cast<std::uint32_t>(d));
  detail::put_u32(out, static_cast<std::uint32_t>(data.num_classes));
  detail::put_u32(out, data.clamp.bounded() ? 1u : 0u);
  detail::put_f64(out, data.clamp.lo);
  detail::put_f64(out, data.clamp.hi);
  for (double v : data.inputs.data()) detail::put_f64(out, v);
  for (int y : data.labels) detail::put_u32(out, static_cast<std::uint32_t>(y));
  return out;
}

Dataset decode_dataset(const std::string& bytes) {
  detail::ByteReader reader(bytes);
  if (reader.take(4, "magic") != kMagic) reader.error("bad dataset magic");
  if (reader.u8("version") != kVersion) reader.error("unsupported dataset version");
  const std::uint32_t n = reader.u32("n");
  const std::uint32_t d = reader.u32("d");
  const std::uint32_t classes = reader.u32("M");
  const std::uint32_t clamp_flag = reader.u32("clamp flag");
  if (clamp_flag > 1) reader.error("bad clamp flag");
  const double lo = reader.f64("clamp lo");
  const double hi = reader.f64("clamp hi");
  if (classes == 0 || classes > 1u << 30) reader.error("bad class count");

  const std::uint64_t feature_bytes = std::uint64_t{n} * d * 8;
  const std::uint64_t label_bytes = std::uint64_t{n} * 4;
  if (reader.remaining() != feature_bytes + label_bytes) {
    if (reader.remaining() < feature_bytes + label_bytes)
      fail(ErrorKind::parse, "truncated dataset: payload ends at byte offset " + std::to_string(bytes.size()) +
                                 ", expected " + std::to_string(reader.offset() + feature_bytes + label_bytes));
    reader.error("trailing bytes after dataset payload");
  }

  Dataset data;
  data.num_classes = static_cast<int>(classes);
  data.clamp = clamp_flag == 1 ? ClampRange{lo, hi} : ClampRange::unclamped();
  std::vector<double> features(std::size_t{n} * d);
  for (double& v : features) {
    v = reader.f64("feature");
    if (!std::isfinite(v)) reader.error("non-finite feature");
  }
  data.inputs = Tensor(Shape{n, d}, std::move(features));
  data.labels.resize(n);
  for (int& y : data.labels) {
    const std::uint32_t raw = reader.u32("label");
    if (raw >= classes) reader.error("label out of range");
    y = static_cast<int>(raw);
  }
  if (data.clamp.bounded() && !(data.clamp.lo < data.clamp.hi)) reader.error("bad clamp range");
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  detail::write_file(path, encode_dataset(data));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(detail::read_file(path)); }

Dataset parse_dataset_text(const std::string& text, int num_classes, ClampRange clamp) {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t dim = 0;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset < text.size()) {
    const std::size_t end = std::min(text.find('\n', offset), text.size());
    std::string_view line(text.data() + offset, end - offset);
    const std::size_t line_start = offset;
    offset = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    auto where = [&](std::size_t col) {
      return "line " + std::to_string(line_no) + " (byte offset " + std::to_string(line_start + col) + ")";
    };
    std::size_t col = 0, fields = 0;
    while (col <= line.size()) {
      const std::size_t comma = std::min(line.find(',', col), line.size());
      const std::string_view token = line.substr(col, comma - col);
      if (fields == 0) {
        int y = 0;
        const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), y);
        if (ec != std::errc() || p != token.data() + token.size() || y < 0)
          fail(ErrorKind::parse, "bad label '" + std::string(token) + "' at " + where(col));
        labels.push_back(y);
      } else {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || p != token.data() + token.size() || !std::isfinite(v))
          fail(ErrorKind::parse, "bad feature '" + std::string(token) + "' at " + where(col));
        features.push_back(v);
      }
      ++fields;
      col = comma + 1;
    }
    if (fields < 2) fail(ErrorKind::parse, "example without features at " + where(0));
    if (dim == 0) dim = fields - 1;
    if (fields - 1 != dim) fail(ErrorKind::parse, "inconsistent feature count at " + where(0));
  }

  Dataset data;
  data.clamp = clamp;
  const int max_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  data.num_classes = num_classes > 0 ? num_classes : std::max(2, max_label + 1);
  if (max_label >= data.num_classes) fail(ErrorKind::parse, "label " + std::to_string(max_label) + " out of range");
  data.inputs = Tensor(Shape{labels.size(), dim}, std::move(features));
  data.labels = std::move(labels);
  if (clamp.bounded())
    for (double v : data.inputs.data())
      if (v < clamp.lo || v > clamp.hi) fail(ErrorKind::parse, "feature outside clamp range");
  return data;
}

Dataset load_dataset_text(const std::filesystem::path& path, int num_classes, ClampRange clamp) {
  return parse_dataset_text(detail::read_file(path), num_classes, clamp);
}

}  // namespace verilab
