#include <charconv>
#include <fstream>
#include <sstream>

#include "byte_io.hpp"
#include "verilab/models.hpp"

namespace verilab {

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "failed reading '" + path.string() + "'");
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

}  // namespace detail

namespace {

constexpr std::string_view kModelHeader = "verilab-model v1";

std::size_t parse_count(std::string_view text, const detail::ByteReader& reader) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    reader.error("bad integer '" + std::string(text) + "' in model descriptor");
  return value;
}

}  // namespace

std::string encode_model(const ModelSpec& spec, const ModelParams& params) {
  params.check_against(spec);
  std::string out(kModelHeader);
  out += "\nkind=" + to_string(spec.kind) + " widths=";
  for (std::size_t i = 0; i < spec.widths.size(); ++i) {
    if (i != 0) out += ",";
    out += std::to_string(spec.widths[i]);
  }
  out += " params=" + std::to_string(params.count()) + "\n";
  for (double v : params.flatten()) detail::put_f64(out, v);
  return out;
}

LoadedModel decode_model(const std::string& bytes) {
  detail::ByteReader reader(bytes);
  if (reader.line("model header") != kModelHeader) reader.error("not a verilab model file");
  const std::string descriptor(reader.line("model descriptor"));

  LoadedModel model;
  std::size_t declared = 0;
  bool saw_kind = false, saw_widths = false, saw_params = false;
  std::istringstream fields(descriptor);
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) reader.error("malformed descriptor field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "kind") {
      try {
        model.spec.kind = parse_model_kind(value);
      } catch (const Error&) {
        reader.error("unknown model kind '" + value + "'");
      }
      saw_kind = true;
    } else if (key == "widths") {
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        model.spec.widths.push_back(parse_count(rest.substr(0, comma), reader));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      saw_widths = true;
    } else if (key == "params") {
      declared = parse_count(value, reader);
      saw_params = true;
    } else {
      reader.error("unknown descriptor field '" + key + "'");
    }
  }
  if (!saw_kind || !saw_widths || !saw_params) reader.error("incomplete model descriptor");
  try {
    model.spec.validate();
  } catch (const Error& e) {
    reader.error(std::string("invalid model descriptor (") + e.what() + ")");
  }
  if (declared != parameter_count(model.spec)) reader.error("parameter count does not match widths");
  reader.need(declared * 8, "parameter block");
  if (reader.remaining() != declared * 8) reader.error("trailing bytes after parameter block");

  std::vector<double> flat(declared);
  for (double& v : flat) v = reader.f64("parameter");
  model.params = ModelParams::zeros(model.spec);
  model.params.assign_flat(flat);
  return model;
}

void save_model(const std::filesystem::path& path, const ModelSpec& spec, const ModelParams& params) {
  detail::write_file(path, encode_model(spec, params));
}

LoadedModel load_model(const std::filesystem::path& path) { return decode_model(detail::read_file(path)); }

}  // namespace verilab
