#include "mcseg/io.hpp"

#include "mcseg/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mcseg::io {
namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return bytes;
}

void write_all(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename U>
void put_le(std::string& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
  }
}

template <typename U>
U get_le(const char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return value;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// PLY

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

ScalarType parse_scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::Int8;
  if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
  if (name == "short" || name == "int16") return ScalarType::Int16;
  if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
  if (name == "int" || name == "int32") return ScalarType::Int32;
  if (name == "uint" || name == "uint32") return ScalarType::UInt32;
  if (name == "float" || name == "float32") return ScalarType::Float32;
  if (name == "double" || name == "float64") return ScalarType::Float64;
  throw FormatError("PLY: unknown property type '" + std::string(name) + "'");
}

double decode_scalar(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::Int8: return static_cast<std::int8_t>(p[0]);
    case ScalarType::UInt8: return static_cast<unsigned char>(p[0]);
    case ScalarType::Int16: return static_cast<std::int16_t>(get_le<std::uint16_t>(p));
    case ScalarType::UInt16: return get_le<std::uint16_t>(p);
    case ScalarType::Int32: return static_cast<std::int32_t>(get_le<std::uint32_t>(p));
    case ScalarType::UInt32: return get_le<std::uint32_t>(p);
    case ScalarType::Float32: return std::bit_cast<float>(get_le<std::uint32_t>(p));
    case ScalarType::Float64: return std::bit_cast<double>(get_le<std::uint64_t>(p));
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
  bool is_list = false;
  ScalarType count_type = ScalarType::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };

struct Header {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<Element> elements;
  std::size_t payload_offset = 0;
};

Header parse_header(const std::string& bytes) {
  Header header;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  while (true) {
    const auto eol = bytes.find('\n', pos);
    if (eol == std::string::npos) throw FormatError("PLY: header is not terminated by end_header");
    const std::string_view line = trim(std::string_view(bytes).substr(pos, eol - pos));
    pos = eol + 1;
    if (first) {
      if (line != "ply") throw FormatError("PLY: missing 'ply' magic line");
      first = false;
      continue;
    }
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const auto keyword = tokens[0];
    if (keyword == "end_header") break;
    if (keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      if (tokens.size() < 3) throw FormatError("PLY: malformed format line");
      if (tokens[1] == "ascii") {
        header.format = PlyFormat::Ascii;
      } else if (tokens[1] == "binary_little_endian") {
        header.format = PlyFormat::BinaryLittleEndian;
      } else {
        throw FormatError("PLY: unsupported format '" + std::string(tokens[1]) + "'");
      }
      saw_format = true;
    } else if (keyword == "element") {
      if (tokens.size() != 3) throw FormatError("PLY: malformed element line");
      Element e;
      e.name = std::string(tokens[1]);
      const auto [ptr, ec] =
          std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), e.count);
      if (ec != std::errc() || ptr != tokens[2].data() + tokens[2].size()) {
        throw FormatError("PLY: bad element count '" + std::string(tokens[2]) + "'");
      }
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) throw FormatError("PLY: property before any element");
      Property p;
      if (tokens.size() == 5 && tokens[1] == "list") {
        p.is_list = true;
        p.count_type = parse_scalar_type(tokens[2]);
        p.type = parse_scalar_type(tokens[3]);
        p.name = std::string(tokens[4]);
      } else if (tokens.size() == 3) {
        p.type = parse_scalar_type(tokens[1]);
        p.name = std::string(tokens[2]);
      } else {
        throw FormatError("PLY: malformed property line");
      }
      header.elements.back().properties.push_back(std::move(p));
    } else {
      throw FormatError("PLY: unexpected header keyword '" + std::string(keyword) + "'");
    }
  }
  if (!saw_format) throw FormatError("PLY: missing format line");
  header.payload_offset = pos;
  return header;
}

class BinaryCursor {
 public:
  BinaryCursor(const std::string& bytes, std::size_t offset) : bytes_(bytes), pos_(offset) {}

  double read(ScalarType t) {
    const auto n = scalar_size(t);
    if (pos_ + n > bytes_.size()) throw FormatError("PLY: binary payload is truncated");
    const double v = decode_scalar(t, bytes_.data() + pos_);
    pos_ += n;
    return v;
  }

  void skip_property(const Property& p) {
    if (!p.is_list) {
      read(p.type);
      return;
    }
    const double count = read(p.count_type);
    if (count < 0) throw FormatError("PLY: negative list length");
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) read(p.type);
  }

 private:
  const std::string& bytes_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::string& bytes, std::size_t offset)
      : text_(std::string_view(bytes).substr(offset)) {}

  double read() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw FormatError("PLY: ascii payload is truncated");
    std::size_t end = pos_;
    while (end < text_.size() && !std::isspace(static_cast<unsigned char>(text_[end]))) ++end;
    const std::string_view token = text_.substr(pos_, end - pos_);
    pos_ = end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw FormatError("PLY: bad ascii value '" + std::string(token) + "'");
    }
    return value;
  }

  void skip_property(const Property& p) {
    if (!p.is_list) {
      read();
      return;
    }
    const double count = read();
    if (count < 0) throw FormatError("PLY: negative list length");
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) read();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::size_t find_property(const Element& e, std::string_view name) {
  for (std::size_t i = 0; i < e.properties.size(); ++i) {
    if (e.properties[i].name == name) {
      if (e.properties[i].is_list) {
        throw FormatError("PLY: vertex property '" + std::string(name) + "' is a list");
      }
      return i;
    }
  }
  throw FormatError("PLY: vertex element lacks property '" + std::string(name) + "'");
}

template <typename Cursor>
PointCloud read_vertices(Cursor cursor, const Header& header) {
  auto vertex_it = std::find_if(header.elements.begin(), header.elements.end(),
                                [](const Element& e) { return e.name == "vertex"; });
  if (vertex_it == header.elements.end()) throw FormatError("PLY: no vertex element");

  for (auto it = header.elements.begin(); it != vertex_it; ++it) {
    for (std::size_t i = 0; i < it->count; ++i) {
      for (const auto& p : it->properties) cursor.skip_property(p);
    }
  }

  const Element& vertex = *vertex_it;
  static constexpr std::string_view kNames[6] = {"x", "y", "z", "red", "green", "blue"};
  std::size_t slot[6];
  for (int c = 0; c < 6; ++c) slot[c] = find_property(vertex, kNames[c]);
  for (int c = 3; c < 6; ++c) {
    if (vertex.properties[slot[c]].type != ScalarType::UInt8) {
      throw FormatError("PLY: color property '" + std::string(kNames[c]) + "' must be uchar");
    }
  }

  if (vertex.count == 0) throw DataError("PLY: vertex element is empty");

  PointCloud cloud;
  cloud.positions.resize(static_cast<Eigen::Index>(vertex.count), 3);
  cloud.colors.resize(static_cast<Eigen::Index>(vertex.count), 3);
  std::vector<double> values(vertex.properties.size());
  for (std::size_t row = 0; row < vertex.count; ++row) {
    for (std::size_t k = 0; k < vertex.properties.size(); ++k) {
      const auto& p = vertex.properties[k];
      if (p.is_list) {
        cursor.skip_property(p);
        values[k] = 0.0;
      } else if constexpr (std::is_same_v<Cursor, BinaryCursor>) {
        values[k] = cursor.read(p.type);
      } else {
        values[k] = cursor.read();
      }
    }
    const auto r = static_cast<Eigen::Index>(row);
    for (int c = 0; c < 3; ++c) {
      const double coord = values[slot[c]];
      if (!std::isfinite(coord)) {
        throw DataError("PLY: non-finite coordinate at vertex " + std::to_string(row));
      }
      cloud.positions(r, c) = coord;
      const double color = values[slot[c + 3]];
      if (!(color >= 0.0 && color <= 255.0) || color != std::floor(color)) {
        throw FormatError("PLY: color value out of uchar range at vertex " + std::to_string(row));
      }
      cloud.colors(r, c) = color / 255.0;
    }
  }
  return cloud;
}

}  // namespace

PointCloud read_ply(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const Header header = parse_header(bytes);
  if (header.format == PlyFormat::Ascii) {
    return read_vertices(AsciiCursor(bytes, header.payload_offset), header);
  }
  return read_vertices(BinaryCursor(bytes, header.payload_offset), header);
}

Rgb8 label_color(Label label) {
  if (label == 0) return {128, 128, 128};
  constexpr double kGoldenConjugate = 0.6180339887498949;
  const double hue = std::fmod(0.1 + kGoldenConjugate * static_cast<double>(label), 1.0) * 6.0;
  constexpr double s = 0.75, v = 0.95;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = v, g = t, b = p;
  switch (sector) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
  auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

void write_ply(const PointCloud& cloud, const std::optional<LabelMap>& labels,
               const std::filesystem::path& path) {
  const std::size_t n = cloud.size();
  if (static_cast<std::size_t>(cloud.colors.rows()) != n) {
    throw ArgumentError("write_ply: positions and colors differ in length");
  }
  if (labels && labels->size() != n) {
    throw ArgumentError("write_ply: " + std::to_string(labels->size()) + " labels for " +
                        std::to_string(n) + " points");
  }
  std::string buf =
      "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(n) +
      "\nproperty float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  buf.reserve(buf.size() + n * 15);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int c = 0; c < 3; ++c) {
      put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(cloud.positions(r, c))));
    }
    if (labels) {
      const Rgb8 rgb = label_color((*labels)[i]);
      buf.push_back(static_cast<char>(rgb.r));
      buf.push_back(static_cast<char>(rgb.g));
      buf.push_back(static_cast<char>(rgb.b));
    } else {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(cloud.colors(r, c), 0.0, 1.0);
        buf.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
      }
    }
  }
  write_all(path, buf);
}

// ---------------------------------------------------------------------------
// FPF1 features

namespace {
constexpr std::string_view kFeatureMagic = "FPF1";
constexpr std::size_t kFeatureHeaderBytes = 20;
}  // namespace

FeatureMatrix read_features(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  if (bytes.size() < 4 || std::string_view(bytes).substr(0, 4) != kFeatureMagic) {
    throw FormatError("feature file " + path.string() + ": bad magic (expected FPF1)");
  }
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError("feature file " + path.string() + ": truncated header");
  }
  const auto n = get_le<std::uint64_t>(bytes.data() + 4);
  const auto d = get_le<std::uint64_t>(bytes.data() + 12);
  if (d == 0) throw FormatError("feature file " + path.string() + ": dimension is zero");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (n > kMax / d || n * d > (kMax - kFeatureHeaderBytes) / 4 ||
      kFeatureHeaderBytes + 4 * n * d != bytes.size()) {
    throw FormatError("feature file " + path.string() + ": truncated (size " +
                      std::to_string(bytes.size()) + " does not match N=" + std::to_string(n) +
                      ", D=" + std::to_string(d) + ")");
  }
  FeatureMatrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const char* p = bytes.data() + kFeatureHeaderBytes;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j, p += 4) {
      const float v = std::bit_cast<float>(get_le<std::uint32_t>(p));
      if (!std::isfinite(v)) {
        throw DataError("feature file " + path.string() + ": non-finite value at row " +
                        std::to_string(i));
      }
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return features;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  if (features.cols() == 0) throw ArgumentError("write_features: dimension is zero");
  std::string buf(kFeatureMagic);
  put_le(buf, static_cast<std::uint64_t>(features.rows()));
  put_le(buf, static_cast<std::uint64_t>(features.cols()));
  buf.reserve(buf.size() + 4 * static_cast<std::size_t>(features.size()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      put_le(buf, std::bit_cast<std::uint32_t>(features(i, j)));
    }
  }
  write_all(path, buf);
}

// ---------------------------------------------------------------------------
// label text files

LabelMap read_labels(const std::filesystem::path& path) {
  const std::string text = read_all(path);
  LabelMap labels;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    const bool last = eol == std::string::npos;
    if (last) eol = text.size();
    ++line_no;
    const std::string_view token = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    Label value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw FormatError("label file " + path.string() + ": line " + std::to_string(line_no) +
                        ": expected a non-negative integer, got '" + std::string(token) + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

void write_labels(const LabelMap& labels, const std::filesystem::path& path) {
  std::string buf;
  buf.reserve(labels.size() * 3);
  char tmp[16];
  for (const Label l : labels) {
    const auto [end, ec] = std::to_chars(tmp, tmp + sizeof(tmp), l);
    buf.append(tmp, end);
    buf.push_back('\n');
  }
  write_all(path, buf);
}

}  // namespace mcseg::io
