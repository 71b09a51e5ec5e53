#include "repsim/store/npy.hpp"

#include "repsim/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <string_view>

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read without byte swapping");

namespace repsim::npy {
namespace {

constexpr std::string_view kMagic = "\x93NUMPY";

[[noreturn]] void format_error(const std::string& what) { throw Error(Errc::FormatError, what); }

std::size_t item_size(DType d) { return d == DType::Float32 ? 4 : 8; }

const char* descr(DType d) {
  switch (d) {
    case DType::Float32: return "<f4";
    case DType::Float64: return "<f8";
    case DType::Int64: return "<i8";
  }
  return "";
}

// Minimal reader for the Python dict literal numpy writes, e.g.
// {'descr': '<f4', 'fortran_order': False, 'shape': (4, 3), }
class DictParser {
 public:
  explicit DictParser(std::string_view text) : s_(text) {}

  Header parse() {
    bool have_descr = false, have_order = false, have_shape = false;
    Header h{DType::Float64, {}, 0};
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = string_literal();
      expect(':');
      skip_ws();
      if (key == "descr") {
        const std::string d = string_literal();
        if (d == "<f4") h.dtype = DType::Float32;
        else if (d == "<f8") h.dtype = DType::Float64;
        else if (d == "<i8") h.dtype = DType::Int64;
        else format_error("unsupported dtype '" + d + "' (need <f4, <f8 or <i8)");
        have_descr = true;
      } else if (key == "fortran_order") {
        if (consume_word("False")) {
        } else if (consume_word("True")) {
          format_error("fortran_order True is not supported");
        } else {
          format_error("fortran_order is not a boolean");
        }
        have_order = true;
      } else if (key == "shape") {
        h.shape = tuple();
        have_shape = true;
      } else {
        format_error("unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      if (peek() != '}') format_error("malformed header dict");
    }
    ++pos_;
    skip_ws();
    if (pos_ != s_.size()) format_error("trailing characters after header dict");
    if (!have_descr || !have_order || !have_shape) format_error("header lacks descr, fortran_order or shape");
    return h;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) format_error(std::string("expected '") + c + "' in header");
    ++pos_;
  }
  bool consume_word(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) return false;
    pos_ += w.size();
    return true;
  }
  std::string string_literal() {
    skip_ws();
    const char q = peek();
    if (q != '\'' && q != '"') format_error("expected string in header");
    const std::size_t end = s_.find(q, pos_ + 1);
    if (end == std::string_view::npos) format_error("unterminated string in header");
    std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }
  std::vector<std::size_t> tuple() {
    std::vector<std::size_t> dims;
    expect('(');
    while (true) {
      skip_ws();
      if (peek() == ')') break;
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) format_error("bad shape entry");
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      dims.push_back(v);
      skip_ws();
      if (peek() == ',') ++pos_;
      else if (peek() != ')') format_error("malformed shape tuple");
    }
    ++pos_;
    return dims;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> buf(size);
  in.seekg(0);
  if (size > 0 && !in.read(buf.data(), static_cast<std::streamsize>(size)))
    throw Error(Errc::IoError, "cannot read " + path.string());
  return buf;
}

std::size_t element_count(const Header& h) {
  std::size_t count = 1;
  for (std::size_t d : h.shape) {
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / d)
      format_error("shape overflows");
    count *= d;
  }
  return count;
}

void check_payload(const Header& h, std::size_t file_size, const std::filesystem::path& path) {
  const std::size_t want = element_count(h) * item_size(h.dtype);
  if (file_size - h.data_offset != want)
    format_error(path.string() + ": payload is " + std::to_string(file_size - h.data_offset) +
                 " bytes, header implies " + std::to_string(want));
}

void write_atomic(const std::filesystem::path& path, const std::string& header, const char* data,
                  std::size_t bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(data, static_cast<std::streamsize>(bytes));
    if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

Header parse_header(std::span<const char> bytes) {
  if (bytes.size() < 10 || std::string_view(bytes.data(), kMagic.size()) != kMagic)
    format_error("missing NPY magic");
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t len = 0, start = 0;
  if (major == 1) {
    len = static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    start = 10;
  } else if (major == 2) {
    if (bytes.size() < 12) format_error("truncated NPY header");
    for (int i = 3; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    start = 12;
  } else {
    format_error("unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < start + len) format_error("truncated NPY header");
  std::string_view text(bytes.data() + start, len);
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ' || text.back() == '\0'))
    text.remove_suffix(1);
  Header h = DictParser(text).parse();
  h.data_offset = start + len;
  return h;
}

std::string format_header(DType dtype, std::span<const std::size_t> shape) {
  std::string dict = std::string("{'descr': '") + descr(dtype) + "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (i + 1 < shape.size() || shape.size() == 1) dict += ",";
    if (i + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  const std::size_t unpadded = 10 + dict.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  dict.append(padded - unpadded, ' ');
  dict += '\n';
  const std::size_t len = dict.size();
  if (len > 0xFFFF) format_error("header too long for NPY 1.0");
  std::string out(kMagic);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(len & 0xFF);
  out += static_cast<char>(len >> 8);
  return out + dict;
}

Matrix read_matrix(const std::filesystem::path& path) {
  const std::vector<char> buf = slurp(path);
  const Header h = parse_header(buf);
  if (h.dtype == DType::Int64) format_error(path.string() + ": features must be <f4 or <f8");
  if (h.shape.size() != 2)
    throw Error(Errc::ShapeMismatch, path.string() + ": expected a 2-D array, got " +
                                         std::to_string(h.shape.size()) + "-D");
  check_payload(h, buf.size(), path);
  const auto rows = static_cast<Eigen::Index>(h.shape[0]);
  const auto cols = static_cast<Eigen::Index>(h.shape[1]);
  Matrix m(rows, cols);
  const char* src = buf.data() + h.data_offset;
  const std::size_t count = h.shape[0] * h.shape[1];
  if (h.dtype == DType::Float64) {
    std::memcpy(m.data(), src, count * sizeof(double));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, src + 4 * i, 4);
      m.data()[i] = static_cast<double>(f);
    }
  }
  return m;
}

Header read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> buf(std::min<std::size_t>(size, std::size_t{1} << 20));
  in.seekg(0);
  if (!buf.empty() && !in.read(buf.data(), static_cast<std::streamsize>(buf.size())))
    throw Error(Errc::IoError, "cannot read " + path.string());
  const Header h = parse_header(buf);
  check_payload(h, size, path);
  return h;
}

std::vector<std::int64_t> read_int64(const std::filesystem::path& path) {
  const std::vector<char> buf = slurp(path);
  const Header h = parse_header(buf);
  if (h.dtype != DType::Int64) format_error(path.string() + ": labels must be <i8");
  if (h.shape.size() != 1)
    throw Error(Errc::ShapeMismatch, path.string() + ": expected a 1-D array, got " +
                                         std::to_string(h.shape.size()) + "-D");
  check_payload(h, buf.size(), path);
  std::vector<std::int64_t> out(h.shape[0]);
  std::memcpy(out.data(), buf.data() + h.data_offset, out.size() * sizeof(std::int64_t));
  return out;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, DType dtype) {
  if (dtype == DType::Int64) throw Error(Errc::InvalidArgument, "write_matrix takes a float dtype");
  const std::size_t shape[2] = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  const std::string header = format_header(dtype, shape);
  const auto count = static_cast<std::size_t>(m.size());
  if (dtype == DType::Float64) {
    write_atomic(path, header, reinterpret_cast<const char*>(m.data()), count * sizeof(double));
  } else {
    std::vector<float> f(count);
    for (std::size_t i = 0; i < count; ++i) f[i] = static_cast<float>(m.data()[i]);
    write_atomic(path, header, reinterpret_cast<const char*>(f.data()), count * sizeof(float));
  }
}

void write_int64(const std::filesystem::path& path, std::span<const std::int64_t> values) {
  const std::size_t shape[1] = {values.size()};
  write_atomic(path, format_header(DType::Int64, shape), reinterpret_cast<const char*>(values.data()),
               values.size() * sizeof(std::int64_t));
}

}  // namespace repsim::npy
