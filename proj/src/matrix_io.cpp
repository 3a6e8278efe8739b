#include "smf/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "smf/errors.hpp"

namespace smf {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidInput("write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw InvalidInput("line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

bool has_magic(const std::string& bytes) {
  return bytes.size() >= sizeof(kBinaryMagic) &&
         std::memcmp(bytes.data(), kBinaryMagic, sizeof(kBinaryMagic)) == 0;
}

DenseMatrix decode_binary(const std::string& bytes) {
  constexpr std::size_t kHeader = sizeof(kBinaryMagic) + 2 * sizeof(std::uint64_t);
  if (!has_magic(bytes) || bytes.size() < kHeader) throw InvalidInput("not an SMFMAT01 file");
  const auto rows = get_le<std::uint64_t>(bytes, 8);
  const auto cols = get_le<std::uint64_t>(bytes, 16);
  if (cols != 0 && rows > (bytes.size() / sizeof(double)) / cols) {
    throw InvalidInput("SMFMAT01 dimensions exceed payload");
  }
  if (bytes.size() != kHeader + rows * cols * sizeof(double)) {
    throw InvalidInput("SMFMAT01 payload size mismatch");
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::memcpy(m.data(), bytes.data() + kHeader, rows * cols * sizeof(double));
  require_finite(m, "SMFMAT01 payload");
  return m;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw NumericalError("cannot format value");
  return std::string(buf.data(), ptr);
}

DenseMatrix parse_csv_matrix(const std::string& text) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    Index count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      values.push_back(parse_field(field, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                         " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw InvalidInput("empty matrix file");
  DenseMatrix m = Eigen::Map<DenseMatrix>(values.data(), rows, cols);
  require_finite(m, "CSV matrix");
  return m;
}

std::string format_csv_matrix(const DenseMatrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

DenseMatrix read_csv_matrix(const std::filesystem::path& path) {
  return parse_csv_matrix(slurp(path));
}

void write_csv_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  dump(path, format_csv_matrix(m));
}

DenseMatrix read_binary_matrix(const std::filesystem::path& path) {
  return decode_binary(slurp(path));
}

void write_binary_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  std::string out(kBinaryMagic, sizeof(kBinaryMagic));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  out.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
  dump(path, out);
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  std::string bytes = slurp(path);
  if (has_magic(bytes)) return decode_binary(bytes);
  return parse_csv_matrix(bytes);
}

}  // namespace smf
