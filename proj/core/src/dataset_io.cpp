#include "hbe/dataset_io.hpp"

#include "hbe/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace hbe {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw FormatError("truncated binary file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void get_f64s(std::istream& in, std::vector<double>& out) {
  const std::size_t bytes = out.size() * 8;
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) throw FormatError("truncated binary file");
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(buf[k * 8 + i]) << (8 * i);
    out[k] = std::bit_cast<double>(u);
  }
}

void expect_magic(std::istream& in, const char* magic) {
  char m[4];
  in.read(m, 4);
  if (in.gcount() != 4 || std::memcmp(m, magic, 4) != 0)
    throw FormatError(std::string("bad magic (expected ") + magic + ")");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

} // namespace

DataFormat parse_data_format(const std::string& name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "bin") return DataFormat::Bin;
  throw InputError("unknown format '" + name + "' (expected csv or bin)");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PointSet read_csv(std::istream& in, std::optional<double> R) {
  std::vector<double> coords;
  std::size_t d = 0, n = 0, line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto fields = split(sv);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j)
      if (!parse_number(fields[j], row[j])) numeric = false;
    if (first_content) {
      first_content = false;
      if (!numeric) {
        d = fields.size();
        continue;  // header
      }
    }
    if (!numeric) throw ParseError("non-numeric field", line_no);
    if (d == 0) d = row.size();
    if (row.size() != d)
      throw ParseError("expected " + std::to_string(d) + " fields, found " + std::to_string(row.size()), line_no);
    for (double v : row)
      if (!std::isfinite(v)) throw ParseError("non-finite value", line_no);
    coords.insert(coords.end(), row.begin(), row.end());
    ++n;
  }
  if (n == 0) throw ParseError("no data rows", line_no);
  return PointSet(n, d, std::move(coords), R);
}

void write_csv(std::ostream& out, const PointSet& P) {
  for (std::size_t i = 0; i < P.n(); ++i) {
    auto r = P.row(i);
    for (std::size_t j = 0; j < P.d(); ++j) {
      if (j) out << ',';
      out << format_double(r[j]);
    }
    out << '\n';
  }
}

PointSet read_bin(std::istream& in, std::optional<double> R) {
  expect_magic(in, "KDS1");
  std::uint32_t n = get_u32(in), d = get_u32(in);
  if (n == 0 || d == 0) throw FormatError("empty dataset in binary file");
  std::vector<double> coords(static_cast<std::size_t>(n) * d);
  get_f64s(in, coords);
  for (double v : coords)
    if (!std::isfinite(v)) throw FormatError("non-finite value in binary file");
  return PointSet(n, d, std::move(coords), R);
}

void write_bin(std::ostream& out, const PointSet& P) {
  if (P.n() > 0xffffffffULL || P.d() > 0xffffffffULL) throw InputError("dataset too large for KDS1");
  out.write("KDS1", 4);
  put_u32(out, static_cast<std::uint32_t>(P.n()));
  put_u32(out, static_cast<std::uint32_t>(P.d()));
  for (double v : P.coords()) put_f64(out, v);
}

PointSet load_dataset(const std::string& path, DataFormat format, std::optional<double> R) {
  auto in = open_in(path);
  return format == DataFormat::Csv ? read_csv(in, R) : read_bin(in, R);
}

void save_dataset(const std::string& path, const PointSet& P, DataFormat format) {
  auto out = open_out(path);
  if (format == DataFormat::Csv) write_csv(out, P);
  else write_bin(out, P);
  if (!out) throw InputError("write failed for '" + path + "'");
}

std::vector<double> read_vector_csv(std::istream& in) {
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    double x;
    if (!parse_number(sv, x)) throw ParseError("expected one real value", line_no);
    if (!std::isfinite(x)) throw ParseError("non-finite value", line_no);
    v.push_back(x);
  }
  return v;
}

std::vector<double> read_vector_bin(std::istream& in) {
  expect_magic(in, "KDV1");
  std::vector<double> v(get_u32(in));
  get_f64s(in, v);
  return v;
}

void write_vector_csv(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << format_double(x) << '\n';
}

void write_vector_bin(std::ostream& out, std::span<const double> v) {
  if (v.size() > 0xffffffffULL) throw InputError("vector too large for KDV1");
  out.write("KDV1", 4);
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (double x : v) put_f64(out, x);
}

std::vector<double> load_vector(const std::string& path, DataFormat format) {
  auto in = open_in(path);
  return format == DataFormat::Csv ? read_vector_csv(in) : read_vector_bin(in);
}

void save_vector(const std::string& path, std::span<const double> v, DataFormat format) {
  auto out = open_out(path);
  if (format == DataFormat::Csv) write_vector_csv(out, v);
  else write_vector_bin(out, v);
  if (!out) throw InputError("write failed for '" + path + "'");
}

} // namespace hbe
