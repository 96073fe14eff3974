#include "echoloc/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "echoloc/error.hpp"

namespace echoloc {

namespace {

template <typename T>
std::array<char, 8> to_le_bytes(T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::array<char, 8> out{};
  for (int i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xff);
  return out;
}

template <typename T>
T from_le_bytes(const std::array<char, 8>& b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[static_cast<std::size_t>(i)])) << (8 * i);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw ValidationError("cannot write " + path.string());
}

void BinaryWriter::write_i64(std::int64_t v) {
  const auto b = to_le_bytes(v);
  out_.write(b.data(), 8);
}

void BinaryWriter::write_doubles(std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      const auto b = to_le_bytes(v);
      out_.write(b.data(), 8);
    }
  }
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw ValidationError("write failed for " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw ValidationError("cannot open " + path.string());
}

std::int64_t BinaryReader::read_i64() {
  std::array<char, 8> b{};
  if (!in_.read(b.data(), 8)) throw ValidationError("truncated binary file " + path_.string());
  return from_le_bytes<std::int64_t>(b);
}

void BinaryReader::read_doubles(std::span<double> out) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size() * sizeof(double))))
      throw ValidationError("truncated binary file " + path_.string());
  } else {
    for (double& v : out) {
      std::array<char, 8> b{};
      if (!in_.read(b.data(), 8)) throw ValidationError("truncated binary file " + path_.string());
      v = from_le_bytes<double>(b);
    }
  }
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

void Fnv1a::update(std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) {
    h_ ^= b;
    h_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update(std::span<const double> values) {
  for (double v : values) {
    const auto b = to_le_bytes(v);
    update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(b.data()), 8));
  }
}

void Fnv1a::update_u64(std::uint64_t v) {
  const auto b = to_le_bytes(v);
  update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(b.data()), 8));
}

void Fnv1a::update_string(std::string_view s) {
  update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  Fnv1a h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf.data()), got));
  }
  return h.value();
}

double parse_double(std::string_view text, std::size_t line) {
  std::string_view t = text;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.remove_suffix(1);
  if (t.size() > 1 && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
    throw ParseError("invalid number '" + std::string(text) + "'", line);
  return v;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, std::string_view prefix) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << prefix << c;
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
  if (!out) throw ValidationError("write failed for " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      row.push_back(parse_double(cell, lineno));
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged CSV row", lineno);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

std::string Manifest::format(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  if (!out) throw ValidationError("write failed for " + path.string());
}

Manifest Manifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

std::string Manifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ValidationError("manifest has no key '" + key + "'");
}

}  // namespace echoloc
