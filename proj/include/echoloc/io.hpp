#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace echoloc {

/// Little-endian binary output regardless of host byte order.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);
  void write_i64(std::int64_t v);
  void write_doubles(std::span<const double> values);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);
  std::int64_t read_i64();
  void read_doubles(std::span<double> out);
  bool at_end();

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes);
  void update(std::span<const double> values);
  void update_u64(std::uint64_t v);
  void update_string(std::string_view s);
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file(const std::filesystem::path& path);

/// Whole-token decimal parse; subnormals are accepted. Throws ParseError.
double parse_double(std::string_view text, std::size_t line);
std::string hex64(std::uint64_t v);

/// Dense CSV with a header row of `prefix0,prefix1,...`.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      std::string_view prefix);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Ordered `key=value` text file.
class Manifest {
 public:
  template <typename T>
  void set(const std::string& key, const T& value) {
    if constexpr (std::is_convertible_v<T, std::string>) {
      entries_.emplace_back(key, std::string(value));
    } else {
      entries_.emplace_back(key, format(value));
    }
  }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);
  std::string get(const std::string& key) const;

 private:
  static std::string format(double v);
  static std::string format(long long v) { return std::to_string(v); }
  static std::string format(unsigned long long v) { return std::to_string(v); }
  static std::string format(long v) { return std::to_string(v); }
  static std::string format(unsigned long v) { return std::to_string(v); }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(unsigned v) { return std::to_string(v); }
  static std::string format(bool v) { return v ? "true" : "false"; }

  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace echoloc
