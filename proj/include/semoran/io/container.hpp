#pragma once

#include "semoran/nn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semoran::io {

inline constexpr char kMagic[8] = {'S', 'E', 'M', 'O', 'R', 'A', 'N', '1'};
inline constexpr std::uint32_t kFormatVersion = 1;

enum class FormatErrc {
  io,
  bad_magic,
  unsupported_version,
  truncated,
  malformed,
  missing_entry,
  duplicate_entry,
};

const char* errc_name(FormatErrc code);

/// Structured failure while reading or writing a container file.
class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  FormatErrc code() const { return code_; }

 private:
  FormatErrc code_;
};

/// Ordered collection of named f32 arrays. On disk:
///   "SEMORAN1" | u32 version | u32 entry count | { u16 name_len | name | u8 rank | u32 dims[rank] | f32 data[] }*
/// All integers and floats are little-endian.
class Container {
 public:
  void put(const std::string& name, NdArray<float> array);
  void put_scalar(const std::string& name, float value);
  /// u64 values are split into four 16-bit limbs so they survive f32 storage exactly.
  void put_u64(const std::string& name, std::uint64_t value);
  void put_vector(const std::string& name, std::span<const float> values);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const NdArray<float>& get(const std::string& name) const;
  float get_scalar(const std::string& name) const;
  std::uint64_t get_u64(const std::string& name) const;
  /// Scalar entry that must hold a non-negative integer.
  std::int64_t get_int(const std::string& name) const;

  const std::vector<std::pair<std::string, NdArray<float>>>& entries() const { return entries_; }

  std::vector<std::uint8_t> serialize(std::uint32_t version = kFormatVersion) const;
  static Container parse(std::span<const std::uint8_t> bytes);

  /// Writes to `path` through a temporary file and rename.
  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, NdArray<float>>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Writes bytes to `path` atomically (temp file in the same directory, then rename).
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace semoran::io
