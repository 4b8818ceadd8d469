#include "semoran/io/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace semoran::io {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

const char* errc_name(FormatErrc code) {
  switch (code) {
    case FormatErrc::io: return "io error";
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::unsupported_version: return "unsupported version";
    case FormatErrc::truncated: return "truncated";
    case FormatErrc::malformed: return "malformed";
    case FormatErrc::missing_entry: return "missing entry";
    case FormatErrc::duplicate_entry: return "duplicate entry";
  }
  return "unknown";
}

void Container::put(const std::string& name, NdArray<float> array) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max())
    throw FormatError(FormatErrc::malformed, "entry name length out of range");
  if (array.rank() == 0 || array.rank() > std::numeric_limits<std::uint8_t>::max())
    throw FormatError(FormatErrc::malformed, "entry '" + name + "' has unsupported rank");
  for (auto d : array.shape)
    if (d > std::numeric_limits<std::uint32_t>::max())
      throw FormatError(FormatErrc::malformed, "entry '" + name + "' dimension exceeds u32");
  array.check();
  if (contains(name)) throw FormatError(FormatErrc::duplicate_entry, name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(array));
}

void Container::put_scalar(const std::string& name, float value) {
  Vector<float> v(1);
  v(0) = value;
  put(name, NdArray<float>({1}, std::move(v)));
}

void Container::put_u64(const std::string& name, std::uint64_t value) {
  Vector<float> v(4);
  for (int i = 0; i < 4; ++i) v(i) = static_cast<float>((value >> (16 * i)) & 0xffffu);
  put(name, NdArray<float>({4}, std::move(v)));
}

void Container::put_vector(const std::string& name, std::span<const float> values) {
  Vector<float> v = Eigen::Map<const Vector<float>>(values.data(), static_cast<Index>(values.size()));
  put(name, NdArray<float>({values.size()}, std::move(v)));
}

const NdArray<float>& Container::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw FormatError(FormatErrc::missing_entry, name);
  return entries_[it->second].second;
}

float Container::get_scalar(const std::string& name) const {
  const auto& a = get(name);
  if (a.size() != 1) throw FormatError(FormatErrc::malformed, "entry '" + name + "' is not a scalar");
  return a.data(0);
}

std::uint64_t Container::get_u64(const std::string& name) const {
  const auto& a = get(name);
  if (a.size() != 4) throw FormatError(FormatErrc::malformed, "entry '" + name + "' is not a u64");
  std::uint64_t value = 0;
  for (int i = 0; i < 4; ++i) {
    const float limb = a.data(i);
    if (!(limb >= 0.0f && limb <= 65535.0f) || std::floor(limb) != limb)
      throw FormatError(FormatErrc::malformed, "entry '" + name + "' has an invalid u64 limb");
    value |= static_cast<std::uint64_t>(limb) << (16 * i);
  }
  return value;
}

std::int64_t Container::get_int(const std::string& name) const {
  const float v = get_scalar(name);
  if (!(v >= 0.0f && v <= 16777216.0f) || std::floor(v) != v)
    throw FormatError(FormatErrc::malformed, "entry '" + name + "' is not a non-negative integer");
  return static_cast<std::int64_t>(v);
}

namespace {

template <typename T>
void append_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ == bytes_.size(); }

  template <typename T>
  T read(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(FormatErrc::truncated, std::string("file ends inside ") + what + " at byte " +
                                                   std::to_string(pos_));
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> Container::serialize(std::uint32_t version) const {
  std::size_t total = sizeof(kMagic) + 8;
  for (const auto& [name, a] : entries_) total += 2 + name.size() + 1 + 4 * a.rank() + 4 * a.size();
  std::vector<std::uint8_t> out;
  out.reserve(total);
  out.resize(sizeof(kMagic));
  std::memcpy(out.data(), kMagic, sizeof(kMagic));
  append_le<std::uint32_t>(out, version);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, a] : entries_) {
    append_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_le<std::uint8_t>(out, static_cast<std::uint8_t>(a.rank()));
    for (auto d : a.shape) append_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    const auto* raw = reinterpret_cast<const std::uint8_t*>(a.data.data());
    out.insert(out.end(), raw, raw + 4 * a.size());
  }
  return out;
}

Container Container::parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(sizeof(kMagic), "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError(FormatErrc::bad_magic, "expected SEMORAN1 header");
  const auto version = r.read<std::uint32_t>("version");
  if (version != kFormatVersion)
    throw FormatError(FormatErrc::unsupported_version,
                      "file version " + std::to_string(version) + ", reader supports " +
                          std::to_string(kFormatVersion));
  const auto entries = r.read<std::uint32_t>("entry count");
  Container c;
  for (std::uint32_t e = 0; e < entries; ++e) {
    const auto name_len = r.read<std::uint16_t>("entry name length");
    if (name_len == 0) throw FormatError(FormatErrc::malformed, "empty entry name");
    auto name_bytes = r.take(name_len, "entry name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.read<std::uint8_t>("entry rank");
    if (rank == 0) throw FormatError(FormatErrc::malformed, "entry '" + name + "' has rank 0");
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.read<std::uint32_t>("entry dims");
      if (d == 0) throw FormatError(FormatErrc::malformed, "entry '" + name + "' has a zero dimension");
      if (count > (std::numeric_limits<std::size_t>::max() / 4) / d)
        throw FormatError(FormatErrc::malformed, "entry '" + name + "' is too large");
      count *= d;
    }
    auto payload = r.take(4 * count, "entry payload");
    Vector<float> data(static_cast<Index>(count));
    std::memcpy(data.data(), payload.data(), payload.size());
    if (c.contains(name)) throw FormatError(FormatErrc::duplicate_entry, name);
    c.put(name, NdArray<float>(std::move(shape), std::move(data)));
  }
  if (!r.at_end()) throw FormatError(FormatErrc::malformed, "trailing bytes after the last entry");
  return c;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrc::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError(FormatErrc::io, "rename to " + path.string() + " failed: " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(FormatErrc::io, "read failed for " + path.string());
  return bytes;
}

void Container::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  write_file_atomic(path, bytes);
}

Container Container::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace semoran::io
