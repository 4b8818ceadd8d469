#include "doctest.h"

#include "semoran/io/container.hpp"
#include "semoran/io/stack_io.hpp"
#include "semoran/rng.hpp"

#include <cstring>

using namespace semoran;
using io::Container;
using io::FormatErrc;
using io::FormatError;

namespace {

Container sample_container() {
  Container c;
  c.put_scalar("a", 1.5f);
  c.put_u64("seed", 0xDEADBEEFCAFEF00Dull);
  Vector<float> v(6);
  v << 1, -2, 3.25f, std::numeric_limits<float>::denorm_min(), -0.0f, 1e30f;
  c.put("m", NdArray<float>({2, 3}, v));
  return c;
}

FormatErrc code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    Container::parse(bytes);
  } catch (const FormatError& e) {
    return e.code();
  }
  FAIL("parse accepted corrupt bytes");
  return FormatErrc::io;
}

}  // namespace

TEST_CASE("container round-trips every bit") {
  const Container c = sample_container();
  const auto bytes = c.serialize();
  const Container back = Container::parse(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.get_u64("seed") == 0xDEADBEEFCAFEF00Dull);
  CHECK(back.get_scalar("a") == 1.5f);
  const auto& m = back.get("m");
  CHECK(m.shape == std::vector<std::size_t>{2, 3});
  CHECK(std::signbit(m.data(4)));
  CHECK(std::memcmp(m.data.data(), c.get("m").data.data(), 24) == 0);
}

TEST_CASE("u64 values survive at the extremes") {
  for (std::uint64_t v : {0ull, 1ull, 65535ull, 65536ull, ~0ull}) {
    Container c;
    c.put_u64("v", v);
    CHECK(Container::parse(c.serialize()).get_u64("v") == v);
  }
}

TEST_CASE("container rejects corrupt headers with specific codes") {
  auto bytes = sample_container().serialize();
  auto magic = bytes;
  magic[3] = 'X';
  CHECK(code_of(magic) == FormatErrc::bad_magic);
  CHECK(code_of(sample_container().serialize(2)) == FormatErrc::unsupported_version);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of(trailing) == FormatErrc::malformed);
  auto zero_dim = bytes;
  // first entry "a": magic 8 | version 4 | count 4 | name_len 2 | 'a' | rank 1 | dim
  const std::size_t dim_at = 8 + 4 + 4 + 2 + 1 + 1;
  std::memset(&zero_dim[dim_at], 0, 4);
  CHECK(code_of(zero_dim) == FormatErrc::malformed);
}

TEST_CASE("every truncation is rejected") {
  const auto bytes = sample_container().serialize();
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
    const auto code = code_of(cut);
    CHECK((code == FormatErrc::truncated || code == FormatErrc::bad_magic));
  }
}

TEST_CASE("lookups report missing entries and duplicates") {
  Container c = sample_container();
  CHECK_THROWS_AS(c.get("nope"), FormatError);
  try {
    c.get("nope");
  } catch (const FormatError& e) {
    CHECK(e.code() == FormatErrc::missing_entry);
  }
  CHECK_THROWS_AS(c.put_scalar("a", 2.0f), FormatError);
  CHECK_THROWS_AS(c.get_int("m"), FormatError);
}

TEST_CASE("save is atomic and load reads it back") {
  const auto dir = std::filesystem::temp_directory_path() / "semoran_container_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.bin";
  sample_container().save(path);
  CHECK_FALSE(std::filesystem::exists(dir / "c.bin.tmp"));
  CHECK(Container::load(path).serialize() == sample_container().serialize());
  CHECK_THROWS_AS(Container::load(dir / "missing.bin"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dense stacks round-trip through a container") {
  Rng rng(12);
  auto s = DenseStack<float>::glorot({7, 5, 3}, Activation::tanh, Activation::identity, rng);
  Container c;
  io::put_stack(c, "enc", s);
  const Container back = Container::parse(c.serialize());
  CHECK(io::get_stack(back, "enc") == s);
  CHECK_THROWS_AS(io::get_stack(back, "dec"), FormatError);
}
