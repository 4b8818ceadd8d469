#pragma once

#include "semoran/io/container.hpp"
#include "semoran/nn/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace semoran::csi {

// Feature geometry: [channels, rows, subcarriers] = [6, 75, 30].
// Channels 0-2 hold amplitude and 3-5 phase, one channel per receive antenna
// of each AP. Rows are AP-major: row = ap * 25 + packet.
inline constexpr Index kAccessPoints = 3;
inline constexpr Index kAntennas = 3;
inline constexpr Index kPackets = 25;
inline constexpr Index kSubcarriers = 30;
inline constexpr Index kChannels = 2 * kAntennas;
inline constexpr Index kRows = kAccessPoints * kPackets;
inline constexpr Index kFeatureCount = kChannels * kRows * kSubcarriers;  // 13,500
inline constexpr Index kHalfCount = kFeatureCount / 2;                    // 6,750
inline constexpr Index kChannelSize = kRows * kSubcarriers;               // 2,250

constexpr Index feature_index(Index channel, Index row, Index subcarrier) {
  return (channel * kRows + row) * kSubcarriers + subcarrier;
}

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kMinPathLength = 0.1;  // meters

struct Point {
  float x = 0;
  float y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct WallSegment {
  Point a;
  Point b;
  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

/// Room geometry and radio parameters. Values are stored as f32 so the scene
/// round-trips exactly through the container format.
struct Scene {
  float width = 10.0f;   // x extent, meters
  float length = 8.0f;   // y extent, meters
  std::array<Point, kAccessPoints> ap_positions{};
  std::vector<float> frequencies;  // Hz, one per subcarrier
  std::vector<WallSegment> reflectors;
  float path_loss_exponent = 2.0f;
  float packet_noise_std = 0.0f;
  float antenna_spacing = 0.06f;  // meters between adjacent antennas, along x
  float reflection_gain = 1.0f;   // amplitude factor applied to reflected paths

  /// 10 m x 8 m room, APs near three corners, the four walls as reflectors.
  static Scene default_scene();
  /// Same room without reflectors or noise.
  static Scene line_of_sight();

  /// 30 evenly spaced subcarriers over 2.402-2.482 GHz.
  static std::vector<float> default_frequencies();

  bool contains(Point p) const;
  Point antenna_position(Index ap, Index antenna) const;
  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct CsiSample {
  NdArray<float> features;  // [6, 75, 30]
  Point label;
};

/// Labeled samples stored column-wise: features is [13500, n], labels [2, n].
struct Dataset {
  Scene scene;
  Matrix<float> features;
  Matrix<float> labels;
  std::vector<std::uint32_t> origin;  // index of each sample in the generated set
  std::uint64_t seed = 0;

  Index size() const { return features.cols(); }
  CsiSample sample(Index i) const;
  Point label(Index i) const { return {labels(0, i), labels(1, i)}; }
  void validate() const;
  /// Subset in the given order.
  Dataset select(const std::vector<Index>& indices) const;
};

/// Wraps an angle to [-pi, pi) and rounds it to a float that stays in range.
float wrap_phase(double radians);

/// Multipath channel for one UE position. `seed` drives the packet noise.
CsiSample synthesize_csi(const Scene& scene, Point position, std::uint64_t seed);
void synthesize_into(const Scene& scene, Point position, std::uint64_t seed,
                     Eigen::Ref<Vector<float>> out);

Dataset generate_dataset(const Scene& scene, Index n, std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset test;
};
Split split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed);

io::Container to_container(const Dataset& ds);
/// Validates the schema; throws io::FormatError on any missing or inconsistent entry.
Dataset from_container(const io::Container& c);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Order-sensitive hash of every stored bit; used for determinism checks.
std::uint64_t content_hash(const Dataset& ds);

}  // namespace semoran::csi
