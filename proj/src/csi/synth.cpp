#include "semoran/csi/scene.hpp"
#include "semoran/rng.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace semoran::csi {

namespace {

// Largest float strictly below pi and smallest float not below -pi.
const float kPhaseHigh = std::nextafter(static_cast<float>(std::numbers::pi), 0.0f);
const float kPhaseLow = -kPhaseHigh;

struct Vec2 {
  double x, y;
};

Vec2 to_vec(Point p) { return {p.x, p.y}; }
double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Signed side of p relative to the directed line a->b.
double side(Vec2 a, Vec2 b, Vec2 p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); }

// Length of the first-order specular path tx -> wall -> rx, if the reflection
// point falls on the segment and both ends face the same side of it.
std::optional<double> reflected_length(const WallSegment& wall, Vec2 tx, Vec2 rx) {
  const Vec2 a = to_vec(wall.a), b = to_vec(wall.b);
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 <= 0.0) return std::nullopt;
  const double s_tx = side(a, b, tx), s_rx = side(a, b, rx);
  if (s_tx * s_rx <= 0.0) return std::nullopt;
  // Mirror tx across the wall line.
  const double t = ((tx.x - a.x) * dx + (tx.y - a.y) * dy) / len2;
  const Vec2 foot{a.x + t * dx, a.y + t * dy};
  const Vec2 image{2 * foot.x - tx.x, 2 * foot.y - tx.y};
  // Intersection of image->rx with the wall line, as a parameter along the wall.
  const double s_img = side(a, b, image);
  const double w = s_img / (s_img - s_rx);
  const Vec2 hit{image.x + w * (rx.x - image.x), image.y + w * (rx.y - image.y)};
  const double u = ((hit.x - a.x) * dx + (hit.y - a.y) * dy) / len2;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  return dist(image, rx);
}

}  // namespace

float wrap_phase(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = radians - two_pi * std::floor((radians + std::numbers::pi) / two_pi);
  float f = static_cast<float>(w);
  if (f > kPhaseHigh || f < kPhaseLow) f = kPhaseLow;
  return f;
}

std::vector<float> Scene::default_frequencies() {
  std::vector<float> f(kSubcarriers);
  for (Index k = 0; k < kSubcarriers; ++k)
    f[static_cast<std::size_t>(k)] =
        static_cast<float>(2.402e9 + (2.482e9 - 2.402e9) * static_cast<double>(k) / (kSubcarriers - 1));
  return f;
}

Scene Scene::line_of_sight() {
  Scene s;
  s.ap_positions = {Point{0.5f, 0.5f}, Point{9.5f, 0.5f}, Point{0.5f, 7.5f}};
  s.frequencies = default_frequencies();
  return s;
}

Scene Scene::default_scene() {
  Scene s = line_of_sight();
  const Point c00{0, 0}, c10{s.width, 0}, c11{s.width, s.length}, c01{0, s.length};
  s.reflectors = {{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}};
  s.packet_noise_std = 0.02f;
  s.reflection_gain = 0.6f;
  return s;
}

bool Scene::contains(Point p) const {
  return p.x >= 0.0f && p.x <= width && p.y >= 0.0f && p.y <= length;
}

Point Scene::antenna_position(Index ap, Index antenna) const {
  const auto& c = ap_positions[static_cast<std::size_t>(ap)];
  return {c.x + static_cast<float>(antenna - 1) * antenna_spacing, c.y};
}

void Scene::validate() const {
  if (!(width > 0.0f) || !(length > 0.0f) || !std::isfinite(width) || !std::isfinite(length))
    throw std::invalid_argument("scene: room extents must be positive and finite");
  for (Index ap = 0; ap < kAccessPoints; ++ap)
    for (Index ant = 0; ant < kAntennas; ++ant)
      if (!contains(antenna_position(ap, ant)))
        throw std::invalid_argument("scene: AP " + std::to_string(ap) + " antenna lies outside the room");
  if (static_cast<Index>(frequencies.size()) != kSubcarriers)
    throw std::invalid_argument("scene: expected 30 subcarrier frequencies, got " +
                                std::to_string(frequencies.size()));
  for (float f : frequencies)
    if (!(f > 0.0f) || !std::isfinite(f)) throw std::invalid_argument("scene: invalid subcarrier frequency");
  if (!(path_loss_exponent >= 0.0f) || !std::isfinite(path_loss_exponent))
    throw std::invalid_argument("scene: path loss exponent must be non-negative");
  if (!(packet_noise_std >= 0.0f) || !std::isfinite(packet_noise_std))
    throw std::invalid_argument("scene: packet noise std must be non-negative");
  if (!(antenna_spacing >= 0.0f) || !std::isfinite(antenna_spacing))
    throw std::invalid_argument("scene: antenna spacing must be non-negative");
  if (!(reflection_gain >= 0.0f) || !std::isfinite(reflection_gain))
    throw std::invalid_argument("scene: reflection gain must be non-negative");
}

void synthesize_into(const Scene& scene, Point position, std::uint64_t seed,
                     Eigen::Ref<Vector<float>> out) {
  if (out.size() != kFeatureCount) throw ShapeError("synthesize_into: output must hold 13500 values");
  if (!scene.contains(position) || !std::isfinite(position.x) || !std::isfinite(position.y))
    throw std::invalid_argument("synthesize_csi: position (" + std::to_string(position.x) + ", " +
                                std::to_string(position.y) + ") is outside the room");

  const Vec2 tx = to_vec(position);
  const double half_exp = static_cast<double>(scene.path_loss_exponent) / 2.0;
  const double gain = scene.reflection_gain;
  const double noise_component = static_cast<double>(scene.packet_noise_std) / std::numbers::sqrt2;

  Rng rng(derive_seed(seed, stream::packets));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::array<std::complex<double>, kSubcarriers> clean;
  for (Index ap = 0; ap < kAccessPoints; ++ap) {
    for (Index ant = 0; ant < kAntennas; ++ant) {
      const Vec2 rx = to_vec(scene.antenna_position(ap, ant));
      // (path length, amplitude) for line-of-sight and each valid reflection.
      std::vector<std::pair<double, double>> paths;
      const double los = std::max(dist(tx, rx), kMinPathLength);
      paths.emplace_back(los, std::pow(los, -half_exp));
      for (const auto& wall : scene.reflectors) {
        if (auto len = reflected_length(wall, tx, rx)) {
          const double d = std::max(*len, kMinPathLength);
          paths.emplace_back(d, gain * std::pow(d, -half_exp));
        }
      }
      for (Index k = 0; k < kSubcarriers; ++k) {
        const double wavenumber = 2.0 * std::numbers::pi *
                                  static_cast<double>(scene.frequencies[static_cast<std::size_t>(k)]) /
                                  kSpeedOfLight;
        std::complex<double> h{0.0, 0.0};
        for (const auto& [d, amp] : paths) h += std::polar(amp, -wavenumber * d);
        clean[static_cast<std::size_t>(k)] = h;
      }
      for (Index packet = 0; packet < kPackets; ++packet) {
        const Index row = ap * kPackets + packet;
        for (Index k = 0; k < kSubcarriers; ++k) {
          std::complex<double> h = clean[static_cast<std::size_t>(k)];
          if (noise_component > 0.0) h += std::complex<double>(noise_component * normal(rng),
                                                                noise_component * normal(rng));
          out(feature_index(ant, row, k)) = static_cast<float>(std::abs(h));
          out(feature_index(kAntennas + ant, row, k)) = wrap_phase(std::arg(h));
        }
      }
    }
  }
}

CsiSample synthesize_csi(const Scene& scene, Point position, std::uint64_t seed) {
  Vector<float> v(kFeatureCount);
  synthesize_into(scene, position, seed, v);
  return {NdArray<float>({kChannels, kRows, kSubcarriers}, std::move(v)), position};
}

CsiSample Dataset::sample(Index i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("dataset sample index out of range");
  Vector<float> v = features.col(i);
  return {NdArray<float>({kChannels, kRows, kSubcarriers}, std::move(v)), label(i)};
}

void Dataset::validate() const {
  scene.validate();
  if (size() == 0) throw std::invalid_argument("dataset is empty");
  if (features.rows() != kFeatureCount) throw ShapeError("dataset features must have 13500 rows");
  if (labels.rows() != 2 || labels.cols() != size()) throw ShapeError("dataset labels must be [2, n]");
  if (static_cast<Index>(origin.size()) != size()) throw ShapeError("dataset origin index size mismatch");
}

Dataset Dataset::select(const std::vector<Index>& indices) const {
  Dataset out;
  out.scene = scene;
  out.seed = seed;
  out.features.resize(features.rows(), static_cast<Index>(indices.size()));
  out.labels.resize(2, static_cast<Index>(indices.size()));
  out.origin.reserve(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index i = indices[j];
    out.features.col(static_cast<Index>(j)) = features.col(i);
    out.labels.col(static_cast<Index>(j)) = labels.col(i);
    out.origin.push_back(origin[static_cast<std::size_t>(i)]);
  }
  return out;
}

Dataset generate_dataset(const Scene& scene, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be at least 1");
  scene.validate();
  Dataset ds;
  ds.scene = scene;
  ds.seed = seed;
  ds.features.resize(kFeatureCount, n);
  ds.labels.resize(2, n);
  ds.origin.resize(static_cast<std::size_t>(n));
  const std::uint64_t position_root = derive_seed(seed, stream::positions);
  const std::uint64_t packet_root = derive_seed(seed, stream::packets);
  for (Index i = 0; i < n; ++i) {
    Rng rng(derive_seed(position_root, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<float> ux(0.0f, scene.width), uy(0.0f, scene.length);
    const Point p{ux(rng), uy(rng)};
    ds.labels(0, i) = p.x;
    ds.labels(1, i) = p.y;
    ds.origin[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
    synthesize_into(scene, p, derive_seed(packet_root, static_cast<std::uint64_t>(i)), ds.features.col(i));
  }
  return ds;
}

Split split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_dataset: train fraction must lie in (0, 1)");
  const Index n = ds.size();
  const auto n_train = static_cast<Index>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n)
    throw std::invalid_argument("split_dataset: " + std::to_string(n) + " samples at fraction " +
                                std::to_string(train_fraction) + " leaves one side empty");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(derive_seed(seed, stream::split));
  // Fisher-Yates with an explicit draw so the permutation is library independent.
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> train(perm.begin(), perm.begin() + n_train);
  std::vector<Index> test(perm.begin() + n_train, perm.end());
  return {ds.select(train), ds.select(test)};
}

io::Container to_container(const Dataset& ds) {
  ds.validate();
  io::Container c;
  const auto n = static_cast<std::size_t>(ds.size());
  c.put_u64("dataset.seed", ds.seed);
  c.put_u64("dataset.count", n);
  const auto& s = ds.scene;
  c.put_vector("scene.room", std::vector<float>{s.width, s.length});
  std::vector<float> aps;
  for (const auto& p : s.ap_positions) aps.insert(aps.end(), {p.x, p.y});
  c.put("scene.ap_positions", NdArray<float>({3, 2}, Eigen::Map<Vector<float>>(aps.data(), 6)));
  c.put_vector("scene.frequencies", s.frequencies);
  c.put_scalar("scene.reflector_count", static_cast<float>(s.reflectors.size()));
  if (!s.reflectors.empty()) {
    std::vector<float> walls;
    for (const auto& w : s.reflectors) walls.insert(walls.end(), {w.a.x, w.a.y, w.b.x, w.b.y});
    c.put("scene.reflectors",
          NdArray<float>({s.reflectors.size(), 4},
                         Eigen::Map<Vector<float>>(walls.data(), static_cast<Index>(walls.size()))));
  }
  c.put_scalar("scene.path_loss_exponent", s.path_loss_exponent);
  c.put_scalar("scene.packet_noise_std", s.packet_noise_std);
  c.put_scalar("scene.antenna_spacing", s.antenna_spacing);
  c.put_scalar("scene.reflection_gain", s.reflection_gain);
  // Column-major [13500, n] storage is exactly row-major [n, 6, 75, 30].
  c.put("samples.features",
        NdArray<float>({n, static_cast<std::size_t>(kChannels), static_cast<std::size_t>(kRows),
                        static_cast<std::size_t>(kSubcarriers)},
                       Eigen::Map<const Vector<float>>(ds.features.data(), ds.features.size())));
  c.put("samples.labels", NdArray<float>({n, 2}, Eigen::Map<const Vector<float>>(ds.labels.data(),
                                                                                 ds.labels.size())));
  Vector<float> origin(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) origin(static_cast<Index>(i)) = static_cast<float>(ds.origin[i]);
  c.put("samples.origin", NdArray<float>({n}, std::move(origin)));
  return c;
}

Dataset from_container(const io::Container& c) {
  using io::FormatErrc;
  using io::FormatError;
  auto expect_shape = [&](const std::string& name, const std::vector<std::size_t>& shape) -> const NdArray<float>& {
    const auto& a = c.get(name);
    if (a.shape != shape)
      throw FormatError(FormatErrc::malformed, "entry '" + name + "' has shape " + shape_string(a.shape) +
                                                   ", expected " + shape_string(shape));
    return a;
  };
  Dataset ds;
  ds.seed = c.get_u64("dataset.seed");
  const auto n64 = c.get_u64("dataset.count");
  if (n64 == 0 || n64 > (1ULL << 24)) throw FormatError(FormatErrc::malformed, "dataset count out of range");
  const auto n = static_cast<std::size_t>(n64);

  auto& s = ds.scene;
  const auto& room = expect_shape("scene.room", {2});
  s.width = room.data(0);
  s.length = room.data(1);
  const auto& aps = expect_shape("scene.ap_positions", {3, 2});
  for (std::size_t i = 0; i < 3; ++i)
    s.ap_positions[i] = {aps.data(static_cast<Index>(2 * i)), aps.data(static_cast<Index>(2 * i + 1))};
  const auto& freq = expect_shape("scene.frequencies", {static_cast<std::size_t>(kSubcarriers)});
  s.frequencies.assign(freq.data.data(), freq.data.data() + freq.size());
  const auto walls = static_cast<std::size_t>(c.get_int("scene.reflector_count"));
  if (walls > 0) {
    const auto& w = expect_shape("scene.reflectors", {walls, 4});
    for (std::size_t i = 0; i < walls; ++i) {
      const auto b = static_cast<Index>(4 * i);
      s.reflectors.push_back({{w.data(b), w.data(b + 1)}, {w.data(b + 2), w.data(b + 3)}});
    }
  } else if (c.contains("scene.reflectors")) {
    throw FormatError(FormatErrc::malformed, "reflector array present with zero count");
  }
  s.path_loss_exponent = c.get_scalar("scene.path_loss_exponent");
  s.packet_noise_std = c.get_scalar("scene.packet_noise_std");
  s.antenna_spacing = c.get_scalar("scene.antenna_spacing");
  s.reflection_gain = c.get_scalar("scene.reflection_gain");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatErrc::malformed, e.what());
  }

  const auto& feats = expect_shape("samples.features", {n, static_cast<std::size_t>(kChannels),
                                                        static_cast<std::size_t>(kRows),
                                                        static_cast<std::size_t>(kSubcarriers)});
  ds.features = Eigen::Map<const Matrix<float>>(feats.data.data(), kFeatureCount, static_cast<Index>(n));
  const auto& labels = expect_shape("samples.labels", {n, 2});
  ds.labels = Eigen::Map<const Matrix<float>>(labels.data.data(), 2, static_cast<Index>(n));
  const auto& origin = expect_shape("samples.origin", {n});
  ds.origin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float o = origin.data(static_cast<Index>(i));
    if (!(o >= 0.0f) || std::floor(o) != o) throw FormatError(FormatErrc::malformed, "invalid origin index");
    ds.origin[i] = static_cast<std::uint32_t>(o);
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { to_container(ds).save(path); }

Dataset load_dataset(const std::filesystem::path& path) { return from_container(io::Container::load(path)); }

std::uint64_t content_hash(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const auto bytes = to_container(ds).serialize();
  feed(bytes.data(), bytes.size());
  return h;
}

}  // namespace semoran::csi
