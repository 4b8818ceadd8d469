#pragma once

#include "semoran/codec/elbo.hpp"
#include "semoran/csi/scene.hpp"
#include "semoran/io/container.hpp"
#include "semoran/nn/adamax.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semoran::codec {

enum class DataKind : std::uint8_t { amplitude = 0, phase = 1 };

const char* kind_name(DataKind kind);

struct VaeConfig {
  Index bottleneck = 270;
  /// Hidden widths from the input side. The decoder mirrors them.
  std::vector<Index> hidden{1024, 512};
  /// Appends a hidden layer of width 2 * bottleneck next to the latent.
  bool bottleneck_hidden = true;
  int epochs = 50;
  Index batch = 64;
  float beta = 1.0f;
  AdamaxHyper<float> adamax{};
  std::uint64_t seed = 1;
  /// Contiguous values sharing one normalization range (one CSI channel).
  Index channel_size = csi::kChannelSize;
};

struct TrainingMeta {
  int epochs = 0;
  std::vector<float> loss_history;
  std::vector<float> reconstruction_history;
  std::vector<float> kl_history;
  std::uint64_t seed = 0;
  float beta = 1.0f;
};

struct VaeModel {
  DenseStack<float> encoder;  // input_dim -> 2 * bottleneck ([mu; logvar])
  DenseStack<float> decoder;  // bottleneck -> input_dim
  Index bottleneck = 0;
  Index input_dim = 0;
  DataKind kind = DataKind::amplitude;
  std::uint64_t version = 1;
  Index channel_size = 1;
  // x_normalized = (x - offset) / scale, one entry per channel.
  Vector<float> norm_offset;
  Vector<float> norm_scale;
  TrainingMeta meta;

  void validate() const;
  Matrix<float> normalize(const Eigen::Ref<const Matrix<float>>& x) const;
  Matrix<float> denormalize(const Eigen::Ref<const Matrix<float>>& x) const;
};

/// Codec output for one half-sample. Only `z` goes on air.
struct LatentEmbedding {
  Vector<float> mu;
  Vector<float> logvar;
  Vector<float> z;
  Index transmitted_scalars = 0;
};

enum class EncodeMode { sample, deterministic };

LatentEmbedding encode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& x_half,
                       std::uint64_t seed, EncodeMode mode = EncodeMode::sample);
/// Also reports the standard-normal draw used for z.
LatentEmbedding encode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& x_half,
                       std::uint64_t seed, EncodeMode mode, Vector<float>* noise_out);
Vector<float> decode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& z);

/// Batch versions (columns are samples), deterministic z = mu.
Matrix<float> encode_mean_batch(const VaeModel& model, const Eigen::Ref<const Matrix<float>>& x);
Matrix<float> decode_batch(const VaeModel& model, const Eigen::Ref<const Matrix<float>>& z);

/// Freshly initialized model; normalization derived from `data` (columns are samples).
VaeModel init_vae(const Eigen::Ref<const Matrix<float>>& data, DataKind kind, const VaeConfig& config);

/// Trains on `data` (columns are samples of width input_dim).
VaeModel train_vae(const Eigen::Ref<const Matrix<float>>& data, DataKind kind, const VaeConfig& config);
/// Trains on the amplitude or phase half of each sample.
VaeModel train_vae(const csi::Dataset& train, DataKind kind, const VaeConfig& config);

/// Rows of the 13,500-wide feature vector that belong to one half.
inline Index half_offset(DataKind kind) { return kind == DataKind::amplitude ? 0 : csi::kHalfCount; }

io::Container to_container(const VaeModel& model);
VaeModel vae_from_container(const io::Container& c);
void save_vae(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_vae(const std::filesystem::path& path);

}  // namespace semoran::codec
