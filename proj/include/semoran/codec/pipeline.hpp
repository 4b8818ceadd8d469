#pragma once

#include "semoran/codec/vae.hpp"

#include <memory>
#include <optional>
#include <variant>

namespace semoran::codec {

/// Additive white Gaussian noise on a transmitted vector. The noise power is
/// the vector's mean power divided by 10^(snr_db / 10); nullopt disables it.
Vector<float> awgn_channel(const Eigen::Ref<const Vector<float>>& z, std::optional<double> snr_db,
                           std::uint64_t seed);

/// Sends the half-sample unchanged.
struct IdentityCodec {
  Index input_dim = csi::kHalfCount;
  std::uint64_t version = 1;
};

/// Uniform scalar quantizer with 2^bits levels spanning each channel's
/// training range. Values outside the range clamp to the end levels.
struct QuantizerCodec {
  int bits = 8;
  Index channel_size = csi::kChannelSize;
  Vector<float> channel_min;
  Vector<float> channel_max;
  std::uint64_t version = 1;

  Index input_dim() const { return channel_size * channel_min.size(); }
  static QuantizerCodec fit(const Eigen::Ref<const Matrix<float>>& data, int bits,
                            Index channel_size = csi::kChannelSize);
};

Vector<float> identity_codec(const Eigen::Ref<const Vector<float>>& x);
Vector<float> quantizer_codec(const QuantizerCodec& q, const Eigen::Ref<const Vector<float>>& x);

/// One half of a codec pair: a trained VAE or one of the baselines.
using HalfCodec = std::variant<std::shared_ptr<const VaeModel>, IdentityCodec, QuantizerCodec>;

Index input_width(const HalfCodec& codec);
std::uint64_t codec_version(const HalfCodec& codec);
/// Scalars on air per half-sample. Quantized payloads count bits / 32 per value.
double transmitted_scalars(const HalfCodec& codec);
/// Bytes on air per half-sample (4 per f32 scalar; packed bits for the quantizer).
std::uint64_t payload_bytes(const HalfCodec& codec);

/// Encoder side: what leaves the UE. Deterministic (z = mu for VAEs).
Vector<float> encode_half(const HalfCodec& codec, const Eigen::Ref<const Vector<float>>& x_half);
/// Decoder side: reconstruction from a (possibly noisy) payload.
Vector<float> decode_half(const HalfCodec& codec, const Eigen::Ref<const Vector<float>>& payload);

struct CodecPair {
  HalfCodec amplitude;
  HalfCodec phase;

  static CodecPair identity();
  static CodecPair from_models(VaeModel amplitude_model, VaeModel phase_model);
  void validate() const;
};

/// (transmitted scalars of both halves) / 13,500.
double remaining_ratio(const CodecPair& pair);

struct ChannelConfig {
  std::optional<double> snr_db;  // nullopt = channel off
  std::uint64_t seed = 0;
};

struct SemanticPayload {
  Vector<float> amplitude;
  Vector<float> phase;
};

SemanticPayload encode_sample(const CodecPair& pair, const Eigen::Ref<const Vector<float>>& features);
/// Noise for sample `index` is seeded from (channel.seed, index, half).
SemanticPayload apply_channel(const SemanticPayload& payload, const ChannelConfig& channel, std::uint64_t index);
Vector<float> decode_sample(const CodecPair& pair, const SemanticPayload& payload);

/// Checkpoint of any half codec. VAEs use model.type 1, identity 3, quantizer 4.
io::Container to_container(const HalfCodec& codec);
HalfCodec half_codec_from_container(const io::Container& c);
void save_half_codec(const HalfCodec& codec, const std::filesystem::path& path);
HalfCodec load_half_codec(const std::filesystem::path& path);

/// encode -> channel -> decode for one 13,500-wide sample.
Vector<float> reconstruct(const CodecPair& pair, const Eigen::Ref<const Vector<float>>& features,
                          const ChannelConfig* channel, std::uint64_t index);

/// Batched clean reconstruction (no channel) of many samples, for training
/// downstream models. Not guaranteed bit-identical to `reconstruct`.
Matrix<float> reconstruct_batch(const CodecPair& pair, const Eigen::Ref<const Matrix<float>>& features);

}  // namespace semoran::codec
