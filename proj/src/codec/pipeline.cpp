#include "semoran/codec/pipeline.hpp"
#include "semoran/rng.hpp"

#include <cmath>

namespace semoran::codec {

Vector<float> awgn_channel(const Eigen::Ref<const Vector<float>>& z, std::optional<double> snr_db,
                           std::uint64_t seed) {
  if (!z.allFinite()) throw NumericError("awgn_channel: non-finite input");
  Vector<float> out = z;
  if (!snr_db || z.size() == 0) return out;
  const double power = z.cast<double>().squaredNorm() / static_cast<double>(z.size());
  const double sigma = std::sqrt(power / std::pow(10.0, *snr_db / 10.0));
  Rng rng(derive_seed(seed, stream::channel));
  std::normal_distribution<double> normal(0.0, sigma);
  for (Index i = 0; i < out.size(); ++i) out(i) = static_cast<float>(static_cast<double>(out(i)) + normal(rng));
  return out;
}

QuantizerCodec QuantizerCodec::fit(const Eigen::Ref<const Matrix<float>>& data, int bits, Index channel_size) {
  if (bits < 1 || bits > 16) throw std::invalid_argument("quantizer: bits must lie in [1, 16]");
  if (channel_size <= 0 || data.rows() % channel_size != 0 || data.cols() == 0)
    throw ShapeError("quantizer: channel size must divide the input width");
  QuantizerCodec q;
  q.bits = bits;
  q.channel_size = channel_size;
  const Index channels = data.rows() / channel_size;
  q.channel_min.resize(channels);
  q.channel_max.resize(channels);
  for (Index c = 0; c < channels; ++c) {
    const auto block = data.middleRows(c * channel_size, channel_size);
    q.channel_min(c) = block.minCoeff();
    q.channel_max(c) = block.maxCoeff();
  }
  return q;
}

Vector<float> identity_codec(const Eigen::Ref<const Vector<float>>& x) { return x; }

Vector<float> quantizer_codec(const QuantizerCodec& q, const Eigen::Ref<const Vector<float>>& x) {
  if (q.bits < 1 || q.bits > 16) throw std::invalid_argument("quantizer: bits must lie in [1, 16]");
  if (x.size() != q.input_dim()) throw ShapeError("quantizer: input width mismatch");
  const double levels = std::ldexp(1.0, q.bits) - 1.0;
  Vector<float> out(x.size());
  for (Index c = 0; c < q.channel_min.size(); ++c) {
    const double lo = q.channel_min(c), hi = q.channel_max(c);
    const double step = hi > lo ? (hi - lo) / levels : 0.0;
    for (Index i = c * q.channel_size; i < (c + 1) * q.channel_size; ++i) {
      if (step == 0.0) {
        out(i) = static_cast<float>(lo);
        continue;
      }
      const double level = std::clamp(std::round((static_cast<double>(x(i)) - lo) / step), 0.0, levels);
      out(i) = level == levels ? static_cast<float>(hi) : static_cast<float>(lo + level * step);
    }
  }
  return out;
}

namespace {

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

Index input_width(const HalfCodec& codec) {
  return std::visit(Overloaded{[](const std::shared_ptr<const VaeModel>& m) { return m->input_dim; },
                               [](const IdentityCodec& c) { return c.input_dim; },
                               [](const QuantizerCodec& q) { return q.input_dim(); }},
                    codec);
}

std::uint64_t codec_version(const HalfCodec& codec) {
  return std::visit(Overloaded{[](const std::shared_ptr<const VaeModel>& m) { return m->version; },
                               [](const IdentityCodec& c) { return c.version; },
                               [](const QuantizerCodec& q) { return q.version; }},
                    codec);
}

double transmitted_scalars(const HalfCodec& codec) {
  return std::visit(
      Overloaded{[](const std::shared_ptr<const VaeModel>& m) { return static_cast<double>(m->bottleneck); },
                 [](const IdentityCodec& c) { return static_cast<double>(c.input_dim); },
                 [](const QuantizerCodec& q) {
                   return static_cast<double>(q.input_dim()) * q.bits / 32.0;
                 }},
      codec);
}

std::uint64_t payload_bytes(const HalfCodec& codec) {
  return std::visit(
      Overloaded{[](const std::shared_ptr<const VaeModel>& m) { return 4 * static_cast<std::uint64_t>(m->bottleneck); },
                 [](const IdentityCodec& c) { return 4 * static_cast<std::uint64_t>(c.input_dim); },
                 [](const QuantizerCodec& q) {
                   return (static_cast<std::uint64_t>(q.input_dim()) * static_cast<std::uint64_t>(q.bits) + 7) / 8;
                 }},
      codec);
}

Vector<float> encode_half(const HalfCodec& codec, const Eigen::Ref<const Vector<float>>& x_half) {
  return std::visit(
      Overloaded{[&](const std::shared_ptr<const VaeModel>& m) {
                   return encode(*m, x_half, 0, EncodeMode::deterministic).z;
                 },
                 [&](const IdentityCodec& c) {
                   if (x_half.size() != c.input_dim) throw ShapeError("identity codec: input width mismatch");
                   return identity_codec(x_half);
                 },
                 [&](const QuantizerCodec& q) { return quantizer_codec(q, x_half); }},
      codec);
}

Vector<float> decode_half(const HalfCodec& codec, const Eigen::Ref<const Vector<float>>& payload) {
  return std::visit(Overloaded{[&](const std::shared_ptr<const VaeModel>& m) { return decode(*m, payload); },
                               [&](const IdentityCodec& c) {
                                 if (payload.size() != c.input_dim)
                                   throw ShapeError("identity codec: payload width mismatch");
                                 return Vector<float>(payload);
                               },
                               [&](const QuantizerCodec& q) {
                                 if (payload.size() != q.input_dim())
                                   throw ShapeError("quantizer codec: payload width mismatch");
                                 return Vector<float>(payload);
                               }},
                    codec);
}

CodecPair CodecPair::identity() { return {IdentityCodec{}, IdentityCodec{}}; }

CodecPair CodecPair::from_models(VaeModel amplitude_model, VaeModel phase_model) {
  CodecPair p{std::make_shared<const VaeModel>(std::move(amplitude_model)),
              std::make_shared<const VaeModel>(std::move(phase_model))};
  p.validate();
  return p;
}

void CodecPair::validate() const {
  if (input_width(amplitude) != csi::kHalfCount || input_width(phase) != csi::kHalfCount)
    throw ShapeError("codec pair: each half must take 6750 values");
  auto check_kind = [](const HalfCodec& c, DataKind want) {
    if (auto m = std::get_if<std::shared_ptr<const VaeModel>>(&c)) {
      if (!*m) throw std::invalid_argument("codec pair: null model");
      if ((*m)->kind != want)
        throw std::invalid_argument(std::string("codec pair: expected a ") + kind_name(want) + " model");
    }
  };
  check_kind(amplitude, DataKind::amplitude);
  check_kind(phase, DataKind::phase);
}

double remaining_ratio(const CodecPair& pair) {
  return (transmitted_scalars(pair.amplitude) + transmitted_scalars(pair.phase)) /
         static_cast<double>(csi::kFeatureCount);
}

SemanticPayload encode_sample(const CodecPair& pair, const Eigen::Ref<const Vector<float>>& features) {
  if (features.size() != csi::kFeatureCount) throw ShapeError("encode_sample: expected 13500 features");
  return {encode_half(pair.amplitude, features.head(csi::kHalfCount)),
          encode_half(pair.phase, features.tail(csi::kHalfCount))};
}

SemanticPayload apply_channel(const SemanticPayload& payload, const ChannelConfig& channel, std::uint64_t index) {
  const std::uint64_t s = derive_seed(channel.seed, index);
  return {awgn_channel(payload.amplitude, channel.snr_db, derive_seed(s, 0)),
          awgn_channel(payload.phase, channel.snr_db, derive_seed(s, 1))};
}

Vector<float> decode_sample(const CodecPair& pair, const SemanticPayload& payload) {
  Vector<float> out(csi::kFeatureCount);
  out.head(csi::kHalfCount) = decode_half(pair.amplitude, payload.amplitude);
  out.tail(csi::kHalfCount) = decode_half(pair.phase, payload.phase);
  return out;
}

Vector<float> reconstruct(const CodecPair& pair, const Eigen::Ref<const Vector<float>>& features,
                          const ChannelConfig* channel, std::uint64_t index) {
  SemanticPayload p = encode_sample(pair, features);
  if (channel) p = apply_channel(p, *channel, index);
  return decode_sample(pair, p);
}

Matrix<float> reconstruct_batch(const CodecPair& pair, const Eigen::Ref<const Matrix<float>>& features) {
  if (features.rows() != csi::kFeatureCount) throw ShapeError("reconstruct_batch: expected 13500 rows");
  Matrix<float> out(features.rows(), features.cols());
  auto half = [&](const HalfCodec& codec, Index offset) {
    const auto block = features.middleRows(offset, csi::kHalfCount);
    if (auto m = std::get_if<std::shared_ptr<const VaeModel>>(&codec)) {
      // Chunked to bound the size of the intermediate activations.
      constexpr Index chunk = 512;
      for (Index s = 0; s < features.cols(); s += chunk) {
        const Index n = std::min(chunk, features.cols() - s);
        out.block(offset, s, csi::kHalfCount, n) = decode_batch(**m, encode_mean_batch(**m, block.middleCols(s, n)));
      }
    } else {
      for (Index j = 0; j < features.cols(); ++j)
        out.block(offset, j, csi::kHalfCount, 1) = decode_half(codec, encode_half(codec, block.col(j)));
    }
  };
  half(pair.amplitude, 0);
  half(pair.phase, csi::kHalfCount);
  return out;
}

io::Container to_container(const HalfCodec& codec) {
  return std::visit(
      Overloaded{[](const std::shared_ptr<const VaeModel>& m) { return to_container(*m); },
                 [](const IdentityCodec& c) {
                   io::Container out;
                   out.put_scalar("model.type", 3.0f);
                   out.put_u64("codec.version", c.version);
                   out.put_u64("codec.input_dim", static_cast<std::uint64_t>(c.input_dim));
                   return out;
                 },
                 [](const QuantizerCodec& q) {
                   io::Container out;
                   out.put_scalar("model.type", 4.0f);
                   out.put_u64("codec.version", q.version);
                   out.put_scalar("quantizer.bits", static_cast<float>(q.bits));
                   out.put_u64("quantizer.channel_size", static_cast<std::uint64_t>(q.channel_size));
                   out.put_vector("quantizer.min", {q.channel_min.data(), static_cast<std::size_t>(q.channel_min.size())});
                   out.put_vector("quantizer.max", {q.channel_max.data(), static_cast<std::size_t>(q.channel_max.size())});
                   return out;
                 }},
      codec);
}

HalfCodec half_codec_from_container(const io::Container& c) {
  using io::FormatErrc;
  using io::FormatError;
  switch (c.get_int("model.type")) {
    case 1: return std::make_shared<const VaeModel>(vae_from_container(c));
    case 3: {
      IdentityCodec id;
      id.version = c.get_u64("codec.version");
      id.input_dim = static_cast<Index>(c.get_u64("codec.input_dim"));
      if (id.input_dim <= 0) throw FormatError(FormatErrc::malformed, "identity codec width must be positive");
      return id;
    }
    case 4: {
      QuantizerCodec q;
      q.version = c.get_u64("codec.version");
      q.bits = c.get_int("quantizer.bits");
      q.channel_size = static_cast<Index>(c.get_u64("quantizer.channel_size"));
      const auto& lo = c.get("quantizer.min");
      const auto& hi = c.get("quantizer.max");
      if (q.bits < 1 || q.bits > 16 || q.channel_size <= 0 || lo.rank() != 1 || hi.shape != lo.shape)
        throw FormatError(FormatErrc::malformed, "invalid quantizer checkpoint");
      q.channel_min = lo.data;
      q.channel_max = hi.data;
      return q;
    }
    default: throw FormatError(FormatErrc::malformed, "checkpoint is not a codec");
  }
}

void save_half_codec(const HalfCodec& codec, const std::filesystem::path& path) { to_container(codec).save(path); }

HalfCodec load_half_codec(const std::filesystem::path& path) {
  return half_codec_from_container(io::Container::load(path));
}

}  // namespace semoran::codec
