#include "semoran/codec/vae.hpp"
#include "semoran/io/stack_io.hpp"
#include "semoran/rng.hpp"

#include <algorithm>
#include <numeric>

namespace semoran::codec {

const char* kind_name(DataKind kind) { return kind == DataKind::amplitude ? "amplitude" : "phase"; }

void VaeModel::validate() const {
  if (bottleneck <= 0 || input_dim <= 0) throw ShapeError("vae: bottleneck and input width must be positive");
  if (encoder.empty() || decoder.empty()) throw ShapeError("vae: missing encoder or decoder");
  if (encoder.in_width() != input_dim || encoder.out_width() != 2 * bottleneck)
    throw ShapeError("vae: encoder must map " + std::to_string(input_dim) + " -> " +
                     std::to_string(2 * bottleneck));
  if (decoder.in_width() != bottleneck || decoder.out_width() != input_dim)
    throw ShapeError("vae: decoder must map " + std::to_string(bottleneck) + " -> " +
                     std::to_string(input_dim));
  if (channel_size <= 0 || input_dim % channel_size != 0)
    throw ShapeError("vae: channel size must divide the input width");
  const Index channels = input_dim / channel_size;
  if (norm_offset.size() != channels || norm_scale.size() != channels)
    throw ShapeError("vae: normalization needs one entry per channel");
  if (!(norm_scale.array() > 0.0f).all()) throw ShapeError("vae: normalization scales must be positive");
}

Matrix<float> VaeModel::normalize(const Eigen::Ref<const Matrix<float>>& x) const {
  Matrix<float> out(x.rows(), x.cols());
  for (Index c = 0; c < norm_offset.size(); ++c)
    out.middleRows(c * channel_size, channel_size) =
        ((x.middleRows(c * channel_size, channel_size).array() - norm_offset(c)) / norm_scale(c)).matrix();
  return out;
}

Matrix<float> VaeModel::denormalize(const Eigen::Ref<const Matrix<float>>& x) const {
  Matrix<float> out(x.rows(), x.cols());
  for (Index c = 0; c < norm_offset.size(); ++c)
    out.middleRows(c * channel_size, channel_size) =
        (x.middleRows(c * channel_size, channel_size).array() * norm_scale(c) + norm_offset(c)).matrix();
  if (kind == DataKind::phase) out = out.unaryExpr([](float v) { return csi::wrap_phase(v); });
  return out;
}

namespace {

void check_input(const VaeModel& model, Index rows) {
  if (rows != model.input_dim)
    throw ShapeError("vae " + std::string(kind_name(model.kind)) + ": input has " + std::to_string(rows) +
                     " values, model expects " + std::to_string(model.input_dim));
}

}  // namespace

LatentEmbedding encode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& x_half,
                       std::uint64_t seed, EncodeMode mode, Vector<float>* noise_out) {
  check_input(model, x_half.size());
  const Index b = model.bottleneck;
  const Matrix<float> stats = model.encoder.forward(model.normalize(x_half));
  LatentEmbedding e;
  e.mu = stats.topRows(b);
  e.logvar = stats.bottomRows(b);
  e.transmitted_scalars = b;
  if (mode == EncodeMode::deterministic) {
    e.z = e.mu;
    if (noise_out) *noise_out = Vector<float>::Zero(b);
  } else {
    Rng rng(derive_seed(seed, stream::reparam));
    std::normal_distribution<float> normal(0.0f, 1.0f);
    Vector<float> noise(b);
    for (Index i = 0; i < b; ++i) noise(i) = normal(rng);
    e.z = e.mu + ((e.logvar.array() * 0.5f).exp() * noise.array()).matrix();
    if (noise_out) *noise_out = std::move(noise);
  }
  if (!e.z.allFinite() || !e.logvar.allFinite()) throw NumericError("encode: non-finite latent");
  return e;
}

LatentEmbedding encode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& x_half,
                       std::uint64_t seed, EncodeMode mode) {
  return encode(model, x_half, seed, mode, nullptr);
}

Vector<float> decode(const VaeModel& model, const Eigen::Ref<const Vector<float>>& z) {
  if (z.size() != model.bottleneck)
    throw ShapeError("decode: latent has " + std::to_string(z.size()) + " values, bottleneck is " +
                     std::to_string(model.bottleneck));
  return model.denormalize(model.decoder.forward(z));
}

Matrix<float> encode_mean_batch(const VaeModel& model, const Eigen::Ref<const Matrix<float>>& x) {
  check_input(model, x.rows());
  return model.encoder.forward(model.normalize(x)).topRows(model.bottleneck);
}

Matrix<float> decode_batch(const VaeModel& model, const Eigen::Ref<const Matrix<float>>& z) {
  if (z.rows() != model.bottleneck) throw ShapeError("decode_batch: latent width mismatch");
  return model.denormalize(model.decoder.forward(z));
}

VaeModel init_vae(const Eigen::Ref<const Matrix<float>>& data, DataKind kind, const VaeConfig& config) {
  if (config.bottleneck <= 0) throw std::invalid_argument("vae config: bottleneck must be positive");
  if (data.cols() == 0) throw std::invalid_argument("train_vae: empty training set");
  VaeModel m;
  m.bottleneck = config.bottleneck;
  m.input_dim = data.rows();
  m.kind = kind;
  m.channel_size = std::min(config.channel_size, data.rows());
  if (m.input_dim % m.channel_size != 0) throw ShapeError("vae config: channel size must divide input width");
  const Index channels = m.input_dim / m.channel_size;
  m.norm_offset = Vector<float>::Zero(channels);
  m.norm_scale = Vector<float>::Ones(channels);
  if (kind == DataKind::amplitude) {
    for (Index c = 0; c < channels; ++c) {
      const auto block = data.middleRows(c * m.channel_size, m.channel_size);
      const float lo = block.minCoeff(), hi = block.maxCoeff();
      m.norm_offset(c) = lo;
      m.norm_scale(c) = hi > lo ? hi - lo : 1.0f;
    }
  }

  const Index b = config.bottleneck;
  std::vector<Index> enc{m.input_dim};
  enc.insert(enc.end(), config.hidden.begin(), config.hidden.end());
  if (config.bottleneck_hidden) enc.push_back(2 * b);
  enc.push_back(2 * b);
  std::vector<Index> dec{b};
  if (config.bottleneck_hidden) dec.push_back(2 * b);
  dec.insert(dec.end(), config.hidden.rbegin(), config.hidden.rend());
  dec.push_back(m.input_dim);

  Rng rng(derive_seed(config.seed, stream::init));
  m.encoder = DenseStack<float>::glorot(enc, Activation::relu, Activation::identity, rng);
  m.decoder = DenseStack<float>::glorot(dec, Activation::relu, Activation::identity, rng);
  m.meta.seed = config.seed;
  m.meta.beta = config.beta;
  m.validate();
  return m;
}

VaeModel train_vae(const Eigen::Ref<const Matrix<float>>& data, DataKind kind, const VaeConfig& config) {
  if (config.epochs < 0 || config.batch <= 0) throw std::invalid_argument("vae config: invalid epochs or batch");
  VaeModel m = init_vae(data, kind, config);
  const Index n = data.cols();
  const Index b = m.bottleneck;

  StackAdamax<float> enc_opt(m.encoder, config.adamax), dec_opt(m.decoder, config.adamax);
  Rng shuffle_rng(derive_seed(config.seed, stream::shuffle));
  Rng noise_rng(derive_seed(config.seed, stream::reparam));
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  Matrix<float> raw_batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle_rng() % static_cast<std::uint64_t>(i + 1))]);
    double total = 0, recon = 0, kl = 0;
    for (Index start = 0; start < n; start += config.batch) {
      const Index bs = std::min(config.batch, n - start);
      raw_batch.resize(m.input_dim, bs);
      for (Index j = 0; j < bs; ++j) raw_batch.col(j) = data.col(order[static_cast<std::size_t>(start + j)]);
      const Matrix<float> xb = m.normalize(raw_batch);
      Matrix<float> noise(b, bs);
      for (Index j = 0; j < bs; ++j)
        for (Index r = 0; r < b; ++r) noise(r, j) = normal(noise_rng);
      VaeGradients<float> g;
      try {
        const auto terms = vae_objective(m.encoder, m.decoder, xb, noise, config.beta, &g);
        enc_opt.step(m.encoder, g.encoder);
        dec_opt.step(m.decoder, g.decoder);
        total += static_cast<double>(terms.total) * static_cast<double>(bs);
        recon += static_cast<double>(terms.reconstruction) * static_cast<double>(bs);
        kl += static_cast<double>(terms.kl) * static_cast<double>(bs);
      } catch (const NumericError& e) {
        throw NumericError("train_vae (" + std::string(kind_name(kind)) + ", b=" + std::to_string(b) +
                           ") diverged at epoch " + std::to_string(epoch) + ", batch starting " +
                           std::to_string(start) + ": " + e.what());
      }
    }
    m.meta.loss_history.push_back(static_cast<float>(total / static_cast<double>(n)));
    m.meta.reconstruction_history.push_back(static_cast<float>(recon / static_cast<double>(n)));
    m.meta.kl_history.push_back(static_cast<float>(kl / static_cast<double>(n)));
    m.meta.epochs = epoch + 1;
  }
  return m;
}

VaeModel train_vae(const csi::Dataset& train, DataKind kind, const VaeConfig& config) {
  train.validate();
  return train_vae(train.features.middleRows(half_offset(kind), csi::kHalfCount), kind, config);
}

io::Container to_container(const VaeModel& model) {
  model.validate();
  io::Container c;
  c.put_scalar("model.type", 1.0f);
  c.put_scalar("vae.bottleneck", static_cast<float>(model.bottleneck));
  c.put_scalar("vae.input_dim", static_cast<float>(model.input_dim));
  c.put_scalar("vae.kind", static_cast<float>(model.kind));
  c.put_u64("vae.version", model.version);
  c.put_u64("vae.seed", model.meta.seed);
  c.put_scalar("vae.epochs", static_cast<float>(model.meta.epochs));
  c.put_scalar("vae.beta", model.meta.beta);
  c.put_scalar("vae.channel_size", static_cast<float>(model.channel_size));
  if (!model.meta.loss_history.empty()) {
    c.put_vector("vae.loss_history", model.meta.loss_history);
    c.put_vector("vae.reconstruction_history", model.meta.reconstruction_history);
    c.put_vector("vae.kl_history", model.meta.kl_history);
  }
  c.put("norm.offset", NdArray<float>({static_cast<std::size_t>(model.norm_offset.size())}, model.norm_offset));
  c.put("norm.scale", NdArray<float>({static_cast<std::size_t>(model.norm_scale.size())}, model.norm_scale));
  io::put_stack(c, "encoder", model.encoder);
  io::put_stack(c, "decoder", model.decoder);
  return c;
}

VaeModel vae_from_container(const io::Container& c) {
  using io::FormatErrc;
  using io::FormatError;
  if (c.get_int("model.type") != 1) throw FormatError(FormatErrc::malformed, "checkpoint is not a VAE");
  VaeModel m;
  m.bottleneck = c.get_int("vae.bottleneck");
  m.input_dim = c.get_int("vae.input_dim");
  const auto kind = c.get_int("vae.kind");
  if (kind > 1) throw FormatError(FormatErrc::malformed, "unknown data kind");
  m.kind = static_cast<DataKind>(kind);
  m.version = c.get_u64("vae.version");
  m.meta.seed = c.get_u64("vae.seed");
  m.meta.epochs = static_cast<int>(c.get_int("vae.epochs"));
  m.meta.beta = c.get_scalar("vae.beta");
  m.channel_size = c.get_int("vae.channel_size");
  auto history = [&](const std::string& name) {
    const auto& a = c.get(name);
    return std::vector<float>(a.data.data(), a.data.data() + a.size());
  };
  if (c.contains("vae.loss_history")) {
    m.meta.loss_history = history("vae.loss_history");
    m.meta.reconstruction_history = history("vae.reconstruction_history");
    m.meta.kl_history = history("vae.kl_history");
  }
  m.norm_offset = c.get("norm.offset").data;
  m.norm_scale = c.get("norm.scale").data;
  m.encoder = io::get_stack(c, "encoder");
  m.decoder = io::get_stack(c, "decoder");
  try {
    m.validate();
  } catch (const ShapeError& e) {
    throw FormatError(FormatErrc::malformed, e.what());
  }
  return m;
}

void save_vae(const VaeModel& model, const std::filesystem::path& path) { to_container(model).save(path); }

VaeModel load_vae(const std::filesystem::path& path) { return vae_from_container(io::Container::load(path)); }

}  // namespace semoran::codec
