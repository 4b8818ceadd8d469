#include "semoran/loc/localizer.hpp"
#include "semoran/io/stack_io.hpp"
#include "semoran/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semoran::loc {

void LocalizerModel::validate() const {
  if (net.empty() || net.out_width() != 2) throw ShapeError("localizer: network must emit 2 values");
  if (feature_mean.size() != net.in_width() || feature_inv_std.size() != net.in_width())
    throw ShapeError("localizer: normalization width mismatch");
  if (!(room_width > 0.0f) || !(room_length > 0.0f)) throw ShapeError("localizer: invalid room extent");
}

LocalizerModel init_localizer(const Eigen::Ref<const Matrix<float>>& features, float room_width,
                              float room_length, const LocalizerConfig& config) {
  if (features.cols() == 0) throw std::invalid_argument("train_localizer: empty training set");
  LocalizerModel m;
  const Index n = features.cols();
  Vector<double> sum = Vector<double>::Zero(features.rows());
  Vector<double> sq = Vector<double>::Zero(features.rows());
  for (Index j = 0; j < n; ++j) {
    const Vector<double> c = features.col(j).cast<double>();
    sum += c;
    sq += c.cwiseProduct(c);
  }
  const Vector<double> mean = sum / static_cast<double>(n);
  const Vector<double> var = (sq / static_cast<double>(n) - mean.cwiseProduct(mean)).cwiseMax(0.0);
  m.feature_mean = mean.cast<float>();
  m.feature_inv_std = var.cwiseSqrt().cwiseMax(1e-6).cwiseInverse().cast<float>();
  m.room_width = room_width;
  m.room_length = room_length;
  m.label_center = {room_width / 2, room_length / 2};
  m.label_scale = {room_width / 2, room_length / 2};

  std::vector<Index> widths{features.rows()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(2);
  Rng rng(derive_seed(config.seed, stream::init));
  m.net = DenseStack<float>::glorot(widths, Activation::relu, Activation::identity, rng);
  m.meta.seed = config.seed;
  m.validate();
  return m;
}

namespace {

Matrix<float> normalize_features(const LocalizerModel& m, const Eigen::Ref<const Matrix<float>>& x) {
  return ((x.colwise() - m.feature_mean).array().colwise() * m.feature_inv_std.array()).matrix();
}

}  // namespace

LocalizerModel train_localizer(const Eigen::Ref<const Matrix<float>>& features,
                               const Eigen::Ref<const Matrix<float>>& labels, float room_width,
                               float room_length, const LocalizerConfig& config) {
  if (labels.rows() != 2 || labels.cols() != features.cols())
    throw ShapeError("train_localizer: labels must be [2, n]");
  if (config.epochs < 0 || config.batch <= 0) throw std::invalid_argument("localizer config: invalid epochs or batch");
  LocalizerModel m = init_localizer(features, room_width, room_length, config);
  const Index n = features.cols();
  StackAdamax<float> opt(m.net, config.adamax);
  Rng shuffle_rng(derive_seed(config.seed, stream::shuffle));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  Matrix<float> xb, yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle_rng() % static_cast<std::uint64_t>(i + 1))]);
    double total = 0;
    for (Index start = 0; start < n; start += config.batch) {
      const Index bs = std::min(config.batch, n - start);
      xb.resize(features.rows(), bs);
      yb.resize(2, bs);
      for (Index j = 0; j < bs; ++j) {
        const Index src = order[static_cast<std::size_t>(start + j)];
        xb.col(j) = features.col(src);
        yb.col(j) = ((labels.col(src) - m.label_center).array() / m.label_scale.array()).matrix();
      }
      GradientTape<float> tape;
      const Matrix<float> out = m.net.forward(normalize_features(m, xb), tape);
      const Matrix<float> diff = out - yb;
      const double loss = static_cast<double>(diff.squaredNorm()) / static_cast<double>(diff.size());
      if (!std::isfinite(loss))
        throw NumericError("train_localizer diverged at epoch " + std::to_string(epoch) + ", batch starting " +
                           std::to_string(start));
      const auto g = m.net.backward(tape, diff * (2.0f / static_cast<float>(diff.size())));
      opt.step(m.net, g);
      total += loss * static_cast<double>(bs);
    }
    m.meta.loss_history.push_back(static_cast<float>(total / static_cast<double>(n)));
    m.meta.epochs = epoch + 1;
  }
  return m;
}

LocalizerModel train_localizer(const csi::Dataset& train, const LocalizerConfig& config) {
  train.validate();
  return train_localizer(train.features, train.labels, train.scene.width, train.scene.length, config);
}

Point predict(const LocalizerModel& model, const Eigen::Ref<const Vector<float>>& features) {
  if (features.size() != model.input_dim())
    throw ShapeError("predict: expected " + std::to_string(model.input_dim()) + " features, got " +
                     std::to_string(features.size()));
  const Matrix<float> out = model.net.forward(normalize_features(model, features));
  const float x = out(0, 0) * model.label_scale(0) + model.label_center(0);
  const float y = out(1, 0) * model.label_scale(1) + model.label_center(1);
  if (!std::isfinite(x) || !std::isfinite(y)) throw NumericError("predict: non-finite output");
  return {std::clamp(x, 0.0f, model.room_width), std::clamp(y, 0.0f, model.room_length)};
}

Point knn_localize(const csi::Dataset& train, const Eigen::Ref<const Vector<float>>& query, Index k) {
  const Index n = train.size();
  if (n == 0) throw std::invalid_argument("knn_localize: empty training set");
  if (k < 1 || k > n) throw std::invalid_argument("knn_localize: k must lie in [1, n]");
  if (query.size() != train.features.rows()) throw ShapeError("knn_localize: query width mismatch");
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
  const Vector<double> q = query.cast<double>();
  for (Index i = 0; i < n; ++i)
    dist[static_cast<std::size_t>(i)] = {(train.features.col(i).cast<double>() - q).squaredNorm(), i};
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double x = 0, y = 0;
  for (Index j = 0; j < k; ++j) {
    const Index i = dist[static_cast<std::size_t>(j)].second;
    x += train.labels(0, i);
    y += train.labels(1, i);
  }
  return {static_cast<float>(x / static_cast<double>(k)), static_cast<float>(y / static_cast<double>(k))};
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sequence");
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

ErrorReport ErrorReport::from_errors(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("error report needs at least one sample");
  ErrorReport r;
  r.errors = std::move(errors);
  double sum = 0;
  for (double e : r.errors) sum += e;
  r.mean = sum / static_cast<double>(r.errors.size());
  std::vector<double> sorted = r.errors;
  std::sort(sorted.begin(), sorted.end());
  r.p50 = percentile(sorted, 50);
  r.p90 = percentile(sorted, 90);
  const auto n = static_cast<double>(sorted.size());
  r.cdf.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) r.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
  return r;
}

bool ErrorReport::cdf_valid() const {
  if (cdf.empty() || cdf.back().second != 1.0) return false;
  for (std::size_t i = 1; i < cdf.size(); ++i)
    if (cdf[i].second < cdf[i - 1].second || cdf[i].first < cdf[i - 1].first) return false;
  return cdf.front().second > 0.0;
}

Estimator model_estimator(const LocalizerModel& model) {
  return [&model](const Eigen::Ref<const Vector<float>>& f) { return predict(model, f); };
}

Estimator knn_estimator(const csi::Dataset& train, Index k) {
  return [&train, k](const Eigen::Ref<const Vector<float>>& f) { return knn_localize(train, f, k); };
}

double position_error(const Point& estimate, const Point& truth) {
  return std::hypot(static_cast<double>(estimate.x) - truth.x, static_cast<double>(estimate.y) - truth.y);
}

ErrorReport evaluate(const Estimator& estimator, const csi::Dataset& test, const codec::CodecPair* codec,
                     const codec::ChannelConfig* channel) {
  test.validate();
  std::vector<double> errors;
  std::vector<Point> predictions;
  errors.reserve(static_cast<std::size_t>(test.size()));
  for (Index i = 0; i < test.size(); ++i) {
    Point p;
    if (codec) {
      const Vector<float> rec = codec::reconstruct(*codec, test.features.col(i), channel, static_cast<std::uint64_t>(i));
      p = estimator(rec);
    } else {
      p = estimator(test.features.col(i));
    }
    const Point truth = test.label(i);
    errors.push_back(position_error(p, truth));
    predictions.push_back(p);
  }
  ErrorReport r = ErrorReport::from_errors(std::move(errors));
  r.predictions = std::move(predictions);
  return r;
}

io::Container to_container(const LocalizerModel& model) {
  model.validate();
  io::Container c;
  c.put_scalar("model.type", 2.0f);
  c.put_u64("localizer.version", model.version);
  c.put_u64("localizer.seed", model.meta.seed);
  c.put_scalar("localizer.epochs", static_cast<float>(model.meta.epochs));
  if (!model.meta.loss_history.empty()) c.put_vector("localizer.loss_history", model.meta.loss_history);
  c.put_vector("localizer.room", std::vector<float>{model.room_width, model.room_length});
  c.put_vector("label.center", std::vector<float>{model.label_center(0), model.label_center(1)});
  c.put_vector("label.scale", std::vector<float>{model.label_scale(0), model.label_scale(1)});
  c.put("norm.mean", NdArray<float>({static_cast<std::size_t>(model.feature_mean.size())}, model.feature_mean));
  c.put("norm.inv_std",
        NdArray<float>({static_cast<std::size_t>(model.feature_inv_std.size())}, model.feature_inv_std));
  io::put_stack(c, "net", model.net);
  return c;
}

LocalizerModel localizer_from_container(const io::Container& c) {
  using io::FormatErrc;
  using io::FormatError;
  if (c.get_int("model.type") != 2) throw FormatError(FormatErrc::malformed, "checkpoint is not a localizer");
  LocalizerModel m;
  m.version = c.get_u64("localizer.version");
  m.meta.seed = c.get_u64("localizer.seed");
  m.meta.epochs = static_cast<int>(c.get_int("localizer.epochs"));
  if (c.contains("localizer.loss_history")) {
    const auto& h = c.get("localizer.loss_history");
    m.meta.loss_history.assign(h.data.data(), h.data.data() + h.size());
  }
  auto pair = [&](const std::string& name) {
    const auto& a = c.get(name);
    if (a.size() != 2) throw FormatError(FormatErrc::malformed, name + " must hold two values");
    return Eigen::Vector2f(a.data(0), a.data(1));
  };
  const auto room = pair("localizer.room");
  m.room_width = room(0);
  m.room_length = room(1);
  m.label_center = pair("label.center");
  m.label_scale = pair("label.scale");
  m.feature_mean = c.get("norm.mean").data;
  m.feature_inv_std = c.get("norm.inv_std").data;
  m.net = io::get_stack(c, "net");
  try {
    m.validate();
  } catch (const ShapeError& e) {
    throw FormatError(FormatErrc::malformed, e.what());
  }
  return m;
}

void save_localizer(const LocalizerModel& model, const std::filesystem::path& path) {
  to_container(model).save(path);
}

LocalizerModel load_localizer(const std::filesystem::path& path) {
  return localizer_from_container(io::Container::load(path));
}

}  // namespace semoran::loc
