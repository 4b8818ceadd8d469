#pragma once

#include "semoran/codec/pipeline.hpp"
#include "semoran/csi/scene.hpp"
#include "semoran/nn/adamax.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace semoran::loc {

using csi::Point;

struct LocalizerConfig {
  std::vector<Index> hidden{256, 64};
  int epochs = 50;
  Index batch = 64;
  AdamaxHyper<float> adamax{};
  std::uint64_t seed = 1;
};

struct LocalizerMeta {
  int epochs = 0;
  std::vector<float> loss_history;
  std::uint64_t seed = 0;
};

/// Dense regressor from 13,500 CSI features to a position in meters.
struct LocalizerModel {
  DenseStack<float> net;  // relu hidden layers, identity output of width 2
  Vector<float> feature_mean;
  Vector<float> feature_inv_std;
  Eigen::Vector2f label_center = Eigen::Vector2f::Zero();
  Eigen::Vector2f label_scale = Eigen::Vector2f::Ones();
  float room_width = 0;
  float room_length = 0;
  std::uint64_t version = 1;
  LocalizerMeta meta;

  Index input_dim() const { return net.in_width(); }
  void validate() const;
};

LocalizerModel init_localizer(const Eigen::Ref<const Matrix<float>>& features, float room_width,
                              float room_length, const LocalizerConfig& config);
/// Minimizes mean squared error on normalized labels with Adamax.
LocalizerModel train_localizer(const Eigen::Ref<const Matrix<float>>& features,
                               const Eigen::Ref<const Matrix<float>>& labels, float room_width,
                               float room_length, const LocalizerConfig& config);
LocalizerModel train_localizer(const csi::Dataset& train, const LocalizerConfig& config);

/// Position estimate clamped to the room. Single-sample path; always used for evaluation.
Point predict(const LocalizerModel& model, const Eigen::Ref<const Vector<float>>& features);

/// Mean label of the k nearest training samples (Euclidean feature distance,
/// ties broken by the lower sample index).
Point knn_localize(const csi::Dataset& train, const Eigen::Ref<const Vector<float>>& query, Index k);

struct ErrorReport {
  std::vector<double> errors;  // per test sample, in test-set order
  std::vector<Point> predictions;
  double mean = 0;
  double p50 = 0;
  double p90 = 0;
  std::vector<std::pair<double, double>> cdf;  // (error, fraction), ascending

  /// Builds every summary field from per-sample errors.
  static ErrorReport from_errors(std::vector<double> errors);
  bool cdf_valid() const;
};

/// Nearest-rank percentile of an ascending sequence.
double percentile(const std::vector<double>& sorted, double p);

/// Euclidean distance in meters, computed in double.
double position_error(const Point& estimate, const Point& truth);

using Estimator = std::function<Point(const Eigen::Ref<const Vector<float>>&)>;

Estimator model_estimator(const LocalizerModel& model);
Estimator knn_estimator(const csi::Dataset& train, Index k);

/// Localization error over `test`. With a codec, each sample goes through
/// encode -> channel -> decode first; channel noise for sample i is seeded by i.
ErrorReport evaluate(const Estimator& estimator, const csi::Dataset& test,
                     const codec::CodecPair* codec = nullptr, const codec::ChannelConfig* channel = nullptr);

io::Container to_container(const LocalizerModel& model);
LocalizerModel localizer_from_container(const io::Container& c);
void save_localizer(const LocalizerModel& model, const std::filesystem::path& path);
LocalizerModel load_localizer(const std::filesystem::path& path);

}  // namespace semoran::loc
