#pragma once

#include "semoran/harness/config.hpp"
#include "semoran/sim/simulation.hpp"

#include <functional>

namespace semoran::harness {

/// Dataset from `config.dataset`, or generated from the scene keys and seed.
csi::Dataset load_or_generate(const RunConfig& config);
csi::Split split(const RunConfig& config, const csi::Dataset& data);

codec::CodecPair train_codec_pair(const RunConfig& config, const csi::Dataset& train, Index bottleneck,
                                  std::uint64_t seed);
/// Localizer fitted on the codec's clean reconstructions of the training set
/// (raw features when `pair` is null).
loc::LocalizerModel train_localizer_on(const RunConfig& config, const csi::Dataset& train,
                                       const codec::CodecPair* pair, std::uint64_t seed);

struct ScenarioResult {
  loc::ErrorReport report;
  std::string trace_digest;
  std::string trace_jsonl;  // filled when requested
  std::uint64_t requests = 0;
  std::uint64_t uplink_bytes = 0;  // UE -> O_RU semantic payload bytes, all requests
  std::uint64_t total_bytes = 0;
  std::uint64_t failures = 0;
};

/// Publishes the models, deploys the codec halves to the UE and the decoding
/// node and the localizer to the Near-RT RIC, then localizes test samples
/// [0, requests) through the network. Errors are in test-set order.
ScenarioResult run_scenario(const codec::CodecPair& pair, std::shared_ptr<const loc::LocalizerModel> model,
                            const csi::Dataset& test, const codec::ChannelConfig& channel, bool enhanced_odu,
                            Index requests = 0, bool keep_trace = false);

struct SweepRow {
  Index bottleneck = 0;  // 0 marks the raw baseline
  double remaining_ratio = 1;
  std::optional<double> snr_db;
  double mean = 0, p50 = 0, p90 = 0;
  double min_mean = 0, max_mean = 0;  // over seeds
  std::uint64_t bytes_on_air = 0;     // per request, UE -> O_RU
  std::vector<double> seed_means;
  std::vector<std::string> digests;
  loc::ErrorReport pooled;  // errors of all seeds together
};

struct SweepReport {
  std::vector<SweepRow> rows;      // baseline first, then ascending bottleneck
  std::vector<SweepRow> snr_rows;  // snr_bottleneck at each configured snr
  std::string trace_jsonl;         // first seed of the snr_bottleneck point, channel off
  const SweepRow& baseline() const { return rows.front(); }
  const SweepRow& best() const;
};

using Progress = std::function<void(const std::string&)>;

SweepReport run_sweep(const RunConfig& config, const Progress& progress = {});

}  // namespace semoran::harness
