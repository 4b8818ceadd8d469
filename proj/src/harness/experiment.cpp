#include "semoran/harness/experiment.hpp"
#include "semoran/rng.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace semoran::harness {

using sim::NodeKind;

csi::Dataset load_or_generate(const RunConfig& config) {
  if (!config.dataset.empty()) return csi::load_dataset(config.dataset);
  csi::Scene scene = csi::Scene::default_scene();
  scene.reflection_gain = config.reflection_gain;
  scene.packet_noise_std = config.packet_noise_std;
  return csi::generate_dataset(scene, config.samples, config.seed);
}

csi::Split split(const RunConfig& config, const csi::Dataset& data) {
  return csi::split_dataset(data, config.train_fraction, derive_seed(config.seed, stream::split));
}

codec::CodecPair train_codec_pair(const RunConfig& config, const csi::Dataset& train, Index bottleneck,
                                  std::uint64_t seed) {
  const auto vc = config.vae_config(bottleneck, seed);
  auto amplitude = codec::train_vae(train, codec::DataKind::amplitude, vc);
  auto phase = codec::train_vae(train, codec::DataKind::phase, vc);
  return codec::CodecPair::from_models(std::move(amplitude), std::move(phase));
}

loc::LocalizerModel train_localizer_on(const RunConfig& config, const csi::Dataset& train,
                                       const codec::CodecPair* pair, std::uint64_t seed) {
  const auto lc = config.localizer_config(seed);
  if (!pair) return loc::train_localizer(train, lc);
  const Matrix<float> rec = codec::reconstruct_batch(*pair, train.features);
  return loc::train_localizer(rec, train.labels, train.scene.width, train.scene.length, lc);
}

namespace {

std::vector<std::uint8_t> checkpoint_bytes(const codec::HalfCodec& c) { return codec::to_container(c).serialize(); }

constexpr sim::SimTime kRequestSpacing = 10'000;

}  // namespace

ScenarioResult run_scenario(const codec::CodecPair& pair, std::shared_ptr<const loc::LocalizerModel> model,
                            const csi::Dataset& test, const codec::ChannelConfig& channel, bool enhanced_odu,
                            Index requests, bool keep_trace) {
  pair.validate();
  if (!model) throw std::invalid_argument("run_scenario: no localizer");
  test.validate();
  const Index n = requests > 0 ? std::min(requests, test.size()) : test.size();

  sim::SimConfig sc;
  sc.channel = channel;
  sc.enhanced_odu = enhanced_odu;
  sim::Simulation s(sim::build_topology(), sc);
  const auto& topo = s.topology();
  const auto engine = topo.require(NodeKind::SEMANTIC_ENGINE);
  const auto ue = topo.require(NodeKind::UE_EDGE);
  const auto oru = topo.require(NodeKind::O_RU);
  const auto decoder = topo.require(enhanced_odu ? NodeKind::O_DU : NodeKind::CU_SP);
  const auto ric = topo.require(NodeKind::NEAR_RT_RIC);

  auto& reg = s.registry();
  const auto amp_bytes = checkpoint_bytes(pair.amplitude);
  const auto ph_bytes = checkpoint_bytes(pair.phase);
  const auto loc_bytes = loc::to_container(*model).serialize();
  const auto amp = reg.publish("codec_amplitude", sim::ModelKind::codec_amplitude,
                               codec::codec_version(pair.amplitude), amp_bytes);
  const auto ph = reg.publish("codec_phase", sim::ModelKind::codec_phase, codec::codec_version(pair.phase), ph_bytes);
  const auto lm = reg.publish("localizer", sim::ModelKind::localizer, model->version, loc_bytes);
  for (auto target : {ue, decoder}) {
    s.deploy_model(engine, target, amp, pair.amplitude);
    s.deploy_model(engine, target, ph, pair.phase);
  }
  s.deploy_model(engine, ric, lm, model);
  s.run(std::numeric_limits<sim::SimTime>::max());

  const sim::SimTime start = s.now() + kRequestSpacing;
  std::vector<std::uint64_t> corr(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    corr[static_cast<std::size_t>(i)] = s.inject_localization_request(
        ue, test.features.col(i), static_cast<std::uint64_t>(i), start + i * kRequestSpacing);
  const auto& trace = s.run(std::numeric_limits<sim::SimTime>::max());

  ScenarioResult out;
  out.requests = static_cast<std::uint64_t>(n);
  std::vector<double> errors;
  std::vector<loc::Point> predictions;
  for (Index i = 0; i < n; ++i) {
    auto it = s.results().find(corr[static_cast<std::size_t>(i)]);
    if (it == s.results().end()) {
      ++out.failures;
      continue;
    }
    errors.push_back(loc::position_error(it->second.position, test.label(i)));
    predictions.push_back(it->second.position);
  }
  if (!errors.empty()) {
    out.report = loc::ErrorReport::from_errors(std::move(errors));
    out.report.predictions = std::move(predictions);
  }
  out.trace_digest = trace.digest;
  if (keep_trace) out.trace_jsonl = trace.to_jsonl(topo);
  out.uplink_bytes = sim::bandwidth_report(topo, trace, ue, oru, {ue, sim::MessageKind::SEMANTIC_PAYLOAD});
  out.total_bytes = s.total_bytes_sent();
  return out;
}

const SweepRow& SweepReport::best() const {
  const SweepRow* best = nullptr;
  for (const auto& r : rows)
    if (r.bottleneck > 0 && (!best || r.mean < best->mean)) best = &r;
  if (!best) throw std::logic_error("sweep has no codec rows");
  return *best;
}

namespace {

struct Job {
  Index bottleneck = 0;  // 0: raw baseline
  int rep = 0;
};

struct JobResult {
  // one entry per evaluated channel setting; [0] is channel off
  std::vector<std::optional<double>> snr;
  std::vector<ScenarioResult> runs;
  double ratio = 1;
};

SweepRow aggregate(Index bottleneck, double ratio, const std::optional<double>& snr,
                   const std::vector<const ScenarioResult*>& runs) {
  SweepRow row;
  row.bottleneck = bottleneck;
  row.remaining_ratio = ratio;
  row.snr_db = snr;
  std::vector<double> pooled;
  for (const auto* r : runs) {
    row.seed_means.push_back(r->report.mean);
    row.digests.push_back(r->trace_digest);
    pooled.insert(pooled.end(), r->report.errors.begin(), r->report.errors.end());
  }
  row.mean = std::accumulate(row.seed_means.begin(), row.seed_means.end(), 0.0) /
             static_cast<double>(row.seed_means.size());
  row.min_mean = *std::min_element(row.seed_means.begin(), row.seed_means.end());
  row.max_mean = *std::max_element(row.seed_means.begin(), row.seed_means.end());
  row.pooled = loc::ErrorReport::from_errors(std::move(pooled));
  row.p50 = row.pooled.p50;
  row.p90 = row.pooled.p90;
  row.bytes_on_air = runs.front()->uplink_bytes / std::max<std::uint64_t>(runs.front()->requests, 1);
  return row;
}

}  // namespace

SweepReport run_sweep(const RunConfig& config, const Progress& progress) {
  config.validate();
  std::mutex log_mutex;
  auto log = [&](const std::string& m) {
    if (!progress) return;
    std::lock_guard lock(log_mutex);
    progress(m);
  };

  const csi::Dataset data = load_or_generate(config);
  const csi::Split sp = split(config, data);
  log("dataset: " + std::to_string(sp.train.size()) + " train / " + std::to_string(sp.test.size()) + " test");

  std::set<Index> points(config.bottlenecks.begin(), config.bottlenecks.end());
  points.insert(config.snr_bottleneck);
  std::vector<Job> jobs;
  for (int k = 0; k < config.seeds; ++k) jobs.push_back({0, k});
  for (Index b : points)
    for (int k = 0; k < config.seeds; ++k) jobs.push_back({b, k});

  std::vector<JobResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Job job = jobs[j];
      try {
        const std::uint64_t seed = config.repetition_seed(job.rep);
        const codec::ChannelConfig off{std::nullopt, derive_seed(seed, stream::channel)};
        JobResult& r = results[j];
        codec::CodecPair pair = codec::CodecPair::identity();
        if (job.bottleneck > 0) pair = train_codec_pair(config, sp.train, job.bottleneck, seed);
        auto model = std::make_shared<const loc::LocalizerModel>(
            train_localizer_on(config, sp.train, job.bottleneck > 0 ? &pair : nullptr, seed));
        r.ratio = job.bottleneck > 0 ? codec::remaining_ratio(pair) : 1.0;
        const bool traced = config.write_trace && job.bottleneck == config.snr_bottleneck && job.rep == 0;
        r.snr.push_back(std::nullopt);
        r.runs.push_back(run_scenario(pair, model, sp.test, off, config.enhanced_odu, config.requests, traced));
        if (job.bottleneck == config.snr_bottleneck) {
          for (const auto& snr : config.snr_db) {
            if (!snr) continue;
            codec::ChannelConfig ch = off;
            ch.snr_db = snr;
            r.snr.push_back(snr);
            r.runs.push_back(run_scenario(pair, model, sp.test, ch, config.enhanced_odu, config.requests));
          }
        }
        for (const auto& run : r.runs)
          if (run.failures) throw std::runtime_error(std::to_string(run.failures) + " localization requests failed");
        log((job.bottleneck ? "b=" + std::to_string(job.bottleneck) : std::string("raw")) + " seed#" +
            std::to_string(job.rep) + " mean " + std::to_string(r.runs.front().report.mean) + " m");
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // jobs are grouped by bottleneck (baseline first) with reps in order
  SweepReport report;
  auto runs_of = [&](Index b, std::size_t slot) {
    std::vector<const ScenarioResult*> out;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].bottleneck == b) out.push_back(&results[j].runs.at(slot));
    return out;
  };
  auto ratio_of = [&](Index b) {
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].bottleneck == b) return results[j].ratio;
    return 1.0;
  };
  report.rows.push_back(aggregate(0, 1.0, std::nullopt, runs_of(0, 0)));
  for (Index b : points)
    if (std::find(config.bottlenecks.begin(), config.bottlenecks.end(), b) != config.bottlenecks.end())
      report.rows.push_back(aggregate(b, ratio_of(b), std::nullopt, runs_of(b, 0)));

  // snr rows follow the configured order; "off" reuses the clean runs
  std::size_t noisy = 0;
  for (const auto& snr : config.snr_db) {
    const std::size_t slot = snr ? ++noisy : 0;
    report.snr_rows.push_back(aggregate(config.snr_bottleneck, ratio_of(config.snr_bottleneck), snr,
                                        runs_of(config.snr_bottleneck, slot)));
  }
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (jobs[j].bottleneck == config.snr_bottleneck && jobs[j].rep == 0)
      report.trace_jsonl = std::move(results[j].runs.front().trace_jsonl);
  return report;
}

}  // namespace semoran::harness
