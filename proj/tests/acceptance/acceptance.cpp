// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "../support/oracles.hpp"

#include "semoran/harness/report.hpp"
#include "semoran/io/container.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace semoran;
namespace fs = std::filesystem;
using sim::NodeKind;
using sim::NodeId;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<loc::ErrorReport> g_reports;  // every report produced here, for criterion 10

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---- 1

Outcome gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_stack = 0, worst_elbo = 0;
  int trials = 0;
  for (std::uint64_t s = 0; s < 100; ++s, ++trials) {
    worst_stack = std::max(worst_stack, oracle::check_stack(derive_seed(11, s)).worst());
    worst_elbo = std::max(worst_elbo, oracle::check_elbo(derive_seed(12, s)).worst());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst_stack < 1e-4 && worst_elbo < 1e-4 && secs < 60,
          std::to_string(trials) + " stacks + " + std::to_string(trials) + " ELBO nets; max rel err " +
              fmt(worst_stack) + " / " + fmt(worst_elbo) + " (< 1e-4), " + fmt(secs) + " s (< 60 s)"};
}

// ---- 2

Outcome optimizer_oracle() {
  Matrix<double> theta(1, 1), g(1, 1);
  theta(0, 0) = 1.0;
  g(0, 0) = 0.5;
  AdamaxHyper<double> h;
  h.epsilon = 0;
  auto st = AdamaxState<double>::zeros(1, 1, h);
  adamax_step(theta, g, st);
  const bool hand = theta(0, 0) == 0.998 && st.step == 1;

  Rng rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  const Index rows = 4, cols = 3;
  Matrix<double> p = oracle::random_matrix(rng, rows, cols);
  std::vector<double> ref(p.data(), p.data() + p.size());
  auto state = AdamaxState<double>::zeros(rows, cols);
  oracle::ReferenceAdamax reference;
  double worst = 0;
  for (int step = 0; step < 1000; ++step) {
    Matrix<double> grad = oracle::random_matrix(rng, rows, cols, std::exp(n(rng)));
    if (step % 7 == 0) grad(step % rows, step % cols) = 0.0;
    adamax_step(p, grad, state);
    reference.step(ref, std::vector<double>(grad.data(), grad.data() + grad.size()));
    for (Index i = 0; i < p.size(); ++i)
      worst = std::max(worst, std::fabs(p.data()[i] - ref[static_cast<std::size_t>(i)]) /
                                  std::max(std::fabs(ref[static_cast<std::size_t>(i)]), 1e-300));
  }
  return {hand && worst <= 1e-12, std::string("hand example theta=") + fmt(theta(0, 0)) + (hand ? " (exact)" : "") +
                                      "; 1000 random steps max rel err " + fmt(worst) + " (<= 1e-12)"};
}

// ---- 3

struct SmallWorld {
  csi::Split split;
  std::shared_ptr<const loc::LocalizerModel> model;
};

SmallWorld small_world() {
  csi::Dataset data = csi::generate_dataset(csi::Scene::default_scene(), 600, 5);
  SmallWorld w{csi::split_dataset(data, 0.8, 6), nullptr};
  loc::LocalizerConfig lc;
  lc.hidden = {32, 16};
  lc.epochs = 3;
  lc.seed = 9;
  w.model = std::make_shared<const loc::LocalizerModel>(loc::train_localizer(w.split.train, lc));
  return w;
}

bool same_report(const loc::ErrorReport& a, const loc::ErrorReport& b) {
  if (a.errors != b.errors || a.mean != b.mean || a.p50 != b.p50 || a.p90 != b.p90 || a.cdf != b.cdf) return false;
  if (a.predictions.size() != b.predictions.size()) return false;
  for (std::size_t i = 0; i < a.predictions.size(); ++i)
    if (a.predictions[i].x != b.predictions[i].x || a.predictions[i].y != b.predictions[i].y) return false;
  return true;
}

Outcome identity_pipeline(const SmallWorld& w) {
  const auto& test = w.split.test;
  const loc::ErrorReport direct = loc::evaluate(loc::model_estimator(*w.model), test);

  // hand-driven simulation so every hop path can be inspected
  sim::Simulation s(sim::build_topology(), {});
  const auto& topo = s.topology();
  const auto engine = topo.require(NodeKind::SEMANTIC_ENGINE);
  const auto pair = codec::CodecPair::identity();
  auto bytes = [](const codec::HalfCodec& c) { return codec::to_container(c).serialize(); };
  const auto amp = s.registry().publish("amp", sim::ModelKind::codec_amplitude, bytes(pair.amplitude));
  const auto ph = s.registry().publish("ph", sim::ModelKind::codec_phase, bytes(pair.phase));
  const auto lm = s.registry().publish("loc", sim::ModelKind::localizer, loc::to_container(*w.model).serialize());
  for (auto k : {NodeKind::UE_EDGE, NodeKind::CU_SP}) {
    s.deploy_model(engine, topo.require(k), amp, pair.amplitude);
    s.deploy_model(engine, topo.require(k), ph, pair.phase);
  }
  s.deploy_model(engine, topo.require(NodeKind::NEAR_RT_RIC), lm, w.model);
  s.run(1'000'000'000);
  std::vector<std::uint64_t> corr;
  for (Index i = 0; i < test.size(); ++i)
    corr.push_back(s.inject_localization_request(topo.require(NodeKind::UE_EDGE), test.features.col(i),
                                                 static_cast<std::uint64_t>(i), s.now() + 1000 * (i + 1)));
  s.run(std::numeric_limits<sim::SimTime>::max());

  const std::vector<NodeId> expected_path = {
      topo.require(NodeKind::UE_EDGE), topo.require(NodeKind::O_RU),  topo.require(NodeKind::O_DU),
      topo.require(NodeKind::CU_SP),   topo.require(NodeKind::S_RIC), topo.require(NodeKind::NEAR_RT_RIC)};
  bool paths = true;
  std::vector<double> errors;
  std::vector<loc::Point> predictions;
  for (Index i = 0; i < test.size(); ++i) {
    auto it = s.results().find(corr[static_cast<std::size_t>(i)]);
    if (it == s.results().end()) return {false, "request " + std::to_string(i) + " produced no LOC_RESULT"};
    paths = paths && it->second.hop_path == expected_path;
    errors.push_back(loc::position_error(it->second.position, test.label(i)));
    predictions.push_back(it->second.position);
  }
  loc::ErrorReport simulated = loc::ErrorReport::from_errors(errors);
  simulated.predictions = predictions;

  const auto scenario = harness::run_scenario(pair, w.model, test, {}, false);
  g_reports.insert(g_reports.end(), {direct, simulated, scenario.report});
  const bool identical = same_report(direct, simulated) && same_report(direct, scenario.report);
  return {identical && paths, std::to_string(test.size()) + " requests; report bit-identical: " +
                                  (identical ? "yes" : "no") + "; hop_path UE,O_RU,O_DU,CU_SP,S_RIC,NEAR_RT_RIC: " +
                                  (paths ? "yes" : "no") + "; mean " + fmt(direct.mean) + " m"};
}

// ---- 4

std::uint64_t uplink_bytes_for(const codec::CodecPair& pair, const SmallWorld& w) {
  const auto r = harness::run_scenario(pair, w.model, w.split.test, {}, false, 1);
  return r.uplink_bytes;
}

Outcome bandwidth(const SmallWorld& w) {
  codec::VaeConfig vc;
  vc.bottleneck = 270;
  vc.hidden = {16};
  const auto& tr = w.split.train.features;
  auto a = codec::init_vae(tr.topRows(csi::kHalfCount), codec::DataKind::amplitude, vc);
  auto p = codec::init_vae(tr.bottomRows(csi::kHalfCount), codec::DataKind::phase, vc);
  const auto pair = codec::CodecPair::from_models(std::move(a), std::move(p));
  const std::uint64_t semantic = uplink_bytes_for(pair, w);
  const std::uint64_t raw = uplink_bytes_for(codec::CodecPair::identity(), w);
  return {semantic == 2160 && raw == 54000,
          "UE->O_RU bytes per request: b=270 " + std::to_string(semantic) + " (expect 2160), raw " +
              std::to_string(raw) + " (expect 54000)"};
}

// ---- 8

Outcome lifecycle() {
  Rng rng(808);
  // a tiny localizer stands in; only version bookkeeping is under test here
  Matrix<float> feats = oracle::random_matrix(rng, csi::kFeatureCount, 3).cast<float>();
  loc::LocalizerConfig lc;
  lc.hidden = {2};
  auto model = std::make_shared<const loc::LocalizerModel>(loc::init_localizer(feats, 10, 8, lc));
  const Vector<float> x = feats.col(0);

  std::uint64_t decodes = 0, failures = 0, results = 0, stale_rejected = 0, violations = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    sim::Simulation s(sim::build_topology(), {});
    const auto& topo = s.topology();
    const auto engine = topo.require(NodeKind::SEMANTIC_ENGINE);
    const NodeId holders[2] = {topo.require(NodeKind::UE_EDGE), topo.require(NodeKind::CU_SP)};
    const sim::ModelKind kinds[2] = {sim::ModelKind::codec_amplitude, sim::ModelKind::codec_phase};
    const char* ids[2] = {"amp", "ph"};
    const auto lm = s.registry().publish("loc", sim::ModelKind::localizer, loc::to_container(*model).serialize());
    s.deploy_model(engine, topo.require(NodeKind::NEAR_RT_RIC), lm, model);

    std::vector<sim::ModelRegistryEntry> published[2];
    std::map<std::pair<NodeId, int>, std::uint64_t> sent;  // highest version sent per (node, half)
    const int ops = 4 + static_cast<int>(rng() % 12);
    sim::SimTime t = 0;
    for (int op = 0; op < ops; ++op) {
      t += static_cast<sim::SimTime>(rng() % 200'000);
      const int half = static_cast<int>(rng() % 2);
      switch (rng() % 4) {
        case 0: {  // publish the next version
          codec::IdentityCodec c;
          c.version = s.registry().latest(ids[half]).value_or(0) + 1 + rng() % 2;
          const auto bytes = codec::to_container(codec::HalfCodec{c}).serialize();
          published[half].push_back(s.registry().publish(ids[half], kinds[half], c.version, bytes));
          break;
        }
        case 1:
        case 2: {  // deploy some published version somewhere
          if (published[half].empty()) break;
          const auto& e = published[half][rng() % published[half].size()];
          const NodeId target = holders[rng() % 2];
          codec::IdentityCodec c;
          c.version = e.version;
          const bool fresh = e.version > sent[{target, half}];
          const std::size_t before = s.trace().events.size();
          try {
            s.deploy_model(engine, target, e, codec::HalfCodec{c}, std::max(t, s.now()));
            if (!fresh) ++violations;
            sent[{target, half}] = e.version;
          } catch (const sim::VersionError&) {
            ++stale_rejected;
            if (fresh || s.trace().events.size() != before) ++violations;
          }
          break;
        }
        default:
          s.inject_localization_request(holders[0], x, static_cast<std::uint64_t>(op), std::max(t, s.now()));
      }
      if (rng() % 3 == 0) s.run(t);
    }
    const auto& trace = s.run(std::numeric_limits<sim::SimTime>::max());

    // every decode must match the encoder versions of its own request
    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> enc;
    std::set<std::uint64_t> decoded;
    for (const auto& e : trace.events) {
      if (e.event == "encode") {
        enc[e.correlation_id] = {e.detail.at("amplitude_version").get<std::uint64_t>(),
                                 e.detail.at("phase_version").get<std::uint64_t>()};
      } else if (e.event == "decode") {
        ++decodes;
        const auto it = enc.find(e.correlation_id);
        if (it == enc.end() || it->second.first != e.detail.at("amplitude_version").get<std::uint64_t>() ||
            it->second.second != e.detail.at("phase_version").get<std::uint64_t>() ||
            topo.node(e.node).kind != NodeKind::CU_SP)
          ++violations;
        decoded.insert(e.correlation_id);
      } else if (e.event == "SEMANTIC_DECODE_FAILURE") {
        ++failures;
        const auto it = enc.find(e.correlation_id);
        if (it == enc.end() || (it->second.first == e.detail.at("decoder_amplitude_version").get<std::uint64_t>() &&
                                it->second.second == e.detail.at("decoder_phase_version").get<std::uint64_t>()))
          ++violations;
      } else if (e.event == "LOC_RESULT") {
        ++results;
        if (!decoded.count(e.correlation_id)) ++violations;
      }
    }
    for (const auto& [id, list] : s.registry().entries())
      for (std::size_t i = 1; i < list.size(); ++i)
        if (list[i].version <= list[i - 1].version) ++violations;
    // a non-increasing explicit version is refused
    try {
      s.registry().publish("loc", sim::ModelKind::localizer, 1, std::vector<std::uint8_t>{1});
      ++violations;
    } catch (const sim::VersionError&) {
    }
  }
  return {violations == 0 && decodes > 0 && failures > 0,
          "1000 sequences: " + std::to_string(decodes) + " decodes, " + std::to_string(failures) +
              " mismatches refused, " + std::to_string(results) + " results, " + std::to_string(stale_rejected) +
              " stale deploys rejected, " + std::to_string(violations) + " violations"};
}

// ---- 9

template <typename Load>
int rejects_truncations(const std::vector<std::uint8_t>& bytes, int count, Rng& rng, Load load) {
  int rejected = 0;
  for (int i = 0; i < count; ++i) {
    const std::size_t len = rng() % bytes.size();
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
    try {
      load(io::Container::parse(cut));
    } catch (const io::FormatError&) {
      ++rejected;
    }
  }
  return rejected;
}

Outcome serialization(const SmallWorld& w) {
  const fs::path dir = fs::temp_directory_path() / "semoran_acceptance_io";
  fs::create_directories(dir);
  bool exact = true;

  const csi::Dataset ds = w.split.test;
  csi::save_dataset(ds, dir / "data.bin");
  const csi::Dataset back = csi::load_dataset(dir / "data.bin");
  exact = exact && back.features == ds.features && back.labels == ds.labels && back.origin == ds.origin &&
          back.scene == ds.scene && back.seed == ds.seed && csi::content_hash(back) == csi::content_hash(ds);

  codec::VaeConfig vc;
  vc.bottleneck = 25;
  vc.hidden = {8};
  vc.epochs = 1;
  const auto vae = codec::train_vae(w.split.train, codec::DataKind::amplitude, vc);
  codec::save_vae(vae, dir / "vae.ckpt");
  const auto vae_back = codec::load_vae(dir / "vae.ckpt");
  exact = exact && vae_back.encoder == vae.encoder && vae_back.decoder == vae.decoder &&
          vae_back.norm_offset == vae.norm_offset && vae_back.norm_scale == vae.norm_scale &&
          vae_back.meta.loss_history == vae.meta.loss_history;

  loc::save_localizer(*w.model, dir / "loc.ckpt");
  const auto loc_back = loc::load_localizer(dir / "loc.ckpt");
  exact = exact && loc_back.net == w.model->net && loc_back.feature_mean == w.model->feature_mean &&
          loc_back.feature_inv_std == w.model->feature_inv_std;
  for (Index i = 0; i < std::min<Index>(ds.size(), 20); ++i) {
    const auto a = loc::predict(*w.model, ds.features.col(i)), b = loc::predict(loc_back, ds.features.col(i));
    exact = exact && a.x == b.x && a.y == b.y;
  }

  Rng rng(909);
  int rejected = 0;
  rejected += rejects_truncations(io::read_file(dir / "data.bin"), 334, rng,
                                  [](const io::Container& c) { csi::from_container(c); });
  rejected += rejects_truncations(io::read_file(dir / "vae.ckpt"), 333, rng,
                                  [](const io::Container& c) { codec::vae_from_container(c); });
  rejected += rejects_truncations(io::read_file(dir / "loc.ckpt"), 333, rng,
                                  [](const io::Container& c) { loc::localizer_from_container(c); });

  // header corruptions carry specific codes
  auto bytes = io::read_file(dir / "vae.ckpt");
  int coded = 0;
  auto expect = [&](std::vector<std::uint8_t> b, io::FormatErrc code) {
    try {
      codec::vae_from_container(io::Container::parse(b));
    } catch (const io::FormatError& e) {
      coded += e.code() == code;
    }
  };
  auto bad_magic = bytes;
  bad_magic[0] ^= 0xFF;
  expect(bad_magic, io::FormatErrc::bad_magic);
  auto bad_version = bytes;
  bad_version[8] = 9;
  expect(bad_version, io::FormatErrc::unsupported_version);
  fs::remove_all(dir);
  return {exact && rejected == 1000 && coded == 2,
          std::string("round-trips bit-exact: ") + (exact ? "yes" : "no") + "; truncations rejected " +
              std::to_string(rejected) + "/1000; header corruptions with codes " + std::to_string(coded) + "/2"};
}

// ---- 5, 6, 7

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  const std::string& at(std::size_t r, const std::string& col) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == col) return rows.at(r).at(c);
    throw std::runtime_error("missing column " + col);
  }
};

CsvTable read_csv(const fs::path& p) {
  CsvTable t;
  std::istringstream in(harness::csv_body(read_text(p)));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (t.header.empty()) t.header = cells;
    else t.rows.push_back(cells);
  }
  return t;
}

int run_cli(const fs::path& cli, const fs::path& config, const fs::path& out) {
  const std::string cmd = "\"" + cli.string() + "\" sweep --config \"" + config.string() + "\" --out \"" +
                          out.string() + "\" > \"" + (out.string() + ".stdout") + "\" 2> \"" +
                          (out.string() + ".log") + "\"";
  fs::create_directories(out.parent_path());
  return std::system(cmd.c_str());
}

Outcome tradeoff(const fs::path& dir) {
  const CsvTable t = read_csv(dir / "sweep.csv");
  double raw = -1, best = 1e300, at25 = -1;
  std::string best_b;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string b = t.at(r, "bottleneck");
    const double mean = std::stod(t.at(r, "mean_error_m"));
    if (b == "raw") raw = mean;
    else {
      if (mean < best) best = mean, best_b = b;
      if (b == "25") at25 = mean;
    }
  }
  const bool a = raw > 0 && best <= 1.3 * raw;
  const bool b = at25 > best;
  return {a && b, "raw " + fmt(raw) + " m; best b=" + best_b + " " + fmt(best) + " m (ratio " + fmt(best / raw) +
                      ", limit 1.3): " + (a ? "ok" : "FAIL") + "; b=25 " + fmt(at25) + " m > best: " +
                      (b ? "ok" : "FAIL")};
}

Outcome noise(const fs::path& dir) {
  const CsvTable t = read_csv(dir / "snr.csv");
  std::map<std::string, double> mean;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.at(r, "bottleneck") == "270") mean[t.at(r, "snr_db")] = std::stod(t.at(r, "mean_error_m"));
  const std::vector<std::string> order{"0", "10", "20", "off"};
  std::string detail;
  bool ok = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!mean.count(order[i])) return {false, "snr.csv lacks a row for snr " + order[i]};
    detail += (i ? " -> " : "") + order[i] + ": " + fmt(mean[order[i]]);
    if (i && mean[order[i]] > mean[order[i - 1]] * 1.05) ok = false;
  }
  return {ok, "b=270 mean error over 3 seeds " + detail + " m (5% slack per step)"};
}

std::vector<std::string> digests(const fs::path& summary) {
  std::vector<std::string> out;
  std::istringstream in(read_text(summary));
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("trace_digests"))
      for (const auto& d : j["trace_digests"]) out.push_back(d.get<std::string>());
  }
  return out;
}

Outcome determinism(const fs::path& a, const fs::path& b) {
  const bool csv = harness::csv_body(read_text(a / "sweep.csv")) == harness::csv_body(read_text(b / "sweep.csv")) &&
                   harness::csv_body(read_text(a / "snr.csv")) == harness::csv_body(read_text(b / "snr.csv"));
  const auto da = digests(a / "summary.jsonl"), db = digests(b / "summary.jsonl");
  const bool dig = !da.empty() && da == db && read_text(a / "trace.jsonl") == read_text(b / "trace.jsonl");
  return {csv && dig, std::string("sweep.csv/snr.csv bodies identical: ") + (csv ? "yes" : "no") + "; " +
                          std::to_string(da.size()) + " trace digests identical: " + (dig ? "yes" : "no")};
}

// ---- 10

Outcome cdfs(const std::vector<fs::path>& dirs) {
  int checked = 0, bad = 0;
  for (const auto& r : g_reports) {
    ++checked;
    bad += !r.cdf_valid();
  }
  for (const auto& d : dirs) {
    if (!fs::exists(d)) continue;
    for (const auto& e : fs::directory_iterator(d)) {
      const std::string n = e.path().filename().string();
      if (!n.starts_with("cdf_")) continue;
      ++checked;
      bad += !harness::cdf_valid(harness::read_cdf_csv(e.path()));
    }
  }
  return {checked > 0 && bad == 0, std::to_string(checked) + " CDFs checked, " + std::to_string(bad) + " invalid"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::cerr << "usage: acceptance <cli> <config> <work dir>\n";
    return 2;
  }
  const fs::path cli = argv[1], config = argv[2], work = argv[3];
  int failed = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << n << "] " << name << ": " << o.detail << " (" << fmt(secs)
              << " s)" << std::endl;
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "optimizer oracle", optimizer_oracle);
  const SmallWorld world = small_world();
  report(3, "identity pipeline", [&] { return identity_pipeline(world); });
  report(4, "bandwidth", [&] { return bandwidth(world); });

  const fs::path run_a = work / "sweep_a", run_b = work / "sweep_b";
  fs::remove_all(run_a);
  fs::remove_all(run_b);
  const int rc_a = run_cli(cli, config, run_a);
  auto sweep_ok = [&](int rc, const fs::path& d) {
    if (rc != 0) throw std::runtime_error("sweep exited with status " + std::to_string(rc) + ", see " + d.string() + ".log");
  };
  report(5, "scaled tradeoff", [&] {
    sweep_ok(rc_a, run_a);
    return tradeoff(run_a);
  });
  report(6, "noise resilience", [&] {
    sweep_ok(rc_a, run_a);
    return noise(run_a);
  });
  const int rc_b = run_cli(cli, config, run_b);
  report(7, "determinism", [&] {
    sweep_ok(rc_a, run_a);
    sweep_ok(rc_b, run_b);
    return determinism(run_a, run_b);
  });
  report(8, "lifecycle safety", lifecycle);
  report(9, "serialization", [&] { return serialization(world); });
  report(10, "CDF validity", [&] { return cdfs({run_a, run_b}); });

  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
