#include "semoran/harness/cli.hpp"
#include "semoran/harness/report.hpp"
#include "semoran/io/container.hpp"
#include "semoran/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>

namespace semoran::harness {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* format_code_name(io::FormatErrc c) {
  switch (c) {
    case io::FormatErrc::io: return "io";
    case io::FormatErrc::bad_magic: return "bad_magic";
    case io::FormatErrc::unsupported_version: return "unsupported_version";
    case io::FormatErrc::truncated: return "truncated";
    case io::FormatErrc::malformed: return "malformed";
    case io::FormatErrc::missing_entry: return "missing_entry";
    case io::FormatErrc::duplicate_entry: return "duplicate_entry";
  }
  return "unknown";
}

/// Declared outputs of one command; checked after everything is written.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    io::write_text_atomic(p, text);
    files_.push_back(p);
    return p;
  }
  fs::path add(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }
  const fs::path& dir() const { return dir_; }

  void validate() const {
    for (const auto& p : files_) {
      if (!fs::exists(p) || fs::file_size(p) == 0) throw OutputError("output missing or empty: " + p.string());
      const std::string name = p.filename().string();
      if (name.starts_with("cdf_") && !cdf_valid(read_cdf_csv(p)))
        throw OutputError("invalid CDF in " + p.string());
      if (p.extension() == ".jsonl") {
        std::ifstream in(p);
        std::string line;
        while (std::getline(in, line))
          if (!ordered_json::accept(line)) throw OutputError("malformed JSON line in " + p.string());
      }
    }
  }
  ordered_json list() const {
    ordered_json a = ordered_json::array();
    for (const auto& p : files_) a.push_back(p.filename().string());
    return a;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

ordered_json report_json(const loc::ErrorReport& r) {
  return {{"samples", r.errors.size()}, {"mean_error_m", r.mean}, {"p50_m", r.p50}, {"p90_m", r.p90}};
}

csi::Split load_split(const RunConfig& cfg, std::ostream& log) {
  const csi::Dataset data = load_or_generate(cfg);
  log << (cfg.dataset.empty() ? "generated " : "loaded ") << data.size() << " samples\n";
  return split(cfg, data);
}

codec::CodecPair load_pair(const RunConfig& cfg) {
  if (cfg.codec_amplitude.empty() != cfg.codec_phase.empty())
    throw InputError("codec.amplitude and codec.phase must be given together");
  if (cfg.codec_amplitude.empty()) return codec::CodecPair::identity();
  codec::CodecPair pair{codec::load_half_codec(cfg.codec_amplitude), codec::load_half_codec(cfg.codec_phase)};
  pair.validate();
  return pair;
}

ordered_json cmd_gen_data(const RunConfig& cfg, Outputs& out, std::ostream& log) {
  RunConfig gen = cfg;
  gen.dataset.clear();
  const csi::Dataset data = load_or_generate(gen);
  const fs::path p = out.add("dataset.bin");
  csi::save_dataset(data, p);
  const csi::Dataset back = csi::load_dataset(p);
  if (csi::content_hash(back) != csi::content_hash(data)) throw OutputError("dataset did not round-trip");
  log << "wrote " << data.size() << " samples to " << p.string() << '\n';
  return {{"samples", data.size()}, {"content_hash", csi::content_hash(data)}};
}

ordered_json cmd_train_codec(const RunConfig& cfg, Outputs& out, std::ostream& log) {
  const csi::Split sp = load_split(cfg, log);
  const codec::CodecPair pair = train_codec_pair(cfg, sp.train, cfg.bottleneck, cfg.repetition_seed(0));
  ordered_json info{{"bottleneck", cfg.bottleneck}, {"remaining_ratio", codec::remaining_ratio(pair)}};
  for (auto [half, name] : {std::pair{&pair.amplitude, "codec_amplitude"}, std::pair{&pair.phase, "codec_phase"}}) {
    const fs::path p = out.add(std::string(name) + ".ckpt");
    codec::save_half_codec(*half, p);
    const auto& m = *std::get<std::shared_ptr<const codec::VaeModel>>(*half);
    if (!(codec::to_container(codec::load_half_codec(p)).serialize() == codec::to_container(*half).serialize()))
      throw OutputError("checkpoint did not round-trip: " + p.string());
    info[name] = {{"final_loss", m.meta.loss_history.back()},
                  {"reconstruction", m.meta.reconstruction_history.back()},
                  {"kl", m.meta.kl_history.back()}};
    log << name << ": loss " << m.meta.loss_history.back() << '\n';
  }
  return info;
}

ordered_json cmd_train_localizer(const RunConfig& cfg, Outputs& out, std::ostream& log) {
  const csi::Split sp = load_split(cfg, log);
  const codec::CodecPair pair = load_pair(cfg);
  const bool raw = cfg.codec_amplitude.empty();
  const loc::LocalizerModel model = train_localizer_on(cfg, sp.train, raw ? nullptr : &pair, cfg.repetition_seed(0));
  const fs::path p = out.add("localizer.ckpt");
  loc::save_localizer(model, p);
  if (!(loc::to_container(loc::load_localizer(p)).serialize() == loc::to_container(model).serialize()))
    throw OutputError("checkpoint did not round-trip: " + p.string());
  log << "localizer: loss " << model.meta.loss_history.back() << '\n';
  return {{"inputs", raw ? "raw" : "reconstructed"}, {"final_loss", model.meta.loss_history.back()}};
}

std::string snr_name(const std::optional<double>& snr) {
  std::string s = format_snr(snr);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

ordered_json cmd_simulate(const RunConfig& cfg, Outputs& out, std::ostream& log) {
  if (cfg.localizer.empty()) throw InputError("simulate needs a localizer checkpoint (localizer = <path>)");
  const csi::Split sp = load_split(cfg, log);
  const codec::CodecPair pair = load_pair(cfg);
  auto model = std::make_shared<const loc::LocalizerModel>(loc::load_localizer(cfg.localizer));
  ordered_json runs = ordered_json::array();
  std::string summary = config_json_line(cfg, "simulate");
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const auto& snr = cfg.snr_db[i];
    const codec::ChannelConfig ch{snr, derive_seed(cfg.repetition_seed(0), stream::channel)};
    const bool first = i == 0;
    const ScenarioResult r =
        run_scenario(pair, model, sp.test, ch, cfg.enhanced_odu, cfg.requests, first && cfg.write_trace);
    if (r.failures) throw OutputError(std::to_string(r.failures) + " localization requests failed");
    const std::string name = cfg.snr_db.size() == 1 ? "simulate" : "simulate_snr_" + snr_name(snr);
    if (first && cfg.write_trace) out.write("trace.jsonl", r.trace_jsonl);
    out.write("cdf_" + name + ".csv", cdf_csv(r.report));
    out.write("errors_" + name + ".csv", errors_csv(r.report));
    ordered_json j{{"type", "simulate"}, {"name", name}, {"snr_db", format_snr(snr)}};
    j.update(report_json(r.report));
    j["requests"] = r.requests;
    j["bytes_on_air"] = r.uplink_bytes / std::max<std::uint64_t>(r.requests, 1);
    j["total_bytes"] = r.total_bytes;
    j["trace_digest"] = r.trace_digest;
    summary += j.dump() + '\n';
    runs.push_back(j);
    log << name << ": mean " << r.report.mean << " m over " << r.requests << " requests\n";
  }
  out.write("summary.jsonl", summary);
  return {{"runs", runs}};
}

ordered_json cmd_sweep(const RunConfig& cfg, Outputs& out, std::ostream& log) {
  const SweepReport rep = run_sweep(cfg, [&](const std::string& m) { log << m << std::endl; });
  const std::string stamp = utc_timestamp();
  out.write("sweep.csv", sweep_csv(rep, cfg, stamp));
  out.write("snr.csv", snr_csv(rep, stamp));
  if (cfg.write_trace) out.write("trace.jsonl", rep.trace_jsonl);
  out.write("cdf_baseline.csv", cdf_csv(rep.baseline().pooled));
  out.write("errors_baseline.csv", errors_csv(rep.baseline().pooled));
  out.write("cdf_best.csv", cdf_csv(rep.best().pooled));
  out.write("errors_best.csv", errors_csv(rep.best().pooled));
  for (const auto& r : rep.snr_rows) {
    const std::string name = "snr_" + snr_name(r.snr_db);
    out.write("cdf_" + name + ".csv", cdf_csv(r.pooled));
    out.write("errors_" + name + ".csv", errors_csv(r.pooled));
  }
  out.write("summary.jsonl", sweep_summary_jsonl(rep, cfg));
  return {{"rows", rep.rows.size()},
          {"best_bottleneck", rep.best().bottleneck},
          {"best_mean_error_m", rep.best().mean},
          {"baseline_mean_error_m", rep.baseline().mean}};
}

ordered_json cmd_report(const RunConfig& cfg, const std::vector<std::string>& inputs, Outputs& out,
                        std::ostream& log) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string n = e.path().filename().string();
        if (n.starts_with("errors_") && e.path().extension() == ".csv") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw InputError("report input does not exist: " + in);
    }
  }
  if (files.empty()) throw InputError("report found no errors_<name>.csv inputs");
  std::string summary = config_json_line(cfg, "report");
  ordered_json names = ordered_json::array();
  for (const auto& f : files) {
    std::string name = f.stem().string();
    if (name.starts_with("errors_")) name.erase(0, 7);
    const loc::ErrorReport r = read_errors_csv(f);
    out.write("cdf_" + name + ".csv", cdf_csv(r));
    ordered_json j{{"type", "report"}, {"name", name}, {"source", f.string()}};
    j.update(report_json(r));
    summary += j.dump() + '\n';
    names.push_back(name);
    log << name << ": mean " << r.mean << " m, p90 " << r.p90 << " m\n";
  }
  out.write("summary.jsonl", summary);
  return {{"reports", names}};
}

void emit_error(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message) {
  ordered_json j{{"status", "error"}, {"command", command}, {"error", kind}, {"message", message}};
  err << j.dump() << std::endl;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::ostream& log) {
  CLI::App app{"Semantic localization over a simulated Open RAN"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = ".", snr_text, bottleneck_text, dataset_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides, inputs;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "root seed");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--snr-db", snr_text, "comma separated SNR list in dB, 'off' disables the channel");
  app.add_option("--bottlenecks", bottleneck_text, "comma separated bottleneck sizes");
  app.add_option("--dataset", dataset_path, "dataset file from gen-data");
  app.add_option("--set", overrides, "extra key=value overrides")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  app.add_subcommand("gen-data", "generate a synthetic CSI dataset");
  app.add_subcommand("train-codec", "train the amplitude and phase VAEs");
  app.add_subcommand("train-localizer", "train the position regressor");
  app.add_subcommand("simulate", "localize the test split through the simulated network");
  app.add_subcommand("sweep", "bottleneck sweep with a raw baseline and an SNR sweep");
  auto* report = app.add_subcommand("report", "CDF and summary files from errors_<name>.csv inputs");
  report->add_option("inputs", inputs, "errors CSV files or directories")->required();

  std::string command = "?";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, command, "usage", e.what());
    return kExitUsage;
  }
  command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (!snr_text.empty()) cfg.snr_db = parse_snr_list(snr_text);
    if (!bottleneck_text.empty()) cfg.bottlenecks = parse_index_list(bottleneck_text);
    if (!dataset_path.empty()) cfg.dataset = dataset_path;
    cfg.validate();
  } catch (const ConfigError& e) {
    emit_error(err, command, "config", e.what());
    return kExitUsage;
  }

  try {
    Outputs outputs(out_dir);
    log << config_json_line(cfg, command);
    ordered_json info;
    if (command == "gen-data") info = cmd_gen_data(cfg, outputs, log);
    else if (command == "train-codec") info = cmd_train_codec(cfg, outputs, log);
    else if (command == "train-localizer") info = cmd_train_localizer(cfg, outputs, log);
    else if (command == "simulate") info = cmd_simulate(cfg, outputs, log);
    else if (command == "sweep") info = cmd_sweep(cfg, outputs, log);
    else info = cmd_report(cfg, inputs, outputs, log);
    outputs.validate();
    ordered_json line{{"status", "ok"}, {"command", command}, {"out", outputs.dir().string()},
                      {"outputs", outputs.list()}};
    line.update(info);
    out << line.dump() << std::endl;
    return kExitOk;
  } catch (const ConfigError& e) {
    emit_error(err, command, "config", e.what());
    return kExitUsage;
  } catch (const io::FormatError& e) {
    emit_error(err, command, std::string("format.") + format_code_name(e.code()), e.what());
    return kExitInput;
  } catch (const InputError& e) {
    emit_error(err, command, "input", e.what());
    return kExitInput;
  } catch (const ShapeError& e) {
    emit_error(err, command, "shape", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    emit_error(err, command, "io", e.what());
    return kExitInput;
  } catch (const OutputError& e) {
    emit_error(err, command, "output", e.what());
    return kExitFailed;
  } catch (const NumericError& e) {
    emit_error(err, command, "numeric", e.what());
    return kExitFailed;
  } catch (const std::exception& e) {
    emit_error(err, command, "failed", e.what());
    return kExitFailed;
  }
}

}  // namespace semoran::harness
