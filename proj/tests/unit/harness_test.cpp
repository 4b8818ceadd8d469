#include "doctest.h"

#include "semoran/harness/cli.hpp"
#include "semoran/harness/config.hpp"
#include "semoran/harness/report.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

using namespace semoran;
using namespace semoran::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semoran_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyConfig = R"(# small enough for a unit test
seed = 4
samples = 200
train_fraction = 0.8
bottlenecks = 25
seeds = 1
snr_db = off
snr_bottleneck = 25
vae.hidden = 8
vae.epochs = 1
loc.hidden = 8
loc.epochs = 2
)";

struct Cli {
  int code = -1;
  std::string out, err, log;
};

Cli run(std::vector<std::string> args) {
  args.insert(args.begin(), "semoran");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err, log;
  Cli r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, log);
  r.out = out.str();
  r.err = err.str();
  r.log = log.str();
  return r;
}

}  // namespace

TEST_CASE("config keys, lists and validation") {
  RunConfig c;
  c.set("bottlenecks", "25, 100,500");
  CHECK(c.bottlenecks == std::vector<Index>{25, 100, 500});
  c.set("snr_db", "0,10.5,off");
  REQUIRE(c.snr_db.size() == 3);
  CHECK(c.snr_db[1] == 10.5);
  CHECK_FALSE(c.snr_db[2].has_value());
  CHECK(format_snr(std::nullopt) == "off");
  c.set("vae.beta", "0.25");
  CHECK(c.vae_beta == 0.25f);
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("seeds", "three"), ConfigError);
  CHECK_THROWS_AS(parse_index_list("1,,2"), ConfigError);
  c.set("bottlenecks", "600");
  CHECK_THROWS_AS(c.validate(), ConfigError);

  // entries() reads back through set()
  RunConfig d;
  d.set("loc.lr", "0.0003");
  d.set("snr_db", "5,off");
  RunConfig e;
  for (const auto& [k, v] : d.entries()) e.set(k, v);
  CHECK(e.entries() == d.entries());
  CHECK(d.repetition_seed(0) != d.repetition_seed(1));
}

TEST_CASE("config files report the failing line") {
  const auto dir = scratch("cfgfile");
  write(dir / "ok.conf", "# comment\nseed = 9   # trailing\n\nbottlenecks = 50\n");
  RunConfig c;
  c.load_file(dir / "ok.conf");
  CHECK(c.seed == 9);
  CHECK(c.bottlenecks == std::vector<Index>{50});
  write(dir / "bad.conf", "seed = 1\nwhat\n");
  try {
    RunConfig().load_file(dir / "bad.conf");
    FAIL("accepted a malformed line");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(RunConfig().load_file(dir / "missing.conf"), ConfigError);
}

TEST_CASE("cli exit codes and structured errors") {
  const auto dir = scratch("codes");
  auto r = run({"frobnicate"});
  CHECK(r.code == kExitUsage);
  r = run({"sweep", "--set", "bogus=1", "--out", dir.string()});
  CHECK(r.code == kExitUsage);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err.at("status") == "error");
  CHECK(err.at("command") == "sweep");
  CHECK(err.at("error") == "config");
  r = run({"simulate", "--set", "samples=20", "--out", dir.string()});
  CHECK(r.code == kExitInput);
  r = run({"simulate", "--set", "localizer=" + (dir / "nothing.ckpt").string(), "--out", dir.string()});
  CHECK(r.code == kExitInput);
  r = run({"report", (dir / "no_such_dir").string(), "--out", dir.string()});
  CHECK(r.code == kExitInput);
}

TEST_CASE("named flags override --set, which overrides the file") {
  const auto dir = scratch("precedence");
  write(dir / "c.conf", "seed = 2\nsamples = 30\ntrain_fraction = 0.5\n");
  const auto r = run({"gen-data", "--config", (dir / "c.conf").string(), "--set", "seed=3", "--set", "samples=40",
                      "--seed", "5", "--out", (dir / "o").string()});
  REQUIRE(r.code == kExitOk);
  const auto status = nlohmann::json::parse(r.out);
  CHECK(status.at("samples") == 40);
  const auto ds = csi::load_dataset(dir / "o" / "dataset.bin");
  CHECK(ds.seed == 5);
  CHECK(ds.size() == 40);
}

TEST_CASE("simulate through the network reproduces the sweep baseline") {
  const auto dir = scratch("pipeline");
  write(dir / "tiny.conf", kTinyConfig);
  const std::string conf = (dir / "tiny.conf").string();

  REQUIRE(run({"gen-data", "--config", conf, "--out", (dir / "data").string()}).code == kExitOk);
  const std::string data = (dir / "data" / "dataset.bin").string();
  REQUIRE(run({"train-localizer", "--config", conf, "--dataset", data, "--out", (dir / "loc").string()}).code ==
          kExitOk);
  const auto sim = run({"simulate", "--config", conf, "--dataset", data, "--set",
                        "localizer=" + (dir / "loc" / "localizer.ckpt").string(), "--out", (dir / "sim").string()});
  REQUIRE(sim.code == kExitOk);
  const auto sweep = run({"sweep", "--config", conf, "--out", (dir / "sweep").string()});
  REQUIRE(sweep.code == kExitOk);

  const auto sim_errors = read_errors_csv(dir / "sim" / "errors_simulate.csv").errors;
  const auto base_errors = read_errors_csv(dir / "sweep" / "errors_baseline.csv").errors;
  CHECK(sim_errors.size() == 40);
  CHECK(sim_errors == base_errors);
  CHECK(fs::exists(dir / "sim" / "trace.jsonl"));
  CHECK(fs::exists(dir / "sweep" / "sweep.csv"));

  // report rebuilds the CDF that the sweep wrote
  const auto rep = run({"report", (dir / "sweep" / "errors_baseline.csv").string(), "--out", (dir / "rep").string()});
  REQUIRE(rep.code == kExitOk);
  CHECK(slurp(dir / "rep" / "cdf_baseline.csv") == slurp(dir / "sweep" / "cdf_baseline.csv"));
  std::istringstream lines(slurp(dir / "rep" / "summary.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    CHECK(nlohmann::json::parse(line).is_object());
    ++n;
  }
  CHECK(n == 2);

  // a second sweep matches bit for bit, apart from the timestamp comments
  REQUIRE(run({"sweep", "--config", conf, "--out", (dir / "sweep2").string()}).code == kExitOk);
  CHECK(csv_body(slurp(dir / "sweep" / "sweep.csv")) == csv_body(slurp(dir / "sweep2" / "sweep.csv")));
  CHECK(slurp(dir / "sweep" / "trace.jsonl") == slurp(dir / "sweep2" / "trace.jsonl"));
  fs::remove_all(dir);
}
