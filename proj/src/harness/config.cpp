#include "semoran/harness/config.hpp"
#include "semoran/rng.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace semoran::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list '" + text + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("not a number: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

template <typename T>
std::string fmt(T v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

}  // namespace

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<Index>(item));
  return out;
}

std::vector<std::optional<double>> parse_snr_list(const std::string& text) {
  std::vector<std::optional<double>> out;
  for (const auto& item : split_list(text)) {
    if (item == "off" || item == "none") out.push_back(std::nullopt);
    else out.push_back(parse_number<double>(item));
  }
  return out;
}

std::string format_snr(const std::optional<double>& snr) { return snr ? fmt(*snr) : "off"; }

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  try {
    if (key == "seed") seed = parse_number<std::uint64_t>(value);
    else if (key == "dataset") dataset = value;
    else if (key == "samples") samples = parse_number<Index>(value);
    else if (key == "train_fraction") train_fraction = parse_number<double>(value);
    else if (key == "reflection_gain") reflection_gain = parse_number<float>(value);
    else if (key == "packet_noise_std") packet_noise_std = parse_number<float>(value);
    else if (key == "bottlenecks") bottlenecks = parse_index_list(value);
    else if (key == "seeds") seeds = parse_number<int>(value);
    else if (key == "snr_db") snr_db = parse_snr_list(value);
    else if (key == "snr_bottleneck") snr_bottleneck = parse_number<Index>(value);
    else if (key == "jobs") jobs = parse_number<int>(value);
    else if (key == "bottleneck") bottleneck = parse_number<Index>(value);
    else if (key == "vae.hidden") vae_hidden = parse_index_list(value);
    else if (key == "vae.bottleneck_hidden") vae_bottleneck_hidden = parse_bool(value);
    else if (key == "vae.epochs") vae_epochs = parse_number<int>(value);
    else if (key == "vae.batch") vae_batch = parse_number<Index>(value);
    else if (key == "vae.beta") vae_beta = parse_number<float>(value);
    else if (key == "vae.lr") vae_lr = parse_number<float>(value);
    else if (key == "loc.hidden") loc_hidden = parse_index_list(value);
    else if (key == "loc.epochs") loc_epochs = parse_number<int>(value);
    else if (key == "loc.batch") loc_batch = parse_number<Index>(value);
    else if (key == "loc.lr") loc_lr = parse_number<float>(value);
    else if (key == "codec.amplitude") codec_amplitude = value;
    else if (key == "codec.phase") codec_phase = value;
    else if (key == "localizer") localizer = value;
    else if (key == "enhanced_odu") enhanced_odu = parse_bool(value);
    else if (key == "requests") requests = parse_number<Index>(value);
    else if (key == "write_trace") write_trace = parse_bool(value);
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with("unknown")) throw;
    throw ConfigError(key + ": " + e.what());
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::string snr;
  for (std::size_t i = 0; i < snr_db.size(); ++i) snr += (i ? "," : "") + format_snr(snr_db[i]);
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"seed", fmt(seed)},
      {"dataset", dataset.string()},
      {"samples", fmt(samples)},
      {"train_fraction", fmt(train_fraction)},
      {"reflection_gain", fmt(reflection_gain)},
      {"packet_noise_std", fmt(packet_noise_std)},
      {"bottlenecks", join(bottlenecks)},
      {"seeds", fmt(seeds)},
      {"snr_db", snr},
      {"snr_bottleneck", fmt(snr_bottleneck)},
      {"jobs", fmt(jobs)},
      {"bottleneck", fmt(bottleneck)},
      {"vae.hidden", join(vae_hidden)},
      {"vae.bottleneck_hidden", b(vae_bottleneck_hidden)},
      {"vae.epochs", fmt(vae_epochs)},
      {"vae.batch", fmt(vae_batch)},
      {"vae.beta", fmt(vae_beta)},
      {"vae.lr", fmt(vae_lr)},
      {"loc.hidden", join(loc_hidden)},
      {"loc.epochs", fmt(loc_epochs)},
      {"loc.batch", fmt(loc_batch)},
      {"loc.lr", fmt(loc_lr)},
      {"codec.amplitude", codec_amplitude.string()},
      {"codec.phase", codec_phase.string()},
      {"localizer", localizer.string()},
      {"enhanced_odu", b(enhanced_odu)},
      {"requests", fmt(requests)},
      {"write_trace", b(write_trace)},
  };
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (samples < 10) fail("samples must be at least 10");
  if (!(train_fraction > 0 && train_fraction < 1)) fail("train_fraction must lie in (0, 1)");
  if (!(reflection_gain >= 0) || !(packet_noise_std >= 0)) fail("scene gains must be non-negative");
  if (bottlenecks.empty()) fail("bottlenecks must not be empty");
  for (Index v : bottlenecks)
    if (v < 25 || v > 500) fail("bottleneck " + std::to_string(v) + " outside [25, 500]");
  if (bottleneck < 1) fail("bottleneck must be positive");
  if (seeds < 1) fail("seeds must be at least 1");
  if (snr_db.empty()) fail("snr_db must not be empty");
  if (jobs < 1) fail("jobs must be at least 1");
  if (vae_epochs < 1 || loc_epochs < 1) fail("epochs must be at least 1");
  if (vae_batch < 1 || loc_batch < 1) fail("batch sizes must be positive");
  for (Index h : vae_hidden)
    if (h < 1) fail("vae.hidden widths must be positive");
  for (Index h : loc_hidden)
    if (h < 1) fail("loc.hidden widths must be positive");
  if (!(vae_beta >= 0) || !(vae_lr > 0) || !(loc_lr > 0)) fail("beta must be >= 0 and learning rates > 0");
  if (requests < 0) fail("requests must be non-negative");
}

codec::VaeConfig RunConfig::vae_config(Index b, std::uint64_t s) const {
  codec::VaeConfig c;
  c.bottleneck = b;
  c.hidden = vae_hidden;
  c.bottleneck_hidden = vae_bottleneck_hidden;
  c.epochs = vae_epochs;
  c.batch = vae_batch;
  c.beta = vae_beta;
  c.adamax.alpha = vae_lr;
  c.seed = s;
  return c;
}

loc::LocalizerConfig RunConfig::localizer_config(std::uint64_t s) const {
  loc::LocalizerConfig c;
  c.hidden = loc_hidden;
  c.epochs = loc_epochs;
  c.batch = loc_batch;
  c.adamax.alpha = loc_lr;
  c.seed = s;
  return c;
}

std::uint64_t RunConfig::repetition_seed(int k) const { return derive_seed(seed, 1000 + static_cast<std::uint64_t>(k)); }

}  // namespace semoran::harness
