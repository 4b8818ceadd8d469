#include "semoran/harness/report.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace semoran::harness {

namespace {

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(path.string() + ": not a number '" + s + "'");
  return v;
}

std::vector<std::string> data_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    out.push_back(line);
  }
  return out;
}

std::pair<std::string, std::string> two_fields(const std::string& line, const std::filesystem::path& path) {
  const auto comma = line.find(',');
  if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
    throw std::runtime_error(path.string() + ": expected two fields in '" + line + "'");
  return {line.substr(0, comma), line.substr(comma + 1)};
}

std::string row_label(const SweepRow& r) { return r.bottleneck == 0 ? "raw" : std::to_string(r.bottleneck); }

}  // namespace

std::string csv_body(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line.front() != '#') out += line + '\n';
  return out;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sweep_csv(const SweepReport& report, const RunConfig& config, const std::string& generated_at) {
  std::ostringstream o;
  o << "# generated_at " << generated_at << '\n';
  for (const auto& [k, v] : config.entries()) o << "# config " << k << '=' << v << '\n';
  o << "bottleneck,remaining_ratio,mean_error_m,p50_m,p90_m,min_mean_m,max_mean_m,bytes_on_air,seeds\n";
  for (const auto& r : report.rows)
    o << row_label(r) << ',' << num(r.remaining_ratio) << ',' << num(r.mean) << ',' << num(r.p50) << ','
      << num(r.p90) << ',' << num(r.min_mean) << ',' << num(r.max_mean) << ',' << r.bytes_on_air << ','
      << r.seed_means.size() << '\n';
  const auto& best = report.best();
  o << "# best bottleneck " << best.bottleneck << " remaining_ratio " << num(best.remaining_ratio) << " mean "
    << num(best.mean) << " m; raw baseline " << num(report.baseline().mean) << " m; ratio "
    << num(best.mean / report.baseline().mean) << '\n';
  o << "# reference anchor (measured CSI, different convention): optimum near 0.09 remaining ratio,"
       " raw ~0.6 m, semantic ~0.7 m\n";
  return o.str();
}

std::string snr_csv(const SweepReport& report, const std::string& generated_at) {
  std::ostringstream o;
  o << "# generated_at " << generated_at << '\n';
  o << "bottleneck,snr_db,mean_error_m,p50_m,p90_m,min_mean_m,max_mean_m,bytes_on_air,seeds\n";
  for (const auto& r : report.snr_rows)
    o << r.bottleneck << ',' << format_snr(r.snr_db) << ',' << num(r.mean) << ',' << num(r.p50) << ','
      << num(r.p90) << ',' << num(r.min_mean) << ',' << num(r.max_mean) << ',' << r.bytes_on_air << ','
      << r.seed_means.size() << '\n';
  return o.str();
}

std::string cdf_csv(const loc::ErrorReport& report) {
  std::string o = "error_m,fraction\n";
  for (const auto& [e, f] : report.cdf) o += num(e) + ',' + num(f) + '\n';
  return o;
}

std::string errors_csv(const loc::ErrorReport& report) {
  std::string o = "index,error_m\n";
  for (std::size_t i = 0; i < report.errors.size(); ++i) o += std::to_string(i) + ',' + num(report.errors[i]) + '\n';
  return o;
}

loc::ErrorReport read_errors_csv(const std::filesystem::path& path) {
  std::vector<double> errors;
  for (const auto& line : data_lines(path)) {
    const auto [idx, err] = two_fields(line, path);
    if (parse_double(idx, path) != static_cast<double>(errors.size()))
      throw std::runtime_error(path.string() + ": indices must run 0, 1, 2, ...");
    const double e = parse_double(err, path);
    if (!(e >= 0) || !std::isfinite(e)) throw std::runtime_error(path.string() + ": invalid error value");
    errors.push_back(e);
  }
  if (errors.empty()) throw std::runtime_error(path.string() + ": no samples");
  return loc::ErrorReport::from_errors(std::move(errors));
}

std::vector<std::pair<double, double>> read_cdf_csv(const std::filesystem::path& path) {
  std::vector<std::pair<double, double>> out;
  for (const auto& line : data_lines(path)) {
    const auto [e, f] = two_fields(line, path);
    out.emplace_back(parse_double(e, path), parse_double(f, path));
  }
  return out;
}

bool cdf_valid(const std::vector<std::pair<double, double>>& cdf) {
  if (cdf.empty() || cdf.back().second != 1.0 || !(cdf.front().second > 0.0)) return false;
  for (std::size_t i = 1; i < cdf.size(); ++i)
    if (cdf[i].second < cdf[i - 1].second || cdf[i].first < cdf[i - 1].first) return false;
  return true;
}

std::string config_json_line(const RunConfig& config, const std::string& command) {
  nlohmann::ordered_json j;
  j["type"] = "config";
  j["command"] = command;
  for (const auto& [k, v] : config.entries()) j["config"][k] = v;
  return j.dump() + '\n';
}

std::string sweep_summary_jsonl(const SweepReport& report, const RunConfig& config) {
  std::string out = config_json_line(config, "sweep");
  auto emit = [&](const char* type, const SweepRow& r) {
    nlohmann::ordered_json j;
    j["type"] = type;
    j["bottleneck"] = r.bottleneck;
    j["snr_db"] = format_snr(r.snr_db);
    j["remaining_ratio"] = r.remaining_ratio;
    j["mean_error_m"] = r.mean;
    j["p50_m"] = r.p50;
    j["p90_m"] = r.p90;
    j["seed_means"] = r.seed_means;
    j["bytes_on_air"] = r.bytes_on_air;
    j["trace_digests"] = r.digests;
    out += j.dump() + '\n';
  };
  for (const auto& r : report.rows) emit(r.bottleneck ? "sweep_row" : "baseline_row", r);
  for (const auto& r : report.snr_rows) emit("snr_row", r);
  nlohmann::ordered_json best;
  best["type"] = "best";
  best["bottleneck"] = report.best().bottleneck;
  best["mean_error_m"] = report.best().mean;
  best["baseline_mean_error_m"] = report.baseline().mean;
  out += best.dump() + '\n';
  return out;
}

}  // namespace semoran::harness
