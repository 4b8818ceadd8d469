#pragma once

#include "semoran/codec/vae.hpp"
#include "semoran/loc/localizer.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semoran::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every tunable of the command-line tools. Files hold `key = value` lines
/// ('#' starts a comment); lists are comma separated.
struct RunConfig {
  std::uint64_t seed = 1;

  // data
  std::filesystem::path dataset;  // empty: generate from the keys below
  Index samples = 12000;
  double train_fraction = 0.8;
  float reflection_gain = 0.6f;
  float packet_noise_std = 0.02f;

  // sweep
  std::vector<Index> bottlenecks{25, 50, 100, 200, 270, 400, 500};
  int seeds = 3;
  std::vector<std::optional<double>> snr_db{std::nullopt};  // nullopt = channel off
  Index snr_bottleneck = 270;
  int jobs = 1;

  // codec
  Index bottleneck = 270;
  std::vector<Index> vae_hidden{64};
  bool vae_bottleneck_hidden = true;
  int vae_epochs = 3;
  Index vae_batch = 64;
  float vae_beta = 1e-5f;
  float vae_lr = 0.002f;

  // localizer
  std::vector<Index> loc_hidden{64, 64};
  int loc_epochs = 6;
  Index loc_batch = 64;
  float loc_lr = 0.0005f;

  // simulate / report inputs
  std::filesystem::path codec_amplitude;
  std::filesystem::path codec_phase;
  std::filesystem::path localizer;
  bool enhanced_odu = false;
  Index requests = 0;  // 0: the whole test split
  bool write_trace = true;

  /// Applies one key; throws ConfigError for unknown keys and bad values.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  /// Effective values in a fixed key order, formatted so that set() reads them back.
  std::vector<std::pair<std::string, std::string>> entries() const;
  void validate() const;

  codec::VaeConfig vae_config(Index bottleneck, std::uint64_t seed) const;
  loc::LocalizerConfig localizer_config(std::uint64_t seed) const;
  /// Training seed for repetition k of a sweep point.
  std::uint64_t repetition_seed(int k) const;
};

std::vector<Index> parse_index_list(const std::string& text);
/// "off" (or "none") denotes a disabled channel.
std::vector<std::optional<double>> parse_snr_list(const std::string& text);
std::string format_snr(const std::optional<double>& snr);

}  // namespace semoran::harness
