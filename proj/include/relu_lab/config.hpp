#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relu_lab/model.hpp"
#include "relu_lab/optimizers.hpp"

namespace relulab {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Sectioned key-value text:
//   [problem]
//   spectrum.kind = power_law
//   spectrum.d = 1024
// Keys are stored flattened as "section.key". '#' starts a comment, blank
// lines are skipped, values keep internal spaces but are trimmed at the ends.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::string require(const std::string& key) const;
  std::map<std::string, std::string> entries_;
};

// Builders from the [problem] and [schedule] sections.
//
// [problem] keys: distribution, spectrum.kind, spectrum.r, spectrum.d,
//   spectrum.normalize, spectrum.values, w_star (pattern or explicit list),
//   w_star.scale, noise.kind, noise.sigma_sq, noise.corruption_prob,
//   noise.corruption_value.
// Patterns for w_star / w0: zeros, ones, inverse_index (i^-1),
//   inverse_sqrt_index (i^-1/2), alternating (scale * -1^i), or a comma list.
ProblemInstance problem_from_config(const Config& cfg);
ParameterVector vector_from_config(const Config& cfg, const std::string& key, int dim,
                                   const std::string& fallback_pattern, double fallback_scale);

// [schedule] keys: schedule.kind, schedule.gamma0, schedule.N, schedule.K
// (optional override of the default phase length).
StepsizeSchedule schedule_from_config(const Config& cfg,
                                      std::optional<std::int64_t> horizon_override = {});

}  // namespace relulab
