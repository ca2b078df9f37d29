#include "relu_lab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "relu_lab/io.hpp"

namespace relulab {

namespace {
std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config: key '" + key + "' has non-integer value '" + s + "'");
  return v;
}
}  // namespace

Config Config::parse_file(const std::string& path) {
  return parse_string(read_text_file(path));
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
    cfg.entries_[section + "." + key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::require(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return require(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(key, require(key)); }

double Config::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

std::int64_t Config::get_int(const std::string& key) const { return parse_int(key, require(key)); }

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_int(key, it->second);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t v = 0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config: key '" + key + "' has non-integer value '" + s + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: key '" + key + "' has non-boolean value '" + s + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(require(key))) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
  return out;
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(require(key))) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError("config: key '" + key + "' has an empty list");
  return out;
}

ParameterVector vector_from_config(const Config& cfg, const std::string& key, int dim,
                                   const std::string& fallback_pattern, double fallback_scale) {
  // fallback_scale applies only when the key itself is absent; a configured
  // pattern or list uses key.scale, default 1.
  std::string pattern = cfg.get_string(key, fallback_pattern);
  double scale = cfg.get_double(key + ".scale", cfg.has(key) ? 1.0 : fallback_scale);
  ParameterVector v(dim);
  if (pattern == "zeros") {
    // already zero
  } else if (pattern == "ones") {
    for (int i = 0; i < dim; ++i) v[i] = scale;
  } else if (pattern == "inverse_index") {
    for (int i = 0; i < dim; ++i) v[i] = scale / static_cast<double>(i + 1);
  } else if (pattern == "inverse_sqrt_index") {
    for (int i = 0; i < dim; ++i) v[i] = scale / std::sqrt(static_cast<double>(i + 1));
  } else if (pattern == "alternating") {
    for (int i = 0; i < dim; ++i) v[i] = (i % 2 == 0 ? -scale : scale);
  } else if (pattern.find(',') != std::string::npos ||
             pattern.find_first_not_of("+-.0123456789eE ") == std::string::npos) {
    std::vector<std::string> items = split_list(pattern);
    if (static_cast<int>(items.size()) != dim)
      throw ConfigError("config: key '" + key + "' lists " + std::to_string(items.size()) +
                        " values for dimension " + std::to_string(dim));
    for (int i = 0; i < dim; ++i) v[i] = parse_double(key, items[i]) * scale;
  } else {
    throw ConfigError("config: key '" + key + "' has unknown pattern '" + pattern + "'");
  }
  return v;
}

ProblemInstance problem_from_config(const Config& cfg) {
  ProblemInstance problem;

  std::string dist = cfg.get_string("problem.distribution", "symmetric_bernoulli");
  if (dist == "symmetric_bernoulli" || dist == "bernoulli")
    problem.distribution = Distribution::SymmetricBernoulli;
  else if (dist == "gaussian")
    problem.distribution = Distribution::Gaussian;
  else
    throw ConfigError("config: unknown distribution '" + dist + "'");

  SpectrumKind kind = spectrum_kind_from_string(cfg.get_string("problem.spectrum.kind"));
  double r = cfg.get_double("problem.spectrum.r", 1.0);
  bool normalize = cfg.get_bool("problem.spectrum.normalize",
                                problem.distribution == Distribution::SymmetricBernoulli);
  if (kind == SpectrumKind::Explicit) {
    std::vector<double> values = cfg.get_double_list("problem.spectrum.values");
    problem.spectrum = build_spectrum(kind, r, static_cast<int>(values.size()), normalize, &values);
  } else {
    int d = static_cast<int>(cfg.get_int("problem.spectrum.d"));
    problem.spectrum = build_spectrum(kind, r, d, normalize);
  }

  problem.w_star = vector_from_config(cfg, "problem.w_star", problem.dim(), "inverse_index", 1.0);

  std::string noise = cfg.get_string("problem.noise.kind", "noiseless");
  if (noise == "noiseless")
    problem.noise = NoiseModel::noiseless();
  else if (noise == "well_specified")
    problem.noise = NoiseModel::well_specified(cfg.get_double("problem.noise.sigma_sq"));
  else if (noise == "misspecified")
    problem.noise = NoiseModel::misspecified(cfg.get_double("problem.noise.corruption_prob"),
                                             cfg.get_double("problem.noise.corruption_value", 0.0));
  else
    throw ConfigError("config: unknown noise kind '" + noise + "'");

  problem.validate();
  return problem;
}

StepsizeSchedule schedule_from_config(const Config& cfg,
                                      std::optional<std::int64_t> horizon_override) {
  std::string kind = cfg.get_string("schedule.schedule.kind", "geometric_decay");
  double gamma0 = cfg.get_double("schedule.schedule.gamma0");
  std::int64_t horizon = horizon_override ? *horizon_override : cfg.get_int("schedule.schedule.N");
  if (kind == "constant") return StepsizeSchedule::constant(gamma0, horizon);
  if (kind != "geometric_decay") throw ConfigError("config: unknown schedule kind '" + kind + "'");
  std::optional<std::int64_t> k;
  if (cfg.has("schedule.schedule.K") && !horizon_override)
    k = cfg.get_int("schedule.schedule.K");
  return StepsizeSchedule::geometric_decay(gamma0, horizon, k);
}

}  // namespace relulab
