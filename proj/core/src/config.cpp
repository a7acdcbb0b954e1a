#include "cofine/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cofine/errors.hpp"
#include "cofine/trace_io.hpp"
#include "cofine/version.hpp"

namespace cofine::config {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string_view piece =
        trim(value.substr(start, comma == std::string_view::npos
                                     ? std::string_view::npos
                                     : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw ConfigError("config key '" + std::string(key) +
                      "': expected a number, got '" + std::string(value) + "'");
  return out;
}

long long parse_int(std::string_view key, std::string_view value) {
  long long out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config key '" + std::string(key) +
                      "': expected an integer, got '" + std::string(value) + "'");
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config key '" + std::string(key) +
                      "': expected an unsigned integer, got '" +
                      std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + std::string(key) +
                    "': expected true or false, got '" + std::string(value) +
                    "'");
}

// Documented key set; anything else aborts. Provenance keys written by the
// manifest are accepted so a manifest is itself a valid config.
const std::set<std::string, std::less<>> kKnownKeys = {
    "protocol", "horizon", "trials", "seed", "actions", "noise", "sigma",
    "magnitude_jitter", "dim", "subspace_dim", "true_subspace_dim",
    "population", "beta", "beta_min", "beta_max", "profile_norm",
    "profiles_csv", "policies", "lambda", "lambda_tilde", "delta",
    "explore_scale", "subspace_norm_bound", "residual_norm_bound",
    "oracle_bounds", "literal_constants", "reshape_compose", "bound_overlay",
    "sweep_betas", "sweep_ks", "sweep_explore",
    // provenance keys written by the manifest
    "tool_version", "artifacts"};

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start <= text.size()) {
    ++line_no;
    const std::size_t newline = text.find('\n', line_start);
    std::string_view line =
        text.substr(line_start, newline == std::string_view::npos
                                    ? std::string_view::npos
                                    : newline - line_start);
    line_start = newline == std::string_view::npos ? text.size() + 1
                                                   : newline + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    if (kv.has(key))
      throw ConfigError("config: duplicate key '" + std::string(key) + "'");
    kv.set(key, value);
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool KeyValues::has(std::string_view key) const {
  return std::any_of(items_.begin(), items_.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

std::string KeyValues::get(std::string_view key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return v;
  throw ConfigError("config: missing key '" + std::string(key) + "'");
}

void KeyValues::set(std::string_view key, std::string_view value) {
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = std::string(value);
      return;
    }
  }
  items_.emplace_back(std::string(key), std::string(value));
}

std::string KeyValues::serialize() const {
  std::string out;
  for (const auto& [k, v] : items_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

harness::ExperimentConfig resolve_experiment(
    const KeyValues& kv, const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : kv.items()) {
    if (!kKnownKeys.contains(key))
      throw ConfigError("config: unknown key '" + key + "'");
  }

  harness::ExperimentConfig cfg;

  if (kv.has("protocol")) {
    const auto p = harness::protocol_from_name(kv.get("protocol"));
    if (!p) throw ConfigError("config: unknown protocol '" + kv.get("protocol") + "'");
    cfg.protocol = *p;
  }
  if (kv.has("horizon"))
    cfg.horizon = static_cast<int>(parse_int("horizon", kv.get("horizon")));
  if (kv.has("trials"))
    cfg.trials = static_cast<int>(parse_int("trials", kv.get("trials")));
  if (kv.has("seed")) cfg.base_seed = parse_u64("seed", kv.get("seed"));
  if (kv.has("actions"))
    cfg.n_actions = static_cast<int>(parse_int("actions", kv.get("actions")));
  if (kv.has("noise")) {
    const std::string noise = kv.get("noise");
    if (noise == "gaussian")
      cfg.noise.kind = env::NoiseKind::Gaussian;
    else if (noise == "bernoulli")
      cfg.noise.kind = env::NoiseKind::Bernoulli;
    else
      throw ConfigError("config: unknown noise model '" + noise + "'");
  }
  if (kv.has("sigma")) cfg.noise.sigma = parse_double("sigma", kv.get("sigma"));
  if (kv.has("magnitude_jitter"))
    cfg.magnitude_jitter = parse_bool("magnitude_jitter", kv.get("magnitude_jitter"));
  if (kv.has("dim")) cfg.dim = static_cast<int>(parse_int("dim", kv.get("dim")));
  if (kv.has("subspace_dim"))
    cfg.subspace_dim =
        static_cast<int>(parse_int("subspace_dim", kv.get("subspace_dim")));
  if (kv.has("true_subspace_dim"))
    cfg.true_subspace_dim = static_cast<int>(
        parse_int("true_subspace_dim", kv.get("true_subspace_dim")));
  else
    cfg.true_subspace_dim = cfg.subspace_dim;  // population rank follows K
  if (kv.has("population"))
    cfg.population =
        static_cast<int>(parse_int("population", kv.get("population")));
  if (kv.has("beta")) cfg.beta = parse_double("beta", kv.get("beta"));
  if (kv.has("beta_min")) cfg.beta_min = parse_double("beta_min", kv.get("beta_min"));
  if (kv.has("beta_max")) cfg.beta_max = parse_double("beta_max", kv.get("beta_max"));
  if (kv.has("profile_norm"))
    cfg.profile_norm = parse_double("profile_norm", kv.get("profile_norm"));
  if (kv.has("profiles_csv") && !kv.get("profiles_csv").empty()) {
    std::filesystem::path p = kv.get("profiles_csv");
    if (p.is_relative()) p = base_dir / p;
    cfg.profiles_csv = std::filesystem::weakly_canonical(p).string();
  }

  // shared policy hyperparameters
  policy::PolicyConfig shared;
  if (kv.has("lambda")) shared.lambda = parse_double("lambda", kv.get("lambda"));
  if (kv.has("lambda_tilde"))
    shared.lambda_tilde = parse_double("lambda_tilde", kv.get("lambda_tilde"));
  if (kv.has("delta")) shared.delta = parse_double("delta", kv.get("delta"));
  if (kv.has("subspace_norm_bound"))
    shared.subspace_norm_bound =
        parse_double("subspace_norm_bound", kv.get("subspace_norm_bound"));
  if (kv.has("residual_norm_bound"))
    shared.residual_norm_bound =
        parse_double("residual_norm_bound", kv.get("residual_norm_bound"));
  if (kv.has("literal_constants"))
    shared.literal_constants = parse_bool("literal_constants", kv.get("literal_constants"));
  double explore_scale = 1.0;
  if (kv.has("explore_scale"))
    explore_scale = parse_double("explore_scale", kv.get("explore_scale"));

  std::vector<std::string> policy_names{"cofine", "naive"};
  if (kv.has("policies")) policy_names = split_list(kv.get("policies"));
  if (policy_names.empty()) throw ConfigError("config: empty policy list");
  for (const std::string& name : policy_names) {
    const auto variant = policy::variant_from_name(name);
    if (!variant) throw ConfigError("config: unknown policy '" + name + "'");
    policy::PolicyConfig pcfg = policy::default_config(*variant);
    pcfg.lambda = shared.lambda;
    pcfg.lambda_tilde = shared.lambda_tilde;
    pcfg.delta = shared.delta;
    pcfg.subspace_norm_bound = shared.subspace_norm_bound;
    pcfg.residual_norm_bound = shared.residual_norm_bound;
    pcfg.literal_constants = shared.literal_constants;
    // explore_scale steers the plain cofine policy; cofine_focus is pinned
    // at 0.25 by definition.
    if (*variant == policy::Variant::CoFine) pcfg.explore_scale = explore_scale;
    cfg.policies.push_back(harness::PolicySpec{name, pcfg});
  }

  if (kv.has("oracle_bounds"))
    cfg.oracle_bounds = parse_bool("oracle_bounds", kv.get("oracle_bounds"));
  if (kv.has("reshape_compose"))
    cfg.reshape_compose = parse_bool("reshape_compose", kv.get("reshape_compose"));
  if (kv.has("bound_overlay"))
    cfg.bound_overlay = parse_bool("bound_overlay", kv.get("bound_overlay"));

  if (kv.has("sweep_betas")) {
    cfg.sweep_betas.clear();
    for (const std::string& v : split_list(kv.get("sweep_betas")))
      cfg.sweep_betas.push_back(parse_double("sweep_betas", v));
  }
  if (kv.has("sweep_ks")) {
    cfg.sweep_ks.clear();
    for (const std::string& v : split_list(kv.get("sweep_ks")))
      cfg.sweep_ks.push_back(static_cast<int>(parse_int("sweep_ks", v)));
  }
  if (kv.has("sweep_explore")) {
    cfg.sweep_explore.clear();
    for (const std::string& v : split_list(kv.get("sweep_explore")))
      cfg.sweep_explore.push_back(parse_double("sweep_explore", v));
  }

  // validation
  if (cfg.horizon < 1) throw ConfigError("config: horizon must be >= 1");
  if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (cfg.n_actions < 2) throw ConfigError("config: actions must be >= 2");
  if (cfg.noise.sigma < 0.0) throw ConfigError("config: sigma must be >= 0");
  if (cfg.dim < 1) throw ConfigError("config: dim must be >= 1");
  if (cfg.subspace_dim < 1 || cfg.subspace_dim > cfg.dim)
    throw ConfigError("config: subspace_dim must be in [1, dim]");
  if (cfg.true_subspace_dim < 1 || cfg.true_subspace_dim > cfg.dim)
    throw ConfigError("config: true_subspace_dim must be in [1, dim]");
  if (cfg.population < 1) throw ConfigError("config: population must be >= 1");
  if (cfg.beta < 0.0 || cfg.beta > 1.0)
    throw ConfigError("config: beta must lie in [0, 1]");
  if (cfg.beta_min < 0.0 || cfg.beta_max > 1.0 || cfg.beta_min > cfg.beta_max)
    throw ConfigError("config: beta range must satisfy 0 <= min <= max <= 1");
  if (cfg.profile_norm <= 0.0)
    throw ConfigError("config: profile_norm must be positive");
  if (shared.lambda <= 0.0 || shared.lambda_tilde <= 0.0)
    throw ConfigError("config: ridge weights must be positive");
  if (shared.delta <= 0.0 || shared.delta >= 1.0)
    throw ConfigError("config: delta must lie in (0, 1)");
  if (explore_scale < 0.0 || explore_scale > 1.0)
    throw ConfigError("config: explore_scale must lie in [0, 1]");
  if (shared.subspace_norm_bound <= 0.0)
    throw ConfigError("config: subspace_norm_bound must be positive");
  if (shared.residual_norm_bound < 0.0)
    throw ConfigError("config: residual_norm_bound must be >= 0");
  for (const double b : cfg.sweep_betas)
    if (b < 0.0 || b > 1.0)
      throw ConfigError("config: sweep_betas entries must lie in [0, 1]");
  if (cfg.protocol == harness::Protocol::SweepK) {
    // only the active protocol constrains its list against the geometry
    for (const int k : cfg.sweep_ks)
      if (k < 1 || k > cfg.dim)
        throw ConfigError("config: sweep_ks entries must lie in [1, dim]");
  }
  for (const double e : cfg.sweep_explore)
    if (e < 0.0 || e > 1.0)
      throw ConfigError("config: sweep_explore entries must lie in [0, 1]");
  if (cfg.protocol == harness::Protocol::SweepBeta && cfg.sweep_betas.empty())
    throw ConfigError("config: sweep_beta needs a non-empty sweep_betas list");
  if (cfg.protocol == harness::Protocol::SweepK && cfg.sweep_ks.empty())
    throw ConfigError("config: sweep_k needs a non-empty sweep_ks list");
  if (cfg.protocol == harness::Protocol::SweepExplore && cfg.sweep_explore.empty())
    throw ConfigError("config: sweep_explore needs a non-empty sweep_explore list");

  return cfg;
}

namespace {

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += io::format_double(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

KeyValues materialize(const harness::ExperimentConfig& cfg) {
  KeyValues kv;
  kv.set("tool_version", kVersion);
  kv.set("protocol", harness::protocol_name(cfg.protocol));
  kv.set("horizon", std::to_string(cfg.horizon));
  kv.set("trials", std::to_string(cfg.trials));
  kv.set("seed", std::to_string(cfg.base_seed));
  kv.set("actions", std::to_string(cfg.n_actions));
  kv.set("noise",
         cfg.noise.kind == env::NoiseKind::Gaussian ? "gaussian" : "bernoulli");
  kv.set("sigma", io::format_double(cfg.noise.sigma));
  kv.set("magnitude_jitter", cfg.magnitude_jitter ? "true" : "false");
  kv.set("dim", std::to_string(cfg.dim));
  kv.set("subspace_dim", std::to_string(cfg.subspace_dim));
  kv.set("true_subspace_dim", std::to_string(cfg.true_subspace_dim));
  kv.set("population", std::to_string(cfg.population));
  kv.set("beta", io::format_double(cfg.beta));
  kv.set("beta_min", io::format_double(cfg.beta_min));
  kv.set("beta_max", io::format_double(cfg.beta_max));
  kv.set("profile_norm", io::format_double(cfg.profile_norm));
  if (cfg.profiles_csv) kv.set("profiles_csv", *cfg.profiles_csv);

  std::string names;
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    if (i) names += ',';
    names += cfg.policies[i].name;
  }
  kv.set("policies", names);

  const policy::PolicyConfig& shared =
      cfg.policies.empty() ? policy::PolicyConfig{} : cfg.policies[0].config;
  kv.set("lambda", io::format_double(shared.lambda));
  kv.set("lambda_tilde", io::format_double(shared.lambda_tilde));
  kv.set("delta", io::format_double(shared.delta));
  double explore_scale = 1.0;
  for (const harness::PolicySpec& spec : cfg.policies)
    if (spec.config.variant == policy::Variant::CoFine)
      explore_scale = spec.config.explore_scale;
  kv.set("explore_scale", io::format_double(explore_scale));
  kv.set("subspace_norm_bound", io::format_double(shared.subspace_norm_bound));
  kv.set("residual_norm_bound", io::format_double(shared.residual_norm_bound));
  kv.set("oracle_bounds", cfg.oracle_bounds ? "true" : "false");
  kv.set("literal_constants", shared.literal_constants ? "true" : "false");
  kv.set("reshape_compose", cfg.reshape_compose ? "true" : "false");
  kv.set("bound_overlay", cfg.bound_overlay ? "true" : "false");
  kv.set("sweep_betas", join_doubles(cfg.sweep_betas));
  kv.set("sweep_ks", join_ints(cfg.sweep_ks));
  kv.set("sweep_explore", join_doubles(cfg.sweep_explore));
  return kv;
}

}  // namespace cofine::config
