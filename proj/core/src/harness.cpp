#include "cofine/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include "cofine/errors.hpp"
#include "cofine/numerics.hpp"
#include "cofine/rng.hpp"

namespace cofine::harness {

namespace {

// Reshape-aware variants see transformed contexts when the hierarchy carries
// a U_D; the purely full-space baselines never do.
bool uses_reshape(policy::Variant v) {
  switch (v) {
    case policy::Variant::Reshape:
    case policy::Variant::CoFine:
    case policy::Variant::CoFineFocus:
    case policy::Variant::SubspaceUCB:
      return true;
    case policy::Variant::NaiveLinUCB:
    case policy::Variant::MeanRegularized:
      return false;
  }
  return false;
}

bool transform_active(const policy::PolicyConfig& cfg,
                      const hierarchy::Hierarchy& h) {
  return h.reshape.has_value() && uses_reshape(cfg.variant);
}

bool wants_composed(const ExperimentConfig& cfg) {
  if (cfg.reshape_compose) return true;
  for (const PolicySpec& spec : cfg.policies)
    if (spec.config.variant == policy::Variant::Reshape) return true;
  return false;
}

double spectral_norm(const RealMatrix& m) {
  const RealVector sv = numerics::singular_values(m);
  return sv.size() == 0 ? 0.0 : sv[0];
}

int thread_budget() {
  if (const char* env = std::getenv("COFINE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel loop with deterministic result slots.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// One simulated user plus the hierarchy/policy adjustments shared by every
// policy in a paired trial. `composed` carries the reshaping transform and a
// projection trained on reshaped profiles; which policies use it is decided
// per variant.
struct TrialSetup {
  env::EnvironmentSpec environment;
  hierarchy::Hierarchy hierarchy;                  // plain projection
  std::optional<hierarchy::Hierarchy> composed;    // with U_D attached
  std::uint64_t seed = 0;
  std::optional<RealVector> mean_profile;  // population mean, original coords
};

// The reshape baseline always works through U_D; the other subspace-aware
// variants only when composition is switched on.
const hierarchy::Hierarchy& setup_hierarchy(const TrialSetup& setup,
                                            policy::Variant variant,
                                            bool reshape_compose) {
  if (!setup.composed) return setup.hierarchy;
  if (variant == policy::Variant::Reshape) return *setup.composed;
  if (reshape_compose && uses_reshape(variant)) return *setup.composed;
  return setup.hierarchy;
}

RealVector represented_truth(const env::EnvironmentSpec& e,
                             const hierarchy::Hierarchy& h, bool transformed) {
  if (!transformed) return e.true_weights;
  // w in reshaped coordinates: U_D^-1 w*, so that w_rep . (U_D^T x) = w* . x.
  return Eigen::PartialPivLU<RealMatrix>(*h.reshape).solve(e.true_weights);
}

policy::PolicyConfig config_for_trial(const policy::PolicyConfig& base,
                                      const TrialSetup& setup,
                                      const hierarchy::Hierarchy& h,
                                      bool oracle_bounds) {
  policy::PolicyConfig cfg = validated_config(base, h);
  if (cfg.variant == policy::Variant::MeanRegularized && !cfg.mean_profile)
    cfg.mean_profile = setup.mean_profile;
  if (!oracle_bounds) return cfg;

  const bool transformed = transform_active(cfg, h);
  const RealVector w_rep =
      represented_truth(setup.environment, h, transformed);
  switch (cfg.variant) {
    case policy::Variant::CoFine:
    case policy::Variant::CoFineFocus: {
      const hierarchy::Decomposition d = hierarchy::decompose(w_rep, h);
      cfg.subspace_norm_bound = d.subspace_norm;
      cfg.residual_norm_bound = d.residual_norm;
      break;
    }
    case policy::Variant::SubspaceUCB: {
      const hierarchy::Decomposition d = hierarchy::decompose(w_rep, h);
      cfg.subspace_norm_bound = d.subspace_norm;
      break;
    }
    case policy::Variant::NaiveLinUCB:
    case policy::Variant::Reshape:
      cfg.subspace_norm_bound = w_rep.norm();
      break;
    case policy::Variant::MeanRegularized:
      if (cfg.mean_profile)
        cfg.subspace_norm_bound =
            (setup.environment.true_weights - *cfg.mean_profile).norm();
      break;
  }
  return cfg;
}

PolicyAggregate aggregate_traces(const std::string& name,
                                 const std::vector<const RegretTrace*>& traces,
                                 const std::vector<std::vector<double>>& bounds) {
  PolicyAggregate agg;
  agg.policy = name;
  agg.trace_count = static_cast<int>(traces.size());
  if (traces.empty()) return agg;
  const int horizon = traces[0]->rounds();
  agg.mean_cumulative.assign(horizon, 0.0);
  agg.stderr_cumulative.assign(horizon, 0.0);

  for (const RegretTrace* trace : traces)
    for (int t = 0; t < horizon; ++t)
      agg.mean_cumulative[t] += trace->cumulative[t];
  for (double& v : agg.mean_cumulative) v /= agg.trace_count;

  if (agg.trace_count > 1) {
    for (const RegretTrace* trace : traces)
      for (int t = 0; t < horizon; ++t) {
        const double d = trace->cumulative[t] - agg.mean_cumulative[t];
        agg.stderr_cumulative[t] += d * d;
      }
    for (double& v : agg.stderr_cumulative)
      v = std::sqrt(v / (agg.trace_count - 1)) / std::sqrt(agg.trace_count);
  }

  agg.final_mean = agg.mean_cumulative[horizon - 1];
  agg.final_stderr = agg.stderr_cumulative[horizon - 1];

  if (!bounds.empty()) {
    agg.bound_overlay.assign(horizon, 0.0);
    for (const std::vector<double>& bound : bounds)
      for (int t = 0; t < horizon; ++t)
        agg.bound_overlay[t] += bound[t + 1];  // bound[0] is round zero
    for (double& v : agg.bound_overlay) v /= static_cast<double>(bounds.size());
  }
  return agg;
}

// Runs every configured policy over the same trial setups (paired streams)
// and aggregates.
ExperimentResult run_paired(const ExperimentConfig& cfg,
                            const std::vector<TrialSetup>& setups,
                            const std::string& tag) {
  if (cfg.policies.empty()) throw Error("experiment has no policies");
  ExperimentResult result;
  result.tag = tag;
  const int n = static_cast<int>(setups.size());

  for (const PolicySpec& spec : cfg.policies) {
    std::vector<RegretTrace> traces(n);
    std::vector<std::vector<double>> bounds;
    const bool overlay =
        cfg.bound_overlay && (spec.config.variant == policy::Variant::CoFine ||
                              spec.config.variant == policy::Variant::CoFineFocus);
    if (overlay) bounds.resize(n);

    parallel_for(n, [&](int i) {
      const TrialSetup& setup = setups[i];
      const hierarchy::Hierarchy& h =
          setup_hierarchy(setup, spec.config.variant, cfg.reshape_compose);
      const policy::PolicyConfig pcfg =
          config_for_trial(spec.config, setup, h, cfg.oracle_bounds);
      traces[i] = run_trial(setup.environment, pcfg, h, cfg.horizon, setup.seed);
      if (overlay) {
        const bool transformed = transform_active(pcfg, h);
        const RealVector w_rep =
            represented_truth(setup.environment, h, transformed);
        bounds[i] = regret_bound(pcfg, hierarchy::decompose(w_rep, h), h.dim(),
                                 h.subspace_dim(), cfg.horizon);
      }
    });

    std::vector<const RegretTrace*> views;
    views.reserve(n);
    for (int i = 0; i < n; ++i) views.push_back(&traces[i]);
    result.aggregates.push_back(aggregate_traces(spec.name, views, bounds));

    for (int i = 0; i < n; ++i)
      result.trials.push_back(TrialRecord{spec.name, i, std::move(traces[i])});
  }
  return result;
}

env::EnvironmentSpec make_env(const ExperimentConfig& cfg, RealVector w,
                              std::uint64_t seed) {
  env::EnvironmentSpec e;
  e.true_weights = std::move(w);
  e.noise = cfg.noise;
  e.n_actions = cfg.n_actions;
  e.seed = seed;
  e.magnitude_jitter = cfg.magnitude_jitter;
  return e;
}

std::vector<TrialSetup> synthetic_setups(const ExperimentConfig& cfg,
                                         double beta) {
  std::vector<TrialSetup> setups;
  setups.reserve(cfg.trials);
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    auto [w, h] = env::gen_synthetic_wstar(cfg.dim, cfg.subspace_dim, beta, seed);
    TrialSetup setup;
    setup.environment = make_env(cfg, std::move(w), seed);
    setup.hierarchy = std::move(h);
    setup.seed = seed;
    setups.push_back(std::move(setup));
  }
  return setups;
}

env::PopulationSpec population_spec(const ExperimentConfig& cfg) {
  env::PopulationSpec spec;
  spec.dim = cfg.dim;
  spec.true_subspace_dim = cfg.true_subspace_dim;
  spec.count = cfg.population;
  spec.beta_min = cfg.beta_min;
  spec.beta_max = cfg.beta_max;
  spec.norm = cfg.profile_norm;
  return spec;
}

std::string format_tag_value(double v) {
  std::string s = std::to_string(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

ExperimentResult sweep_k_point(const ExperimentConfig& cfg,
                               const hierarchy::ProfileSet& profiles,
                               const env::PopulationSpec& pop_spec,
                               const RealVector& mean_profile, int k) {
  // One training pass per K; the ridge keeps K above the profile rank legal.
  TrialSetup prototype;
  prototype.hierarchy = hierarchy::learn_u(profiles, k, /*ridge=*/true);
  if (wants_composed(cfg)) {
    RealMatrix u_d = hierarchy::learn_reshape(profiles);
    hierarchy::ProfileSet reshaped = hierarchy::reshape_profiles(profiles, u_d);
    hierarchy::Hierarchy with_reshape =
        hierarchy::learn_u(reshaped, k, /*ridge=*/true);
    with_reshape.reshape = std::move(u_d);
    prototype.composed = std::move(with_reshape);
  }
  prototype.mean_profile = mean_profile;

  std::vector<TrialSetup> setups;
  setups.reserve(cfg.trials);
  constexpr std::uint64_t kTestUserOffset = 1u << 20;  // clear of training ids
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    RealVector w = env::sample_population_member(
        pop_spec, cfg.beta, cfg.base_seed,
        kTestUserOffset + static_cast<std::uint64_t>(i));
    TrialSetup setup = prototype;
    setup.environment = make_env(cfg, std::move(w), seed);
    setup.seed = seed;
    setups.push_back(std::move(setup));
  }
  return run_paired(cfg, setups, "k=" + std::to_string(k));
}

}  // namespace

int RegretTrace::violations() const {
  int count = 0;
  for (const std::uint8_t c : covered)
    if (!c) ++count;
  return count;
}

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Single:
      return "single";
    case Protocol::LeaveOneOut:
      return "leave_one_out";
    case Protocol::SweepBeta:
      return "sweep_beta";
    case Protocol::SweepK:
      return "sweep_k";
    case Protocol::SweepExplore:
      return "sweep_explore";
  }
  return "unknown";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
  for (const Protocol p :
       {Protocol::Single, Protocol::LeaveOneOut, Protocol::SweepBeta,
        Protocol::SweepK, Protocol::SweepExplore})
    if (protocol_name(p) == name) return p;
  return std::nullopt;
}

policy::PolicyConfig validated_config(const policy::PolicyConfig& cfg,
                                      const hierarchy::Hierarchy& h) {
  policy::PolicyConfig out = cfg;
  // Raw contexts satisfy |x| <= 1; reshaping rescales them by at most
  // sigma_max(U_D), and the coarse features by sigma_max(U) on top.
  double context_bound = 1.0;
  if (transform_active(cfg, h)) context_bound = spectral_norm(*h.reshape);
  const double coarse_bound = spectral_norm(h.projection) * context_bound;
  out.lambda = std::max(out.lambda, context_bound * context_bound);
  out.lambda_tilde = std::max(out.lambda_tilde, coarse_bound * coarse_bound);
  return out;
}

RegretTrace run_trial(const env::EnvironmentSpec& e,
                      const policy::PolicyConfig& cfg,
                      const hierarchy::Hierarchy& h, int horizon,
                      std::uint64_t seed) {
  if (e.true_weights.size() != h.dim())
    throw DimensionMismatch("run_trial: environment/hierarchy dimension mismatch");
  if (horizon < 1) throw Error("run_trial: horizon must be at least 1");

  env::EnvironmentSpec environment = e;
  environment.seed = seed;

  const policy::PolicyConfig pcfg = validated_config(cfg, h);
  const bool transformed = transform_active(pcfg, h);
  const RealVector w_rep = represented_truth(environment, h, transformed);

  policy::PolicyState state = policy::make_state(pcfg, h);

  RegretTrace trace;
  trace.instantaneous.reserve(horizon);
  trace.cumulative.reserve(horizon);
  trace.covered.reserve(horizon);
  double running = 0.0;

  for (int t = 1; t <= horizon; ++t) {
    const std::vector<RealVector> raw = env::gen_contexts(environment, t);
    std::vector<RealVector> seen;
    if (transformed) {
      seen.reserve(raw.size());
      for (const RealVector& x : raw)
        seen.push_back(RealVector(h.reshape->transpose() * x));
    }
    const std::vector<RealVector>& contexts = transformed ? seen : raw;

    const std::vector<policy::ActionScore> scores =
        policy::score_actions(state, contexts, h, pcfg);
    int chosen = 0;
    double best_score = scores[0].total();
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
      if (scores[i].total() > best_score) {
        chosen = i;
        best_score = scores[i].total();
      }

    const double width =
        scores[chosen].width_full + scores[chosen].width_coarse;
    const double truth = w_rep.dot(contexts[chosen]);
    trace.covered.push_back(std::abs(scores[chosen].mean - truth) <= width);

    const auto [best_index, best_value] =
        env::best_action_value(environment, raw);
    const double chosen_value = environment.true_weights.dot(raw[chosen]);
    running += best_value - chosen_value;
    trace.instantaneous.push_back(best_value - chosen_value);
    trace.cumulative.push_back(running);

    const double reward = env::sample_reward(environment, raw[chosen], t);
    policy::update(state, contexts[chosen], reward, h, pcfg);
  }
  return trace;
}

ExperimentResult leave_one_out(const hierarchy::ProfileSet& population,
                               const ExperimentConfig& cfg) {
  const int count = population.count();
  if (count < 2) throw Error("leave_one_out: need at least two profiles");
  const bool composed = wants_composed(cfg);

  std::vector<TrialSetup> setups;
  setups.reserve(static_cast<std::size_t>(count) * cfg.trials);
  for (int held_out = 0; held_out < count; ++held_out) {
    RealMatrix training(population.dim(), count - 1);
    int at = 0;
    for (int j = 0; j < count; ++j)
      if (j != held_out) training.col(at++) = population.profiles.col(j);
    hierarchy::ProfileSet training_set =
        hierarchy::make_profile_set(std::move(training));

    const bool need_ridge =
        numerics::numerical_rank(training_set.profiles) < cfg.subspace_dim;
    TrialSetup prototype;
    prototype.hierarchy =
        hierarchy::learn_u(training_set, cfg.subspace_dim, need_ridge);
    if (composed) {
      RealMatrix u_d = hierarchy::learn_reshape(training_set);
      hierarchy::ProfileSet reshaped =
          hierarchy::reshape_profiles(training_set, u_d);
      hierarchy::Hierarchy with_reshape =
          hierarchy::learn_u(reshaped, cfg.subspace_dim, need_ridge);
      with_reshape.reshape = std::move(u_d);
      prototype.composed = std::move(with_reshape);
    }
    prototype.mean_profile = training_set.profiles.rowwise().mean();

    for (int rep = 0; rep < cfg.trials; ++rep) {
      const std::uint64_t seed =
          cfg.base_seed +
          static_cast<std::uint64_t>(held_out) * cfg.trials + rep;
      TrialSetup setup = prototype;
      setup.environment =
          make_env(cfg, RealVector(population.profiles.col(held_out)), seed);
      setup.seed = seed;
      setups.push_back(std::move(setup));
    }
  }
  return run_paired(cfg, setups, "");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1 || cfg.horizon < 1)
    throw Error("experiment needs trials >= 1 and horizon >= 1");
  if (cfg.protocol != Protocol::LeaveOneOut && cfg.protocol != Protocol::SweepK) {
    for (const PolicySpec& spec : cfg.policies)
      if (spec.config.variant == policy::Variant::Reshape)
        throw Error(
            "the reshape baseline needs a population protocol to train U_D");
  }

  ExperimentReport report;
  switch (cfg.protocol) {
    case Protocol::Single: {
      report.results.push_back(run_paired(cfg, synthetic_setups(cfg, cfg.beta), ""));
      break;
    }
    case Protocol::SweepBeta: {
      if (cfg.sweep_betas.empty()) throw Error("sweep_beta: empty beta list");
      for (const double beta : cfg.sweep_betas)
        report.results.push_back(run_paired(cfg, synthetic_setups(cfg, beta),
                                            "beta=" + format_tag_value(beta)));
      break;
    }
    case Protocol::SweepExplore: {
      if (cfg.sweep_explore.empty())
        throw Error("sweep_explore: empty scale list");
      for (const double eta : cfg.sweep_explore) {
        ExperimentConfig point = cfg;
        for (PolicySpec& spec : point.policies) {
          if (spec.config.variant == policy::Variant::CoFine ||
              spec.config.variant == policy::Variant::CoFineFocus)
            spec.config.explore_scale = eta;
        }
        report.results.push_back(run_paired(point, synthetic_setups(point, cfg.beta),
                                            "eta=" + format_tag_value(eta)));
      }
      break;
    }
    case Protocol::SweepK: {
      if (cfg.sweep_ks.empty()) throw Error("sweep_k: empty K list");
      if (cfg.profiles_csv)
        throw Error("sweep_k: requires a synthetic population");
      const env::PopulationSpec pop_spec = population_spec(cfg);
      const hierarchy::ProfileSet profiles =
          env::gen_profile_population(pop_spec, cfg.base_seed);
      const RealVector mean_profile = profiles.profiles.rowwise().mean();
      for (const int k : cfg.sweep_ks)
        report.results.push_back(
            sweep_k_point(cfg, profiles, pop_spec, mean_profile, k));
      break;
    }
    case Protocol::LeaveOneOut: {
      if (cfg.profiles_csv)
        throw Error("leave_one_out: load the profile CSV and call leave_one_out");
      const hierarchy::ProfileSet profiles =
          env::gen_profile_population(population_spec(cfg), cfg.base_seed);
      report.results.push_back(leave_one_out(profiles, cfg));
      break;
    }
  }
  return report;
}

std::vector<double> regret_bound(const policy::PolicyConfig& cfg,
                                   const hierarchy::Decomposition& decomp,
                                   int dim, int subspace_dim, int horizon) {
  std::vector<double> bound(static_cast<std::size_t>(horizon) + 1, 0.0);
  const double d = static_cast<double>(dim);
  const double k = static_cast<double>(subspace_dim);
  for (int t = 1; t <= horizon; ++t) {
    const double tt = static_cast<double>(t);
    const double beta_full =
        std::sqrt(d * std::log((1.0 + tt / cfg.lambda) / cfg.delta)) +
        std::sqrt(2.0 * cfg.lambda) * decomp.residual_norm;
    const double beta_coarse =
        std::sqrt(k * std::log((1.0 + tt / cfg.lambda_tilde) / cfg.delta)) +
        std::sqrt(cfg.lambda_tilde) * decomp.subspace_norm;
    bound[t] = (beta_full * std::sqrt(d) + beta_coarse * std::sqrt(k)) *
               std::sqrt(2.0 * tt * std::log(1.0 + tt));
  }
  return bound;
}

bool coverage_check(const RegretTrace& trace, double delta) {
  if (trace.rounds() == 0) return true;
  const double rate =
      static_cast<double>(trace.violations()) / trace.rounds();
  return rate <= delta + 0.02;
}

}  // namespace cofine::harness
