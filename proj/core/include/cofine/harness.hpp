#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cofine/environment.hpp"
#include "cofine/hierarchy.hpp"
#include "cofine/policy.hpp"
#include "cofine/types.hpp"

namespace cofine::harness {

// Per-round regret bookkeeping for one trial. `covered[t]` records whether
// the confidence interval held at round t+1 against the true preferences.
struct RegretTrace {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  std::vector<std::uint8_t> covered;

  int rounds() const { return static_cast<int>(instantaneous.size()); }
  int violations() const;
};

struct PolicySpec {
  std::string name;  // label used in traces and reports
  policy::PolicyConfig config;
};

enum class Protocol { Single, LeaveOneOut, SweepBeta, SweepK, SweepExplore };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);

// Fully resolved experiment description; every field has a usable default.
struct ExperimentConfig {
  Protocol protocol = Protocol::Single;
  int horizon = 1000;
  int trials = 20;
  std::uint64_t base_seed = 1;

  // environment
  int n_actions = 20;
  env::NoiseModel noise;
  bool magnitude_jitter = false;

  // synthetic geometry
  int dim = 25;               // D
  int subspace_dim = 5;       // K used by the hierarchy
  int true_subspace_dim = 5;  // K_true used by population generators
  int population = 40;        // N
  double beta = 0.25;         // residual magnitude of test users
  double beta_min = 0.0;      // population residual range
  double beta_max = 0.5;
  double profile_norm = 1.0;
  std::optional<std::string> profiles_csv;  // leave-one-out from file

  std::vector<PolicySpec> policies;

  // Set each trial's norm bounds from the true decomposition of that trial's
  // w* instead of the configured constants.
  bool oracle_bounds = true;
  // Train U_D and compose it into the hierarchy (population protocols only).
  bool reshape_compose = false;
  // Emit the regret-bound curve next to each aggregate.
  bool bound_overlay = false;

  std::vector<double> sweep_betas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<int> sweep_ks{2, 5, 10, 25};
  std::vector<double> sweep_explore{0.0, 0.125, 0.25, 0.5, 1.0};
};

struct TrialRecord {
  std::string policy;
  int trial = 0;  // pooled index; leave-one-out flattens (user, rep)
  RegretTrace trace;
};

struct PolicyAggregate {
  std::string policy;
  int trace_count = 0;
  std::vector<double> mean_cumulative;    // length T
  std::vector<double> stderr_cumulative;  // length T
  double final_mean = 0.0;
  double final_stderr = 0.0;
  std::vector<double> bound_overlay;  // length T when enabled, else empty
};

// One sweep point (or the whole experiment for non-sweep protocols).
struct ExperimentResult {
  std::string tag;  // e.g. "beta=0.5"; empty for single runs
  std::vector<TrialRecord> trials;
  std::vector<PolicyAggregate> aggregates;
};

struct ExperimentReport {
  std::vector<ExperimentResult> results;
};

// Raises the ridges just enough to satisfy lambda >= max |x|^2 and
// lambda~ >= max |x~|^2 for contexts reachable under this hierarchy.
policy::PolicyConfig validated_config(const policy::PolicyConfig& cfg,
                                      const hierarchy::Hierarchy& h);

// One simulated interaction of `horizon` rounds. `seed` drives the context
// and noise streams (it overrides e.seed). When the hierarchy carries a
// reshaping transform, subspace-aware variants see U_D^T x and regret is
// still accounted in the original coordinates.
RegretTrace run_trial(const env::EnvironmentSpec& e,
                      const policy::PolicyConfig& cfg,
                      const hierarchy::Hierarchy& h, int horizon,
                      std::uint64_t seed);

// Runs the configured protocol. Trials are paired: every policy replays the
// same per-trial environment stream.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Leave-one-out over an explicit population: for each profile, the hierarchy
// is trained on the others and the held-out profile becomes the environment.
ExperimentResult leave_one_out(const hierarchy::ProfileSet& population,
                               const ExperimentConfig& cfg);

// Regret-bound curve: index t holds the bound after t rounds (index 0 is 0).
std::vector<double> regret_bound(const policy::PolicyConfig& cfg,
                                   const hierarchy::Decomposition& decomp,
                                   int dim, int subspace_dim, int horizon);

// True iff the empirical violation rate is within delta plus Monte Carlo
// slack (0.02).
bool coverage_check(const RegretTrace& trace, double delta);

}  // namespace cofine::harness
