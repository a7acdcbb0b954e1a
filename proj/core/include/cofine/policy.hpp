#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cofine/hierarchy.hpp"
#include "cofine/types.hpp"

namespace cofine::policy {

enum class Variant {
  CoFine,           // coarse-to-fine UCB over the full hierarchy
  CoFineFocus,      // CoFine with the full-space width scaled down (0.25)
  NaiveLinUCB,      // ridge to zero in the full space
  MeanRegularized,  // ridge to a mean profile in the full space
  Reshape,          // NaiveLinUCB on reshaped features (U_D^T x)
  SubspaceUCB,      // LinUCB on the coarse features only
};

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

struct PolicyConfig {
  Variant variant = Variant::CoFine;
  double lambda = 1.0;        // full-space ridge
  double lambda_tilde = 1.0;  // coarse ridge
  double delta = 0.1;         // confidence failure probability

  // Multiplier on the full-space confidence width only; 0.25 is the focus
  // variant's setting.
  double explore_scale = 1.0;

  // Assumed bound on the parameter norm at the regularized level: |w~*| for
  // the coarse-to-fine variants and SubspaceUCB, |w* - prior| for the
  // one-level full-space variants.
  double subspace_norm_bound = 1.0;
  // Assumed bound on the residual |w_perp*| (full-space bias of CoFine).
  double residual_norm_bound = 0.1;

  std::optional<RealVector> mean_profile;  // prior for MeanRegularized

  // Uses the confidence coefficients exactly as printed in the source
  // derivation (det product instead of det ratio, lambda*lambda~ bias); kept
  // for comparison runs.
  bool literal_constants = false;
};

// Per-variant defaults (CoFineFocus gets explore_scale = 0.25).
PolicyConfig default_config(Variant v);

struct ConfidenceCoefficients {
  double full_variance = 0.0;    // multiplies |x|_{M^-1}
  double full_bias = 0.0;        // multiplies |M^-1 x|
  double coarse_variance = 0.0;  // multiplies |U^T M^-1 x|_{M~^-1}
  double coarse_bias = 0.0;      // multiplies |M~^-1 U^T M^-1 x|
};

// Per-user online state. Single-owner mutable: drive one instance from one
// thread. The Cholesky factors always match the gram matrices; update() is
// the only mutator.
struct PolicyState {
  int round = 0;               // observations absorbed so far
  RealMatrix gram_full;        // lambda I_D + sum x x^T
  RealMatrix gram_coarse;      // lambda~ I_K + sum x~ x~^T
  RealVector reward_sum_full;    // sum y x
  RealVector reward_sum_coarse;  // sum y x~
  RealVector estimate_full;    // current w_t
  RealVector estimate_coarse;  // current w~_t

  // Raw history, kept for the periodic from-scratch gram rebuild.
  std::vector<RealVector> action_history;
  std::vector<double> reward_history;

  Eigen::LLT<RealMatrix> chol_full;
  Eigen::LLT<RealMatrix> chol_coarse;
};

PolicyState make_state(const PolicyConfig& cfg, const hierarchy::Hierarchy& h);

// Ridge least squares on the coarse level: M~^-1 * sum y x~.
RealVector coarse_estimate(const PolicyState& st, const hierarchy::Hierarchy& h,
                           const PolicyConfig& cfg);

// Full-space least squares regularized toward the lifted coarse estimate:
// M^-1 (sum y x + lambda U w~).
RealVector fine_estimate(const PolicyState& st, const RealVector& coarse,
                         const hierarchy::Hierarchy& h, const PolicyConfig& cfg);

// Confidence coefficients for the coarse-to-fine widths. By default uses the
// determinant-ratio form (the one consistent with the regret bound); the
// literal form is available behind cfg.literal_constants.
ConfidenceCoefficients confidence_coefficients(const PolicyState& st,
                                           const PolicyConfig& cfg);

// (full width c_t(x), coarse width c~_t(x)) for the configured variant.
// One-level variants place their whole width in the matching slot and zero
// the other.
std::pair<double, double> confidence_widths(const PolicyState& st,
                                            const RealVector& x,
                                            const hierarchy::Hierarchy& h,
                                            const PolicyConfig& cfg);

struct ActionScore {
  double mean = 0.0;
  double width_full = 0.0;
  double width_coarse = 0.0;
  double total() const { return mean + width_full + width_coarse; }
};

std::vector<ActionScore> score_actions(const PolicyState& st,
                                       std::span<const RealVector> contexts,
                                       const hierarchy::Hierarchy& h,
                                       const PolicyConfig& cfg);

// Optimistic selection: argmax of mean + widths, ties to the lowest index.
int select(const PolicyState& st, std::span<const RealVector> contexts,
           const hierarchy::Hierarchy& h, const PolicyConfig& cfg);

// Absorbs one observation and re-estimates (coarse first, then full).
void update(PolicyState& st, const RealVector& x, double y,
            const hierarchy::Hierarchy& h, const PolicyConfig& cfg);

// Closed-form estimate for the one-level baselines.
RealVector baseline_estimate(const PolicyState& st, const PolicyConfig& cfg,
                             const hierarchy::Hierarchy& h);

}  // namespace cofine::policy
