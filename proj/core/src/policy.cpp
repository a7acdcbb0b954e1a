#include "cofine/policy.hpp"

#include <cmath>
#include <string>

#include "cofine/errors.hpp"
#include "cofine/numerics.hpp"

namespace cofine::policy {

namespace {

constexpr struct {
  Variant variant;
  std::string_view name;
} kVariantNames[] = {
    {Variant::CoFine, "cofine"},
    {Variant::CoFineFocus, "cofine_focus"},
    {Variant::NaiveLinUCB, "naive"},
    {Variant::MeanRegularized, "mean_reg"},
    {Variant::Reshape, "reshape"},
    {Variant::SubspaceUCB, "subspace"},
};

bool is_coarse_to_fine(Variant v) {
  return v == Variant::CoFine || v == Variant::CoFineFocus;
}

bool is_one_level_full(Variant v) {
  return v == Variant::NaiveLinUCB || v == Variant::MeanRegularized ||
         v == Variant::Reshape;
}

double log_det_from_chol(const Eigen::LLT<RealMatrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double sqrt_clamped(double v) { return std::sqrt(std::max(0.0, v)); }

// sqrt(log(det(M)^1/2 * det(ridge I)^+-1/2 / delta)), clamped at zero. The
// ratio form (sign = -1) is the one consistent with the regret bound; the
// literal form uses sign = +1.
double variance_coefficient(double log_det, int dim, double ridge, double delta,
                            bool literal) {
  const double sign = literal ? 1.0 : -1.0;
  return sqrt_clamped(0.5 * log_det + sign * 0.5 * dim * std::log(ridge) +
                      std::log(1.0 / delta));
}

void refresh_factorizations(PolicyState& st) {
  st.chol_full.compute(st.gram_full);
  st.chol_coarse.compute(st.gram_coarse);
  if (st.chol_full.info() != Eigen::Success ||
      st.chol_coarse.info() != Eigen::Success)
    throw NonSpd("policy state gram matrix lost positive-definiteness");
}

void refresh_estimates(PolicyState& st, const hierarchy::Hierarchy& h,
                       const PolicyConfig& cfg) {
  switch (cfg.variant) {
    case Variant::CoFine:
    case Variant::CoFineFocus:
      st.estimate_coarse = coarse_estimate(st, h, cfg);
      st.estimate_full = fine_estimate(st, st.estimate_coarse, h, cfg);
      break;
    case Variant::NaiveLinUCB:
    case Variant::MeanRegularized:
    case Variant::Reshape:
      st.estimate_full = baseline_estimate(st, cfg, h);
      st.estimate_coarse.setZero(h.subspace_dim());
      break;
    case Variant::SubspaceUCB:
      st.estimate_coarse = baseline_estimate(st, cfg, h);
      // Lifted so the mean score is estimate_full . x for every variant.
      st.estimate_full = h.projection * st.estimate_coarse;
      break;
  }
}

void rebuild_grams_from_history(PolicyState& st, const hierarchy::Hierarchy& h,
                                const PolicyConfig& cfg) {
  const int dim = static_cast<int>(st.gram_full.rows());
  const int k = static_cast<int>(st.gram_coarse.rows());
  st.gram_full = cfg.lambda * RealMatrix::Identity(dim, dim);
  st.gram_coarse = cfg.lambda_tilde * RealMatrix::Identity(k, k);
  for (const RealVector& x : st.action_history) {
    st.gram_full = numerics::gram_rank1_update(st.gram_full, x);
    st.gram_coarse = numerics::gram_rank1_update(
        st.gram_coarse, RealVector(h.projection.transpose() * x));
  }
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& entry : kVariantNames)
    if (entry.variant == v) return entry.name;
  return "unknown";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (const auto& entry : kVariantNames)
    if (entry.name == name) return entry.variant;
  return std::nullopt;
}

PolicyConfig default_config(Variant v) {
  PolicyConfig cfg;
  cfg.variant = v;
  if (v == Variant::CoFineFocus) cfg.explore_scale = 0.25;
  return cfg;
}

PolicyState make_state(const PolicyConfig& cfg, const hierarchy::Hierarchy& h) {
  if (cfg.lambda <= 0.0 || cfg.lambda_tilde <= 0.0)
    throw Error("policy config: ridge weights must be positive");
  if (cfg.delta <= 0.0 || cfg.delta >= 1.0)
    throw Error("policy config: delta must lie in (0, 1)");
  if (cfg.explore_scale < 0.0)
    throw Error("policy config: explore_scale must be non-negative");
  if (cfg.variant == Variant::MeanRegularized && cfg.mean_profile &&
      cfg.mean_profile->size() != h.dim())
    throw DimensionMismatch("policy config: mean profile dimension mismatch");

  const int dim = h.dim();
  const int k = h.subspace_dim();
  PolicyState st;
  st.gram_full = cfg.lambda * RealMatrix::Identity(dim, dim);
  st.gram_coarse = cfg.lambda_tilde * RealMatrix::Identity(k, k);
  st.reward_sum_full = RealVector::Zero(dim);
  st.reward_sum_coarse = RealVector::Zero(k);
  refresh_factorizations(st);
  refresh_estimates(st, h, cfg);
  return st;
}

RealVector coarse_estimate(const PolicyState& st, const hierarchy::Hierarchy&,
                           const PolicyConfig&) {
  return st.chol_coarse.solve(st.reward_sum_coarse);
}

RealVector fine_estimate(const PolicyState& st, const RealVector& coarse,
                         const hierarchy::Hierarchy& h,
                         const PolicyConfig& cfg) {
  if (coarse.size() != h.subspace_dim())
    throw DimensionMismatch("fine_estimate: coarse estimate has wrong length");
  const RealVector target =
      st.reward_sum_full + cfg.lambda * (h.projection * coarse);
  return st.chol_full.solve(target);
}

ConfidenceCoefficients confidence_coefficients(const PolicyState& st,
                                           const PolicyConfig& cfg) {
  const int dim = static_cast<int>(st.gram_full.rows());
  const int k = static_cast<int>(st.gram_coarse.rows());
  ConfidenceCoefficients co;
  co.full_variance =
      variance_coefficient(log_det_from_chol(st.chol_full), dim, cfg.lambda,
                           cfg.delta, cfg.literal_constants);
  co.coarse_variance =
      cfg.lambda * variance_coefficient(log_det_from_chol(st.chol_coarse), k,
                                        cfg.lambda_tilde, cfg.delta,
                                        cfg.literal_constants);
  co.full_bias = std::sqrt(2.0 * cfg.lambda) * cfg.residual_norm_bound;
  co.coarse_bias = cfg.literal_constants
                       ? cfg.lambda * cfg.lambda_tilde * cfg.subspace_norm_bound
                       : cfg.lambda * std::sqrt(cfg.lambda_tilde) *
                             cfg.subspace_norm_bound;
  return co;
}

namespace {

std::pair<double, double> widths_with_coefficients(
    const PolicyState& st, const RealVector& x, const hierarchy::Hierarchy& h,
    const PolicyConfig& cfg, const ConfidenceCoefficients& co) {
  switch (cfg.variant) {
    case Variant::CoFine:
    case Variant::CoFineFocus: {
      const RealVector z = st.chol_full.solve(x);
      const double full = co.full_variance * sqrt_clamped(x.dot(z)) +
                          co.full_bias * z.norm();
      const RealVector p = h.projection.transpose() * z;
      const RealVector q = st.chol_coarse.solve(p);
      const double coarse = co.coarse_variance * sqrt_clamped(p.dot(q)) +
                            co.coarse_bias * q.norm();
      return {cfg.explore_scale * full, coarse};
    }
    case Variant::NaiveLinUCB:
    case Variant::MeanRegularized:
    case Variant::Reshape: {
      const RealVector z = st.chol_full.solve(x);
      const double full = co.full_variance * sqrt_clamped(x.dot(z)) +
                          co.full_bias * z.norm();
      return {cfg.explore_scale * full, 0.0};
    }
    case Variant::SubspaceUCB: {
      const RealVector xt = h.projection.transpose() * x;
      const RealVector q = st.chol_coarse.solve(xt);
      const double coarse = co.coarse_variance * sqrt_clamped(xt.dot(q)) +
                            co.coarse_bias * q.norm();
      return {0.0, coarse};
    }
  }
  return {0.0, 0.0};
}

// One-level variants reuse the coefficient slots: the regularized level's
// variance coefficient plus a bias coefficient built from the prior-gap bound.
ConfidenceCoefficients coefficients_for_variant(const PolicyState& st,
                                                const PolicyConfig& cfg) {
  if (is_coarse_to_fine(cfg.variant)) return confidence_coefficients(st, cfg);
  ConfidenceCoefficients co;
  if (is_one_level_full(cfg.variant)) {
    const int dim = static_cast<int>(st.gram_full.rows());
    co.full_variance =
        variance_coefficient(log_det_from_chol(st.chol_full), dim, cfg.lambda,
                             cfg.delta, /*literal=*/false);
    co.full_bias = std::sqrt(2.0 * cfg.lambda) * cfg.subspace_norm_bound;
  } else {  // SubspaceUCB: the coarse gram is the whole state
    const int k = static_cast<int>(st.gram_coarse.rows());
    co.coarse_variance =
        variance_coefficient(log_det_from_chol(st.chol_coarse), k,
                             cfg.lambda_tilde, cfg.delta, /*literal=*/false);
    // sqrt(lambda~) S~: the large-lambda limit of the coarse-to-fine bias
    // term, which keeps SubspaceUCB selection-equivalent to that limit.
    co.coarse_bias = std::sqrt(cfg.lambda_tilde) * cfg.subspace_norm_bound;
  }
  return co;
}

}  // namespace

std::pair<double, double> confidence_widths(const PolicyState& st,
                                            const RealVector& x,
                                            const hierarchy::Hierarchy& h,
                                            const PolicyConfig& cfg) {
  return widths_with_coefficients(st, x, h, cfg,
                                  coefficients_for_variant(st, cfg));
}

std::vector<ActionScore> score_actions(const PolicyState& st,
                                       std::span<const RealVector> contexts,
                                       const hierarchy::Hierarchy& h,
                                       const PolicyConfig& cfg) {
  if (contexts.empty()) throw EmptyContext("score_actions: no candidates");
  const ConfidenceCoefficients co = coefficients_for_variant(st, cfg);
  std::vector<ActionScore> scores;
  scores.reserve(contexts.size());
  for (const RealVector& x : contexts) {
    if (x.size() != h.dim())
      throw DimensionMismatch("score_actions: context dimension mismatch");
    const auto [full, coarse] = widths_with_coefficients(st, x, h, cfg, co);
    scores.push_back({st.estimate_full.dot(x), full, coarse});
  }
  return scores;
}

int select(const PolicyState& st, std::span<const RealVector> contexts,
           const hierarchy::Hierarchy& h, const PolicyConfig& cfg) {
  const std::vector<ActionScore> scores = score_actions(st, contexts, h, cfg);
  int best = 0;
  double best_score = scores[0].total();
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i].total() > best_score) {
      best = i;
      best_score = scores[i].total();
    }
  }
  return best;
}

void update(PolicyState& st, const RealVector& x, double y,
            const hierarchy::Hierarchy& h, const PolicyConfig& cfg) {
  if (x.size() != h.dim())
    throw DimensionMismatch("update: action dimension mismatch");
  if (!std::isfinite(y)) throw Error("update: reward is not finite");

  st.action_history.push_back(x);
  st.reward_history.push_back(y);
  st.round += 1;

  const RealVector xt = h.projection.transpose() * x;
  st.reward_sum_full += y * x;
  st.reward_sum_coarse += y * xt;

  if (st.round % 512 == 0) {
    // Periodic from-scratch rebuild bounds rank-1 accumulation drift.
    rebuild_grams_from_history(st, h, cfg);
  } else {
    st.gram_full = numerics::gram_rank1_update(st.gram_full, x);
    st.gram_coarse = numerics::gram_rank1_update(st.gram_coarse, xt);
  }

  refresh_factorizations(st);
  refresh_estimates(st, h, cfg);
}

RealVector baseline_estimate(const PolicyState& st, const PolicyConfig& cfg,
                             const hierarchy::Hierarchy&) {
  switch (cfg.variant) {
    case Variant::NaiveLinUCB:
    case Variant::Reshape:
      // Reshape sees transformed actions, so its closed form matches the
      // naive one in its own coordinates.
      return st.chol_full.solve(st.reward_sum_full);
    case Variant::MeanRegularized: {
      if (!cfg.mean_profile)
        throw MissingMeanProfile("mean-regularized estimate needs a mean profile");
      const RealVector target =
          st.reward_sum_full + cfg.lambda * (*cfg.mean_profile);
      return st.chol_full.solve(target);
    }
    case Variant::SubspaceUCB:
      return st.chol_coarse.solve(st.reward_sum_coarse);
    default:
      throw Error("baseline_estimate: variant is not a one-level baseline");
  }
}

}  // namespace cofine::policy
