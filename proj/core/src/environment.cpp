#include "cofine/environment.hpp"

#include <algorithm>
#include <cmath>

#include "cofine/errors.hpp"
#include "cofine/rng.hpp"

namespace cofine::env {

namespace {

// Stream tags keep the context / noise / construction draws independent.
constexpr std::uint64_t kContextTag = 0x11;
constexpr std::uint64_t kRewardTag = 0x22;
constexpr std::uint64_t kWstarTag = 0x33;
constexpr std::uint64_t kBasisTag = 0x44;
constexpr std::uint64_t kProfileTag = 0x55;
constexpr std::uint64_t kBetaTag = 0x66;

}  // namespace

std::vector<RealVector> gen_contexts(const EnvironmentSpec& spec, int round) {
  // Experiments configure at least two candidates; a singleton set is still
  // well-defined (forced choice) and used by degenerate-regret checks.
  if (spec.n_actions < 1)
    throw Error("gen_contexts: need at least one candidate action");
  const int dim = static_cast<int>(spec.true_weights.size());
  rng::Stream stream(spec.seed, kContextTag, static_cast<std::uint64_t>(round));
  std::vector<RealVector> contexts;
  contexts.reserve(spec.n_actions);
  for (int i = 0; i < spec.n_actions; ++i) {
    RealVector x = stream.on_unit_sphere(dim);
    if (spec.magnitude_jitter) x *= stream.uniform(0.5, 1.0);
    contexts.push_back(std::move(x));
  }
  return contexts;
}

double sample_reward(const EnvironmentSpec& spec, const RealVector& x,
                     int round) {
  if (x.size() != spec.true_weights.size())
    throw DimensionMismatch("sample_reward: action dimension mismatch");
  const double mean = spec.true_weights.dot(x);
  rng::Stream stream(spec.seed, kRewardTag, static_cast<std::uint64_t>(round));
  switch (spec.noise.kind) {
    case NoiseKind::Gaussian:
      return mean + spec.noise.sigma * stream.normal();
    case NoiseKind::Bernoulli: {
      const double p = std::clamp(mean, 0.0, 1.0);
      return stream.uniform01() < p ? 1.0 : 0.0;
    }
  }
  return mean;
}

std::pair<RealVector, hierarchy::Hierarchy> gen_synthetic_wstar(
    int dim, int subspace_dim, double beta, std::uint64_t seed) {
  if (subspace_dim < 1 || subspace_dim > dim)
    throw DimensionMismatch("gen_synthetic_wstar: K must be in [1, D]");
  if (beta < 0.0 || beta > 1.0)
    throw Error("gen_synthetic_wstar: beta must lie in [0, 1]");
  if (subspace_dim == dim && beta > 0.0)
    throw Error("gen_synthetic_wstar: no residual directions for K = D");

  rng::Stream stream(seed, kWstarTag);
  RealVector w = RealVector::Zero(dim);
  w.head(subspace_dim) =
      std::sqrt(1.0 - beta * beta) * stream.on_unit_sphere(subspace_dim);
  if (subspace_dim < dim)
    w.tail(dim - subspace_dim) = beta * stream.on_unit_sphere(dim - subspace_dim);

  hierarchy::Hierarchy h;
  h.projection = RealMatrix::Identity(dim, subspace_dim);
  h.omega = RealMatrix::Identity(subspace_dim, subspace_dim);
  return {std::move(w), std::move(h)};
}

PopulationBasis population_basis(const PopulationSpec& spec,
                                 std::uint64_t seed) {
  const int dim = spec.dim;
  const int k = spec.true_subspace_dim;
  if (k < 1 || k > dim)
    throw DimensionMismatch("population_basis: K_true must be in [1, D]");

  rng::Stream stream(seed, kBasisTag);
  RealMatrix g(dim, dim);
  for (int j = 0; j < dim; ++j) g.col(j) = stream.gaussian_vector(dim);

  Eigen::HouseholderQR<RealMatrix> qr(g);
  RealMatrix q = qr.householderQ();
  const RealMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);

  return {q.leftCols(k), q.rightCols(dim - k)};
}

RealVector sample_population_member(const PopulationSpec& spec, double beta,
                                    std::uint64_t seed, std::uint64_t index) {
  if (beta < 0.0 || beta > 1.0)
    throw Error("sample_population_member: beta must lie in [0, 1]");
  if (spec.norm <= 0.0)
    throw Error("sample_population_member: norm must be positive");
  const PopulationBasis basis = population_basis(spec, seed);
  const int residual_dims = spec.dim - spec.true_subspace_dim;
  if (residual_dims == 0 && beta > 0.0)
    throw Error("sample_population_member: no residual directions");

  rng::Stream stream(seed, kProfileTag, index);
  RealVector w = std::sqrt(1.0 - beta * beta) *
                 (basis.subspace * stream.on_unit_sphere(spec.true_subspace_dim));
  if (residual_dims > 0)
    w += beta * (basis.complement * stream.on_unit_sphere(residual_dims));
  return RealVector(w * (spec.norm / w.norm()));
}

hierarchy::ProfileSet gen_profile_population(const PopulationSpec& spec,
                                             std::uint64_t seed) {
  if (spec.count < 1)
    throw Error("gen_profile_population: need at least one profile");
  if (spec.beta_min < 0.0 || spec.beta_max > 1.0 || spec.beta_min > spec.beta_max)
    throw Error("gen_profile_population: invalid beta range");

  RealMatrix w(spec.dim, spec.count);
  for (int i = 0; i < spec.count; ++i) {
    rng::Stream beta_stream(seed, kBetaTag, static_cast<std::uint64_t>(i));
    const double beta = beta_stream.uniform(spec.beta_min, spec.beta_max);
    w.col(i) = sample_population_member(spec, beta, seed,
                                        static_cast<std::uint64_t>(i));
  }
  return hierarchy::make_profile_set(std::move(w));
}

std::pair<int, double> best_action_value(const EnvironmentSpec& spec,
                                         std::span<const RealVector> contexts) {
  if (contexts.empty()) throw EmptyContext("best_action_value: no candidates");
  int best = 0;
  double best_value = spec.true_weights.dot(contexts[0]);
  for (int i = 1; i < static_cast<int>(contexts.size()); ++i) {
    const double value = spec.true_weights.dot(contexts[i]);
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  return {best, best_value};
}

}  // namespace cofine::env
