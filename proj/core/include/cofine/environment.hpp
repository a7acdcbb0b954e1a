#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cofine/hierarchy.hpp"
#include "cofine/types.hpp"

namespace cofine::env {

enum class NoiseKind { Gaussian, Bernoulli };

struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma = 0.1;  // Gaussian std; ignored for Bernoulli
};

// Hidden truth for a simulated user. All draws are pure functions of
// (seed, round), so replays are bit-identical and policies sharing a seed see
// the same context/noise stream.
struct EnvironmentSpec {
  RealVector true_weights;  // w*
  NoiseModel noise;
  int n_actions = 20;
  std::uint64_t seed = 0;
  // Scale each candidate by an independent uniform [0.5, 1] magnitude instead
  // of leaving all candidates on the sphere.
  bool magnitude_jitter = false;
};

// Candidate actions for one round: n_actions directions drawn uniformly on
// the unit sphere (|x| <= 1 always).
std::vector<RealVector> gen_contexts(const EnvironmentSpec& spec, int round);

// One reward draw: Gaussian w*.x + N(0, sigma^2), or Bernoulli with mean
// clip(w*.x, 0, 1). The noise stream depends only on (seed, round).
double sample_reward(const EnvironmentSpec& spec, const RealVector& x, int round);

// Unit-norm preference with an exact residual split: the projection onto the
// leading-K coordinate subspace has norm sqrt(1 - beta^2) and the complement
// has norm beta. Also returns the hierarchy spanning that subspace.
std::pair<RealVector, hierarchy::Hierarchy> gen_synthetic_wstar(
    int dim, int subspace_dim, double beta, std::uint64_t seed);

// Synthetic population: profiles share one random K_true-dimensional
// subspace; per-profile residual magnitudes are uniform in [beta_min, beta_max].
struct PopulationSpec {
  int dim = 25;
  int true_subspace_dim = 5;
  int count = 40;
  double beta_min = 0.0;
  double beta_max = 0.5;
  double norm = 1.0;  // exact norm of every generated profile
};

hierarchy::ProfileSet gen_profile_population(const PopulationSpec& spec,
                                             std::uint64_t seed);

// Orthonormal basis (D x K_true) of the population's shared subspace, and its
// orthonormal complement. Pure function of (spec, seed).
struct PopulationBasis {
  RealMatrix subspace;    // D x K_true
  RealMatrix complement;  // D x (D - K_true)
};
PopulationBasis population_basis(const PopulationSpec& spec, std::uint64_t seed);

// One member aligned with the population's shared subspace, residual
// magnitude beta, scaled to spec.norm. `index` separates draw streams.
RealVector sample_population_member(const PopulationSpec& spec, double beta,
                                    std::uint64_t seed, std::uint64_t index);

// Exhaustive argmax of w*.x over the candidate list; ties to lowest index.
std::pair<int, double> best_action_value(const EnvironmentSpec& spec,
                                         std::span<const RealVector> contexts);

}  // namespace cofine::env
