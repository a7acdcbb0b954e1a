#pragma once

#include <optional>

#include "cofine/errors.hpp"
#include "cofine/types.hpp"

namespace cofine::hierarchy {

// A set of previously learned user profiles, one per column of W (D x N).
struct ProfileSet {
  RealMatrix profiles;  // D x N

  int dim() const { return static_cast<int>(profiles.rows()); }
  int count() const { return static_cast<int>(profiles.cols()); }
};

// Validates finiteness and that no profile is all-zero.
ProfileSet make_profile_set(RealMatrix profiles);

// Two-level coarse-to-fine feature hierarchy. `projection` (D x K) maps
// full-space features into the coarse subspace via x~ = U^T x. Its columns
// are generally not orthonormal: the subspace basis is scaled by the square
// root of `omega` so that typical profiles have small coarse coefficients,
// under the constraint |U|_Fro^2 = K.
struct Hierarchy {
  RealMatrix projection;                // U, D x K
  RealMatrix omega;                     // K x K, symmetric PSD, trace K
  std::optional<RealMatrix> reshape;    // U_D, D x D full-space transform

  int dim() const { return static_cast<int>(projection.rows()); }
  int subspace_dim() const { return static_cast<int>(projection.cols()); }
};

// Split of a preference vector w into its coarse coefficient and the residual
// orthogonal to the subspace: w = U w~ + w_perp.
struct Decomposition {
  RealVector subspace_coeff;   // w~, length K
  RealVector residual;         // w_perp, length D
  double subspace_norm = 0.0;  // |w~|
  double residual_norm = 0.0;  // |w_perp|
};

// Trace-normalized PSD scaling for the subspace basis: with W0 = U0^T W,
// returns omega = K * sqrt(W0 W0^T) / trace(sqrt(W0 W0^T)). This is the
// minimizer of sum_w w0^T omega^-1 w0 over PSD omega with trace K.
RealMatrix solve_omega(const RealMatrix& u0, const RealMatrix& w);

// Learns the projection: U = U0 * omega^(1/2) where U0 holds the top-K left
// singular vectors of W (sign-normalized). With `ridge`, W is augmented to
// [W, I_D] first so any K <= D is attainable regardless of profile rank.
Hierarchy learn_u(const ProfileSet& profiles, int k, bool ridge = false);

// learn_u plus the intermediate factorization artifacts, for inspection and
// serialization.
struct LearnUDetails {
  Hierarchy hierarchy;
  RealMatrix basis;            // U0, D x K orthonormal
  RealVector singular_values;  // top-K singular values of the (augmented) W
};
LearnUDetails learn_u_detailed(const ProfileSet& profiles, int k,
                               bool ridge = false);

// Least-squares split of w against h.projection: coeff = (U^T U)^-1 U^T w,
// residual = w - U coeff.
Decomposition decompose(const RealVector& w, const Hierarchy& h);

// Full-rank D x D reshaping transform: learn_u with K = D and the identity
// ridge forced.
RealMatrix learn_reshape(const ProfileSet& profiles);

// Profiles expressed in reshaped coordinates: W_hat = (U_D^T U_D)^-1 U_D^T W.
ProfileSet reshape_profiles(const ProfileSet& profiles, const RealMatrix& u_d);

}  // namespace cofine::hierarchy
