#include "cofine/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cofine/numerics.hpp"

namespace cofine::hierarchy {

ProfileSet make_profile_set(RealMatrix profiles) {
  if (profiles.rows() < 1 || profiles.cols() < 1)
    throw DimensionMismatch("profile set must be at least 1x1");
  if (!all_finite(profiles))
    throw Error("profile set contains non-finite entries");
  for (int j = 0; j < profiles.cols(); ++j) {
    if (profiles.col(j).cwiseAbs().maxCoeff() == 0.0)
      throw Error("profile " + std::to_string(j) + " is all-zero");
  }
  return ProfileSet{std::move(profiles)};
}

RealMatrix solve_omega(const RealMatrix& u0, const RealMatrix& w) {
  if (u0.rows() != w.rows())
    throw DimensionMismatch("solve_omega: dimension mismatch between U0 and W");
  const int k = static_cast<int>(u0.cols());
  const RealMatrix coarse = u0.transpose() * w;  // W0, K x N
  const RealMatrix root = numerics::psd_sqrt(coarse * coarse.transpose());
  const double tr = root.trace();
  if (tr < 1e-12)
    throw DegenerateProjection("solve_omega: profiles vanish in the subspace");
  return RealMatrix(root * (static_cast<double>(k) / tr));
}

LearnUDetails learn_u_detailed(const ProfileSet& profiles, int k, bool ridge) {
  const int dim = profiles.dim();
  const int count = profiles.count();
  if (k < 1 || k > dim)
    throw DimensionMismatch("learn_u: K must be in [1, D]");

  RealMatrix w = profiles.profiles;
  if (ridge) {
    // Axis-aligned ridge: guarantees rank D regardless of the profile count.
    RealMatrix augmented(dim, count + dim);
    augmented.leftCols(count) = w;
    augmented.rightCols(dim) = RealMatrix::Identity(dim, dim);
    w = std::move(augmented);
  } else {
    const int rank = numerics::numerical_rank(w);
    if (rank < k)
      throw RankDeficient("learn_u: profiles have rank " + std::to_string(rank) +
                              " < K = " + std::to_string(k) +
                              " (use the ridge to proceed)",
                          rank);
  }

  numerics::TopKSvd svd = numerics::svd_top_k(w, k);
  LearnUDetails details;
  details.hierarchy.omega = solve_omega(svd.vectors, w);
  details.hierarchy.projection =
      svd.vectors * numerics::psd_sqrt(details.hierarchy.omega);
  details.basis = std::move(svd.vectors);
  details.singular_values = std::move(svd.values);
  return details;
}

Hierarchy learn_u(const ProfileSet& profiles, int k, bool ridge) {
  return learn_u_detailed(profiles, k, ridge).hierarchy;
}

Decomposition decompose(const RealVector& w, const Hierarchy& h) {
  if (w.size() != h.dim())
    throw DimensionMismatch("decompose: vector dimension mismatch");
  const RealMatrix gram = h.projection.transpose() * h.projection;
  Eigen::LLT<RealMatrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SingularProjection("decompose: U^T U is not positive-definite");
  const RealVector diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() < 1e-14 * std::max(1.0, diag.maxCoeff()))
    throw SingularProjection("decompose: U^T U is numerically singular");

  Decomposition d;
  d.subspace_coeff = llt.solve((h.projection.transpose() * w).eval());
  d.residual = w - h.projection * d.subspace_coeff;
  d.subspace_norm = d.subspace_coeff.norm();
  d.residual_norm = d.residual.norm();
  return d;
}

RealMatrix learn_reshape(const ProfileSet& profiles) {
  return learn_u(profiles, profiles.dim(), /*ridge=*/true).projection;
}

ProfileSet reshape_profiles(const ProfileSet& profiles, const RealMatrix& u_d) {
  if (u_d.rows() != profiles.dim())
    throw DimensionMismatch("reshape_profiles: transform dimension mismatch");
  const RealMatrix gram = u_d.transpose() * u_d;
  Eigen::LLT<RealMatrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SingularProjection("reshape_profiles: U_D^T U_D not positive-definite");
  RealMatrix reshaped = llt.solve(u_d.transpose() * profiles.profiles);
  return make_profile_set(std::move(reshaped));
}

}  // namespace cofine::hierarchy
