#pragma once

#include "cofine/errors.hpp"
#include "cofine/types.hpp"

namespace cofine::numerics {

// Symmetry tolerance applied by the SPD/PSD entry points, relative to
// max(1, |A|_max).
inline constexpr double kSymmetryTol = 1e-9;

// Throws NotSymmetric if |A - A^T|_max exceeds tol * max(1, |A|_max).
void require_symmetric(const RealMatrix& a, double tol = kSymmetryTol);

// Solves A X = B for symmetric positive-definite A via Cholesky.
// Residual satisfies |A X - B|_max <= 1e-8 * max(1, |B|_max).
RealMatrix spd_solve(const RealMatrix& a, const RealMatrix& b);
RealVector spd_solve(const RealMatrix& a, const RealVector& b);

// Symmetric PSD square root: returns S with S S ~= A. Eigenvalues in
// [-1e-10, 0) are clamped to 0; anything below -1e-6 is IndefiniteMatrix.
RealMatrix psd_sqrt(const RealMatrix& a);

struct TopKSvd {
  RealMatrix vectors;  // left singular vectors, one per column, descending
  RealVector values;   // top-k singular values
};

// Top-k left singular vectors and values. Columns are orthonormal and
// sign-normalized so each column's largest-magnitude entry is positive.
TopKSvd svd_top_k(const RealMatrix& a, int k);

// All singular values of a, descending.
RealVector singular_values(const RealMatrix& a);

// Numerical rank: count of singular values above max(rows, cols) * eps * s_max.
int numerical_rank(const RealMatrix& a);

// sigma_max / sigma_min; infinity when singular.
double condition_number(const RealMatrix& a);

// M + x x^T (symmetric when M is).
RealMatrix gram_rank1_update(const RealMatrix& m, const RealVector& x);

// log det of a symmetric positive-definite matrix via Cholesky.
double log_det_spd(const RealMatrix& a);

}  // namespace cofine::numerics
