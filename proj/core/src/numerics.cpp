#include "cofine/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace cofine::numerics {

namespace {

void require_square(const RealMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw DimensionMismatch(std::string(who) + ": matrix must be square");
}

}  // namespace

void require_symmetric(const RealMatrix& a, double tol) {
  require_square(a, "require_symmetric");
  const double scale = std::max(1.0, max_abs(a));
  const double dev = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (dev > tol * scale)
    throw NotSymmetric("matrix is not symmetric: max asymmetry " +
                       std::to_string(dev));
}

RealMatrix spd_solve(const RealMatrix& a, const RealMatrix& b) {
  require_square(a, "spd_solve");
  if (a.rows() != b.rows())
    throw DimensionMismatch("spd_solve: row counts differ");
  require_symmetric(a);
  Eigen::LLT<RealMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NonSpd("spd_solve: Cholesky failed (pivot <= 0)");
  return llt.solve(b);
}

RealVector spd_solve(const RealMatrix& a, const RealVector& b) {
  RealMatrix result = spd_solve(a, RealMatrix(b));
  return RealVector(result.col(0));
}

RealMatrix psd_sqrt(const RealMatrix& a) {
  require_square(a, "psd_sqrt");
  require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(a);
  if (eig.info() != Eigen::Success)
    throw NoConvergence("psd_sqrt: eigendecomposition failed");
  RealVector evals = eig.eigenvalues();
  for (int i = 0; i < evals.size(); ++i) {
    if (evals[i] < -1e-6)
      throw IndefiniteMatrix("psd_sqrt: eigenvalue " + std::to_string(evals[i]));
    if (evals[i] < 0.0) evals[i] = 0.0;  // finite-precision PSD clamp
  }
  const RealVector roots = evals.cwiseSqrt();
  RealMatrix s = eig.eigenvectors() * roots.asDiagonal() *
                 eig.eigenvectors().transpose();
  return RealMatrix((s + s.transpose()) / 2.0);
}

TopKSvd svd_top_k(const RealMatrix& a, int k) {
  const int max_rank = static_cast<int>(std::min(a.rows(), a.cols()));
  if (k < 1 || k > max_rank)
    throw DimensionMismatch("svd_top_k: k = " + std::to_string(k) +
                            " outside [1, " + std::to_string(max_rank) + "]");
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success)
    throw NoConvergence("svd_top_k: decomposition did not converge");

  TopKSvd out;
  out.vectors = svd.matrixU().leftCols(k);
  out.values = svd.singularValues().head(k);

  // Fix each column's sign so its largest-magnitude entry is positive; keeps
  // the factorization deterministic across platforms.
  for (int j = 0; j < k; ++j) {
    int at = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&at);
    if (out.vectors(at, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

RealVector singular_values(const RealMatrix& a) {
  Eigen::JacobiSVD<RealMatrix> svd(a);
  return svd.singularValues();
}

int numerical_rank(const RealMatrix& a) {
  const RealVector sv = singular_values(a);
  if (sv.size() == 0) return 0;
  const double tol = std::max(a.rows(), a.cols()) *
                     std::numeric_limits<double>::epsilon() * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  return rank;
}

double condition_number(const RealMatrix& a) {
  const RealVector sv = singular_values(a);
  if (sv.size() == 0 || sv[sv.size() - 1] <= 0.0)
    return std::numeric_limits<double>::infinity();
  return sv[0] / sv[sv.size() - 1];
}

RealMatrix gram_rank1_update(const RealMatrix& m, const RealVector& x) {
  require_square(m, "gram_rank1_update");
  if (m.rows() != x.size())
    throw DimensionMismatch("gram_rank1_update: vector length mismatch");
  return m + x * x.transpose();
}

double log_det_spd(const RealMatrix& a) {
  require_square(a, "log_det_spd");
  Eigen::LLT<RealMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NonSpd("log_det_spd: matrix is not positive-definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace cofine::numerics
