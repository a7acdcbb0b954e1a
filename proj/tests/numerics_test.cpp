#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cofine/numerics.hpp"
#include "test_support.hpp"

using namespace cofine;
using namespace cofine::numerics;

TEST_CASE("spd_solve: identity returns the right-hand side") {
  const RealMatrix b = test::random_matrix(3, 2, 11);
  const RealMatrix x = spd_solve(RealMatrix::Identity(3, 3), b);
  CHECK(max_abs(x - b) < 1e-14);
}

TEST_CASE("spd_solve: diagonal inversion") {
  RealMatrix a = RealMatrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  RealVector b(2);
  b << 2.0, 4.0;
  const RealVector x = spd_solve(a, b);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spd_solve: residual oracle on random SPD systems") {
  for (const std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const int n = 4 + static_cast<int>(seed % 13);
    const RealMatrix a = test::random_spd(n, seed);
    const RealMatrix b = test::random_matrix(n, 3, seed + 100);
    const RealMatrix x = spd_solve(a, b);
    const double residual = max_abs(a * x - b);
    CHECK(residual <= 1e-8 * std::max(1.0, max_abs(b)));
  }
}

TEST_CASE("spd_solve: inputs unmodified") {
  const RealMatrix a = test::random_spd(5, 42);
  const RealMatrix b = test::random_matrix(5, 2, 43);
  RealMatrix a_copy = a, b_copy = b;
  spd_solve(a_copy, b_copy);
  CHECK(test::bitwise_equal(a, a_copy));
  CHECK(test::bitwise_equal(b, b_copy));
}

TEST_CASE("spd_solve: error paths") {
  const RealMatrix eye2 = RealMatrix::Identity(2, 2);
  const RealMatrix eye3 = RealMatrix::Identity(3, 3);

  RealMatrix indefinite = RealMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(spd_solve(indefinite, eye2), NonSpd);

  CHECK_THROWS_AS(spd_solve(eye3, eye2), DimensionMismatch);

  RealMatrix asym = eye2;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(spd_solve(asym, eye2), NotSymmetric);
}

TEST_CASE("psd_sqrt: identity and diagonal cases") {
  CHECK(max_abs(psd_sqrt(RealMatrix::Identity(4, 4)) -
                RealMatrix::Identity(4, 4)) < 1e-14);

  RealMatrix a = RealMatrix::Zero(2, 2);
  a(0, 0) = 4.0;
  a(1, 1) = 9.0;
  const RealMatrix s = psd_sqrt(a);
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(s(0, 1)) < 1e-14);
}

TEST_CASE("psd_sqrt: reconstruction oracle on random Gram matrices") {
  for (const std::uint32_t seed : {7u, 8u, 9u}) {
    const int n = 3 + static_cast<int>(seed % 6);
    const RealMatrix g = test::random_matrix(n, n, seed);
    const RealMatrix a = g * g.transpose();
    const RealMatrix s = psd_sqrt(a);
    CHECK(max_abs(s - s.transpose()) < 1e-12);
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(s);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK(max_abs(s * s - a) <= 1e-8 * std::max(1.0, max_abs(a)));
  }
}

TEST_CASE("psd_sqrt: clamps tiny negatives, rejects indefinite") {
  RealMatrix nearly = RealMatrix::Zero(2, 2);
  nearly(0, 0) = 1.0;
  nearly(1, 1) = -5e-11;
  const RealMatrix s = psd_sqrt(nearly);
  CHECK(s(1, 1) == 0.0);

  RealMatrix indefinite = RealMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1e-3;
  CHECK_THROWS_AS(psd_sqrt(indefinite), IndefiniteMatrix);
}

TEST_CASE("svd_top_k: diagonal and rank-1 cases") {
  RealMatrix a = RealMatrix::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const TopKSvd r = svd_top_k(a, 1);
  CHECK(r.values[0] == doctest::Approx(3.0));
  CHECK(r.vectors(0, 0) == doctest::Approx(1.0));  // sign-normalized to +e1
  CHECK(std::abs(r.vectors(1, 0)) < 1e-14);

  RealMatrix col(2, 1);
  col << 0.6, 0.8;
  const TopKSvd r1 = svd_top_k(col, 1);
  CHECK(r1.values[0] == doctest::Approx(1.0));
  CHECK(r1.vectors(0, 0) == doctest::Approx(0.6));
  CHECK(r1.vectors(1, 0) == doctest::Approx(0.8));
}

TEST_CASE("svd_top_k: orthonormality and eigendecomposition oracle") {
  const RealMatrix a = test::random_matrix(10, 7, 99);
  const TopKSvd r = svd_top_k(a, 4);

  const RealMatrix gram = r.vectors.transpose() * r.vectors;
  CHECK(max_abs(gram - RealMatrix::Identity(4, 4)) < 1e-10);

  // independent oracle: singular values are the square roots of the
  // eigenvalues of A A^T, descending
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(a * a.transpose());
  RealVector evals = eig.eigenvalues();  // ascending
  for (int i = 0; i < 4; ++i) {
    const double expected = std::sqrt(std::max(0.0, evals[evals.size() - 1 - i]));
    CHECK(r.values[i] == doctest::Approx(expected).epsilon(1e-10));
  }

  for (int i = 0; i + 1 < 4; ++i) CHECK(r.values[i] >= r.values[i + 1]);
  CHECK(r.values[3] >= 0.0);
}

TEST_CASE("svd_top_k: k out of range") {
  const RealMatrix a = test::random_matrix(4, 3, 5);
  CHECK_THROWS_AS(svd_top_k(a, 4), DimensionMismatch);
  CHECK_THROWS_AS(svd_top_k(a, 0), DimensionMismatch);
}

TEST_CASE("gram_rank1_update: hand cases") {
  RealVector e1 = RealVector::Zero(2);
  e1[0] = 1.0;
  const RealMatrix r = gram_rank1_update(RealMatrix::Zero(2, 2), e1);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 1) == 0.0);

  RealVector ones(2);
  ones << 1.0, 1.0;
  const RealMatrix r2 = gram_rank1_update(RealMatrix::Identity(2, 2), ones);
  CHECK(r2(0, 0) == 2.0);
  CHECK(r2(0, 1) == 1.0);
  CHECK(r2(1, 0) == 1.0);
  CHECK(r2(1, 1) == 2.0);
}

TEST_CASE("gram_rank1_update: batch recomputation oracle") {
  const int n = 6;
  const double lambda = 0.5;
  RealMatrix incremental = lambda * RealMatrix::Identity(n, n);
  RealMatrix batch = RealMatrix::Zero(n, n);
  for (int t = 0; t < 40; ++t) {
    const RealVector x = test::random_vector(n, 1000 + t);
    incremental = gram_rank1_update(incremental, x);
    batch += x * x.transpose();
  }
  batch += lambda * RealMatrix::Identity(n, n);
  CHECK(max_abs(incremental - batch) < 1e-10);
  CHECK(max_abs(incremental - incremental.transpose()) == 0.0);
}

TEST_CASE("gram_rank1_update: dimension mismatch") {
  CHECK_THROWS_AS(
      gram_rank1_update(RealMatrix::Identity(3, 3), RealVector::Zero(2)),
      DimensionMismatch);
}

TEST_CASE("log_det_spd matches the diagonal closed form") {
  RealMatrix a = RealMatrix::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  a(2, 2) = 4.0;
  CHECK(log_det_spd(a) ==
        doctest::Approx(std::log(2.0) + std::log(3.0) + std::log(4.0)));
}

TEST_CASE("numerical_rank and condition_number basics") {
  RealMatrix a(3, 3);
  a.setZero();
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  CHECK(numerical_rank(a) == 2);
  CHECK(std::isinf(condition_number(a)));
  a(2, 2) = 4.0;
  CHECK(numerical_rank(a) == 3);
  CHECK(condition_number(a) == doctest::Approx(4.0));
}
