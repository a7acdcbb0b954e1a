#pragma once

#include <Eigen/Dense>

namespace cofine {

// Dense double-precision substrate for all estimates. Row/column counts and
// entry finiteness are the only invariants callers may rely on.
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

bool all_finite(const RealMatrix& m);
bool all_finite(const RealVector& v);

// Largest absolute entry; 0 for empty.
double max_abs(const RealMatrix& m);

}  // namespace cofine
