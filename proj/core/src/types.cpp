#include "cofine/types.hpp"

namespace cofine {

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

bool all_finite(const RealVector& v) { return v.allFinite(); }

double max_abs(const RealMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace cofine
