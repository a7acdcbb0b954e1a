#pragma once

#include <stdexcept>
#include <string>

namespace cofine {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerics
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonSpd : Error {
  using Error::Error;
};
struct NotSymmetric : Error {
  using Error::Error;
};
struct IndefiniteMatrix : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};

// hierarchy
struct RankDeficient : Error {
  RankDeficient(const std::string& msg, int rank) : Error(msg), rank(rank) {}
  int rank;
};
struct DegenerateProjection : Error {
  using Error::Error;
};
struct SingularProjection : Error {
  using Error::Error;
};

// policies
struct MissingMeanProfile : Error {
  using Error::Error;
};
struct EmptyContext : Error {
  using Error::Error;
};

// config / IO layer
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace cofine
