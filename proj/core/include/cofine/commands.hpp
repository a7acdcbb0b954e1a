#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <vector>

namespace cofine::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;    // malformed input / config error
inline constexpr int kExitRank = 3;     // rank-deficient profile matrix
inline constexpr int kExitRuntime = 4;  // runtime failure

struct LearnUOptions {
  std::filesystem::path profiles_csv;
  int subspace_dim = 5;
  bool ridge = false;
  std::filesystem::path out_dir;
};

// Trains the projection from a profile CSV; writes U.csv, U0.csv, omega.csv,
// singular_values.csv and prints the Frobenius check plus per-profile
// residual norms.
int cmd_learn_u(const LearnUOptions& opt, std::ostream& out = std::cout,
                std::ostream& err = std::cerr);

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  // command-line overrides applied after the config file
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> horizon;
};

// Runs the configured protocol; writes trace CSVs, aggregate CSVs, a plot and
// a manifest sufficient to reproduce the outputs bit-identically.
int cmd_simulate(const SimulateOptions& opt, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);

struct ReportOptions {
  std::vector<std::filesystem::path> traces;
  std::filesystem::path out_dir;
};

// Merges trace CSVs sharing the schema into a comparison table (final mean
// regret per policy, pairwise win/tie/loss counts over paired trials) and a
// plot.
int cmd_report(const ReportOptions& opt, std::ostream& out = std::cout,
               std::ostream& err = std::cerr);

}  // namespace cofine::cli
