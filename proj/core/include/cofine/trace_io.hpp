#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cofine/harness.hpp"
#include "cofine/hierarchy.hpp"
#include "cofine/types.hpp"

namespace cofine::io {

// Shortest representation that round-trips a double exactly.
std::string format_double(double v);

// Profile CSV: header d0,...,d{D-1}, one profile per data row.
hierarchy::ProfileSet read_profiles_csv(const std::filesystem::path& path);
void write_profiles_csv(const std::filesystem::path& path,
                        const hierarchy::ProfileSet& profiles);

// Headerless numeric CSV, one matrix row per line.
void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& m);
RealMatrix read_matrix_csv(const std::filesystem::path& path);

// Trace CSV: policy,trial,round,inst_regret,cum_regret,covered
void write_traces_csv(const std::filesystem::path& path,
                      std::span<const harness::TrialRecord> trials);
std::vector<harness::TrialRecord> read_traces_csv(
    const std::filesystem::path& path);

// Aggregate CSV: policy,round,mean_cum_regret,stderr
void write_aggregates_csv(const std::filesystem::path& path,
                          std::span<const harness::PolicyAggregate> aggregates);

// Bound overlay CSV: policy,round,bound (only aggregates that carry one).
void write_bounds_csv(const std::filesystem::path& path,
                      std::span<const harness::PolicyAggregate> aggregates);

}  // namespace cofine::io
