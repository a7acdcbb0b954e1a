#include "cofine/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cofine/errors.hpp"

namespace cofine::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

double parse_field_double(const std::string& field, const std::string& where) {
  double out = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw IoError(where + ": expected a number, got '" + field + "'");
  return out;
}

long long parse_field_int(const std::string& field, const std::string& where) {
  long long out = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw IoError(where + ": expected an integer, got '" + field + "'");
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

constexpr char kTraceHeader[] = "policy,trial,round,inst_regret,cum_regret,covered";

}  // namespace

std::string format_double(double v) {
  // Shortest fixed set of digits that round-trips exactly.
  char buffer[40];
  for (const int precision : {15, 16, 17}) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, v);
    double back = 0.0;
    std::sscanf(buffer, "%lf", &back);
    if (back == v || (std::isnan(back) && std::isnan(v))) return buffer;
  }
  return buffer;
}

hierarchy::ProfileSet read_profiles_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile CSV: " + path.string());

  std::string line;
  if (!std::getline(in, line))
    throw IoError("profile CSV is empty: " + path.string());
  const std::vector<std::string> header = split_csv_line(strip_cr(line));
  const int dim = static_cast<int>(header.size());
  for (int j = 0; j < dim; ++j) {
    if (header[j] != "d" + std::to_string(j))
      throw IoError("profile CSV header must be d0,d1,...: bad column '" +
                    header[j] + "'");
  }

  std::vector<RealVector> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim)
      throw IoError("profile CSV line " + std::to_string(line_no) + ": expected " +
                    std::to_string(dim) + " fields");
    RealVector row(dim);
    for (int j = 0; j < dim; ++j)
      row[j] = parse_field_double(fields[j],
                                  "profile CSV line " + std::to_string(line_no));
    if (!all_finite(row))
      throw IoError("profile CSV line " + std::to_string(line_no) +
                    ": non-finite entry");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("profile CSV has no data rows: " + path.string());

  RealMatrix w(dim, static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) w.col(i) = rows[i];
  return hierarchy::make_profile_set(std::move(w));
}

void write_profiles_csv(const std::filesystem::path& path,
                        const hierarchy::ProfileSet& profiles) {
  std::ofstream out = open_for_write(path);
  for (int j = 0; j < profiles.dim(); ++j) {
    if (j) out << ',';
    out << 'd' << j;
  }
  out << '\n';
  for (int i = 0; i < profiles.count(); ++i) {
    for (int j = 0; j < profiles.dim(); ++j) {
      if (j) out << ',';
      out << format_double(profiles.profiles(j, i));
    }
    out << '\n';
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& m) {
  std::ofstream out = open_for_write(path);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

RealMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix CSV: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields)
      row.push_back(
          parse_field_double(f, "matrix CSV line " + std::to_string(line_no)));
    if (!rows.empty() && rows[0].size() != row.size())
      throw IoError("matrix CSV line " + std::to_string(line_no) +
                    ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("matrix CSV is empty: " + path.string());
  RealMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_traces_csv(const std::filesystem::path& path,
                      std::span<const harness::TrialRecord> trials) {
  std::ofstream out = open_for_write(path);
  out << kTraceHeader << '\n';
  for (const harness::TrialRecord& record : trials) {
    const harness::RegretTrace& trace = record.trace;
    for (int t = 0; t < trace.rounds(); ++t) {
      out << record.policy << ',' << record.trial << ',' << (t + 1) << ','
          << format_double(trace.instantaneous[t]) << ','
          << format_double(trace.cumulative[t]) << ','
          << (trace.covered[t] ? 1 : 0) << '\n';
    }
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

std::vector<harness::TrialRecord> read_traces_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kTraceHeader)
    throw IoError("trace CSV has wrong schema: " + path.string());

  std::vector<harness::TrialRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where =
        path.string() + " line " + std::to_string(line_no);
    if (fields.size() != 6) throw IoError(where + ": expected 6 fields");

    const std::string& policy = fields[0];
    const int trial = static_cast<int>(parse_field_int(fields[1], where));
    const int round = static_cast<int>(parse_field_int(fields[2], where));
    const double inst = parse_field_double(fields[3], where);
    const double cum = parse_field_double(fields[4], where);
    const long long covered = parse_field_int(fields[5], where);
    if (covered != 0 && covered != 1)
      throw IoError(where + ": covered flag must be 0 or 1");

    if (records.empty() || records.back().policy != policy ||
        records.back().trial != trial) {
      if (round != 1)
        throw IoError(where + ": trace does not start at round 1");
      records.push_back(harness::TrialRecord{policy, trial, {}});
    } else if (round != records.back().trace.rounds() + 1) {
      throw IoError(where + ": rounds are not contiguous");
    }
    harness::RegretTrace& trace = records.back().trace;
    trace.instantaneous.push_back(inst);
    trace.cumulative.push_back(cum);
    trace.covered.push_back(static_cast<std::uint8_t>(covered));
  }
  if (records.empty()) throw IoError("trace CSV has no rows: " + path.string());
  return records;
}

void write_aggregates_csv(const std::filesystem::path& path,
                          std::span<const harness::PolicyAggregate> aggregates) {
  std::ofstream out = open_for_write(path);
  out << "policy,round,mean_cum_regret,stderr\n";
  for (const harness::PolicyAggregate& agg : aggregates) {
    for (std::size_t t = 0; t < agg.mean_cumulative.size(); ++t) {
      out << agg.policy << ',' << (t + 1) << ','
          << format_double(agg.mean_cumulative[t]) << ','
          << format_double(agg.stderr_cumulative[t]) << '\n';
    }
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

void write_bounds_csv(const std::filesystem::path& path,
                      std::span<const harness::PolicyAggregate> aggregates) {
  std::ofstream out = open_for_write(path);
  out << "policy,round,bound\n";
  for (const harness::PolicyAggregate& agg : aggregates) {
    for (std::size_t t = 0; t < agg.bound_overlay.size(); ++t) {
      out << agg.policy << ',' << (t + 1) << ','
          << format_double(agg.bound_overlay[t]) << '\n';
    }
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

}  // namespace cofine::io
