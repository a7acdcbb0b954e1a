#include "cofine/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "cofine/config.hpp"
#include "cofine/errors.hpp"
#include "cofine/harness.hpp"
#include "cofine/hierarchy.hpp"
#include "cofine/numerics.hpp"
#include "cofine/svg_plot.hpp"
#include "cofine/trace_io.hpp"
#include "cofine/version.hpp"

namespace cofine::cli {

namespace {

std::string tag_suffix(const std::string& tag) {
  if (tag.empty()) return "";
  std::string s = "_" + tag;
  std::replace(s.begin(), s.end(), '=', '_');
  return s;
}

double tag_param(const std::string& tag) {
  const std::size_t eq = tag.find('=');
  if (eq == std::string::npos) return 0.0;
  return std::atof(tag.c_str() + eq + 1);
}

void write_manifest(const std::filesystem::path& out_dir,
                    const harness::ExperimentConfig& cfg,
                    const std::vector<std::string>& artifacts) {
  config::KeyValues kv = config::materialize(cfg);
  std::string joined;
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    if (i) joined += ',';
    joined += artifacts[i];
  }
  kv.set("artifacts", joined);
  std::ofstream out(out_dir / "manifest.cfg", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + out_dir.string());
  out << kv.serialize();
  if (!out.good()) throw IoError("manifest write failed");
}

void write_summary(const std::filesystem::path& path,
                   const harness::ExperimentReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "tag,policy,final_mean_cum_regret,final_stderr,traces\n";
  for (const harness::ExperimentResult& result : report.results) {
    for (const harness::PolicyAggregate& agg : result.aggregates) {
      out << result.tag << ',' << agg.policy << ','
          << io::format_double(agg.final_mean) << ','
          << io::format_double(agg.final_stderr) << ',' << agg.trace_count
          << '\n';
    }
  }
  if (!out.good()) throw IoError("write failed: " + path.string());
}

void write_plot(const std::filesystem::path& path,
                const harness::ExperimentReport& report) {
  std::vector<plot::Series> series;
  plot::ChartOptions options;
  if (report.results.size() == 1) {
    const harness::ExperimentResult& result = report.results[0];
    for (const harness::PolicyAggregate& agg : result.aggregates) {
      plot::Series s;
      s.label = agg.policy;
      s.xs.resize(agg.mean_cumulative.size());
      for (std::size_t t = 0; t < s.xs.size(); ++t)
        s.xs[t] = static_cast<double>(t + 1);
      s.ys = agg.mean_cumulative;
      series.push_back(std::move(s));
      if (!agg.bound_overlay.empty()) {
        plot::Series b;
        b.label = agg.policy + " bound";
        b.dashed = true;
        b.xs.resize(agg.bound_overlay.size());
        for (std::size_t t = 0; t < b.xs.size(); ++t)
          b.xs[t] = static_cast<double>(t + 1);
        b.ys = agg.bound_overlay;
        series.push_back(std::move(b));
      }
    }
    options.title = "Mean cumulative regret";
    options.x_label = "round";
    options.y_label = "cumulative regret";
  } else {
    // sweep: final regret per policy against the swept parameter
    std::map<std::string, plot::Series> by_policy;
    for (const harness::ExperimentResult& result : report.results) {
      const double param = tag_param(result.tag);
      for (const harness::PolicyAggregate& agg : result.aggregates) {
        plot::Series& s = by_policy[agg.policy];
        s.label = agg.policy;
        s.xs.push_back(param);
        s.ys.push_back(agg.final_mean);
      }
    }
    for (auto& [name, s] : by_policy) series.push_back(std::move(s));
    const std::string& tag = report.results[0].tag;
    options.title = "Final regret across the sweep";
    options.x_label = tag.substr(0, tag.find('='));
    options.y_label = "final mean cumulative regret";
  }
  plot::write_line_chart(path, series, options);
}

}  // namespace

int cmd_learn_u(const LearnUOptions& opt, std::ostream& out, std::ostream& err) {
  hierarchy::ProfileSet profiles{RealMatrix()};
  try {
    profiles = io::read_profiles_csv(opt.profiles_csv);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    const hierarchy::LearnUDetails details =
        hierarchy::learn_u_detailed(profiles, opt.subspace_dim, opt.ridge);
    const hierarchy::Hierarchy& h = details.hierarchy;

    std::filesystem::create_directories(opt.out_dir);
    io::write_matrix_csv(opt.out_dir / "U.csv", h.projection);
    io::write_matrix_csv(opt.out_dir / "U0.csv", details.basis);
    io::write_matrix_csv(opt.out_dir / "omega.csv", h.omega);
    io::write_matrix_csv(opt.out_dir / "singular_values.csv",
                         RealMatrix(details.singular_values));

    out << "U: " << h.dim() << "x" << h.subspace_dim()
        << "  |U|_Fro^2 = " << io::format_double(h.projection.squaredNorm())
        << '\n';
    if (h.subspace_dim() == h.dim())
      out << "condition number = "
          << io::format_double(numerics::condition_number(h.projection)) << '\n';
    for (int i = 0; i < profiles.count(); ++i) {
      const hierarchy::Decomposition d =
          hierarchy::decompose(RealVector(profiles.profiles.col(i)), h);
      out << "profile " << i << ": residual_norm = "
          << io::format_double(d.residual_norm)
          << "  subspace_norm = " << io::format_double(d.subspace_norm) << '\n';
    }
    return kExitOk;
  } catch (const RankDeficient& e) {
    err << "error: " << e.what() << '\n';
    return kExitRank;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                 std::ostream& err) {
  harness::ExperimentConfig cfg;
  try {
    const config::KeyValues kv = config::KeyValues::parse_file(opt.config);
    cfg = config::resolve_experiment(
        kv, std::filesystem::absolute(opt.config).parent_path());
    if (opt.seed) cfg.base_seed = *opt.seed;
    if (opt.trials) cfg.trials = *opt.trials;
    if (opt.horizon) cfg.horizon = *opt.horizon;
    if (cfg.trials < 1 || cfg.horizon < 1)
      throw ConfigError("trials and horizon overrides must be >= 1");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    harness::ExperimentReport report;
    if (cfg.protocol == harness::Protocol::LeaveOneOut && cfg.profiles_csv) {
      const hierarchy::ProfileSet profiles =
          io::read_profiles_csv(*cfg.profiles_csv);
      report.results.push_back(harness::leave_one_out(profiles, cfg));
    } else {
      report = harness::run_experiment(cfg);
    }

    std::filesystem::create_directories(opt.out_dir);
    std::vector<std::string> artifacts;
    for (const harness::ExperimentResult& result : report.results) {
      const std::string suffix = tag_suffix(result.tag);
      io::write_traces_csv(opt.out_dir / ("traces" + suffix + ".csv"),
                           result.trials);
      artifacts.push_back("traces" + suffix + ".csv");
      io::write_aggregates_csv(opt.out_dir / ("aggregate" + suffix + ".csv"),
                               result.aggregates);
      artifacts.push_back("aggregate" + suffix + ".csv");
      const bool any_bound = std::any_of(
          result.aggregates.begin(), result.aggregates.end(),
          [](const auto& agg) { return !agg.bound_overlay.empty(); });
      if (any_bound) {
        io::write_bounds_csv(opt.out_dir / ("bound" + suffix + ".csv"),
                             result.aggregates);
        artifacts.push_back("bound" + suffix + ".csv");
      }
    }
    write_summary(opt.out_dir / "summary.csv", report);
    artifacts.push_back("summary.csv");
    write_plot(opt.out_dir / "plot.svg", report);
    artifacts.push_back("plot.svg");
    write_manifest(opt.out_dir, cfg, artifacts);

    for (const harness::ExperimentResult& result : report.results)
      for (const harness::PolicyAggregate& agg : result.aggregates)
        out << (result.tag.empty() ? std::string("run") : result.tag) << ' '
            << agg.policy << ": final mean cumulative regret "
            << io::format_double(agg.final_mean) << " (stderr "
            << io::format_double(agg.final_stderr) << ", " << agg.trace_count
            << " traces)\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_report(const ReportOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<harness::TrialRecord> records;
  try {
    if (opt.traces.empty()) throw IoError("report: no trace files given");
    for (const std::filesystem::path& path : opt.traces) {
      std::vector<harness::TrialRecord> part = io::read_traces_csv(path);
      records.insert(records.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    // final regret per (policy, trial); insertion order keeps output stable
    std::vector<std::string> policy_order;
    std::map<std::string, std::map<int, double>> finals;
    std::map<std::string, std::vector<const harness::RegretTrace*>> traces;
    for (const harness::TrialRecord& record : records) {
      if (!finals.contains(record.policy)) policy_order.push_back(record.policy);
      finals[record.policy][record.trial] = record.trace.cumulative.back();
      traces[record.policy].push_back(&record.trace);
    }

    std::filesystem::create_directories(opt.out_dir);
    std::ofstream summary(opt.out_dir / "final_regret.csv", std::ios::binary);
    if (!summary) throw IoError("cannot write final_regret.csv");
    summary << "policy,traces,mean_final_cum_regret\n";
    out << "policy            traces  mean final cumulative regret\n";
    for (const std::string& policy : policy_order) {
      double total = 0.0;
      for (const auto& [trial, value] : finals[policy]) total += value;
      const double mean = total / static_cast<double>(finals[policy].size());
      summary << policy << ',' << finals[policy].size() << ','
              << io::format_double(mean) << '\n';
      out << policy << "  " << finals[policy].size() << "  "
          << io::format_double(mean) << '\n';
    }

    std::ofstream pairwise(opt.out_dir / "pairwise.csv", std::ios::binary);
    if (!pairwise) throw IoError("cannot write pairwise.csv");
    pairwise << "policy_a,policy_b,wins_a,ties,wins_b\n";
    for (std::size_t a = 0; a < policy_order.size(); ++a) {
      for (std::size_t b = a + 1; b < policy_order.size(); ++b) {
        int wins_a = 0, ties = 0, wins_b = 0;
        for (const auto& [trial, value_a] : finals[policy_order[a]]) {
          const auto it = finals[policy_order[b]].find(trial);
          if (it == finals[policy_order[b]].end()) continue;
          if (value_a < it->second)
            ++wins_a;
          else if (value_a > it->second)
            ++wins_b;
          else
            ++ties;
        }
        pairwise << policy_order[a] << ',' << policy_order[b] << ',' << wins_a
                 << ',' << ties << ',' << wins_b << '\n';
        out << policy_order[a] << " vs " << policy_order[b] << ": " << wins_a
            << " / " << ties << " / " << wins_b << '\n';
      }
    }

    // mean curves per policy
    std::vector<plot::Series> series;
    for (const std::string& policy : policy_order) {
      const auto& list = traces[policy];
      std::size_t horizon = list[0]->cumulative.size();
      for (const auto* t : list)
        horizon = std::min(horizon, t->cumulative.size());
      plot::Series s;
      s.label = policy;
      s.xs.resize(horizon);
      s.ys.assign(horizon, 0.0);
      for (std::size_t t = 0; t < horizon; ++t) {
        s.xs[t] = static_cast<double>(t + 1);
        for (const auto* trace : list) s.ys[t] += trace->cumulative[t];
        s.ys[t] /= static_cast<double>(list.size());
      }
      series.push_back(std::move(s));
    }
    plot::ChartOptions options;
    options.title = "Mean cumulative regret";
    options.x_label = "round";
    options.y_label = "cumulative regret";
    plot::write_line_chart(opt.out_dir / "plot.svg", series, options);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace cofine::cli
