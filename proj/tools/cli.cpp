#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lobforge/agents.hpp"
#include "lobforge/auxiliary.hpp"
#include "lobforge/calibrate.hpp"
#include "lobforge/data_io.hpp"
#include "lobforge/error.hpp"
#include "lobforge/parallel.hpp"
#include "lobforge/params_io.hpp"
#include "lobforge/snapshot.hpp"

namespace lobforge::cli {

namespace {

namespace fs = std::filesystem;

// Thrown while validating inputs; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, std::uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  if (const char* env = std::getenv("LOBFORGE_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("LOBFORGE_SEED must be a non-negative integer, got '" + s + "'");
    return v;
  }
  return fallback;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
}

std::string rep_name(const char* stem, int rep, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.%s", stem, rep, ext);
  return buf;
}

// Runs `load` (config errors -> 2) and then `work` (runtime errors -> 3).
template <class Load, class Work>
int staged(Load&& load, Work&& work) {
  try {
    load();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    work();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// Simulation settings matching an observed day: same horizon, initial book from row 0.
SimConfig config_for_day(const SnapshotSeries& day, const AgentParams& base, std::optional<std::int64_t> T) {
  if (day.rows.size() < 2) throw ConfigError("data needs at least two snapshot rows");
  if (day.l_p != base.l_p || day.l_d != base.l_d)
    throw ConfigError("data window (l_p, l_d) does not match the model parameters");
  SimConfig c;
  c.T = T ? *T : static_cast<std::int64_t>(day.rows.size()) - 1;
  c.interval_seconds = day.interval_seconds;
  const auto size = std::max<Shares>(1, static_cast<Shares>(std::llround(mean_order_size(base.order_sizes))));
  c.initial_book = spec_from_snapshot(day.rows.front(), day.l_p, day.l_d, size);
  c.validate();
  return c;
}

AgentParams default_base() {
  return AgentParams::reference(30.84, 8.16, 4.75, -0.18, 33.70, 1.78, (7.11 / 8.0) * Eigen::MatrixXd::Identity(8, 8));
}

struct SimulateArgs {
  std::string params;
  std::string config;
  std::string out;
  double qtt = 0.0;
  int reps = 1;
  std::uint64_t seed = 0;
  std::int64_t T = 0;
  int jobs = default_jobs();
  CLI::Option* seed_opt = nullptr;
  CLI::Option* qtt_opt = nullptr;
  CLI::Option* T_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a) {
  AgentParams theta;
  SimConfig config;
  std::uint64_t seed = 0;
  return staged(
      [&] {
        theta = params_from_json(read_json_file(a.params));
        if (!a.config.empty()) config = sim_config_from_json(read_json_file(a.config));
        if (a.qtt_opt->count() > 0) {
          if (!(a.qtt > 1.0) || !std::isfinite(a.qtt))
            throw ConfigError("--qtt-ratio must be greater than 1, got " + format_double(a.qtt));
          config.qtt_ratio = a.qtt;
        }
        if (a.T_opt->count() > 0) config.T = a.T;
        if (a.reps < 1) throw ConfigError("--reps must be >= 1");
        seed = resolve_seed(a.seed_opt, a.seed, config.seed);
        config.validate();
        if (config.qtt_ratio) apply_quote_to_trade(theta, *config.qtt_ratio);
      },
      [&] {
        ensure_dir(a.out);
        parallel_for(static_cast<std::size_t>(a.reps), a.jobs, [&](std::size_t r) {
          SimConfig c = config;
          c.seed = seed + r;
          const SimResult res = simulate(theta, c);
          write_snapshot_csv_file(join_path(a.out, rep_name("sim", static_cast<int>(r), "csv")), res.snapshots);
          write_json_file(join_path(a.out, rep_name("sim", static_cast<int>(r), "json")), sim_metadata(theta, c, res));
        });
      });
}

struct CalibrateArgs {
  std::string data;
  std::string bounds;
  std::string params;
  std::string out;
  std::string mahalanobis;
  int pop = 40;
  int gens = 40;
  int M = 1;
  int iterations = 500;
  bool single = false;
  bool literal_weights = false;
  bool literal_scale = false;
  bool keep_populations = false;
  int coverage_reps = 0;
  std::uint64_t seed = 0;
  std::int64_t T = 0;
  int jobs = default_jobs();
  CLI::Option* seed_opt = nullptr;
  CLI::Option* T_opt = nullptr;
};

int cmd_calibrate(const CalibrateArgs& a) {
  SnapshotSeries day;
  AgentParams base;
  std::optional<ParamLayout> layout;
  SimConfig sim;
  std::optional<Eigen::MatrixXd> weight;
  std::uint64_t seed = 0;
  return staged(
      [&] {
        day = read_snapshot_csv_file(a.data);
        base = a.params.empty() ? default_base() : params_from_json(read_json_file(a.params));
        layout.emplace(bounds_from_json(read_json_file(a.bounds), base.levels()), base);
        sim = config_for_day(day, base, a.T_opt->count() > 0 ? std::optional<std::int64_t>(a.T) : std::nullopt);
        if (a.pop < 2) throw ConfigError("--pop must be >= 2");
        if (a.gens < 0) throw ConfigError("--gens must be >= 0");
        if (a.M < 1) throw ConfigError("--M must be >= 1");
        if (a.iterations < 1) throw ConfigError("--iterations must be >= 1");
        if (a.coverage_reps != 0 && a.coverage_reps < kMinReplications)
          throw ConfigError("--coverage-reps must be 0 or at least " + std::to_string(kMinReplications));
        if (!a.mahalanobis.empty()) {
          if (!a.single) throw ConfigError("--mahalanobis applies to --single-objective only");
          weight = matrix_from_json(read_json_file(a.mahalanobis));
          if (weight->rows() != 7 || weight->cols() != 7) throw ConfigError("--mahalanobis needs a 7 x 7 matrix");
          cholesky_lower(*weight);
        }
        seed = resolve_seed(a.seed_opt, a.seed, 1);
      },
      [&] {
        ensure_dir(a.out);
        const AuxCoefficients target = fit_auxiliary(std::vector<SnapshotSeries>{day});
        Json tj{{"beta1", vector_to_json(target.beta1)},
                {"beta2", vector_to_json(target.beta2)},
                {"se1", vector_to_json(target.se1)},
                {"se2", vector_to_json(target.se2)},
                {"converged", target.converged}};
        write_json_file(join_path(a.out, "target.json"), tj);
        KernelConfig kernel;
        kernel.literal_weights = a.literal_weights;
        kernel.match_mean = !a.literal_scale;

        if (a.single) {
          SingleConfig sc;
          sc.iterations = a.iterations;
          sc.sigma_dim = layout->sigma_dim();
          sc.kernel = kernel;
          sc.seed = seed;
          const SingleReport r =
              indirect_inference_single(layout->bounds(), model_distance(*layout, target, sim, a.M, weight), sc);
          Json j;
          j["best_params"] = params_to_json(layout->build(r.best.x, r.best.sigma));
          j["best_distance"] = r.best_distance;
          j["accepted"] = r.accepted;
          j["trace"] = r.trace;
          j["distance"] = weight ? "mahalanobis" : "euclidean";
          write_json_file(join_path(a.out, "single.json"), j);
          return;
        }

        Nsga2Config nc;
        nc.population = a.pop;
        nc.generations = a.gens;
        nc.kernel = kernel;
        nc.seed = seed;
        nc.jobs = a.jobs;
        nc.keep_populations = a.keep_populations;
        CalibrationReport report = run_nsga2(*layout, target, sim, a.M, nc);
        if (a.coverage_reps > 0) {
          std::vector<AgentParams> front;
          for (const auto& ind : report.front) front.push_back(layout->build(ind.candidate.x, ind.candidate.sigma));
          CoverageConfig cc;
          cc.replications = a.coverage_reps;
          cc.sim = sim;
          cc.seed = splitmix64(seed);
          cc.jobs = a.jobs;
          report.coverage = coverage_analysis(front, target, cc);
        }
        write_json_file(join_path(a.out, "report.json"), report_to_json(report, &*layout));
        write_text(join_path(a.out, "front.csv"), front_csv(report, *layout));
      });
}

struct AnalyzeArgs {
  std::vector<std::string> data;
  std::string out;
  std::string initial;
  std::string front;
  std::string params;
  double interval = 10.0;
  int l_p = 5;
  int l_d = 3;
  double bin_width = 1.0;
  int reps = 50;
  double level = 0.95;
  int lags = 20;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
  CLI::Option* seed_opt = nullptr;
};

BookState initial_book_for(const AnalyzeArgs& a) {
  InitialBookSpec spec;
  if (a.initial.empty()) {
    AgentParams p;
    p.l_p = a.l_p;
    p.l_d = a.l_d;
    spec = default_initial_book(p);
  } else {
    spec = initial_book_from_json(read_json_file(a.initial));
  }
  return seed_initial_book(spec, 0.01);
}

std::string matrix_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << "level";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
  return out.str();
}

int analyze_correlations(const AnalyzeArgs& a) {
  std::vector<EventRecord> events;
  BookState initial;
  ReplayConfig rc;
  return staged(
      [&] {
        if (a.data.size() != 1) throw ConfigError("correlations takes exactly one --data file");
        events = ingest_events(a.data.front());
        initial = initial_book_for(a);
        rc.interval_seconds = a.interval;
        rc.l_p = a.l_p;
        rc.l_d = a.l_d;
      },
      [&] {
        ensure_dir(a.out);
        const IntensityCorrelation c = intensity_correlation(events, initial, rc);
        write_text(join_path(a.out, "correlations.csv"), matrix_csv(c.labels, c.matrix));
        write_json_file(join_path(a.out, "correlations.json"),
                        Json{{"labels", c.labels},
                             {"excluded", c.excluded},
                             {"intervals", c.intervals},
                             {"overflow_deep", c.overflow_deep},
                             {"overflow_through", c.overflow_through}});
      });
}

int analyze_sizes(const AnalyzeArgs& a) {
  std::vector<EventRecord> events;
  return staged(
      [&] {
        if (a.data.size() != 1) throw ConfigError("sizes takes exactly one --data file");
        if (!(a.bin_width > 0.0)) throw ConfigError("--bin-width must be positive");
        events = ingest_events(a.data.front());
      },
      [&] {
        ensure_dir(a.out);
        const SizeHistogram h = order_size_histogram(events, a.bin_width);
        std::ostringstream out;
        out << "bin_lower,bin_upper,count\n";
        for (std::size_t k = 0; k < h.counts.size(); ++k)
          out << format_double(static_cast<double>(k) * h.bin_width) << ','
              << format_double(static_cast<double>(k + 1) * h.bin_width) << ',' << h.counts[k] << '\n';
        write_text(join_path(a.out, "sizes.csv"), out.str());
      });
}

int analyze_aux(const AnalyzeArgs& a) {
  std::vector<SnapshotSeries> days;
  return staged(
      [&] {
        if (a.data.empty()) throw ConfigError("aux needs at least one --data file");
        for (const auto& p : a.data) days.push_back(read_snapshot_csv_file(p));
      },
      [&] {
        ensure_dir(a.out);
        std::vector<AuxSeries> series;
        for (const auto& d : days) series.push_back(transform(d));
        const AuxCoefficients c = fit_auxiliary(series);
        Json j{{"beta1", vector_to_json(c.beta1)},
               {"beta2", vector_to_json(c.beta2)},
               {"se1", vector_to_json(c.se1)},
               {"se2", vector_to_json(c.se2)},
               {"names", coefficient_names()},
               {"converged", c.converged}};
        Json diag = Json::array();
        for (const auto& s : series) {
          Json d;
          try {
            const AcfPacf ap = acf_pacf(s.returns, a.lags);
            d["returns_acf"] = ap.acf;
            d["returns_pacf"] = ap.pacf;
            const ArchLm lm = arch_lm_test(s.returns, 5);
            d["arch_lm"] = Json{{"statistic", lm.statistic}, {"p_value", lm.p_value}, {"lags", lm.lags}};
          } catch (const Error& e) {
            d["error"] = e.what();
          }
          diag.push_back(d);
        }
        j["diagnostics"] = diag;
        write_json_file(join_path(a.out, "aux.json"), j);
      });
}

std::vector<AgentParams> front_from_json(const Json& j) {
  std::vector<AgentParams> out;
  if (j.is_object() && j.contains("front")) {
    for (const auto& ind : j.at("front")) {
      if (!ind.contains("params")) throw ConfigError("front entries need a params object");
      out.push_back(params_from_json(ind.at("params")));
    }
  } else if (j.is_array()) {
    for (const auto& p : j) out.push_back(params_from_json(p));
  } else {
    out.push_back(params_from_json(j));
  }
  if (out.empty()) throw ConfigError("front file contains no solutions");
  return out;
}

int analyze_coverage(const AnalyzeArgs& a) {
  SnapshotSeries day;
  std::vector<AgentParams> front;
  CoverageConfig cc;
  return staged(
      [&] {
        if (a.front.empty()) throw ConfigError("coverage needs --front (a calibration report or parameter file)");
        if (a.data.size() != 1) throw ConfigError("coverage takes exactly one --data file");
        if (a.reps < kMinReplications)
          throw Error(ErrorCode::InsufficientReplications,
                      "--reps must be at least " + std::to_string(kMinReplications));
        day = read_snapshot_csv_file(a.data.front());
        front = front_from_json(read_json_file(a.front));
        cc.sim = config_for_day(day, front.front(), std::nullopt);
        cc.replications = a.reps;
        cc.level = a.level;
        cc.seed = resolve_seed(a.seed_opt, a.seed, 1);
        cc.jobs = a.jobs;
      },
      [&] {
        ensure_dir(a.out);
        const AuxCoefficients target = fit_auxiliary(std::vector<SnapshotSeries>{day});
        const CoverageTable t = coverage_analysis(front, target, cc);
        write_json_file(join_path(a.out, "coverage.json"), coverage_to_json(t));
        std::ostringstream out;
        out << "solution";
        for (const auto& n : t.coefficients) out << ',' << n;
        out << ",proportion,used,excluded\n";
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          out << i;
          for (bool c : t.rows[i].covered) out << ',' << (c ? 1 : 0);
          out << ',' << format_double(t.rows[i].proportion) << ',' << t.rows[i].used << ',' << t.rows[i].excluded
              << '\n';
        }
        out << "all";
        for (double p : t.per_coefficient) out << ',' << format_double(p);
        out << ',' << format_double(t.overall) << ",,\n";
        write_text(join_path(a.out, "coverage.csv"), out.str());
      });
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Agent-based limit order book simulation and multi-objective calibration", "lobforge"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate trading days and write snapshot CSV plus metadata JSON");
  sim->add_option("--params", sa.params, "Agent parameter JSON")->required();
  sim->add_option("--config", sa.config, "Simulation config JSON (defaults when omitted)");
  sim->add_option("--out", sa.out, "Output directory")->required();
  sa.qtt_opt = sim->add_option("--qtt-ratio", sa.qtt, "Quote-to-trade ratio q > 1");
  sim->add_option("--reps", sa.reps, "Number of days; rep r uses seed + r")->capture_default_str();
  sa.seed_opt = sim->add_option("--seed", sa.seed, "Seed (falls back to LOBFORGE_SEED, then the config)");
  sa.T_opt = sim->add_option("--T", sa.T, "Override the number of intervals");
  sim->add_option("--jobs", sa.jobs, "Worker threads")->capture_default_str();

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Fit auxiliary targets to a day and search the parameter space");
  cal->add_option("--data", ca.data, "Observed day as snapshot CSV")->required();
  cal->add_option("--bounds", ca.bounds, "Parameter bounds JSON")->required();
  cal->add_option("--out", ca.out, "Output directory")->required();
  cal->add_option("--params", ca.params, "Base parameters for everything not bounded");
  cal->add_option("--pop", ca.pop, "Population size")->capture_default_str();
  cal->add_option("--gens", ca.gens, "Generations")->capture_default_str();
  cal->add_option("--M", ca.M, "Simulated days per objective evaluation")->capture_default_str();
  ca.T_opt = cal->add_option("--T", ca.T, "Intervals per simulated day (default: length of the data)");
  cal->add_flag("--single-objective", ca.single, "Keep-best search on the concatenated coefficient distance");
  cal->add_option("--iterations", ca.iterations, "Iterations of the single-objective search")->capture_default_str();
  cal->add_option("--mahalanobis", ca.mahalanobis, "7 x 7 weight matrix JSON for the single-objective distance");
  cal->add_flag("--literal-weights", ca.literal_weights, "Weight generation t by w^t instead of w^(n-t)");
  cal->add_flag("--literal-scale", ca.literal_scale, "Use psi_n itself as the local inverse-Wishart scale");
  cal->add_flag("--keep-populations", ca.keep_populations, "Write every generation's population to the report");
  cal->add_option("--coverage-reps", ca.coverage_reps, "Replications for a coverage table of the front (0 = skip)")
      ->capture_default_str();
  ca.seed_opt = cal->add_option("--seed", ca.seed, "Seed (falls back to LOBFORGE_SEED, then 1)");
  cal->add_option("--jobs", ca.jobs, "Worker threads")->capture_default_str();

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "Descriptive analytics and coverage tables");
  ana->require_subcommand(1);
  auto add_common = [&](CLI::App* c, const char* data_help) {
    c->add_option("--data", aa.data, data_help)->required();
    c->add_option("--out", aa.out, "Output directory")->required();
  };
  auto* corr = ana->add_subcommand("correlations", "Correlation of limit-order counts across levels");
  add_common(corr, "Event CSV");
  corr->add_option("--initial", aa.initial, "Initial book JSON (default: 10 unit orders on 5 levels per side)");
  corr->add_option("--interval", aa.interval, "Interval length in seconds")->capture_default_str();
  corr->add_option("--l-p", aa.l_p, "Passive levels")->capture_default_str();
  corr->add_option("--l-d", aa.l_d, "Direct levels")->capture_default_str();
  auto* sizes = ana->add_subcommand("sizes", "Histogram of limit-order sizes");
  add_common(sizes, "Event CSV");
  sizes->add_option("--bin-width", aa.bin_width, "Bin width in shares")->capture_default_str();
  auto* aux = ana->add_subcommand("aux", "Auxiliary model coefficients of one or more days");
  add_common(aux, "Snapshot CSV (repeatable; days are pooled)");
  aux->add_option("--lags", aa.lags, "ACF/PACF lags")->capture_default_str();
  auto* cov = ana->add_subcommand("coverage", "Interval coverage of the observed coefficients by front solutions");
  add_common(cov, "Observed day as snapshot CSV");
  cov->add_option("--front", aa.front, "Calibration report, parameter file or array of parameters");
  cov->add_option("--reps", aa.reps, "Simulated days per solution (at least 20)")->capture_default_str();
  cov->add_option("--level", aa.level, "Interval level")->capture_default_str();
  aa.seed_opt = cov->add_option("--seed", aa.seed, "Seed (falls back to LOBFORGE_SEED, then 1)");
  cov->add_option("--jobs", aa.jobs, "Worker threads")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (sim->parsed()) return cmd_simulate(sa);
  if (cal->parsed()) return cmd_calibrate(ca);
  if (corr->parsed()) return analyze_correlations(aa);
  if (sizes->parsed()) return analyze_sizes(aa);
  if (aux->parsed()) return analyze_aux(aa);
  if (cov->parsed()) return analyze_coverage(aa);
  return kExitConfig;
}

}  // namespace lobforge::cli
