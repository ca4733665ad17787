// covcp: command-line front end.
//
//   covcp simulate    write one CSV per sample of a synthetic AR(1) panel
//   covcp test        run a change-point test on CSV samples
//   covcp critval     tabulate Monte Carlo critical values
//   covcp experiment  run a size/power study
//
// Exit codes: 0 success, 1 operational error, 2 invalid configuration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covcp/covcp.hpp"

namespace {

using namespace covcp;

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << s << "\n";
  return s;
}

std::ostream* open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  file.open(path);
  if (!file) throw IngestError("cli", path + ": cannot open file for writing");
  return &file;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string sample_case;
  std::vector<std::size_t> N;
  std::size_t d = 10;
  std::vector<double> rho0;
  std::vector<double> rho1;
  double rho0_intercept = kPreChangeRhoIntercept;
  std::optional<double> rho1_intercept;
  std::vector<double> sigma0;
  std::vector<double> sigma1;
  std::vector<std::size_t> tau;
  std::optional<double> change_time;
  double horizon = 1200.0;
  std::size_t burn_in = 500;
  std::uint64_t replication = 0;
  std::string out_dir = ".";
  std::string prefix = "sample";
  bool projection = false;
};

int run_simulate(const SimulateArgs& a, const Common& common) {
  PanelConfig pc;
  if (!a.sample_case.empty()) {
    if (!a.N.empty()) throw ConfigError("cli", "give either --case or --N, not both");
    pc.N = case_sample_sizes(parse_sample_case(a.sample_case));
  } else {
    pc.N = a.N;
  }
  if (pc.N.empty()) throw ConfigError("cli", "sample sizes missing: give --case or --N");
  pc.K = pc.N.size();
  pc.d = a.d;
  pc.burn_in = a.burn_in;
  pc.seed = resolve_seed(common);
  pc.rho0 = a.rho0.empty() ? linear_ar_coefficients(a.d, a.rho0_intercept) : a.rho0;
  if (!a.rho1.empty()) {
    pc.rho1 = a.rho1;
  } else if (a.rho1_intercept) {
    pc.rho1 = linear_ar_coefficients(a.d, *a.rho1_intercept);
  }
  const std::vector<double> ones(pc.K, 1.0);
  pc.sigma0 = !a.sigma0.empty() ? a.sigma0 : (pc.K == 4 ? kPreChangeSigma : ones);
  if (!a.sigma1.empty()) pc.sigma1 = a.sigma1;
  if (!a.tau.empty() && a.change_time) throw ConfigError("cli", "give either --tau or --change-time, not both");
  if (!a.tau.empty()) pc.tau = a.tau;
  if (a.change_time) pc.tau = change_time_mapping(*a.change_time, pc.N, a.horizon);
  if ((pc.rho1 || pc.sigma1) && !pc.tau) throw ConfigError("cli", "post-change parameters need --tau or --change-time");

  const Panel panel = gen_ar1_panel(pc, a.replication);
  std::filesystem::create_directories(a.out_dir);
  for (std::size_t j = 0; j < panel.K(); ++j) {
    const auto path = std::filesystem::path(a.out_dir) / (a.prefix + "_" + std::to_string(j) + ".csv");
    write_matrix_csv(path.string(), panel.samples[j]);
    std::cout << path.string() << "\n";
  }
  if (a.projection) {
    const auto path = std::filesystem::path(a.out_dir) / (a.prefix + "_projection.txt");
    write_vector_file(path.string(), gen_dirichlet_projection(a.d, pc.seed, a.replication));
    std::cout << path.string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TestArgs {
  std::vector<std::string> samples;
  std::string projection;
  std::string projection_w;
  std::string kind = "q-breve";
  double level = 0.95;
  std::string lrv_mode = "in-sample";
  std::size_t learning_length = 0;
  std::optional<double> bandwidth;
  std::vector<double> targets;
  std::size_t n_grid = 2000;
  std::size_t n_rep = 100000;
  bool json = false;
  std::string output;
};

int run_test_cmd(const TestArgs& a, const Common& common) {
  const StatisticKind kind = parse_statistic_kind(a.kind);
  const LrvMode mode = parse_lrv_mode(a.lrv_mode);
  BundleOptions bo;
  bo.sample_paths = a.samples;
  if (!a.projection.empty()) bo.projection_paths.push_back(a.projection);
  if (!a.projection_w.empty()) bo.projection_paths.push_back(a.projection_w);
  if (mode == LrvMode::learning_sample) bo.learning_length = a.learning_length;
  const DataBundle bundle = load_bundle(bo);

  TestSpec spec;
  spec.kind = kind;
  if (bundle.projections.empty()) {
    throw ConfigError("cli", "projection vector missing: give --projection");
  }
  spec.projections.push_back(bundle.projections.size() == 2
                                 ? ProjectionPair::make(bundle.projections[0], bundle.projections[1])
                                 : ProjectionPair::symmetric(bundle.projections[0]));
  if (!a.targets.empty()) {
    std::vector<TargetBilinear> t;
    for (double v : a.targets) t.push_back(TargetBilinear::constant(v));
    spec.targets = std::move(t);
  }
  spec.options.level = a.level;
  spec.options.lrv_mode = mode;
  spec.options.learning_length = mode == LrvMode::learning_sample ? a.learning_length : 0;
  spec.options.bandwidth = a.bandwidth;
  spec.options.n_grid = a.n_grid;
  spec.options.n_rep = a.n_rep;
  spec.options.seed = resolve_seed(common);
  spec.options.workers = common.workers;

  const TestReport report = run_test(bundle.panel(), spec);
  const std::string json = to_json(report).dump(2) + "\n";
  if (!a.output.empty()) {
    std::ofstream file;
    *open_or_stdout(a.output, file) << json;
  }
  if (a.json) {
    std::cout << json;
  } else {
    print_report_table(std::cout, report);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CritvalArgs {
  std::vector<std::string> kinds{"q-breve"};
  std::size_t K = 1;
  std::vector<double> levels{0.95};
  std::vector<double> alpha;
  std::vector<double> kappa;
  std::size_t n_grid = 2000;
  std::size_t n_rep = 100000;
  bool csv = false;
  std::string output;
};

int run_critval(const CritvalArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  std::vector<CritValRow> rows;
  for (const auto& name : a.kinds) {
    CritValRequest req;
    req.kind = parse_statistic_kind(name);
    req.K = a.K;
    req.level = a.levels.front();
    req.n_grid = a.n_grid;
    req.n_rep = a.n_rep;
    req.seed = seed;
    req.workers = common.workers;
    if (is_pooled(req.kind)) {
      req.alpha_weights = a.alpha.empty() ? std::vector<double>(a.K, 1.0) : a.alpha;
      req.kappa = a.kappa.empty() ? std::vector<double>(a.K, 1.0 / static_cast<double>(a.K)) : a.kappa;
    }
    req.validate();
    const auto bank = cached_path_bank(req.K, req.n_grid, req.n_rep, req.seed, req.workers);
    const auto values = critical_values(req, a.levels, *bank);
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
      rows.push_back({req.kind, req.K, a.levels[i], values[i], req.n_grid, req.n_rep, req.seed});
    }
  }
  if (!a.output.empty()) {
    std::ofstream file;
    write_critval_csv(*open_or_stdout(a.output, file), rows);
  }
  if (a.csv) {
    write_critval_csv(std::cout, rows);
  } else {
    print_critval_table(std::cout, rows);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string preset;
  std::optional<std::size_t> replications;
  std::vector<std::string> cases;
  std::vector<std::size_t> dims;
  std::string scenario;
  std::vector<double> change_times;
  std::vector<std::string> tests;
  std::string lrv_mode;
  std::optional<std::size_t> learning_length;
  std::optional<double> level;
  std::vector<double> sigma0;
  std::vector<double> sigma1;
  std::optional<std::size_t> n_grid;
  std::optional<std::size_t> n_rep;
  std::string format = "table";
  std::string csv_out;
  std::string json_out;
};

int run_experiment_cmd(const ExperimentArgs& a, const Common& common) {
  ExperimentConfig c = a.preset.empty() ? ExperimentConfig{} : experiment_preset(a.preset);
  if (a.replications) c.replications = *a.replications;
  if (!a.cases.empty()) {
    c.cases.clear();
    for (const auto& s : a.cases) c.cases.push_back(parse_sample_case(s));
  }
  if (!a.dims.empty()) c.dims = a.dims;
  if (!a.scenario.empty()) c.scenario = parse_scenario(a.scenario);
  if (!a.change_times.empty()) c.change_times = a.change_times;
  if (!a.tests.empty()) {
    c.tests.clear();
    for (const auto& s : a.tests) c.tests.push_back(parse_statistic_kind(s));
  }
  if (!a.lrv_mode.empty()) c.lrv_mode = parse_lrv_mode(a.lrv_mode);
  if (a.learning_length) c.learning_length = *a.learning_length;
  if (a.level) c.level = *a.level;
  if (!a.sigma0.empty()) c.sigma0 = a.sigma0;
  if (!a.sigma1.empty()) c.sigma1 = a.sigma1;
  if (a.n_grid) c.n_grid = *a.n_grid;
  if (a.n_rep) c.n_rep = *a.n_rep;
  c.seed = resolve_seed(common);
  c.workers = common.workers;

  const ExperimentResult res = run_experiment(c);
  for (const auto& line : res.log) std::cerr << "note: " << line << "\n";
  for (const auto& w : middle_change_ordering_warnings(res, 600.0)) std::cerr << "ordering: " << w << "\n";
  std::cerr << "wall time: " << format_short(res.wall_seconds) << " s\n";

  if (!a.csv_out.empty()) {
    std::ofstream file;
    write_experiment_csv(*open_or_stdout(a.csv_out, file), res);
  }
  if (!a.json_out.empty()) {
    std::ofstream file;
    *open_or_stdout(a.json_out, file) << to_json(res).dump(2) << "\n";
  }
  if (a.format == "csv") {
    write_experiment_csv(std::cout, res);
  } else if (a.format == "json") {
    std::cout << to_json(res).dump(2) << "\n";
  } else {
    print_experiment_table(std::cout, res);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point tests for covariance bilinear forms of K independent samples"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key-value file ([section] or dotted keys)");

  Common common;
  app.add_option("--seed", common.seed, "Master seed; printed to stderr when drawn from entropy");
  app.add_option("--workers", common.workers, "Worker threads (0 = all cores)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Write a synthetic AR(1) panel as one CSV per sample");
  s->add_option("--case", sim.sample_case, "Sample-size preset I, II, III or IV");
  s->add_option("--N", sim.N, "Sample sizes, one per sample");
  s->add_option("--d", sim.d, "Dimension")->capture_default_str();
  s->add_option("--rho0", sim.rho0, "Pre-change AR coefficients, one per coordinate");
  s->add_option("--rho1", sim.rho1, "Post-change AR coefficients");
  s->add_option("--rho0-intercept", sim.rho0_intercept, "rho_nu = intercept + 0.5 nu / d before the change")
      ->capture_default_str();
  s->add_option("--rho1-intercept", sim.rho1_intercept, "Same after the change");
  s->add_option("--sigma0", sim.sigma0, "Pre-change innovation sd, one per sample");
  s->add_option("--sigma1", sim.sigma1, "Post-change innovation sd");
  s->add_option("--tau", sim.tau, "Change indices, one per sample");
  s->add_option("--change-time", sim.change_time, "Physical change time, mapped by N_j / horizon");
  s->add_option("--horizon", sim.horizon, "Physical horizon")->capture_default_str();
  s->add_option("--burn-in", sim.burn_in, "Burn-in steps")->capture_default_str();
  s->add_option("--replication", sim.replication, "Replication index")->capture_default_str();
  s->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();
  s->add_option("--prefix", sim.prefix, "File name prefix")->capture_default_str();
  s->add_flag("--projection", sim.projection, "Also write a Dirichlet projection vector");

  TestArgs ta;
  auto* t = app.add_subcommand("test", "Run a change-point test on CSV samples");
  t->add_option("--samples", ta.samples, "Sample CSV files")->required();
  t->add_option("--projection", ta.projection, "Projection vector file (v = w unless --projection-w)");
  t->add_option("--projection-w", ta.projection_w, "Second projection vector file");
  t->add_option("--kind", ta.kind, "q, v, q-breve or v-breve")->capture_default_str();
  t->add_option("--level", ta.level, "Quantile level of the critical value")->capture_default_str();
  t->add_option("--lrv-mode", ta.lrv_mode, "in-sample or learning-sample")->capture_default_str();
  t->add_option("--learning-length", ta.learning_length, "Rows per sample reserved for LRV estimation");
  t->add_option("--bandwidth", ta.bandwidth, "Fixed kernel bandwidth instead of the plug-in rule");
  t->add_option("--target", ta.targets, "Population bilinear form per sample (q and v only)");
  t->add_option("--n-grid", ta.n_grid, "Grid points per Brownian path")->capture_default_str();
  t->add_option("--n-rep", ta.n_rep, "Monte Carlo replications")->capture_default_str();
  t->add_flag("--json", ta.json, "Print the JSON report instead of the table");
  t->add_option("--output", ta.output, "Also write the JSON report to this file");

  CritvalArgs ca;
  auto* c = app.add_subcommand("critval", "Tabulate Monte Carlo critical values");
  c->add_option("--kind", ca.kinds, "Statistic kinds")->capture_default_str();
  c->add_option("--K", ca.K, "Number of samples")->capture_default_str();
  c->add_option("--level", ca.levels, "Quantile levels")->capture_default_str();
  c->add_option("--alpha", ca.alpha, "Long-run sd per sample (pooled kinds; default 1)");
  c->add_option("--kappa", ca.kappa, "Sample fractions N_j / N (pooled kinds; default 1/K)");
  c->add_option("--n-grid", ca.n_grid, "Grid points per Brownian path")->capture_default_str();
  c->add_option("--n-rep", ca.n_rep, "Monte Carlo replications")->capture_default_str();
  c->add_flag("--csv", ca.csv, "Print CSV instead of the table");
  c->add_option("--output", ca.output, "Also write CSV to this file");

  ExperimentArgs ea;
  auto* e = app.add_subcommand("experiment", "Run a Monte Carlo size/power study");
  e->add_option("--preset", ea.preset, "size-in-sample, size-learning, power-sigma-learning, "
                                       "power-sigma-in-sample or power-coefficient-learning");
  e->add_option("--replications", ea.replications, "Replications per cell");
  e->add_option("--cases", ea.cases, "Sample-size cases");
  e->add_option("--dims", ea.dims, "Dimensions");
  e->add_option("--scenario", ea.scenario, "none, sigma-change or coefficient-change");
  e->add_option("--change-times", ea.change_times, "Physical change times");
  e->add_option("--tests", ea.tests, "Statistic kinds");
  e->add_option("--lrv-mode", ea.lrv_mode, "in-sample or learning-sample");
  e->add_option("--learning-length", ea.learning_length, "Learning rows per sample");
  e->add_option("--level", ea.level, "Quantile level");
  e->add_option("--sigma0", ea.sigma0, "Pre-change innovation sd per sample");
  e->add_option("--sigma1", ea.sigma1, "Post-change innovation sd per sample");
  e->add_option("--n-grid", ea.n_grid, "Grid points per Brownian path");
  e->add_option("--n-rep", ea.n_rep, "Monte Carlo replications for critical values");
  e->add_option("--format", ea.format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  e->add_option("--csv", ea.csv_out, "Also write CSV to this file");
  e->add_option("--json", ea.json_out, "Also write JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (*s) return run_simulate(sim, common);
    if (*t) return run_test_cmd(ta, common);
    if (*c) return run_critval(ca, common);
    if (*e) return run_experiment_cmd(ea, common);
  } catch (const Error& ex) {
    std::cerr << "error [" << ex.code() << "]: " << ex.what() << "\n";
    return ex.exit_code();
  } catch (const std::exception& ex) {
    std::cerr << "error [cli.internal]: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
