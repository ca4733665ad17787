#ifndef COVCP_HARNESS_HPP
#define COVCP_HARNESS_HPP

// Monte Carlo size and power study over sample-size cases, dimensions,
// change scenarios and test kinds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "covcp/cptest.hpp"
#include "covcp/errors.hpp"
#include "covcp/limits.hpp"
#include "covcp/parallel.hpp"
#include "covcp/rng.hpp"
#include "covcp/simgen.hpp"

namespace covcp {

enum class Scenario { none, sigma_change, coefficient_change };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::none: return "none";
    case Scenario::sigma_change: return "sigma-change";
    case Scenario::coefficient_change: return "coefficient-change";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "none" || s == "null") return Scenario::none;
  if (s == "sigma-change" || s == "sigma_change" || s == "sigma") return Scenario::sigma_change;
  if (s == "coefficient-change" || s == "coefficient_change" || s == "coefficient") {
    return Scenario::coefficient_change;
  }
  throw ConfigError("harness", "unknown scenario '" + s + "' (expected none, sigma-change or coefficient-change)");
}

struct ExperimentConfig {
  std::size_t replications = 1000;
  std::vector<SampleCase> cases{SampleCase::I};
  std::vector<std::size_t> dims{10};
  Scenario scenario = Scenario::none;
  /// Physical change times on the horizon; ignored for Scenario::none.
  std::vector<double> change_times{600.0};
  std::vector<StatisticKind> tests{StatisticKind::q_breve, StatisticKind::v_breve};
  LrvMode lrv_mode = LrvMode::in_sample;
  std::size_t learning_length = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
  double horizon = 1200.0;
  std::size_t burn_in = 500;
  std::vector<double> sigma0 = kPreChangeSigma;
  std::vector<double> sigma1 = kPostChangeSigma;
  double rho0_intercept = kPreChangeRhoIntercept;
  double rho1_intercept = kPostChangeRhoIntercept;
  std::size_t n_grid = 2000;
  std::size_t n_rep = 100000;
  unsigned workers = 0;

  void validate() const {
    if (replications < 1) throw ConfigError("harness", "replications must be at least 1");
    if (cases.empty()) throw ConfigError("harness", "no sample cases given");
    if (dims.empty()) throw ConfigError("harness", "no dimensions given");
    for (std::size_t d : dims) {
      if (d == 0) throw ConfigError("harness", "dimension must be at least 1");
    }
    if (tests.empty()) throw ConfigError("harness", "no test kinds given");
    if (scenario != Scenario::none && change_times.empty()) {
      throw ConfigError("harness", "change scenario needs at least one change time");
    }
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("harness", "level must lie in (0, 1)");
    if (!(horizon > 0.0)) throw ConfigError("harness", "horizon must be positive");
    if (sigma0.size() != 4 || sigma1.size() != 4) {
      throw ConfigError("harness", "sigma vectors must have one entry per sample (4)");
    }
    if (lrv_mode == LrvMode::learning_sample && learning_length < 4) {
      throw ConfigError("harness", "learning length must be at least 4");
    }
  }

  /// Canonical text form; its hash is the provenance key of a result.
  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "reps=" << replications << ";cases=";
    for (auto c : cases) os << to_string(c) << ',';
    os << ";dims=";
    for (auto d : dims) os << d << ',';
    os << ";scenario=" << to_string(scenario) << ";times=";
    for (auto t : change_times) os << t << ',';
    os << ";tests=";
    for (auto t : tests) os << to_string(t) << ',';
    os << ";lrv=" << to_string(lrv_mode) << ";L=" << learning_length << ";level=" << level << ";seed=" << seed
       << ";T=" << horizon << ";burn=" << burn_in << ";sigma0=";
    for (auto s : sigma0) os << s << ',';
    os << ";sigma1=";
    for (auto s : sigma1) os << s << ',';
    os << ";rho=" << rho0_intercept << ',' << rho1_intercept << ";grid=" << n_grid << ";nrep=" << n_rep;
    return os.str();
  }

  std::uint64_t hash() const { return fnv1a(canonical()); }
};

/// tau_j = floor(rate_j * time) clamped to [1, N_j]. A 1e-9 guard absorbs
/// rounding in rate_j * time when the exact product is an integer.
inline std::vector<std::size_t> change_time_mapping(double time, std::span<const double> rates,
                                                    std::span<const std::size_t> sizes) {
  if (rates.size() != sizes.size()) throw ShapeError("harness", "need one sampling rate per sample");
  std::vector<std::size_t> tau(rates.size());
  for (std::size_t j = 0; j < rates.size(); ++j) {
    const double raw = std::floor(rates[j] * time + 1e-9);
    const double hi = static_cast<double>(sizes[j]);
    tau[j] = static_cast<std::size_t>(std::clamp(raw, 1.0, std::max(hi, 1.0)));
  }
  return tau;
}

/// Mapping with rates N_j / horizon.
inline std::vector<std::size_t> change_time_mapping(double time, std::span<const std::size_t> sizes,
                                                    double horizon) {
  std::vector<double> rates;
  for (std::size_t n : sizes) rates.push_back(static_cast<double>(n) / horizon);
  return change_time_mapping(time, rates, sizes);
}

struct CellResult {
  SampleCase sample_case = SampleCase::I;
  std::size_t d = 0;
  Scenario scenario = Scenario::none;
  /// Absent for Scenario::none.
  std::optional<double> change_time;
  StatisticKind test = StatisticKind::q_breve;
  /// Replications that produced a decision.
  std::size_t n = 0;
  std::size_t rejections = 0;
  std::size_t skipped = 0;
  double rate = 0.0;
  double stderr_rate = 0.0;
  std::uint64_t cell_seed = 0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  LrvMode lrv_mode = LrvMode::in_sample;
  std::size_t learning_length = 0;
  /// Skipped cells and replications, with reasons.
  std::vector<std::string> log;
  double wall_seconds = 0.0;
};

namespace detail {

inline std::uint64_t time_key(std::optional<double> t) {
  return t ? static_cast<std::uint64_t>(std::llround(*t * 1000.0)) + 1 : 0;
}

struct RepOutcome {
  int decision = -1;  // 1 reject, 0 accept, -1 skipped
  std::string reason;
};

}  // namespace detail

/// Runs every (case, d, change time, test) cell. Each cell draws its panels and
/// projections from its own seed, derived from the master seed and the cell key.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config_hash = config.hash();
  result.seed = config.seed;
  result.lrv_mode = config.lrv_mode;
  result.learning_length = config.lrv_mode == LrvMode::learning_sample ? config.learning_length : 0;

  const bool learning = config.lrv_mode == LrvMode::learning_sample;
  const std::size_t L = learning ? config.learning_length : 0;
  const std::uint64_t critval_seed = derive_seed(config.seed, "harness.critval", {});
  const auto bank = cached_path_bank(4, config.n_grid, config.n_rep, critval_seed, config.workers);

  std::vector<std::optional<double>> times;
  if (config.scenario == Scenario::none) {
    times.push_back(std::nullopt);
  } else {
    for (double t : config.change_times) times.emplace_back(t);
  }

  for (SampleCase sc : config.cases) {
    const auto sizes = case_sample_sizes(sc);
    for (std::size_t d : config.dims) {
      for (const auto& time : times) {
        for (StatisticKind kind : config.tests) {
          CellResult cell;
          cell.sample_case = sc;
          cell.d = d;
          cell.scenario = config.scenario;
          cell.change_time = time;
          cell.test = kind;
          cell.cell_seed = derive_seed(config.seed, "harness.cell",
                                       {static_cast<std::uint64_t>(sc), d, static_cast<std::uint64_t>(config.scenario),
                                        detail::time_key(time), static_cast<std::uint64_t>(kind)});
          std::string cell_name = "cell case=" + to_string(sc) + " d=" + std::to_string(d) +
                                  " scenario=" + to_string(config.scenario) +
                                  (time ? " time=" + std::to_string(*time) : std::string()) + " test=" + to_string(kind);

          if (time && !(*time > 0.0 && *time <= config.horizon)) {
            result.log.push_back(cell_name + ": skipped, change time outside (0, horizon]");
            continue;
          }

          PanelConfig pc;
          pc.K = sizes.size();
          pc.d = d;
          pc.burn_in = config.burn_in;
          pc.seed = cell.cell_seed;
          pc.rho0 = linear_ar_coefficients(d, config.rho0_intercept);
          pc.sigma0 = config.sigma0;
          for (std::size_t n : sizes) pc.N.push_back(n + L);
          if (time) {
            auto tau = change_time_mapping(*time, sizes, config.horizon);
            for (auto& t : tau) t += L;
            pc.tau = tau;
            if (config.scenario == Scenario::sigma_change) pc.sigma1 = config.sigma1;
            if (config.scenario == Scenario::coefficient_change) {
              pc.rho1 = linear_ar_coefficients(d, config.rho1_intercept);
            }
          }
          try {
            pc.validate();
          } catch (const Error& e) {
            result.log.push_back(cell_name + ": skipped, " + e.code() + ": " + e.what());
            continue;
          }

          TestOptions opt;
          opt.level = config.level;
          opt.lrv_mode = config.lrv_mode;
          opt.learning_length = L;
          opt.bank = bank;
          opt.workers = 1;
          if (!is_pooled(kind)) {
            CritValRequest req;
            req.kind = kind;
            req.K = sizes.size();
            req.level = config.level;
            req.n_grid = bank->n_grid();
            req.n_rep = bank->n_rep();
            req.seed = bank->seed();
            opt.critical_value = critical_value(req, *bank);
          }

          std::vector<detail::RepOutcome> outcomes(config.replications);
          parallel_for(config.replications, config.workers, [&](std::size_t rep) {
            auto& out = outcomes[rep];
            try {
              const Panel panel = gen_ar1_panel(pc, rep);
              const ProjectionPair pair = ProjectionPair::symmetric(gen_dirichlet_projection(d, cell.cell_seed, rep));
              TestSpec spec;
              spec.kind = kind;
              spec.projections = {pair};
              spec.options = opt;
              if (kind == StatisticKind::q || kind == StatisticKind::v) {
                std::vector<TargetBilinear> targets;
                for (std::size_t j = 0; j < pc.K; ++j) {
                  targets.push_back(TargetBilinear::constant(ar1_bilinear_target(pc.rho0, pc.sigma0[j], pair.v, pair.w)));
                }
                spec.targets = std::move(targets);
              }
              out.decision = run_test(panel, spec).reject ? 1 : 0;
            } catch (const Error& e) {
              out.reason = e.code();
            }
          });

          std::map<std::string, std::size_t> reasons;
          for (const auto& o : outcomes) {
            if (o.decision < 0) {
              ++cell.skipped;
              ++reasons[o.reason];
            } else {
              ++cell.n;
              cell.rejections += static_cast<std::size_t>(o.decision);
            }
          }
          for (const auto& [code, count] : reasons) {
            result.log.push_back(cell_name + ": " + std::to_string(count) + " replications skipped, " + code);
          }
          if (cell.n > 0) {
            cell.rate = static_cast<double>(cell.rejections) / static_cast<double>(cell.n);
            cell.stderr_rate = std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(cell.n));
          }
          result.cells.push_back(cell);
        }
      }
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Soft check that power peaks for a change in the middle of the horizon.
/// Returns one message per violation; an empty result means the ordering holds.
inline std::vector<std::string> middle_change_ordering_warnings(const ExperimentResult& result, double middle) {
  std::vector<std::string> warnings;
  for (const auto& mid : result.cells) {
    if (!mid.change_time || *mid.change_time != middle) continue;
    for (const auto& other : result.cells) {
      if (!other.change_time || *other.change_time == middle) continue;
      if (other.sample_case != mid.sample_case || other.d != mid.d || other.test != mid.test ||
          other.scenario != mid.scenario) {
        continue;
      }
      if (other.rate > mid.rate) {
        std::ostringstream os;
        os << to_string(mid.test) << " case " << to_string(mid.sample_case) << " d=" << mid.d << ": power "
           << other.rate << " at time " << *other.change_time << " exceeds " << mid.rate << " at time " << middle;
        warnings.push_back(os.str());
      }
    }
  }
  return warnings;
}

/// Named study presets at desk scale.
///   size-in-sample, size-learning                no change, 2000 replications
///   power-sigma-learning, power-sigma-in-sample  sigma change at 240/600/960, 1000 replications
///   power-coefficient-learning                   AR coefficient change at 240/600/960
inline ExperimentConfig experiment_preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "size-in-sample") {
    c.replications = 2000;
    c.scenario = Scenario::none;
    c.lrv_mode = LrvMode::in_sample;
  } else if (name == "size-learning") {
    c.replications = 2000;
    c.scenario = Scenario::none;
    c.lrv_mode = LrvMode::learning_sample;
  } else if (name == "power-sigma-learning") {
    c.scenario = Scenario::sigma_change;
    c.change_times = {240.0, 600.0, 960.0};
    c.lrv_mode = LrvMode::learning_sample;
  } else if (name == "power-sigma-in-sample") {
    c.scenario = Scenario::sigma_change;
    c.change_times = {240.0, 600.0, 960.0};
    c.lrv_mode = LrvMode::in_sample;
  } else if (name == "power-coefficient-learning") {
    c.scenario = Scenario::coefficient_change;
    c.change_times = {240.0, 600.0, 960.0};
    c.lrv_mode = LrvMode::learning_sample;
  } else {
    throw ConfigError("harness", "unknown preset '" + name + "'");
  }
  return c;
}

inline const std::vector<std::string>& experiment_preset_names() {
  static const std::vector<std::string> names{"size-in-sample", "size-learning", "power-sigma-learning",
                                              "power-sigma-in-sample", "power-coefficient-learning"};
  return names;
}

}  // namespace covcp

#endif  // COVCP_HARNESS_HPP
