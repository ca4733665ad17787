#ifndef COVCP_CPTEST_HPP
#define COVCP_CPTEST_HPP

// The four a-posteriori change-point tests for the second-moment structure of
// K independent samples.
//
//   Q        sum_j max_k (D_j(k) / alpha_j)^2          known targets
//   V        max_grid |N^{-1/2} sum_j (S_j,k - C_j,k)|  known targets, pooled
//   Q-breve  sum_j max_k (Delta_j(k) / alpha_j)^2      bridge, no targets
//   V-breve  max_grid |N^{-1/2} sum_j (S_j,k - k/N_j S_j,N_j)|
//
// The bridge tests take no target argument at all; the API cannot feed them
// population values.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covcp/errors.hpp"
#include "covcp/limits.hpp"
#include "covcp/lrv.hpp"
#include "covcp/simgen.hpp"
#include "covcp/sumproc.hpp"

namespace covcp {

struct TestOptions {
  /// Quantile level of the null law used as critical value (0.95 for a 5% test).
  double level = 0.95;
  LrvMode lrv_mode = LrvMode::in_sample;
  /// Rows carved from the front of every sample for LRV estimation in
  /// learning-sample mode; they never enter the statistic.
  std::size_t learning_length = 0;
  std::optional<double> bandwidth;
  std::size_t n_grid = 2000;
  std::size_t n_rep = 100000;
  /// Seed of the Brownian paths behind the critical value.
  std::uint64_t seed = 0;
  unsigned workers = 0;
  /// Pre-simulated paths; when absent the process-wide cache is used.
  std::shared_ptr<const PathBank> bank;
  /// Precomputed critical value; skips the Monte Carlo lookup. Only sensible
  /// for the Q kinds, whose null law does not depend on the data.
  std::optional<double> critical_value;
};

struct SampleDiagnostics {
  /// Observations entering the statistic.
  std::size_t n = 0;
  LrvEstimate lrv;
  /// Location hint: index maximizing this sample's contribution. Not inferential.
  std::size_t argmax_k = 0;
  /// Q kinds: max squared standardized value; V kinds: the branch maximum of f_j.
  double contribution = 0.0;
  std::uint64_t projection_hash = 0;
};

struct TestReport {
  StatisticKind kind = StatisticKind::q_breve;
  double statistic = 0.0;
  double critical_value = 0.0;
  double level = 0.95;
  bool reject = false;
  std::vector<SampleDiagnostics> per_sample;
  std::uint64_t seed = 0;
  std::size_t n_grid = 0;
  std::size_t n_rep = 0;
  LrvMode lrv_mode = LrvMode::in_sample;
  std::size_t learning_length = 0;
};

struct TestSpec {
  StatisticKind kind = StatisticKind::q_breve;
  /// One shared pair, or one pair per sample (Q kinds only).
  std::vector<ProjectionPair> projections;
  /// Required for Q and V, forbidden for the bridge kinds. One per sample, or one shared.
  std::optional<std::vector<TargetBilinear>> targets;
  TestOptions options;
};

namespace detail {

struct PreparedSample {
  ProjectedSample test;
  LrvEstimate lrv;
  std::uint64_t pair_hash = 0;
};

inline Matrix rows_range(const Matrix& m, std::size_t begin, std::size_t end) {
  return m.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
}

inline const ProjectionPair& pair_for(std::span<const ProjectionPair> pairs, std::size_t j) {
  return pairs.size() == 1 ? pairs[0] : pairs[j];
}

inline void check_pairs(const Panel& panel, std::span<const ProjectionPair> pairs, bool pooled) {
  if (panel.K() == 0) throw ConfigError("cptest", "panel has no samples");
  if (pairs.empty()) throw ConfigError("cptest", "no projection pair supplied");
  if (pooled && pairs.size() != 1) {
    throw ConfigError("cptest", "pooled tests need one projection pair shared by all samples, got " +
                                    std::to_string(pairs.size()));
  }
  if (pairs.size() != 1 && pairs.size() != panel.K()) {
    throw ConfigError("cptest", "expected 1 or " + std::to_string(panel.K()) + " projection pairs, got " +
                                    std::to_string(pairs.size()));
  }
}

inline std::vector<PreparedSample> prepare(const Panel& panel, std::span<const ProjectionPair> pairs,
                                           const TestOptions& opt) {
  const bool learning = opt.lrv_mode == LrvMode::learning_sample;
  if (learning && opt.learning_length == 0) {
    throw ConfigError("cptest", "learning-sample mode needs a positive learning length");
  }
  const std::size_t L = learning ? opt.learning_length : 0;
  std::vector<PreparedSample> out(panel.K());
  for (std::size_t j = 0; j < panel.K(); ++j) {
    const Matrix& y = panel.samples[j];
    const auto n = static_cast<std::size_t>(y.rows());
    if (L >= n) {
      throw ConfigError("cptest", "sample " + std::to_string(j) + " has " + std::to_string(n) +
                                      " rows, not more than the learning length " + std::to_string(L));
    }
    const ProjectionPair& pair = pair_for(pairs, j);
    try {
      if (learning) {
        out[j].test = project(rows_range(y, L, n), pair);
        const ProjectedSample learn = project(rows_range(y, 0, L), pair);
        out[j].lrv = lrv_estimate(learn.p, LrvMode::learning_sample, opt.bandwidth);
      } else {
        out[j].test = project(y, pair);
        out[j].lrv = lrv_estimate(out[j].test.p, LrvMode::in_sample, opt.bandwidth);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::degenerate_lrv) {
        throw DegenerateLrvError("cptest", "sample " + std::to_string(j) + ": " + e.what());
      }
      throw;
    }
    out[j].pair_hash = pair.hash();
  }
  return out;
}

inline std::shared_ptr<const PathBank> bank_for(const TestOptions& opt, std::size_t K) {
  if (opt.bank && opt.bank->K() >= K) return opt.bank;
  return cached_path_bank(K, opt.n_grid, opt.n_rep, opt.seed, opt.workers);
}

inline TestReport start_report(StatisticKind kind, const TestOptions& opt,
                               const std::vector<PreparedSample>& prepared) {
  TestReport r;
  r.kind = kind;
  r.level = opt.level;
  r.seed = opt.bank ? opt.bank->seed() : opt.seed;
  r.n_grid = opt.bank ? opt.bank->n_grid() : opt.n_grid;
  r.n_rep = opt.bank ? opt.bank->n_rep() : opt.n_rep;
  r.lrv_mode = opt.lrv_mode;
  r.learning_length = opt.lrv_mode == LrvMode::learning_sample ? opt.learning_length : 0;
  r.per_sample.resize(prepared.size());
  for (std::size_t j = 0; j < prepared.size(); ++j) {
    r.per_sample[j].n = prepared[j].test.N();
    r.per_sample[j].lrv = prepared[j].lrv;
    r.per_sample[j].projection_hash = prepared[j].pair_hash;
  }
  return r;
}

inline void finish_report(TestReport& r, const TestOptions& opt, const std::vector<PreparedSample>& prepared) {
  if (opt.critical_value) {
    r.critical_value = *opt.critical_value;
    r.reject = r.statistic > r.critical_value;
    return;
  }
  CritValRequest req;
  req.kind = r.kind;
  req.K = prepared.size();
  req.level = opt.level;
  req.n_grid = r.n_grid;
  req.n_rep = r.n_rep;
  req.seed = r.seed;
  req.workers = opt.workers;
  if (is_pooled(r.kind)) {
    std::size_t total = 0;
    for (const auto& p : prepared) total += p.test.N();
    for (const auto& p : prepared) {
      req.alpha_weights.push_back(std::sqrt(p.lrv.alpha_sq));
      req.kappa.push_back(static_cast<double>(p.test.N()) / static_cast<double>(total));
    }
  }
  r.critical_value = critical_value(req, *bank_for(opt, prepared.size()));
  r.reject = r.statistic > r.critical_value;
}

inline TestReport sum_of_squares(StatisticKind kind, const Panel& panel, std::span<const ProjectionPair> pairs,
                                 const std::vector<TargetBilinear>* targets, const TestOptions& opt) {
  check_pairs(panel, pairs, false);
  auto prepared = prepare(panel, pairs, opt);
  TestReport r = start_report(kind, opt, prepared);
  double total = 0.0;
  for (std::size_t j = 0; j < prepared.size(); ++j) {
    std::vector<double> process;
    if (targets) {
      const TargetBilinear& t = targets->size() == 1 ? (*targets)[0] : (*targets)[j];
      process = d_process(prepared[j].test, opt.lrv_mode == LrvMode::learning_sample ? t.tail(opt.learning_length) : t);
    } else {
      process = bridge_process(prepared[j].test);
    }
    const MaxSq m = per_sample_max_sq(process, std::sqrt(prepared[j].lrv.alpha_sq));
    r.per_sample[j].argmax_k = m.argmax;
    r.per_sample[j].contribution = m.value;
    total += m.value;
  }
  r.statistic = total;
  finish_report(r, opt, prepared);
  return r;
}

inline void check_targets(const std::vector<TargetBilinear>& targets, std::size_t K) {
  if (targets.size() != 1 && targets.size() != K) {
    throw ConfigError("cptest", "expected 1 or " + std::to_string(K) + " targets, got " +
                                    std::to_string(targets.size()));
  }
}

}  // namespace detail

/// Per-sample terms f_j(k) = N^{-1/2} (S_j,k - (k / N_j) S_j,N_j) of the pooled
/// bridge statistic; N is the pooled size. f_j(0) = f_j(N_j) = 0 exactly.
inline std::vector<std::vector<double>> pooled_bridge_terms(std::span<const ProjectedSample> samples) {
  std::size_t total = 0;
  for (const auto& s : samples) total += s.N();
  const double inv_sqrt_total = 1.0 / std::sqrt(static_cast<double>(total));
  std::vector<std::vector<double>> f(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto& s = samples[j];
    const std::size_t n = s.N();
    if (n == 0) throw ShapeError("cptest", "sample " + std::to_string(j) + " is empty");
    const double nj = static_cast<double>(n);
    f[j].assign(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      f[j][k] = inv_sqrt_total * (s.S[k] - (static_cast<double>(k) / nj) * s.S[n]);
    }
  }
  return f;
}

/// Per-sample terms f_j(k) = N^{-1/2} (S_j,k - sum_{i<=k} target_j,i) of the pooled statistic.
inline std::vector<std::vector<double>> pooled_d_terms(std::span<const ProjectedSample> samples,
                                                       std::span<const TargetBilinear> targets) {
  std::size_t total = 0;
  for (const auto& s : samples) total += s.N();
  const double inv_sqrt_total = 1.0 / std::sqrt(static_cast<double>(total));
  std::vector<std::vector<double>> f(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto& s = samples[j];
    const auto cum = (targets.size() == 1 ? targets[0] : targets[j]).cumulative(s.N());
    f[j].assign(s.N() + 1, 0.0);
    for (std::size_t k = 1; k <= s.N(); ++k) f[j][k] = inv_sqrt_total * (s.S[k] - cum[k]);
  }
  return f;
}

inline TestReport run_q_test(const Panel& panel, std::span<const ProjectionPair> pairs,
                             const std::vector<TargetBilinear>& targets, const TestOptions& opt) {
  detail::check_targets(targets, panel.K());
  return detail::sum_of_squares(StatisticKind::q, panel, pairs, &targets, opt);
}

inline TestReport run_q_breve_test(const Panel& panel, std::span<const ProjectionPair> pairs,
                                   const TestOptions& opt) {
  return detail::sum_of_squares(StatisticKind::q_breve, panel, pairs, nullptr, opt);
}

inline TestReport run_v_test(const Panel& panel, const ProjectionPair& pair,
                             const std::vector<TargetBilinear>& targets, const TestOptions& opt) {
  detail::check_targets(targets, panel.K());
  const std::span<const ProjectionPair> pairs(&pair, 1);
  detail::check_pairs(panel, pairs, true);
  auto prepared = detail::prepare(panel, pairs, opt);
  TestReport r = detail::start_report(StatisticKind::v, opt, prepared);
  std::vector<ProjectedSample> tests;
  std::vector<TargetBilinear> local;
  for (std::size_t j = 0; j < prepared.size(); ++j) {
    tests.push_back(prepared[j].test);
    const TargetBilinear& t = targets.size() == 1 ? targets[0] : targets[j];
    local.push_back(opt.lrv_mode == LrvMode::learning_sample ? t.tail(opt.learning_length) : t);
  }
  const auto f = pooled_d_terms(tests, local);
  const GridMax g = pooled_d_grid_max(f);
  r.statistic = g.value;
  for (std::size_t j = 0; j < prepared.size(); ++j) {
    r.per_sample[j].argmax_k = g.argmax[j];
    r.per_sample[j].contribution = g.sign * f[j][g.argmax[j]];
  }
  detail::finish_report(r, opt, prepared);
  return r;
}

inline TestReport run_v_breve_test(const Panel& panel, const ProjectionPair& pair, const TestOptions& opt) {
  const std::span<const ProjectionPair> pairs(&pair, 1);
  detail::check_pairs(panel, pairs, true);
  auto prepared = detail::prepare(panel, pairs, opt);
  TestReport r = detail::start_report(StatisticKind::v_breve, opt, prepared);
  std::vector<ProjectedSample> tests;
  for (auto& p : prepared) tests.push_back(p.test);
  const auto f = pooled_bridge_terms(tests);
  const GridMax g = pooled_d_grid_max(f);
  r.statistic = g.value;
  for (std::size_t j = 0; j < prepared.size(); ++j) {
    r.per_sample[j].argmax_k = g.argmax[j];
    r.per_sample[j].contribution = g.sign * f[j][g.argmax[j]];
  }
  detail::finish_report(r, opt, prepared);
  return r;
}

/// Validates the spec's kind/target/projection combination and dispatches.
inline TestReport run_test(const Panel& panel, const TestSpec& spec) {
  const bool known = spec.kind == StatisticKind::q || spec.kind == StatisticKind::v;
  if (known && !spec.targets) {
    throw ConfigError("cptest", std::string(to_string(spec.kind)) + " test requires population targets");
  }
  if (!known && spec.targets) {
    throw ConfigError("cptest", std::string(to_string(spec.kind)) + " test does not accept population targets");
  }
  if (is_pooled(spec.kind) && spec.projections.size() != 1) {
    throw ConfigError("cptest", "pooled tests need one projection pair shared by all samples, got " +
                                    std::to_string(spec.projections.size()));
  }
  switch (spec.kind) {
    case StatisticKind::q: return run_q_test(panel, spec.projections, *spec.targets, spec.options);
    case StatisticKind::q_breve: return run_q_breve_test(panel, spec.projections, spec.options);
    case StatisticKind::v: return run_v_test(panel, spec.projections.front(), *spec.targets, spec.options);
    case StatisticKind::v_breve: return run_v_breve_test(panel, spec.projections.front(), spec.options);
  }
  throw ConfigError("cptest", "unknown statistic kind");
}

/// Standardized pooled bilinear form
///   (sum_j (S_j,N_j - N_j target_j)) / sqrt(sum_j alpha_j^2 N_j),
/// asymptotically N(0, 1) under the null.
inline double pooled_clt_statistic(std::span<const ProjectedSample> samples, std::span<const double> targets,
                                   std::span<const double> alpha_sq) {
  if (targets.size() != samples.size() || alpha_sq.size() != samples.size()) {
    throw ShapeError("cptest", "need one target and one alpha^2 per sample");
  }
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double nj = static_cast<double>(samples[j].N());
    num.add(samples[j].S.back() - nj * targets[j]);
    den.add(alpha_sq[j] * nj);
  }
  return num.value() / std::sqrt(den.value());
}

}  // namespace covcp

#endif  // COVCP_CPTEST_HPP
