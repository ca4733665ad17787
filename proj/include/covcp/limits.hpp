#ifndef COVCP_LIMITS_HPP
#define COVCP_LIMITS_HPP

// Null limit laws of the four change-point statistics.
//
//   Q       sum_j sup B_j^2
//   Q-breve sum_j sup Bbar_j^2
//   V       sup over [0,1]^K of |sum_j c_j B_j(s_j)|,    c_j = alpha_j sqrt(kappa_j)
//   V-breve sup over [0,1]^K of |sum_j c_j Bbar_j(s_j)|
//
// B_j are independent standard Brownian motions and Bbar_j the associated
// bridges. Critical values are Monte Carlo quantiles over discretized paths.
// For positive c the K-dimensional supremum separates:
//   sup |sum c_j f_j| = max(sum c_j sup f_j, sum c_j sup(-f_j)),
// so each path is reduced once to four extrema and reused for every weight
// vector and level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "covcp/errors.hpp"
#include "covcp/parallel.hpp"
#include "covcp/rng.hpp"

namespace covcp {

enum class StatisticKind { q, v, q_breve, v_breve };

inline const char* to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::q: return "q";
    case StatisticKind::v: return "v";
    case StatisticKind::q_breve: return "q-breve";
    case StatisticKind::v_breve: return "v-breve";
  }
  return "?";
}

inline StatisticKind parse_statistic_kind(const std::string& s) {
  if (s == "q" || s == "Q") return StatisticKind::q;
  if (s == "v" || s == "V") return StatisticKind::v;
  if (s == "q-breve" || s == "q_breve" || s == "qb") return StatisticKind::q_breve;
  if (s == "v-breve" || s == "v_breve" || s == "vb") return StatisticKind::v_breve;
  throw ConfigError("limits", "unknown statistic kind '" + s + "' (expected q, v, q-breve or v-breve)");
}

inline bool is_pooled(StatisticKind kind) { return kind == StatisticKind::v || kind == StatisticKind::v_breve; }
inline bool uses_bridge(StatisticKind kind) {
  return kind == StatisticKind::q_breve || kind == StatisticKind::v_breve;
}

// ---------------------------------------------------------------------------
// Closed-form marginal laws.

/// P(sup_{[0,1]} |B| <= sqrt(y)).
inline double sup_abs_bm_cdf(double y) {
  if (!(y >= 0.0)) throw DomainError("limits", "sup|B| cdf argument must be non-negative");
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return 1.0;
  const double c = std::numbers::pi * std::numbers::pi / (8.0 * y);
  double sum = 0.0;
  for (long l = 0;; ++l) {
    const double odd = static_cast<double>(2 * l + 1);
    const double term = std::exp(-odd * odd * c) / odd;
    sum += (l % 2 == 0) ? term : -term;
    if (term < 1e-14) break;
  }
  return std::clamp(4.0 / std::numbers::pi * sum, 0.0, 1.0);
}

/// P(sup_{[0,1]} |Bbar| <= sqrt(y)), the Kolmogorov law at sqrt(y).
inline double sup_abs_bb_cdf(double y) {
  if (!(y > 0.0)) throw DomainError("limits", "sup|Bbar| cdf argument must be positive");
  if (std::isinf(y)) return 1.0;
  const double c = std::numbers::pi * std::numbers::pi / (8.0 * y);
  const double scale = std::sqrt(2.0 * std::numbers::pi / y);
  double sum = 0.0;
  for (long l = 1;; ++l) {
    const double odd = static_cast<double>(2 * l - 1);
    const double term = std::exp(-odd * odd * c);
    sum += term;
    if (scale * term < 1e-14) break;
  }
  return std::clamp(scale * sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Discretized Brownian paths.

/// Extrema of one discretized path over k = 0..n_grid (all non-negative,
/// since every path starts at 0).
struct PathExtrema {
  double bm_max = 0.0;
  double bm_neg_max = 0.0;
  double bb_max = 0.0;
  double bb_neg_max = 0.0;

  double bm_sup_sq() const { double m = std::max(bm_max, bm_neg_max); return m * m; }
  double bb_sup_sq() const { double m = std::max(bb_max, bb_neg_max); return m * m; }
};

namespace detail {

/// B(k/n) for k = 0..n from N(0, 1/n) increments on stream (seed, rep, j).
inline void brownian_path_into(std::uint64_t seed, std::size_t n_grid, std::uint64_t rep, std::uint64_t j,
                               std::vector<double>& path) {
  Philox gen = make_stream(seed, "limits.path", {rep, j});
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n_grid));
  path.resize(n_grid + 1);
  path[0] = 0.0;
  double b = 0.0;
  for (std::size_t k = 1; k <= n_grid; ++k) {
    b += sd * normal(gen);
    path[k] = b;
  }
}

inline PathExtrema path_extrema(const std::vector<double>& path) {
  const std::size_t n = path.size() - 1;
  const double end = path[n];
  const double inv_n = 1.0 / static_cast<double>(n);
  PathExtrema e;
  for (std::size_t k = 1; k <= n; ++k) {
    const double b = path[k];
    const double bb = (k == n) ? 0.0 : b - static_cast<double>(k) * inv_n * end;
    e.bm_max = std::max(e.bm_max, b);
    e.bm_neg_max = std::max(e.bm_neg_max, -b);
    e.bb_max = std::max(e.bb_max, bb);
    e.bb_neg_max = std::max(e.bb_neg_max, -bb);
  }
  return e;
}

}  // namespace detail

/// Path extrema for n_rep replications of K independent paths.
/// The path for (rep, j) depends only on (seed, n_grid, rep, j), so a bank
/// with K' >= K paths per replication contains the K-path bank as a prefix.
class PathBank {
 public:
  static PathBank simulate(std::size_t K, std::size_t n_grid, std::size_t n_rep, std::uint64_t seed,
                           unsigned workers = 0) {
    PathBank bank;
    bank.K_ = K;
    bank.n_grid_ = n_grid;
    bank.n_rep_ = n_rep;
    bank.seed_ = seed;
    bank.extrema_.resize(K * n_rep);
    parallel_for(n_rep, workers, [&](std::size_t rep) {
      thread_local std::vector<double> path;
      for (std::size_t j = 0; j < K; ++j) {
        detail::brownian_path_into(seed, n_grid, rep, j, path);
        bank.extrema_[rep * K + j] = detail::path_extrema(path);
      }
    });
    return bank;
  }

  std::size_t K() const { return K_; }
  std::size_t n_grid() const { return n_grid_; }
  std::size_t n_rep() const { return n_rep_; }
  std::uint64_t seed() const { return seed_; }

  const PathExtrema& extrema(std::size_t rep, std::size_t j) const { return extrema_[rep * K_ + j]; }

  /// Regenerates the full discrete path B(k/n_grid), k = 0..n_grid.
  std::vector<double> brownian_path(std::size_t rep, std::size_t j) const {
    std::vector<double> path;
    detail::brownian_path_into(seed_, n_grid_, rep, j, path);
    return path;
  }

 private:
  std::size_t K_ = 0;
  std::size_t n_grid_ = 0;
  std::size_t n_rep_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<PathExtrema> extrema_;
};

inline PathBank simulate_brownian_paths(std::size_t n_grid, std::size_t n_rep, std::uint64_t seed,
                                        std::size_t K = 1, unsigned workers = 0) {
  return PathBank::simulate(K, n_grid, n_rep, seed, workers);
}

/// Process-wide bank cache keyed by (n_grid, n_rep, seed); a cached bank
/// with at least K paths per replication is reused.
inline std::shared_ptr<const PathBank> cached_path_bank(std::size_t K, std::size_t n_grid, std::size_t n_rep,
                                                        std::uint64_t seed, unsigned workers = 0) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, std::shared_ptr<const PathBank>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n_grid, n_rep, seed}];
  if (!slot || slot->K() < K) {
    slot = std::make_shared<const PathBank>(PathBank::simulate(K, n_grid, n_rep, seed, workers));
  }
  return slot;
}

// ---------------------------------------------------------------------------
// Critical values.

struct CritValRequest {
  StatisticKind kind = StatisticKind::q_breve;
  std::size_t K = 1;
  double level = 0.95;
  /// alpha_j (not squared); V kinds only.
  std::vector<double> alpha_weights;
  /// N_j / N; V kinds only.
  std::vector<double> kappa;
  std::size_t n_grid = 2000;
  std::size_t n_rep = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;

  void validate() const {
    if (K == 0) throw ConfigError("limits", "K must be at least 1");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("limits", "level must lie in (0, 1)");
    if (n_grid < 100) throw ConfigError("limits", "n_grid must be at least 100");
    if (n_rep < 1000) throw ConfigError("limits", "n_rep must be at least 1000");
    if (is_pooled(kind)) {
      if (alpha_weights.size() != K) {
        throw ConfigError("limits", std::string(to_string(kind)) + " critical value needs " + std::to_string(K) +
                                        " alpha weights, got " + std::to_string(alpha_weights.size()));
      }
      if (kappa.size() != K) {
        throw ConfigError("limits", std::string(to_string(kind)) + " critical value needs " + std::to_string(K) +
                                        " kappa values, got " + std::to_string(kappa.size()));
      }
      double total = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        if (!(alpha_weights[j] > 0.0) || !std::isfinite(alpha_weights[j])) {
          throw ConfigError("limits", "alpha weight " + std::to_string(j) + " must be positive");
        }
        if (!(kappa[j] > 0.0)) throw ConfigError("limits", "kappa " + std::to_string(j) + " must be positive");
        total += kappa[j];
      }
      if (total > 1.0 + 1e-9) throw ConfigError("limits", "kappa values sum to more than 1");
    }
  }

  /// c_j = alpha_j sqrt(kappa_j).
  std::vector<double> pooled_weights() const {
    std::vector<double> c(K);
    for (std::size_t j = 0; j < K; ++j) c[j] = alpha_weights[j] * std::sqrt(kappa[j]);
    return c;
  }
};

/// One Monte Carlo draw of the requested null functional per replication.
inline std::vector<double> null_draws(const PathBank& bank, StatisticKind kind, std::size_t K,
                                      std::span<const double> pooled_weights = {}) {
  if (K > bank.K()) throw ConfigError("limits", "path bank holds fewer paths than K");
  if (is_pooled(kind) && pooled_weights.size() != K) {
    throw ConfigError("limits", "pooled functional needs one weight per sample");
  }
  const bool bridge = uses_bridge(kind);
  std::vector<double> draws(bank.n_rep());
  for (std::size_t r = 0; r < bank.n_rep(); ++r) {
    if (is_pooled(kind)) {
      double hi = 0.0;
      double lo = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const PathExtrema& e = bank.extrema(r, j);
        hi += pooled_weights[j] * (bridge ? e.bb_max : e.bm_max);
        lo += pooled_weights[j] * (bridge ? e.bb_neg_max : e.bm_neg_max);
      }
      draws[r] = std::max(hi, lo);
    } else {
      double sum = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const PathExtrema& e = bank.extrema(r, j);
        sum += bridge ? e.bb_sup_sq() : e.bm_sup_sq();
      }
      draws[r] = sum;
    }
  }
  return draws;
}

/// Type-1 empirical quantile: the ceil(level * n)-th order statistic.
inline double empirical_quantile(std::vector<double> draws, double level) {
  if (draws.empty()) throw ConfigError("limits", "quantile of an empty sample");
  const double n = static_cast<double>(draws.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, draws.size());
  auto nth = draws.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(draws.begin(), nth, draws.end());
  return *nth;
}

/// Critical values for several levels from a single set of draws.
inline std::vector<double> critical_values(const CritValRequest& req, std::span<const double> levels,
                                           const PathBank& bank) {
  req.validate();
  std::vector<double> weights;
  if (is_pooled(req.kind)) weights = req.pooled_weights();
  std::vector<double> draws = null_draws(bank, req.kind, req.K, weights);
  std::sort(draws.begin(), draws.end());
  std::vector<double> out;
  out.reserve(levels.size());
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("limits", "level must lie in (0, 1)");
    auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(draws.size()) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, draws.size());
    out.push_back(draws[rank - 1]);
  }
  return out;
}

inline double critical_value(const CritValRequest& req, const PathBank& bank) {
  req.validate();
  std::vector<double> weights;
  if (is_pooled(req.kind)) weights = req.pooled_weights();
  return empirical_quantile(null_draws(bank, req.kind, req.K, weights), req.level);
}

inline double critical_value(const CritValRequest& req) {
  req.validate();
  const auto bank = cached_path_bank(req.K, req.n_grid, req.n_rep, req.seed, req.workers);
  return critical_value(req, *bank);
}

struct CritValRow {
  StatisticKind kind;
  std::size_t K;
  double level;
  double value;
  std::size_t n_grid;
  std::size_t n_rep;
  std::uint64_t seed;
};

}  // namespace covcp

#endif  // COVCP_LIMITS_HPP
