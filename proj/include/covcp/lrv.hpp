#ifndef COVCP_LRV_HPP
#define COVCP_LRV_HPP

// Long-run variance of the projected product series.
//
// alpha^2 = Gamma(0) + 2 sum_{h=1}^{m} k(h / S) Gamma(h), with the quadratic
// spectral kernel k and an Andrews-type AR(1) plug-in bandwidth S.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covcp/errors.hpp"
#include "covcp/sumproc.hpp"
#include "covcp/types.hpp"

namespace covcp {

enum class LrvMode { in_sample, learning_sample };

inline const char* to_string(LrvMode mode) {
  return mode == LrvMode::in_sample ? "in-sample" : "learning-sample";
}

inline LrvMode parse_lrv_mode(const std::string& s) {
  if (s == "in-sample" || s == "in_sample") return LrvMode::in_sample;
  if (s == "learning-sample" || s == "learning" || s == "learning_sample") return LrvMode::learning_sample;
  throw ConfigError("lrv", "unknown LRV mode '" + s + "' (expected in-sample or learning-sample)");
}

struct LrvEstimate {
  double alpha_sq = 0.0;
  double bandwidth = 0.0;
  std::size_t n_lags = 0;
  LrvMode mode = LrvMode::in_sample;
  /// Fitted lag-one autocorrelation used for the bandwidth (after clamping).
  double rho = 0.0;
  bool rho_clamped = false;
  /// The weighted sum was not positive and has been floored.
  bool degenerate = false;
};

inline constexpr double kRhoClamp = 0.97;
inline constexpr double kQsBandwidthConstant = 1.3221;
inline constexpr double kLagsPerBandwidth = 3.0;

namespace detail {

struct Centered {
  std::vector<double> values;
  bool constant = false;
};

inline Centered center(std::span<const double> p) {
  Centered c;
  c.values.assign(p.begin(), p.end());
  if (p.empty()) return c;
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (*lo == *hi) {
    c.constant = true;
    std::fill(c.values.begin(), c.values.end(), 0.0);
    return c;
  }
  CompensatedSum sum;
  for (double v : p) sum.add(v);
  const double mean = sum.value() / static_cast<double>(p.size());
  for (double& v : c.values) v -= mean;
  return c;
}

inline double centered_autocov(std::span<const double> c, std::size_t h) {
  const std::size_t n = c.size();
  CompensatedSum acc;
  for (std::size_t i = 0; i + h < n; ++i) acc.add(c[i] * c[i + h]);
  return acc.value() / static_cast<double>(n);
}

}  // namespace detail

/// Sample autocovariance with divisor N, centred by the sample mean.
inline double autocov_hat(std::span<const double> p, std::size_t h) {
  if (h >= p.size()) {
    throw DomainError("lrv", "lag " + std::to_string(h) + " not below series length " + std::to_string(p.size()));
  }
  const auto c = detail::center(p);
  if (c.constant) return 0.0;
  return detail::centered_autocov(c.values, h);
}

inline double autocov_hat(const ProjectedSample& ps, std::size_t h) { return autocov_hat(ps.p, h); }

/// Quadratic spectral kernel.
inline double qs_weight(double x) {
  const double z = 6.0 * std::numbers::pi * x / 5.0;
  if (std::abs(z) < 1e-3) {
    const double z2 = z * z;
    return 1.0 - z2 / 10.0 + z2 * z2 / 280.0;
  }
  return 3.0 / (z * z) * (std::sin(z) / z - std::cos(z));
}

struct BandwidthChoice {
  double bandwidth = 0.0;
  double rho = 0.0;
  bool clamped = false;
};

/// Andrews' AR(1) plug-in rule for the QS kernel:
/// S = 1.3221 (a2 N)^{1/5}, a2 = 4 rho^2 / (1 - rho)^4.
inline BandwidthChoice andrews_bandwidth_detail(std::span<const double> p) {
  if (p.size() < 4) {
    throw InsufficientDataError("lrv", "bandwidth selection needs at least 4 observations, got " +
                                           std::to_string(p.size()));
  }
  const auto c = detail::center(p);
  if (c.constant) throw DegenerateLrvError("lrv", "product series is constant");
  const double g0 = detail::centered_autocov(c.values, 0);
  const double g1 = detail::centered_autocov(c.values, 1);
  BandwidthChoice out;
  out.rho = g1 / g0;
  if (std::abs(out.rho) > kRhoClamp) {
    out.rho = std::copysign(kRhoClamp, out.rho);
    out.clamped = true;
  }
  if (out.rho == 0.0) return out;
  const double a2 = 4.0 * out.rho * out.rho / std::pow(1.0 - out.rho, 4);
  out.bandwidth = kQsBandwidthConstant * std::pow(a2 * static_cast<double>(p.size()), 0.2);
  return out;
}

inline double andrews_bandwidth(std::span<const double> p) { return andrews_bandwidth_detail(p).bandwidth; }
inline double andrews_bandwidth(const ProjectedSample& ps) { return andrews_bandwidth(ps.p); }

namespace detail {

/// Non-positive sums are replaced by 1e-12 * Gamma(0).
inline double floor_lrv(double value, double g0, bool& degenerate) {
  degenerate = !(value > 0.0);
  return degenerate ? 1e-12 * g0 : value;
}

}  // namespace detail

/// Kernel-weighted autocovariance sum with truncation m = min(ceil(3 S), N - 1).
/// `mode` is recorded only; the caller decides which series to pass.
inline LrvEstimate lrv_estimate(std::span<const double> p, LrvMode mode = LrvMode::in_sample,
                                std::optional<double> bandwidth_override = std::nullopt) {
  const std::size_t n = p.size();
  LrvEstimate est;
  est.mode = mode;
  if (bandwidth_override) {
    if (!(*bandwidth_override >= 0.0) || !std::isfinite(*bandwidth_override)) {
      throw ConfigError("lrv", "bandwidth override must be a finite non-negative number");
    }
    const std::size_t min_n = *bandwidth_override == 0.0 ? 2 : 4;
    if (n < min_n) {
      throw InsufficientDataError("lrv", "LRV estimation needs at least " + std::to_string(min_n) +
                                             " observations, got " + std::to_string(n));
    }
    est.bandwidth = *bandwidth_override;
  } else {
    const BandwidthChoice bw = andrews_bandwidth_detail(p);
    est.bandwidth = bw.bandwidth;
    est.rho = bw.rho;
    est.rho_clamped = bw.clamped;
  }

  const auto c = detail::center(p);
  if (c.constant) throw DegenerateLrvError("lrv", "product series is constant; long-run variance is zero");
  const double g0 = detail::centered_autocov(c.values, 0);

  std::size_t m = 0;
  if (est.bandwidth > 0.0) {
    m = std::min<std::size_t>(static_cast<std::size_t>(std::ceil(kLagsPerBandwidth * est.bandwidth)), n - 1);
  }
  est.n_lags = m;
  CompensatedSum acc;
  acc.add(g0);
  for (std::size_t h = 1; h <= m; ++h) {
    acc.add(2.0 * qs_weight(static_cast<double>(h) / est.bandwidth) * detail::centered_autocov(c.values, h));
  }
  est.alpha_sq = detail::floor_lrv(acc.value(), g0, est.degenerate);
  return est;
}

inline LrvEstimate lrv_estimate(const ProjectedSample& ps, LrvMode mode = LrvMode::in_sample,
                                std::optional<double> bandwidth_override = std::nullopt) {
  return lrv_estimate(ps.p, mode, bandwidth_override);
}

}  // namespace covcp

#endif  // COVCP_LRV_HPP
