#ifndef COVCP_SIMGEN_HPP
#define COVCP_SIMGEN_HPP

// Synthetic K-sample AR(1) panels and Dirichlet projection vectors.
//
// Within sample j all d coordinates filter one scalar innovation sequence:
//   Y[j,i,nu] = rho[nu] * Y[j,i-1,nu] + eps[j,i],  eps[j,i] ~ N(0, sigma_j^2).
// Coordinates are therefore cross-correlated through the shared innovation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "covcp/errors.hpp"
#include "covcp/rng.hpp"
#include "covcp/types.hpp"

namespace covcp {

struct PanelConfig {
  std::size_t K = 0;
  std::size_t d = 0;
  std::vector<std::size_t> N;
  std::vector<double> rho0;
  std::optional<std::vector<double>> rho1;
  std::vector<double> sigma0;
  std::optional<std::vector<double>> sigma1;
  /// Per-sample change index: observations i > tau[j] follow the post-change regime.
  std::optional<std::vector<std::size_t>> tau;
  std::size_t burn_in = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Panel {
  std::vector<Matrix> samples;
  PanelConfig config;

  std::size_t K() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : static_cast<std::size_t>(samples[0].cols()); }
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& what) {
  throw ConfigError("simgen", "invalid PanelConfig." + field + ": " + what);
}

inline void check_rho(const std::vector<double>& rho, std::size_t d, const std::string& field) {
  if (rho.size() != d) {
    config_fail(field, "expected " + std::to_string(d) + " entries, got " + std::to_string(rho.size()));
  }
  for (std::size_t nu = 0; nu < rho.size(); ++nu) {
    if (!std::isfinite(rho[nu]) || std::abs(rho[nu]) >= 1.0) {
      config_fail(field, "entry " + std::to_string(nu) + " = " + std::to_string(rho[nu]) +
                             " is not in (-1, 1)");
    }
  }
}

inline void check_sigma(const std::vector<double>& sigma, std::size_t K, const std::string& field) {
  if (sigma.size() != K) {
    config_fail(field, "expected " + std::to_string(K) + " entries, got " + std::to_string(sigma.size()));
  }
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!std::isfinite(sigma[j]) || sigma[j] <= 0.0) {
      config_fail(field, "entry " + std::to_string(j) + " must be positive");
    }
  }
}

}  // namespace detail

inline void PanelConfig::validate() const {
  if (K == 0) detail::config_fail("K", "must be at least 1");
  if (d == 0) detail::config_fail("d", "must be at least 1");
  if (N.size() != K) {
    detail::config_fail("N", "expected " + std::to_string(K) + " sample sizes, got " +
                                 std::to_string(N.size()));
  }
  for (std::size_t j = 0; j < K; ++j) {
    if (N[j] == 0) detail::config_fail("N", "sample " + std::to_string(j) + " has size 0");
  }
  detail::check_rho(rho0, d, "rho0");
  if (rho1) detail::check_rho(*rho1, d, "rho1");
  detail::check_sigma(sigma0, K, "sigma0");
  if (sigma1) detail::check_sigma(*sigma1, K, "sigma1");
  if (tau) {
    if (!rho1 && !sigma1) detail::config_fail("tau", "requires rho1 or sigma1");
    if (tau->size() != K) {
      detail::config_fail("tau", "expected " + std::to_string(K) + " entries, got " +
                                     std::to_string(tau->size()));
    }
    for (std::size_t j = 0; j < K; ++j) {
      if ((*tau)[j] < 1 || (*tau)[j] > N[j]) {
        detail::config_fail("tau", "entry " + std::to_string(j) + " = " + std::to_string((*tau)[j]) +
                                       " outside [1, " + std::to_string(N[j]) + "]");
      }
    }
  }
}

/// Generates the panel for one replication. Bit-reproducible for a fixed
/// (config.seed, replication); each sample draws from its own keyed stream.
inline Panel gen_ar1_panel(const PanelConfig& config, std::uint64_t replication = 0) {
  config.validate();
  Panel panel;
  panel.config = config;
  panel.samples.reserve(config.K);

  const std::size_t d = config.d;
  std::vector<double> state(d);
  for (std::size_t j = 0; j < config.K; ++j) {
    Philox gen = make_stream(config.seed, "simgen.panel", {replication, j});
    boost::random::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n = config.N[j];
    const std::size_t change_at = config.tau ? (*config.tau)[j] : n;
    const double s0 = config.sigma0[j];
    const double s1 = config.sigma1 ? (*config.sigma1)[j] : s0;
    const std::vector<double>& r0 = config.rho0;
    const std::vector<double>& r1 = config.rho1 ? *config.rho1 : config.rho0;

    Matrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::fill(state.begin(), state.end(), 0.0);
    for (std::size_t t = 0; t < config.burn_in; ++t) {
      const double e = s0 * normal(gen);
      for (std::size_t nu = 0; nu < d; ++nu) state[nu] = r0[nu] * state[nu] + e;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      const bool post = i > change_at;
      const double e = (post ? s1 : s0) * normal(gen);
      const std::vector<double>& rho = post ? r1 : r0;
      for (std::size_t nu = 0; nu < d; ++nu) {
        state[nu] = rho[nu] * state[nu] + e;
        y(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(nu)) = state[nu];
      }
    }
    panel.samples.push_back(std::move(y));
  }
  return panel;
}

/// Draws a weight vector from a Dirichlet law whose d parameters are
/// themselves U(0,1). Entries are non-negative and sum to one.
inline Vector gen_dirichlet_projection(std::size_t d, std::uint64_t seed,
                                       std::uint64_t replication = 0) {
  if (d == 0) throw ConfigError("simgen", "Dirichlet dimension must be at least 1");
  Vector w(static_cast<Eigen::Index>(d));
  if (d == 1) {
    w(0) = 1.0;
    return w;
  }
  Philox gen = make_stream(seed, "simgen.dirichlet", {replication});
  boost::random::uniform_01<double> unif;
  for (;;) {
    CompensatedSum total;
    for (std::size_t nu = 0; nu < d; ++nu) {
      double shape = unif(gen);
      while (shape <= 0.0) shape = unif(gen);
      boost::random::gamma_distribution<double> gamma(shape, 1.0);
      const double g = gamma(gen);
      w(static_cast<Eigen::Index>(nu)) = g;
      total.add(g);
    }
    const double sum = total.value();
    if (sum > 0.0 && std::isfinite(sum)) {
      w /= sum;
      return w;
    }
  }
}

// ---------------------------------------------------------------------------
// Presets for the four sample-size designs and the linear AR coefficient
// profile rho_nu = intercept + 0.5 nu / d.

enum class SampleCase { I, II, III, IV };

inline std::vector<std::size_t> case_sample_sizes(SampleCase c) {
  switch (c) {
    case SampleCase::I: return {100, 120, 70, 90};
    case SampleCase::II: return {300, 250, 350, 180};
    case SampleCase::III: return {500, 450, 550, 600};
    case SampleCase::IV: return {1000, 900, 1100, 950};
  }
  return {};
}

inline std::string to_string(SampleCase c) {
  switch (c) {
    case SampleCase::I: return "I";
    case SampleCase::II: return "II";
    case SampleCase::III: return "III";
    case SampleCase::IV: return "IV";
  }
  return "?";
}

inline SampleCase parse_sample_case(const std::string& s) {
  if (s == "I" || s == "1") return SampleCase::I;
  if (s == "II" || s == "2") return SampleCase::II;
  if (s == "III" || s == "3") return SampleCase::III;
  if (s == "IV" || s == "4") return SampleCase::IV;
  throw ConfigError("simgen", "unknown sample case '" + s + "' (expected I, II, III or IV)");
}

inline std::vector<double> linear_ar_coefficients(std::size_t d, double intercept) {
  std::vector<double> rho(d);
  for (std::size_t nu = 1; nu <= d; ++nu) {
    rho[nu - 1] = intercept + 0.5 * static_cast<double>(nu) / static_cast<double>(d);
  }
  return rho;
}

inline constexpr double kPreChangeRhoIntercept = 0.1;
inline constexpr double kPostChangeRhoIntercept = 0.4;
inline const std::vector<double> kPreChangeSigma{1.0, 1.5, 0.7, 1.0};
inline const std::vector<double> kPostChangeSigma{1.0, 0.7, 1.2, 1.0};

// ---------------------------------------------------------------------------
// Closed-form population quantities of the stationary AR(1) panel.

namespace detail {

/// Cross-covariance Cov(a'Y_0, b'Y_h) for h >= 0 given A_mu = sum_nu a_nu / (1 - rho_nu rho_mu).
inline double ar1_cross_cov(std::span<const double> rho, double sigma, const Vector& b,
                            const std::vector<double>& a_weighted, std::size_t h) {
  double acc = 0.0;
  for (std::size_t mu = 0; mu < rho.size(); ++mu) {
    acc += b(static_cast<Eigen::Index>(mu)) * std::pow(rho[mu], static_cast<double>(h)) * a_weighted[mu];
  }
  return sigma * sigma * acc;
}

inline std::vector<double> ar1_weighted(std::span<const double> rho, const Vector& a) {
  std::vector<double> out(rho.size(), 0.0);
  for (std::size_t mu = 0; mu < rho.size(); ++mu) {
    for (std::size_t nu = 0; nu < rho.size(); ++nu) {
      out[mu] += a(static_cast<Eigen::Index>(nu)) / (1.0 - rho[nu] * rho[mu]);
    }
  }
  return out;
}

inline void check_population_args(std::span<const double> rho, const Vector& v, const Vector& w) {
  if (static_cast<std::size_t>(v.size()) != rho.size() || static_cast<std::size_t>(w.size()) != rho.size()) {
    throw ShapeError("simgen", "projection length does not match number of AR coefficients");
  }
}

}  // namespace detail

/// v' Cov(Y_i) w for the stationary shared-innovation AR(1) sample.
inline double ar1_bilinear_target(std::span<const double> rho, double sigma, const Vector& v,
                                  const Vector& w) {
  detail::check_population_args(rho, v, w);
  return detail::ar1_cross_cov(rho, sigma, w, detail::ar1_weighted(rho, v), 0);
}

/// Long-run variance of p_i = (v'Y_i)(w'Y_i) for the stationary Gaussian
/// AR(1) sample: sum over all lags of gxx(h) gyy(h) + gxy(h) gyx(h).
inline double ar1_product_lrv(std::span<const double> rho, double sigma, const Vector& v,
                              const Vector& w) {
  detail::check_population_args(rho, v, w);
  const auto av = detail::ar1_weighted(rho, v);
  const auto aw = detail::ar1_weighted(rho, w);
  double rho_max = 0.0;
  for (double r : rho) rho_max = std::max(rho_max, std::abs(r));

  auto lag_cov = [&](std::size_t h) {
    const double gxx = detail::ar1_cross_cov(rho, sigma, v, av, h);
    const double gyy = detail::ar1_cross_cov(rho, sigma, w, aw, h);
    const double gxy = detail::ar1_cross_cov(rho, sigma, w, av, h);
    const double gyx = detail::ar1_cross_cov(rho, sigma, v, aw, h);
    return gxx * gyy + gxy * gyx;
  };

  CompensatedSum total;
  total.add(lag_cov(0));
  for (std::size_t h = 1; h < 200000; ++h) {
    total.add(2.0 * lag_cov(h));
    if (std::pow(rho_max, 2.0 * static_cast<double>(h)) < 1e-18) break;
  }
  return total.value();
}

}  // namespace covcp

#endif  // COVCP_SIMGEN_HPP
