#ifndef COVCP_SUMPROC_HPP
#define COVCP_SUMPROC_HPP

// Projected product series and the partial-sum processes built from them.
//
// Bilinear forms v' Sigma_hat_k w are never formed as d x d matrices: each
// observation is projected once, x_i = v'Y_i and y_i = w'Y_i, and the
// products p_i = x_i y_i are accumulated. v' Sigma_hat_k w then equals S_k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "covcp/errors.hpp"
#include "covcp/rng.hpp"
#include "covcp/types.hpp"

namespace covcp {

struct ProjectionPair {
  Vector v;
  Vector w;
  double l1_v = 0.0;
  double l1_w = 0.0;

  static ProjectionPair make(Vector v, Vector w) {
    if (v.size() != w.size()) throw ShapeError("sumproc", "projection vectors differ in length");
    if (v.size() == 0) throw ShapeError("sumproc", "projection vectors are empty");
    if (!v.allFinite() || !w.allFinite()) throw DomainError("sumproc", "projection vector has non-finite entries");
    ProjectionPair pair{std::move(v), std::move(w), 0.0, 0.0};
    pair.l1_v = pair.v.lpNorm<1>();
    pair.l1_w = pair.w.lpNorm<1>();
    if (pair.l1_v == 0.0 || pair.l1_w == 0.0) throw DomainError("sumproc", "projection vector is all zero");
    return pair;
  }

  /// Quadratic-form pair v = w.
  static ProjectionPair symmetric(Vector w) { return make(w, w); }

  std::size_t dim() const { return static_cast<std::size_t>(v.size()); }

  /// Provenance hash over the raw bytes of v and w.
  std::uint64_t hash() const {
    std::uint64_t h = fnv1a("pair");
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(v.data()), sizeof(double) * static_cast<std::size_t>(v.size())), h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(w.data()), sizeof(double) * static_cast<std::size_t>(w.size())), h);
    return h;
  }
};

struct ProjectedSample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> p;
  /// S[k] = p_1 + ... + p_k; S[0] = 0; length N + 1.
  std::vector<double> S;

  std::size_t N() const { return p.size(); }
};

/// Population bilinear form v' Cov(Y_i) w, constant or one value per time point.
class TargetBilinear {
 public:
  static TargetBilinear constant(double value) { return TargetBilinear(value); }
  static TargetBilinear sequence(std::vector<double> values) { return TargetBilinear(std::move(values)); }

  bool is_constant() const { return std::holds_alternative<double>(value_); }

  /// Cumulative targets C[k] = sum_{i<=k} target_i for k = 0..n (compensated).
  std::vector<double> cumulative(std::size_t n) const {
    std::vector<double> out(n + 1, 0.0);
    if (const double* c = std::get_if<double>(&value_)) {
      for (std::size_t k = 1; k <= n; ++k) out[k] = static_cast<double>(k) * *c;
      return out;
    }
    const auto& seq = std::get<std::vector<double>>(value_);
    if (seq.size() != n) {
      throw ShapeError("sumproc", "target sequence has length " + std::to_string(seq.size()) +
                                      ", sample has " + std::to_string(n));
    }
    CompensatedSum acc;
    for (std::size_t k = 1; k <= n; ++k) {
      acc.add(seq[k - 1]);
      out[k] = acc.value();
    }
    return out;
  }

  /// Same target with every entry shifted by c.
  TargetBilinear shifted(double c) const {
    if (const double* v = std::get_if<double>(&value_)) return constant(*v + c);
    auto seq = std::get<std::vector<double>>(value_);
    for (double& s : seq) s += c;
    return sequence(std::move(seq));
  }

  /// Restriction to time points [offset, offset + n), for carved learning blocks.
  TargetBilinear tail(std::size_t offset) const {
    if (is_constant()) return *this;
    const auto& seq = std::get<std::vector<double>>(value_);
    if (offset > seq.size()) throw ShapeError("sumproc", "target offset beyond sequence length");
    return sequence(std::vector<double>(seq.begin() + static_cast<std::ptrdiff_t>(offset), seq.end()));
  }

 private:
  explicit TargetBilinear(double c) : value_(c) {}
  explicit TargetBilinear(std::vector<double> s) : value_(std::move(s)) {}
  std::variant<double, std::vector<double>> value_;
};

inline ProjectedSample project(const Matrix& sample, const ProjectionPair& pair) {
  if (static_cast<std::size_t>(sample.cols()) != pair.dim()) {
    throw ShapeError("sumproc", "sample has " + std::to_string(sample.cols()) +
                                    " columns, projection has length " + std::to_string(pair.dim()));
  }
  const auto n = static_cast<std::size_t>(sample.rows());
  ProjectedSample ps;
  ps.x.resize(n);
  ps.y.resize(n);
  ps.p.resize(n);
  ps.S.resize(n + 1);
  ps.S[0] = 0.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = sample.row(static_cast<Eigen::Index>(i));
    ps.x[i] = row.dot(pair.v.transpose());
    ps.y[i] = row.dot(pair.w.transpose());
    ps.p[i] = ps.x[i] * ps.y[i];
    acc.add(ps.p[i]);
    ps.S[i + 1] = acc.value();
  }
  return ps;
}

/// D(k/N) = N^{-1/2} (S_k - sum_{i<=k} target_i), k = 0..N.
inline std::vector<double> d_process(const ProjectedSample& ps, const TargetBilinear& target) {
  const std::size_t n = ps.N();
  const std::vector<double> cum = target.cumulative(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = scale * (ps.S[k] - cum[k]);
  out[0] = 0.0;
  return out;
}

/// Delta(k/N) = N^{-1/2} (S_k - (k/N) S_N), k = 0..N. Endpoints are exactly zero.
/// Depends on the data only through S, never on any population target.
inline std::vector<double> bridge_process(const ProjectedSample& ps) {
  const std::size_t n = ps.N();
  if (n == 0) throw ShapeError("sumproc", "bridge of an empty sample");
  const double nn = static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(nn);
  const double total = ps.S[n];
  std::vector<double> out(n + 1);
  for (std::size_t k = 1; k < n; ++k) {
    out[k] = scale * (ps.S[k] - (static_cast<double>(k) / nn) * total);
  }
  out[0] = 0.0;
  out[n] = 0.0;
  return out;
}

struct GridMax {
  double value = 0.0;
  /// Achieving multi-index (k_1, ..., k_K).
  std::vector<std::size_t> argmax;
  /// +1 if the maximum is attained by sum f_j, -1 if by -sum f_j.
  int sign = 1;
};

/// max over the product grid of |sum_j f_j(k_j)|, using separability:
/// the maximum equals max(sum_j max f_j, sum_j max(-f_j)). O(sum N_j).
/// Ties resolve to the smallest index, and to the positive branch.
/// Branch sums accumulate left to right in j; rounded addition is monotone in
/// each operand, so the result is bit-identical to exhaustive enumeration
/// with the same summation order.
inline GridMax pooled_d_grid_max(std::span<const std::vector<double>> processes) {
  GridMax result;
  const std::size_t K = processes.size();
  std::vector<std::size_t> arg_hi(K, 0);
  std::vector<std::size_t> arg_lo(K, 0);
  double hi = 0.0;
  double lo = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    const auto& f = processes[j];
    if (f.empty()) throw ShapeError("sumproc", "process " + std::to_string(j) + " is empty");
    if (f[0] != 0.0) throw DomainError("sumproc", "process " + std::to_string(j) + " does not vanish at k = 0");
    double best_hi = f[0];
    double best_lo = -f[0];
    for (std::size_t k = 1; k < f.size(); ++k) {
      if (f[k] > best_hi) {
        best_hi = f[k];
        arg_hi[j] = k;
      }
      if (-f[k] > best_lo) {
        best_lo = -f[k];
        arg_lo[j] = k;
      }
    }
    hi += best_hi;
    lo += best_lo;
  }
  if (lo > hi) {
    result.value = lo;
    result.argmax = std::move(arg_lo);
    result.sign = -1;
  } else {
    result.value = hi;
    result.argmax = std::move(arg_hi);
  }
  return result;
}

struct MaxSq {
  double value = 0.0;
  std::size_t argmax = 0;
};

/// max_k (process(k) / scale)^2 with the first maximizing k.
inline MaxSq per_sample_max_sq(std::span<const double> process, double scale) {
  if (!(scale > 0.0)) {
    throw DegenerateLrvError("sumproc", "standardizing scale must be positive, got " + std::to_string(scale));
  }
  MaxSq out;
  double best = -1.0;
  for (std::size_t k = 0; k < process.size(); ++k) {
    const double a = std::abs(process[k]);
    if (a > best) {
      best = a;
      out.argmax = k;
    }
  }
  const double z = std::max(best, 0.0) / scale;
  out.value = z * z;
  return out;
}

}  // namespace covcp

#endif  // COVCP_SUMPROC_HPP
