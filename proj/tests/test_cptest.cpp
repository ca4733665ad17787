#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covcp/cptest.hpp"
#include "oracles.hpp"

using namespace covcp;

namespace {

TestOptions quick_options() {
  TestOptions o;
  o.n_grid = 500;
  o.n_rep = 5000;
  o.seed = 1;
  o.workers = 1;
  return o;
}

Panel random_panel(std::vector<std::size_t> sizes, std::size_t d, std::uint64_t seed) {
  PanelConfig c;
  c.K = sizes.size();
  c.d = d;
  c.N = sizes;
  c.rho0 = linear_ar_coefficients(d, 0.1);
  c.sigma0.assign(sizes.size(), 1.0);
  c.seed = seed;
  return gen_ar1_panel(c);
}

Vector ones(std::size_t d) { return Vector::Ones(static_cast<Eigen::Index>(d)) / static_cast<double>(d); }

template <class P, class T, class O>
concept BridgeAcceptsTargets = requires(const Panel& panel, P pairs, T targets, O opt) {
  run_q_breve_test(panel, pairs, targets, opt);
};

}  // namespace

static_assert(!BridgeAcceptsTargets<std::span<const ProjectionPair>, const std::vector<TargetBilinear>&,
                                    const TestOptions&>);

TEST(QBreve, HandValueWithGammaZeroScale) {
  Panel panel;
  Matrix y(2, 1);
  y << 1, 2;
  panel.samples = {y};
  auto opt = quick_options();
  opt.bandwidth = 0.0;
  const std::vector<ProjectionPair> pairs{ProjectionPair::symmetric(ones(1))};
  const auto r = run_q_breve_test(panel, pairs, opt);
  // p = (1, 4): alpha^2 = Gamma(0) = 2.25, max bridge^2 = 1.125.
  EXPECT_DOUBLE_EQ(r.per_sample[0].lrv.alpha_sq, 2.25);
  EXPECT_NEAR(r.statistic, 1.125 / 2.25, 1e-15);
  EXPECT_EQ(r.per_sample[0].argmax_k, 1u);
  EXPECT_EQ(r.reject, r.statistic > r.critical_value);

  const auto v = run_v_breve_test(panel, pairs[0], opt);
  EXPECT_NEAR(v.statistic, 1.5 / std::sqrt(2.0), 1e-15);
}

TEST(QBreve, ConstantPanelIsDegenerate) {
  Panel panel;
  panel.samples = {Matrix::Constant(30, 3, 2.0), Matrix::Random(30, 3)};
  const std::vector<ProjectionPair> pairs{ProjectionPair::symmetric(ones(3))};
  try {
    run_q_breve_test(panel, pairs, quick_options());
    FAIL();
  } catch (const DegenerateLrvError& e) {
    EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos);
    EXPECT_EQ(e.exit_code(), 1);
  }
}

TEST(KnownTarget, ZeroTestBlockGivesZeroStatistic) {
  // Learning rows carry the variance; the rows under test are all zero.
  Panel panel = random_panel({80, 90}, 4, 3);
  for (auto& s : panel.samples) s.bottomRows(40).setZero();
  auto opt = quick_options();
  opt.lrv_mode = LrvMode::learning_sample;
  opt.learning_length = 50;
  const ProjectionPair pair = ProjectionPair::symmetric(ones(4));
  const std::vector<TargetBilinear> zero{TargetBilinear::constant(0.0)};
  for (StatisticKind kind : {StatisticKind::q, StatisticKind::v}) {
    TestSpec spec;
    spec.kind = kind;
    spec.projections = {pair};
    spec.targets = zero;
    spec.options = opt;
    const auto r = run_test(panel, spec);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_FALSE(r.reject);
  }
  const auto vb = run_v_breve_test(panel, pair, opt);
  EXPECT_EQ(vb.statistic, 0.0);
  EXPECT_FALSE(vb.reject);
}

TEST(Dispatch, TargetRulesAndPooledPairs) {
  const Panel panel = random_panel({40, 50}, 3, 4);
  TestSpec spec;
  spec.options = quick_options();
  spec.projections = {ProjectionPair::symmetric(ones(3))};
  spec.kind = StatisticKind::q;
  EXPECT_THROW(run_test(panel, spec), ConfigError);
  spec.kind = StatisticKind::v;
  EXPECT_THROW(run_test(panel, spec), ConfigError);
  spec.kind = StatisticKind::q_breve;
  spec.targets = std::vector<TargetBilinear>{TargetBilinear::constant(1.0)};
  EXPECT_THROW(run_test(panel, spec), ConfigError);
  spec.targets.reset();
  spec.kind = StatisticKind::v_breve;
  spec.projections.push_back(ProjectionPair::symmetric(ones(3) * 2.0));
  EXPECT_THROW(run_test(panel, spec), ConfigError);
  spec.kind = StatisticKind::q_breve;
  const auto r = run_test(panel, spec);
  EXPECT_NE(r.per_sample[0].projection_hash, r.per_sample[1].projection_hash);
  spec.projections.push_back(spec.projections[0]);
  EXPECT_THROW(run_test(panel, spec), ConfigError);
}

TEST(Dispatch, LearningLengthMustLeaveRows) {
  const Panel panel = random_panel({40, 50}, 3, 4);
  auto opt = quick_options();
  opt.lrv_mode = LrvMode::learning_sample;
  opt.learning_length = 40;
  const std::vector<ProjectionPair> pairs{ProjectionPair::symmetric(ones(3))};
  EXPECT_THROW(run_q_breve_test(panel, pairs, opt), ConfigError);
  opt.learning_length = 0;
  EXPECT_THROW(run_q_breve_test(panel, pairs, opt), ConfigError);
}

TEST(KnownTarget, InvariantUnderScaledProjection) {
  const Panel panel = random_panel({60, 70, 50}, 5, 8);
  Vector v(5);
  v << 0.1, 0.3, 0.2, 0.25, 0.15;
  const double t = 0.8;
  for (StatisticKind kind : {StatisticKind::q, StatisticKind::v}) {
    TestSpec a;
    a.kind = kind;
    a.projections = {ProjectionPair::make(v, v)};
    a.targets = std::vector<TargetBilinear>{TargetBilinear::constant(t)};
    a.options = quick_options();
    TestSpec b = a;
    b.projections = {ProjectionPair::make(2.0 * v, v)};
    b.targets = std::vector<TargetBilinear>{TargetBilinear::constant(2.0 * t)};
    const auto ra = run_test(panel, a);
    const auto rb = run_test(panel, b);
    if (kind == StatisticKind::q) {
      EXPECT_NEAR(rb.statistic / ra.statistic, 1.0, 1e-10);
    } else {
      // V is standardized through its critical value rather than the statistic.
      EXPECT_NEAR(rb.statistic / ra.statistic, 2.0, 1e-10);
      EXPECT_NEAR(rb.critical_value / ra.critical_value, 2.0, 1e-10);
      EXPECT_EQ(ra.reject, rb.reject);
    }
  }
}

TEST(Bridge, QBreveInvariantUnderProjectionScaling) {
  const Panel panel = random_panel({60, 70, 50}, 5, 9);
  Vector v(5);
  v << 0.1, 0.3, 0.2, 0.25, 0.15;
  const std::vector<ProjectionPair> base{ProjectionPair::symmetric(v)};
  const double q0 = run_q_breve_test(panel, base, quick_options()).statistic;
  for (double c : {-1.0, 0.37, 3.0, -12.5, 1e3}) {
    const std::vector<ProjectionPair> scaled{ProjectionPair::make(c * v, v)};
    EXPECT_NEAR(run_q_breve_test(panel, scaled, quick_options()).statistic / q0, 1.0, 1e-10) << "c = " << c;
  }
}

TEST(Bridge, VBreveMatchesBruteForce) {
  std::mt19937_64 gen(15);
  std::uniform_int_distribution<int> kdist(1, 3);
  std::uniform_int_distribution<int> ndist(4, 15);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(kdist(gen)));
    for (auto& n : sizes) n = static_cast<std::size_t>(ndist(gen));
    const Panel panel = random_panel(sizes, 2, 100 + static_cast<std::uint64_t>(trial));
    const ProjectionPair pair = ProjectionPair::make(ones(2), Vector::Unit(2, 0));
    std::vector<ProjectedSample> ps;
    for (const auto& s : panel.samples) ps.push_back(project(s, pair));
    auto opt = quick_options();
    opt.bandwidth = 0.0;
    const auto r = run_v_breve_test(panel, pair, opt);
    EXPECT_EQ(r.statistic, oracle::brute_force_v_breve(ps)) << "trial " << trial;
  }
}

TEST(LearningMode, UsesOnlyThePrefixForLrv) {
  Panel panel = random_panel({120, 100}, 3, 10);
  auto opt = quick_options();
  opt.lrv_mode = LrvMode::learning_sample;
  opt.learning_length = 60;
  const ProjectionPair pair = ProjectionPair::symmetric(ones(3));
  const auto base = run_v_breve_test(panel, pair, opt);
  Panel changed_tail = panel;
  for (auto& s : changed_tail.samples) s.bottomRows(10) *= 3.0;
  const auto a = run_v_breve_test(changed_tail, pair, opt);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(a.per_sample[j].lrv.alpha_sq, base.per_sample[j].lrv.alpha_sq);
    EXPECT_EQ(a.per_sample[j].lrv.mode, LrvMode::learning_sample);
    EXPECT_EQ(a.per_sample[j].n, panel.samples[j].rows() - 60);
  }
  Panel changed_head = panel;
  for (auto& s : changed_head.samples) s.topRows(60) *= 3.0;
  const auto b = run_v_breve_test(changed_head, pair, opt);
  EXPECT_EQ(b.statistic, base.statistic);
  EXPECT_NE(b.per_sample[0].lrv.alpha_sq, base.per_sample[0].lrv.alpha_sq);
}

TEST(Report, DecisionConsistency) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Panel panel = random_panel({30, 40}, 3, seed);
    const ProjectionPair pair = ProjectionPair::symmetric(ones(3));
    const std::vector<ProjectionPair> pairs{pair};
    for (const auto& r : {run_q_breve_test(panel, pairs, quick_options()), run_v_breve_test(panel, pair, quick_options())}) {
      EXPECT_EQ(r.reject, r.statistic > r.critical_value);
      EXPECT_EQ(r.n_rep, 5000u);
    }
  }
}

TEST(Clt, StandardizedPooledStatistic) {
  ProjectedSample a;
  a.p = {1, 2, 3};
  a.S = {0, 1, 3, 6};
  ProjectedSample b;
  b.p = {2, 2};
  b.S = {0, 2, 4};
  const std::vector<ProjectedSample> ps{a, b};
  const std::vector<double> targets{1.5, 2.5};
  const std::vector<double> alpha_sq{2.0, 0.5};
  // ((6 - 4.5) + (4 - 5)) / sqrt(2 * 3 + 0.5 * 2)
  EXPECT_NEAR(pooled_clt_statistic(ps, targets, alpha_sq), 0.5 / std::sqrt(7.0), 1e-15);
}
