#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "covcp/lrv.hpp"
#include "oracles.hpp"

using namespace covcp;

namespace {

std::vector<double> ar1_series(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  double s = 0.0;
  for (int i = 0; i < 200; ++i) s = rho * s + z(gen);
  for (auto& v : x) v = s = rho * s + z(gen);
  return x;
}

}  // namespace

TEST(Autocov, ConstantSeriesIsZero) {
  const std::vector<double> p(10, 3.25);
  for (std::size_t h = 0; h < 10; ++h) EXPECT_EQ(autocov_hat(p, h), 0.0);
}

TEST(Autocov, HandValues) {
  const std::vector<double> p{1, 2, 3};
  EXPECT_DOUBLE_EQ(autocov_hat(p, 0), 2.0 / 3.0);
  EXPECT_EQ(autocov_hat(p, 1), 0.0);
  EXPECT_THROW(autocov_hat(p, 3), DomainError);
}

TEST(QsWeight, HandValues) {
  EXPECT_EQ(qs_weight(0.0), 1.0);
  EXPECT_NEAR(qs_weight(5.0 / 6.0), 3.0 / (std::numbers::pi * std::numbers::pi), 1e-14);
  EXPECT_EQ(qs_weight(-5.0 / 6.0), qs_weight(5.0 / 6.0));
}

TEST(QsWeight, SmoothAcrossTaylorSwitch) {
  const double x_switch = 1e-3 * 5.0 / (6.0 * std::numbers::pi);
  EXPECT_NEAR(qs_weight(x_switch * (1 - 1e-9)), qs_weight(x_switch * (1 + 1e-9)), 1e-9);
}

TEST(Bandwidth, ClosedFormArithmetic) {
  // rho = 0.5, N = 1000: a2 = 16, S = 1.3221 * 16000^(1/5).
  EXPECT_NEAR(kQsBandwidthConstant * std::pow(16.0 * 1000.0, 0.2), 9.1641, 5e-5);
}

TEST(Bandwidth, MatchesFormulaOnFittedRho) {
  const auto p = ar1_series(1000, 0.5, 9);
  const auto bw = andrews_bandwidth_detail(p);
  const double rho = bw.rho;
  const double expected = 1.3221 * std::pow(4.0 * rho * rho / std::pow(1.0 - rho, 4) * 1000.0, 0.2);
  EXPECT_NEAR(bw.bandwidth, expected, 1e-12 * expected);
  EXPECT_NEAR(rho, 0.5, 0.08);
  EXPECT_FALSE(bw.clamped);
}

TEST(Bandwidth, ZeroRhoGivesZeroBandwidth) {
  // (-1, 0, 0, 1) has lag-one sample autocovariance exactly 0.
  const std::vector<double> p{-1, 0, 0, 1};
  EXPECT_EQ(andrews_bandwidth(p), 0.0);
  const auto est = lrv_estimate(p);
  EXPECT_EQ(est.alpha_sq, autocov_hat(p, 0));
  EXPECT_EQ(est.n_lags, 0u);
}

TEST(Bandwidth, RhoIsClamped) {
  std::vector<double> p(500);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(i);
  const auto bw = andrews_bandwidth_detail(p);
  EXPECT_TRUE(bw.clamped);
  EXPECT_EQ(bw.rho, kRhoClamp);
}

TEST(Bandwidth, Errors) {
  EXPECT_THROW(andrews_bandwidth(std::vector<double>{1, 2, 3}), InsufficientDataError);
  EXPECT_THROW(andrews_bandwidth(std::vector<double>(10, 2.0)), DegenerateLrvError);
}

TEST(LrvEstimate, OverrideZeroIsGammaZero) {
  const std::vector<double> p{1, 2, 3};
  const auto est = lrv_estimate(p, LrvMode::in_sample, 0.0);
  EXPECT_DOUBLE_EQ(est.alpha_sq, 2.0 / 3.0);
  const auto q = ar1_series(300, 0.3, 1);
  EXPECT_EQ(lrv_estimate(q, LrvMode::in_sample, 0.0).alpha_sq, autocov_hat(q, 0));
}

TEST(LrvEstimate, IidSquaresNearTwo) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> z;
  std::vector<double> p(100000);
  for (auto& v : p) {
    const double x = z(gen);
    v = x * x;
  }
  EXPECT_NEAR(lrv_estimate(p).alpha_sq, 2.0, 0.2);
}

TEST(LrvEstimate, Ar1SquaresNearClosedForm) {
  const double rho = 0.5;
  auto x = ar1_series(200000, rho, 4);
  for (auto& v : x) v *= v;
  const double truth = oracle::ar1_square_lrv(rho, 1.0);
  EXPECT_NEAR(lrv_estimate(x).alpha_sq / truth, 1.0, 0.1);
}

TEST(LrvEstimate, ScaleEquivariance) {
  const auto p = ar1_series(2000, 0.4, 21);
  std::vector<double> q;
  for (double v : p) q.push_back(-3.0 * v);
  const double a = lrv_estimate(p).alpha_sq;
  const double b = lrv_estimate(q).alpha_sq;
  EXPECT_NEAR(b / (9.0 * a), 1.0, 1e-10);
}

TEST(LrvEstimate, ModeIsRecorded) {
  const auto p = ar1_series(100, 0.2, 2);
  EXPECT_EQ(lrv_estimate(p, LrvMode::learning_sample).mode, LrvMode::learning_sample);
  EXPECT_EQ(lrv_estimate(p).mode, LrvMode::in_sample);
}

TEST(LrvEstimate, NonPositiveSumIsFlooredAndFlagged) {
  bool degenerate = false;
  EXPECT_EQ(detail::floor_lrv(-0.3, 2.0, degenerate), 2e-12);
  EXPECT_TRUE(degenerate);
  EXPECT_EQ(detail::floor_lrv(0.0, 2.0, degenerate), 2e-12);
  EXPECT_TRUE(degenerate);
  EXPECT_EQ(detail::floor_lrv(0.5, 2.0, degenerate), 0.5);
  EXPECT_FALSE(degenerate);
}

TEST(LrvEstimate, ConstantSeriesThrows) {
  EXPECT_THROW(lrv_estimate(std::vector<double>(20, 0.0)), DegenerateLrvError);
  EXPECT_THROW(lrv_estimate(std::vector<double>{1.0}, LrvMode::in_sample, 0.0), InsufficientDataError);
}
