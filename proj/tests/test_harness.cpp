#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "covcp/cptest.hpp"
#include "covcp/harness.hpp"

using namespace covcp;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.replications = 40;
  c.dims = {4};
  c.tests = {StatisticKind::q_breve, StatisticKind::v_breve};
  c.n_grid = 200;
  c.n_rep = 2000;
  c.seed = 12;
  c.workers = 1;
  return c;
}

}  // namespace

TEST(ChangeTimeMapping, Examples) {
  const std::vector<double> unit{1.0};
  const std::vector<std::size_t> big{1000};
  EXPECT_EQ(change_time_mapping(600.0, unit, big), (std::vector<std::size_t>{600}));
  const std::vector<std::size_t> sizes{100, 120, 70, 90};
  EXPECT_EQ(change_time_mapping(600.0, sizes, 1200.0), (std::vector<std::size_t>{50, 60, 35, 45}));
  EXPECT_EQ(change_time_mapping(1200.0, sizes, 1200.0), sizes);
  EXPECT_EQ(change_time_mapping(1.0, sizes, 1200.0), (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
  auto c = small_config();
  c.scenario = Scenario::sigma_change;
  c.change_times = {240.0, 600.0};
  c.lrv_mode = LrvMode::learning_sample;
  c.learning_length = 50;
  const auto a = run_experiment(c);
  c.workers = 3;
  const auto b = run_experiment(c);
  ASSERT_EQ(a.cells.size(), 4u);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].rejections, b.cells[i].rejections);
    EXPECT_EQ(a.cells[i].n + a.cells[i].skipped, c.replications);
    EXPECT_NEAR(a.cells[i].stderr_rate,
                std::sqrt(a.cells[i].rate * (1 - a.cells[i].rate) / static_cast<double>(a.cells[i].n)), 1e-15);
    seeds.insert(a.cells[i].cell_seed);
  }
  EXPECT_EQ(seeds.size(), a.cells.size());
  EXPECT_EQ(a.config_hash, b.config_hash);
}

TEST(Experiment, InvalidCellIsSkippedWithReason) {
  auto c = small_config();
  c.scenario = Scenario::sigma_change;
  c.change_times = {600.0, 5000.0};
  c.tests = {StatisticKind::q_breve};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.cells.size(), 1u);
  ASSERT_FALSE(r.log.empty());
  EXPECT_NE(r.log.front().find("skipped"), std::string::npos);
}

TEST(Experiment, ConfigValidation) {
  auto c = small_config();
  c.replications = 0;
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config();
  c.sigma0 = {1.0};
  EXPECT_THROW(run_experiment(c), ConfigError);
  EXPECT_THROW(experiment_preset("nope"), ConfigError);
  for (const auto& name : experiment_preset_names()) EXPECT_NO_THROW(experiment_preset(name).validate());
}

TEST(Experiment, NullDisguisedAsAlternativeMatchesNull) {
  auto c = small_config();
  c.replications = 1000;
  c.dims = {10};
  c.tests = {StatisticKind::q_breve};
  c.n_grid = 1000;
  c.n_rep = 20000;
  const auto none = run_experiment(c);
  c.scenario = Scenario::sigma_change;
  c.sigma1 = c.sigma0;
  const auto fake = run_experiment(c);
  const auto& a = none.cells.front();
  const auto& b = fake.cells.front();
  const double se = std::sqrt(a.stderr_rate * a.stderr_rate + b.stderr_rate * b.stderr_rate);
  EXPECT_LE(std::abs(a.rate - b.rate), 2.0 * se + 1e-12);
}

TEST(Experiment, KnownTargetSizeUnderNull) {
  auto c = small_config();
  c.replications = 2000;
  c.dims = {10};
  c.tests = {StatisticKind::q};
  c.lrv_mode = LrvMode::learning_sample;
  c.learning_length = 500;
  c.n_grid = 1000;
  c.n_rep = 20000;
  const auto r = run_experiment(c);
  EXPECT_GE(r.cells.front().rate, 0.03);
  EXPECT_LE(r.cells.front().rate, 0.09);
}

TEST(Experiment, PowerGrowsWithChangeMagnitude) {
  std::vector<std::size_t> counts;
  for (double m : {1.2, 1.6, 2.2}) {
    auto c = small_config();
    c.replications = 500;
    c.dims = {10};
    c.tests = {StatisticKind::q_breve};
    c.scenario = Scenario::sigma_change;
    c.change_times = {600.0};
    c.lrv_mode = LrvMode::learning_sample;
    c.learning_length = 200;
    c.n_grid = 1000;
    c.n_rep = 20000;
    c.sigma1.clear();
    for (double s : c.sigma0) c.sigma1.push_back(m * s);
    counts.push_back(run_experiment(c).cells.front().rejections);
  }
  EXPECT_LE(counts[0], counts[1]);
  EXPECT_LE(counts[1], counts[2]);
}

TEST(Experiment, IidSizeOfAllFourTests) {
  const auto sizes = case_sample_sizes(SampleCase::I);
  constexpr std::size_t d = 5;
  PanelConfig pc;
  pc.K = 4;
  pc.d = d;
  pc.N = sizes;
  pc.rho0.assign(d, 0.0);
  pc.sigma0.assign(4, 1.0);
  pc.burn_in = 0;
  pc.seed = 404;
  TestOptions opt;
  opt.n_grid = 1000;
  opt.n_rep = 20000;
  opt.seed = 405;
  opt.workers = 1;
  opt.bank = cached_path_bank(4, opt.n_grid, opt.n_rep, opt.seed);
  // i.i.d. N(0, 1) coordinates: v'Cov w = sum v_a w_b for the shared innovation.
  std::vector<std::size_t> rejections(4, 0);
  constexpr std::size_t reps = 1000;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const Panel panel = gen_ar1_panel(pc, rep);
    const auto pair = ProjectionPair::symmetric(gen_dirichlet_projection(d, pc.seed, rep));
    const double target = pair.v.sum() * pair.w.sum();
    const std::vector<TargetBilinear> targets{TargetBilinear::constant(target)};
    const std::vector<ProjectionPair> pairs{pair};
    rejections[0] += run_q_test(panel, pairs, targets, opt).reject;
    rejections[1] += run_v_test(panel, pair, targets, opt).reject;
    rejections[2] += run_q_breve_test(panel, pairs, opt).reject;
    rejections[3] += run_v_breve_test(panel, pair, opt).reject;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double rate = static_cast<double>(rejections[i]) / reps;
    EXPECT_GE(rate, 0.02) << "test " << i;
    EXPECT_LE(rate, 0.09) << "test " << i;
  }
}

TEST(Experiment, MiddleOrderingWarnings) {
  ExperimentResult r;
  CellResult c;
  c.scenario = Scenario::sigma_change;
  c.change_time = 600.0;
  c.rate = 0.5;
  r.cells.push_back(c);
  c.change_time = 240.0;
  c.rate = 0.4;
  r.cells.push_back(c);
  EXPECT_TRUE(middle_change_ordering_warnings(r, 600.0).empty());
  r.cells.back().rate = 0.7;
  EXPECT_EQ(middle_change_ordering_warnings(r, 600.0).size(), 1u);
}
