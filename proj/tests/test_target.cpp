#include <gtest/gtest.h>

#include <cmath>

#include "mpoc/compress.hpp"
#include "mpoc/errors.hpp"
#include "mpoc/target.hpp"
#include "oracle.hpp"

using namespace mpoc;
using oracle::Mat;

TEST(BuildTarget, TfimConvergesToExactPropagator) {
  const TermList tl = tfim_chain_terms(8, 1.0);
  TargetOptions opt;
  opt.chi_ladder = {16, 32, 64};
  const TargetResult r = build_target(tl, 0.5, opt);
  EXPECT_LT(oracle::hst(oracle::mpo_dense(r.mpo), oracle::expm_herm(oracle::tfim(8, 1.0), 0.5)), 1e-9);
  ASSERT_FALSE(r.report.history.empty());
  for (auto [chi, cost] : r.report.history) EXPECT_GE(cost, 0.0);
  EXPECT_LT(r.report.history.back().second, opt.conv_tol);
  EXPECT_EQ(r.report.t, 0.5);
  EXPECT_LE(r.mpo.max_bond(), r.report.chi);
}

TEST(BuildTarget, ZeroTimeIsIdentity) {
  const TargetResult r = build_target(tfim_chain_terms(6, 1.0), 0.0);
  EXPECT_EQ(r.report.chi, 16u);
  EXPECT_EQ(r.mpo.max_bond(), 1u);
  EXPECT_LT((oracle::mpo_dense(r.mpo) - Mat::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildTarget, CommutingTermsAtExactRank) {
  TargetOptions opt;
  opt.chi_ladder = {2, 4, 8};
  const TargetResult r = build_target(tfim_chain_terms(6, 0.0), 0.9, opt);
  EXPECT_EQ(r.report.max_bond, 2u);
  EXPECT_EQ(r.mpo.max_bond(), 2u);
  EXPECT_LT(oracle::hst(oracle::mpo_dense(r.mpo), oracle::expm_herm(oracle::tfim(6, 0.0), 0.9)), 1e-12);
}

TEST(BuildTarget, LadderExhaustedCarriesLastCost) {
  TargetOptions opt;
  opt.chi_ladder = {2, 4};
  opt.k = 4;
  try {
    build_target(tfim_chain_terms(8, 1.0), 2.0, opt);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_GT(e.last_cost(), opt.conv_tol);
  }
}

TEST(BuildTarget, UnitaryInHstSense) {
  const TermList tl = j1j2_chain_terms(6, 1.0, 0.25);
  const TargetResult r = build_target(tl, 0.25);
  EXPECT_NEAR(hst_cost(r.mpo, r.mpo), 0.0, 1e-12);
  const DoubledMps d = mpo_to_doubled_mps(r.mpo);
  EXPECT_NEAR(d.log_norm, 3.0 * std::log(2.0), 1e-9);
  EXPECT_LT(oracle::hst(oracle::mpo_dense(r.mpo), oracle::expm_herm(oracle::j1j2(6, 1.0, 0.25), 0.25)), 1e-9);
}

TEST(BuildTarget, BadOptions) {
  TargetOptions opt;
  opt.chi_ladder = {32, 16};
  EXPECT_THROW(build_target(tfim_chain_terms(4, 1.0), 0.1, opt), ConfigError);
  opt.chi_ladder = {};
  EXPECT_THROW(build_target(tfim_chain_terms(4, 1.0), 0.1, opt), ConfigError);
  opt = {};
  opt.conv_tol = 0.0;
  EXPECT_THROW(build_target(tfim_chain_terms(4, 1.0), 0.1, opt), ConfigError);
  opt = {};
  opt.k = 0;
  EXPECT_THROW(build_target(tfim_chain_terms(4, 1.0), 0.1, opt), ConfigError);
}

TEST(TimeSweep, MonotoneFeasibility) {
  TargetOptions opt;
  opt.k = 4;
  const TimeSweepResult r = longest_time_sweep(tfim_chain_terms(8, 1.0), {0.25, 0.5, 1.0, 2.0}, 16, opt);
  ASSERT_EQ(r.feasible.size(), 4u);
  bool seen_infeasible = false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!r.feasible[i]) seen_infeasible = true;
    EXPECT_FALSE(seen_infeasible && r.feasible[i]);
  }
  EXPECT_TRUE(r.feasible[0]);
  EXPECT_TRUE(std::find(r.times.begin(), r.times.end(), r.longest) != r.times.end());
  EXPECT_TRUE(seen_infeasible);
}

TEST(TimeSweep, DefaultCapAndZeroGrid) {
  const TimeSweepResult r = longest_time_sweep(tfim_chain_terms(6, 1.0), {0.0});
  EXPECT_EQ(r.longest, 0.0);
  EXPECT_THROW(longest_time_sweep(tfim_chain_terms(6, 1.0), {}), ConfigError);
}

TEST(TimeSweep, NothingFeasible) {
  TargetOptions opt;
  opt.k = 2;
  EXPECT_THROW(longest_time_sweep(tfim_chain_terms(8, 1.0), {1.5, 3.0}, 2, opt), CapacityError);
}

TEST(Precompress, LooseBudgetGivesProductOperator) {
  const TargetResult t = build_target(tfim_chain_terms(6, 1.0), 0.3);
  const TargetResult p = precompress_target(t.mpo, 1.0, t.report);
  EXPECT_EQ(p.mpo.max_bond(), 1u);
  EXPECT_LT(p.report.final_cost, 1.0);
  EXPECT_EQ(p.report.budget, 1.0);
}

TEST(Precompress, TightBudgetMeasured) {
  const TermList tl = tfim_chain_terms(8, 1.0);
  const TargetResult t = build_target(tl, 0.5);
  const TargetResult p = precompress_target(t.mpo, 1e-6, t.report);
  EXPECT_LE(p.mpo.max_bond(), t.mpo.max_bond());
  const double measured = oracle::hst(oracle::mpo_dense(p.mpo), oracle::mpo_dense(t.mpo));
  EXPECT_LT(measured, 1e-6);
  EXPECT_NEAR(measured, p.report.final_cost, 1e-10);
  EXPECT_LT(p.report.final_cost, p.report.budget);
}

TEST(Precompress, UnreachableReturnsOriginal) {
  const TargetResult t = build_target(tfim_chain_terms(6, 1.0), 0.3);
  const TargetResult p = precompress_target(t.mpo, 1e-300, t.report);
  EXPECT_EQ(p.mpo.max_bond(), t.mpo.max_bond());
  EXPECT_LT(oracle::hst(oracle::mpo_dense(p.mpo), oracle::mpo_dense(t.mpo)), 1e-14);
  EXPECT_THROW(precompress_target(t.mpo, 0.0), ConfigError);
}

TEST(Precompress, DefaultBudgetRatio) { EXPECT_DOUBLE_EQ(default_error_budget(1e-4), 1e-5); }

TEST(Report, TextListsHistory) {
  const TargetResult t = build_target(tfim_chain_terms(6, 1.0), 0.3);
  const std::string text = t.report.to_text();
  EXPECT_NE(text.find("chi " + std::to_string(t.report.chi)), std::string::npos);
  EXPECT_NE(text.find("ladder 16"), std::string::npos);
  EXPECT_NE(text.find("final_cost"), std::string::npos);
}
