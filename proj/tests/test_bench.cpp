#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpoc/bench.hpp"
#include "mpoc/errors.hpp"
#include "oracle.hpp"

using namespace mpoc;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(MPOC_SOURCE_DIR) + "/configs/";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

class BenchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpoc_bench_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunManifest manifest(const std::string& cfg, std::vector<std::size_t> depths) const {
    RunManifest m;
    m.config_path = kConfigs + cfg;
    m.depths = std::move(depths);
    m.chi = 32;
    m.k = 4;
    m.budget = 1e-8;
    m.max_sweeps = 4;
    m.out_dir = dir_.string();
    return m;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(BenchDir, CompileWritesArtifacts) {
  std::ostringstream log;
  const CompileOutput out = cmd_compile(manifest("tfim8.cfg", {3, 5}), log);
  ASSERT_EQ(out.runs.size(), 2u);
  for (const char* f : {"target.mpo", "report.txt", "circuit_L3.circ", "circuit_L5.circ",
                        "trace_L3.csv", "trace_L5.csv"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  for (const CompileRun& r : out.runs) {
    EXPECT_EQ(r.result.circuit.depth(), r.depth);
    EXPECT_LE(r.result.final_cost, r.result.init_cost);
  }
  EXPECT_LT(out.runs[1].result.final_cost, out.runs[0].result.final_cost);
  // the stored target is within budget of the exact propagator
  const oracle::Mat exact = oracle::expm_herm(oracle::tfim(8, 1.0), 0.5);
  EXPECT_LT(oracle::hst(oracle::mpo_dense(out.target.mpo), exact), 1e-7);
}

TEST_F(BenchDir, CompileIsDeterministic) {
  std::ostringstream log;
  RunManifest m = manifest("heavyhex6.cfg", {5});
  m.perturb = 0.05;
  m.seed = 3;
  cmd_compile(m, log);
  const std::string first = slurp(dir_ / "circuit_L5.circ");
  fs::remove_all(dir_);
  cmd_compile(m, log);
  EXPECT_EQ(first, slurp(dir_ / "circuit_L5.circ"));
}

TEST_F(BenchDir, DepthBelowOneStep) {
  std::ostringstream log;
  EXPECT_THROW(cmd_compile(manifest("j1j2_8.cfg", {3}), log), ConfigError);
}

TEST_F(BenchDir, ManifestErrors) {
  std::ostringstream log;
  RunManifest m = manifest("tfim8.cfg", {3});
  m.config_path = kConfigs + "nope.cfg";
  EXPECT_THROW(cmd_compile(m, log), FileError);
  m = manifest("tfim8.cfg", {});
  EXPECT_THROW(m.validate(), UsageError);
  m = manifest("tfim8.cfg", {0});
  EXPECT_THROW(m.validate(), UsageError);
  m = manifest("tfim8.cfg", {3});
  m.budget = 0.0;
  EXPECT_THROW(m.validate(), UsageError);
}

TEST_F(BenchDir, BaselineRowsAgreeWithDenseOracle) {
  std::ostringstream log;
  RunManifest m = manifest("tfim8.cfg", {3, 5});
  cmd_compile(m, log);
  const auto rows = cmd_baseline(m, log);
  ASSERT_EQ(rows.size(), 2u);
  const oracle::Mat exact = oracle::expm_herm(oracle::tfim(8, 1.0), 0.5);
  for (const ComparisonRow& r : rows) {
    const Circuit c = load_circuit((dir_ / ("circuit_L" + std::to_string(r.depth) + ".circ")).string());
    EXPECT_NEAR(r.compiled_cost, oracle::hst(oracle::circuit_dense(c), exact), 1e-10);
    EXPECT_NEAR(r.reduction, r.trotter_cost / r.compiled_cost, 1e-9 * r.reduction);
    EXPECT_GT(r.reduction, 1.0);
    EXPECT_GE(r.compression, 1.0);
  }
  const std::string csv = slurp(dir_ / "baseline.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "depth,compiled_cost,trotter_cost,trotter_order,trotter_k,reduction,compression,"
            "compression_lower_bound");
  EXPECT_TRUE(fs::exists(dir_ / "trotter_points.csv"));
}

TEST_F(BenchDir, MissingCircuitSkipped) {
  std::ostringstream log;
  RunManifest m = manifest("tfim8.cfg", {3});
  cmd_compile(m, log);
  m.depths = {3, 7};
  const auto rows = cmd_baseline(m, log);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(log.str().find("no circuit for L=7"), std::string::npos);
}

TEST(Baseline, InterpolationInsideRangeOnly) {
  const TrotterBaseline b({{2, 1, 3, 1e-2}, {2, 2, 5, 1e-4}, {1, 1, 2, 1e-1}});
  EXPECT_NEAR(b.interpolate(2, 4.0), 1e-3, 1e-15);
  EXPECT_EQ(b.interpolate(2, 5.0), 1e-4);
  EXPECT_LT(b.interpolate(2, 2.0), 0.0);
  EXPECT_LT(b.interpolate(2, 6.0), 0.0);
  EXPECT_LT(b.interpolate(4, 3.0), 0.0);

  const ComparisonRow r = b.compare(4, 1e-4);
  EXPECT_NEAR(r.trotter_cost, 1e-3, 1e-15);
  EXPECT_EQ(r.trotter_k, 0u);
  EXPECT_NEAR(r.reduction, 10.0, 1e-9);
  EXPECT_NEAR(r.compression, 5.0 / 4.0, 1e-12);
  EXPECT_FALSE(r.compression_lower_bound);
}

TEST(Baseline, CompressionLowerBound) {
  const TrotterBaseline b({{1, 1, 2, 1e-1}, {1, 2, 3, 5e-2}});
  const ComparisonRow r = b.compare(2, 1e-6);
  EXPECT_TRUE(r.compression_lower_bound);
  EXPECT_NEAR(r.compression, 1.5, 1e-12);
  EXPECT_EQ(r.trotter_order, 1);
  EXPECT_EQ(r.trotter_k, 1u);
}

TEST(Baseline, CommutingFloor) {
  const TrotterBaseline b({{1, 1, 2, 0.0}, {2, 1, 3, 1e-16}});
  const ComparisonRow r = b.compare(2, 3e-15);
  EXPECT_EQ(r.reduction, 1.0);
  EXPECT_NEAR(r.compression, 1.0, 1e-12);
  const ComparisonRow s = b.compare(2, 1e-8);
  EXPECT_EQ(s.reduction, 0.0);
}

TEST_F(BenchDir, DiagnoseRowsHaveUnitNorm) {
  std::ostringstream log;
  RunManifest m = manifest("heavyhex6.cfg", {3, 5});
  cmd_compile(m, log);
  const auto spectra = cmd_diagnose(m, log);
  ASSERT_EQ(spectra.size(), 6u);
  for (const auto& s : spectra) {
    double sq = 0.0;
    for (double x : s) sq += x * x;
    EXPECT_NEAR(sq, 1.0, 1e-10);
    for (std::size_t j = 1; j < s.size(); ++j) EXPECT_LE(s[j], s[j - 1]);
  }
  EXPECT_TRUE(fs::exists(dir_ / "spectra.csv"));
}

TEST_F(BenchDir, DiagnoseWithoutCompile) {
  std::ostringstream log;
  EXPECT_THROW(cmd_diagnose(manifest("tfim8.cfg", {3}), log), FileError);
}

TEST_F(BenchDir, VerifyPassesThenCatchesCorruption) {
  std::ostringstream log;
  RunManifest m = manifest("tfim8.cfg", {3});
  cmd_compile(m, log);
  EXPECT_TRUE(cmd_verify(m, log)) << log.str();

  const fs::path cp = dir_ / "circuit_L3.circ";
  Circuit c = load_circuit(cp.string());
  c.layers[1][0].u = c.layers[1][0].u * oracle::pauli_string("XY");
  save_circuit(cp.string(), c);
  std::ostringstream log2;
  EXPECT_FALSE(cmd_verify(m, log2));
  EXPECT_NE(log2.str().find("MISMATCH"), std::string::npos);
}

TEST_F(BenchDir, VerifyRefusesLargeSystems) {
  std::ostringstream log;
  EXPECT_THROW(cmd_verify(manifest("tfim200.cfg", {3}), log), UsageError);
}

TEST_F(BenchDir, VerifyMissingArtifacts) {
  std::ostringstream log;
  EXPECT_THROW(cmd_verify(manifest("tfim8.cfg", {3}), log), FileError);
}
