#include "fixtures.hpp"
#include "flowrec/error.hpp"
#include "flowrec/io.hpp"
#include "flowrec/reconcile.hpp"
#include "flowrec/simbench.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace flowrec {
namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("flowrec_simbench_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Generator, NoNoiseBaseEqualsTruth) {
  const auto inst = fixtures::random_instance(1, 20, std::nullopt, 0.0);
  EXPECT_EQ(inst.base, inst.truth);
  const FlowAggregationMatrix s(inst.network);
  EXPECT_TRUE(check_coherence(inst.truth, s).coherent);
  const auto r = reconcile_l2(inst.base, s);
  EXPECT_LE((r.y_tilde - inst.truth).norm(), 1e-9 * inst.truth.norm());
}

TEST(Generator, Deterministic) {
  const auto a = fixtures::random_instance(77, 30);
  const auto b = fixtures::random_instance(77, 30);
  EXPECT_EQ(a.network.edges(), b.network.edges());
  EXPECT_EQ(a.network.paths(), b.network.paths());
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.base, b.base);
  const auto c = fixtures::random_instance(78, 30);
  EXPECT_NE(a.base, c.base);
}

TEST(Generator, MinimumDensityEdgeBand) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto inst = fixtures::random_instance(seed, 30, 0.0);
    const std::size_t m = inst.network.num_edges();
    EXPECT_GE(m, 29u) << "seed " << seed;
    EXPECT_LE(m, 60u) << "seed " << seed;
  }
}

TEST(Generator, StructuralInvariants) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = fixtures::random_instance(seed, 25);
    const Network& net = inst.network;
    ASSERT_TRUE(net.has_roles());
    for (std::size_t p = 0; p < net.num_paths(); ++p) {
      EXPECT_EQ(net.role(net.origin(p)), NodeRole::Source);
      EXPECT_EQ(net.role(net.destination(p)), NodeRole::Sink);
      EXPECT_LE(net.path_edges(p).size(), 8u);
      const double b = inst.truth[static_cast<Eigen::Index>(net.index().global(ComponentKind::Path, p))];
      EXPECT_GE(b, 10.0);
      EXPECT_LE(b, 100.0);
    }
    for (const EdgeEnds& e : net.edges()) {
      EXPECT_NE(net.role(e.head), NodeRole::Source);
      EXPECT_NE(net.role(e.tail), NodeRole::Sink);
      EXPECT_FALSE(net.role(e.tail) == NodeRole::Source && net.role(e.head) == NodeRole::Sink);
    }
    EXPECT_GE(inst.density, 0.0);
    EXPECT_LE(inst.density, 1.0);
  }
}

TEST(Generator, RejectsBadConfig) {
  GeneratorConfig cfg;
  cfg.nodes = 2;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.sigma = -1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.density = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.min_flow = 50;
  cfg.max_flow = 10;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Benchmark, FlowRecBeatsBottomUp) {
  GeneratorConfig cfg;
  cfg.nodes = 20;
  cfg.instances = 10;
  const auto report =
      run_benchmark(cfg, {BenchMethod::FlowRecL2, BenchMethod::BottomUp, BenchMethod::Base}, {});
  EXPECT_LT(report.at("flowrec-l2").rmse.mean, report.at("bu").rmse.mean);
  EXPECT_LT(report.at("flowrec-l2").rmse.mean, report.at("base").rmse.mean);
  EXPECT_EQ(report.instances.size(), 10u);
}

TEST(Benchmark, NoiselessRunScoresZero) {
  GeneratorConfig cfg;
  cfg.nodes = 15;
  cfg.instances = 1;
  cfg.sigma = 0.0;
  const auto report = run_benchmark(cfg, default_bench_methods(), {});
  for (const MethodSummary& m : report.summary) {
    EXPECT_LE(m.rmse.mean, 1e-6) << m.method;
  }
}

TEST(Benchmark, CsvFilesAreDeterministic) {
  GeneratorConfig cfg;
  cfg.nodes = 15;
  cfg.instances = 4;
  const auto a = scratch("a");
  const auto b = scratch("b");
  run_benchmark(cfg, default_bench_methods(), a);
  run_benchmark(cfg, default_bench_methods(), b);
  for (const char* f : {"instances.csv", "summary.csv", "curves.csv", "config.csv"}) {
    EXPECT_EQ(io::read_text(a / f), io::read_text(b / f)) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(a / "timing.csv"));
  const std::string perf = io::read_text(a / "performance.csv");
  EXPECT_EQ(perf.substr(0, perf.find('\n')),
            "method,rmse_mean,rmse_sd,mae_mean,mae_sd,time_mean_s,time_sd_s,memory_mean_bytes,"
            "memory_sd_bytes");
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Benchmark, MethodNames) {
  for (BenchMethod m : {BenchMethod::Base, BenchMethod::FlowRecL2, BenchMethod::FlowRecL1,
                        BenchMethod::FlowRecHuber, BenchMethod::FlowRecRelaxed, BenchMethod::BottomUp,
                        BenchMethod::MintOls, BenchMethod::MintOlsNonneg, BenchMethod::DenseL2}) {
    EXPECT_EQ(parse_bench_method(to_string(m)), m);
  }
  EXPECT_FALSE(parse_bench_method("nope").has_value());
}

TEST(Benchmark, SampleStandardDeviation) {
  GeneratorConfig cfg;
  cfg.nodes = 12;
  cfg.instances = 3;
  const auto report = run_benchmark(cfg, {BenchMethod::Base}, {});
  double mean = 0.0;
  for (const auto& r : report.instances) mean += r.metrics.at("base").overall.rmse;
  mean /= 3.0;
  double ss = 0.0;
  for (const auto& r : report.instances) {
    const double d = r.metrics.at("base").overall.rmse - mean;
    ss += d * d;
  }
  EXPECT_NEAR(report.at("base").rmse.mean, mean, 1e-12);
  EXPECT_NEAR(report.at("base").rmse.sd, std::sqrt(ss / 2.0), 1e-12);
}

}  // namespace
}  // namespace flowrec
