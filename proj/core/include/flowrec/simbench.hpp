#pragma once

#include "flowrec/baselines.hpp"
#include "flowrec/network.hpp"
#include "flowrec/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowrec {

struct GeneratorConfig {
  std::size_t nodes = 50;
  std::size_t instances = 100;
  /// Edge-count parameter d in [0, 1]: target edges = n + d (n^2 - n), clipped to
  /// the permitted pairs. Unset means d ~ U[0, 1] per instance.
  std::optional<double> density;
  /// Noise standard deviation as a fraction of the mean |truth| component.
  double sigma = 0.05;
  std::size_t max_paths_per_node = 4;
  std::size_t max_path_hops = 8;
  double min_flow = 10.0;
  double max_flow = 100.0;
  std::uint64_t seed = 1;
  std::size_t retries = 20;

  /// Throws BadParameter.
  void validate() const;
};

struct BenchmarkInstance {
  Network network;
  Vector truth;
  Vector base;
  std::uint64_t seed = 0;
  /// The d actually used and the resulting m / (n (n - 1)).
  double density_param = 0.0;
  double density = 0.0;
  /// Absolute noise standard deviation.
  double sigma = 0.0;
  std::size_t max_path_length = 0;
};

/// Sources, intermediates and sinks (10% / 80% / 10%); edges uniformly among
/// permitted pairs (no source-to-sink, none into sources or out of sinks) on top of
/// a connecting backbone; paths are random simple source-to-sink walks; truth is
/// S b with b ~ U[min_flow, max_flow]; base = truth + N(0, sigma^2).
/// Deterministic in (cfg, seed). Throws InfeasibleTopology after cfg.retries.
BenchmarkInstance generate_instance(const GeneratorConfig& cfg, std::uint64_t seed);

enum class BenchMethod {
  Base,
  FlowRecL2,
  FlowRecL1,
  FlowRecHuber,
  FlowRecRelaxed,
  BottomUp,
  MintOls,
  MintOlsNonneg,
  DenseL2,
};

std::string_view to_string(BenchMethod method) noexcept;
std::optional<BenchMethod> parse_bench_method(std::string_view text) noexcept;
std::vector<BenchMethod> default_bench_methods();

struct InstanceRecord {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t paths = 0;
  double density = 0.0;
  std::size_t max_path_length = 0;
  double sigma = 0.0;
  MetricsReport metrics;
};

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
};

struct MethodSummary {
  std::string method;
  std::size_t instances = 0;
  SummaryStat rmse;
  SummaryStat mae;
  SummaryStat seconds;
  SummaryStat aux_bytes;
};

struct BenchmarkReport {
  std::vector<InstanceRecord> instances;
  std::vector<MethodSummary> summary;

  const MethodSummary& at(std::string_view method) const;
};

struct BenchmarkOptions {
  double relaxed_epsilon = 1e-2;
  /// Huber threshold; unset means the instance's absolute sigma (1 when sigma is 0).
  std::optional<double> huber_delta;
  /// Worker threads; 0 reads FLOWREC_THREADS (unset or 0 = hardware concurrency).
  std::size_t threads = 0;
};

/// Runs every method on cfg.instances generated instances (seed + index).
/// When out_dir is non-empty writes instances.csv, summary.csv and curves.csv
/// (deterministic) plus timing.csv and performance.csv (wall time, memory).
/// Throws BadParameter, IoFailure.
BenchmarkReport run_benchmark(const GeneratorConfig& cfg, const std::vector<BenchMethod>& methods,
                              const std::filesystem::path& out_dir,
                              const BenchmarkOptions& options = {});

/// Writes the report files into out_dir. Throws IoFailure.
void write_benchmark_csv(const BenchmarkReport& report, const GeneratorConfig& cfg,
                         const std::filesystem::path& out_dir);

/// Resolves the worker count from FLOWREC_THREADS.
std::size_t harness_threads();

}  // namespace flowrec
