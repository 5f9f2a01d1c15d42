#include "flowrec/simbench.hpp"

#include "flowrec/approx.hpp"
#include "flowrec/error.hpp"
#include "flowrec/io.hpp"
#include "flowrec/reconcile.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <tuple>

namespace flowrec {

void GeneratorConfig::validate() const {
  if (nodes < 3) throw Error(ErrorCode::BadParameter, "need at least 3 nodes");
  if (instances == 0) throw Error(ErrorCode::BadParameter, "need at least one instance");
  if (density && !(*density >= 0.0 && *density <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "density parameter must lie in [0, 1]");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::BadParameter, "sigma must be >= 0");
  }
  if (max_paths_per_node == 0 || max_path_hops < 2) {
    throw Error(ErrorCode::BadParameter, "path limits too small (sources never reach sinks directly)");
  }
  if (!(min_flow >= 0.0 && max_flow >= min_flow)) {
    throw Error(ErrorCode::BadParameter, "flow range must satisfy 0 <= min_flow <= max_flow");
  }
}

namespace {

using Rng = std::mt19937_64;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

struct Topology {
  std::vector<std::string> names;
  std::vector<NodeRole> roles;
  std::vector<EdgeEnds> edges;
  std::vector<std::vector<std::size_t>> paths;
};

bool permitted(const std::vector<NodeRole>& roles, std::size_t u, std::size_t v) {
  if (u == v) return false;
  if (roles[u] == NodeRole::Sink || roles[v] == NodeRole::Source) return false;
  return !(roles[u] == NodeRole::Source && roles[v] == NodeRole::Sink);
}

std::optional<Topology> try_topology(const GeneratorConfig& cfg, double d, Rng& rng) {
  const std::size_t n = cfg.nodes;
  const std::size_t ns = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n))));
  const std::size_t nt = ns;
  if (ns + nt >= n) return std::nullopt;
  const std::size_t ni = n - ns - nt;

  Topology t;
  for (std::size_t k = 0; k < ns; ++k) {
    t.names.push_back("s" + std::to_string(k));
    t.roles.push_back(NodeRole::Source);
  }
  for (std::size_t k = 0; k < ni; ++k) {
    t.names.push_back("i" + std::to_string(k));
    t.roles.push_back(NodeRole::Intermediate);
  }
  for (std::size_t k = 0; k < nt; ++k) {
    t.names.push_back("t" + std::to_string(k));
    t.roles.push_back(NodeRole::Sink);
  }

  std::set<std::pair<std::size_t, std::size_t>> used;
  auto add = [&](std::size_t u, std::size_t v) {
    if (used.emplace(u, v).second) t.edges.push_back({u, v});
  };
  // Backbone: each intermediate hangs off an earlier source or intermediate,
  // each sink off an intermediate, each source feeds an intermediate.
  for (std::size_t k = 0; k < ni; ++k) add(uniform_index(rng, ns + k), ns + k);
  for (std::size_t k = 0; k < nt; ++k) add(ns + uniform_index(rng, ni), ns + ni + k);
  for (std::size_t k = 0; k < ns; ++k) add(k, ns + uniform_index(rng, ni));

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (permitted(t.roles, u, v) && !used.count({u, v})) candidates.emplace_back(u, v);
    }
  }
  const double target_real = static_cast<double>(n) + d * static_cast<double>(n * n - n);
  const auto target = static_cast<std::size_t>(std::llround(target_real));
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (std::size_t k = 0; k < candidates.size() && t.edges.size() < target; ++k) {
    add(candidates[k].first, candidates[k].second);
  }

  // Hop distance to the nearest sink, for steering the walks.
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::vector<std::size_t>> in(n);
  for (std::size_t e = 0; e < t.edges.size(); ++e) {
    out[t.edges[e].tail].push_back(e);
    in[t.edges[e].head].push_back(e);
  }
  std::vector<std::size_t> dist(n, kFar);
  std::deque<std::size_t> queue;
  for (std::size_t v = ns + ni; v < n; ++v) {
    dist[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : in[v]) {
      const std::size_t u = t.edges[e].tail;
      if (dist[u] == kFar) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  std::vector<std::size_t> live_sources;
  for (std::size_t s = 0; s < ns; ++s) {
    if (dist[s] != kFar && dist[s] <= cfg.max_path_hops) live_sources.push_back(s);
  }
  if (live_sources.empty()) return std::nullopt;

  const std::size_t max_paths = cfg.max_paths_per_node * n;
  std::set<std::vector<std::size_t>> seen;
  std::vector<bool> visited(n, false);
  for (std::size_t attempt = 0; attempt < 10 * max_paths && t.paths.size() < max_paths;
       ++attempt) {
    std::size_t v = live_sources[uniform_index(rng, live_sources.size())];
    std::vector<std::size_t> seq;
    std::fill(visited.begin(), visited.end(), false);
    visited[v] = true;
    bool ok = true;
    while (t.roles[v] != NodeRole::Sink) {
      std::vector<std::size_t> options;
      for (std::size_t e : out[v]) {
        const std::size_t w = t.edges[e].head;
        if (!visited[w] && dist[w] != kFar && seq.size() + 1 + dist[w] <= cfg.max_path_hops) {
          options.push_back(e);
        }
      }
      if (options.empty()) {
        ok = false;
        break;
      }
      const std::size_t e = options[uniform_index(rng, options.size())];
      seq.push_back(e);
      v = t.edges[e].head;
      visited[v] = true;
    }
    if (ok && seen.insert(seq).second) t.paths.push_back(std::move(seq));
  }
  if (t.paths.empty()) return std::nullopt;
  return t;
}

}  // namespace

BenchmarkInstance generate_instance(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double d = cfg.density ? *cfg.density : unit(rng);
  for (std::size_t attempt = 0; attempt <= cfg.retries; ++attempt) {
    auto topo = try_topology(cfg, d, rng);
    if (!topo) continue;
    Network net = Network::from_indices(topo->names, topo->edges, topo->paths, topo->roles);
    const FlowAggregationMatrix s(net);
    std::uniform_real_distribution<double> flow(cfg.min_flow, cfg.max_flow);
    Vector b(static_cast<Eigen::Index>(net.num_paths()));
    for (Eigen::Index p = 0; p < b.size(); ++p) b[p] = flow(rng);
    Vector truth = s.multiply(b);
    const double sigma = cfg.sigma * truth.cwiseAbs().mean();
    Vector base = truth;
    if (sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, sigma);
      for (Eigen::Index i = 0; i < base.size(); ++i) base[i] += noise(rng);
    }
    std::size_t longest = 0;
    for (const auto& p : net.paths()) longest = std::max(longest, p.size());
    const double n = static_cast<double>(net.num_nodes());
    const double density = static_cast<double>(net.num_edges()) / (n * (n - 1.0));
    return {std::move(net), std::move(truth), std::move(base), seed, d, density, sigma, longest};
  }
  throw Error(ErrorCode::InfeasibleTopology,
              "no source-to-sink path after " + std::to_string(cfg.retries + 1) +
                  " attempts (seed " + std::to_string(seed) + ")");
}

std::string_view to_string(BenchMethod method) noexcept {
  switch (method) {
    case BenchMethod::Base: return "base";
    case BenchMethod::FlowRecL2: return "flowrec-l2";
    case BenchMethod::FlowRecL1: return "flowrec-l1";
    case BenchMethod::FlowRecHuber: return "flowrec-huber";
    case BenchMethod::FlowRecRelaxed: return "flowrec-relaxed";
    case BenchMethod::BottomUp: return "bu";
    case BenchMethod::MintOls: return "mint-ols";
    case BenchMethod::MintOlsNonneg: return "mint-ols-nonneg";
    case BenchMethod::DenseL2: return "dense-l2";
  }
  return "unknown";
}

std::optional<BenchMethod> parse_bench_method(std::string_view text) noexcept {
  for (BenchMethod m :
       {BenchMethod::Base, BenchMethod::FlowRecL2, BenchMethod::FlowRecL1,
        BenchMethod::FlowRecHuber, BenchMethod::FlowRecRelaxed, BenchMethod::BottomUp,
        BenchMethod::MintOls, BenchMethod::MintOlsNonneg, BenchMethod::DenseL2}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::vector<BenchMethod> default_bench_methods() {
  return {BenchMethod::Base, BenchMethod::FlowRecL2, BenchMethod::BottomUp,
          BenchMethod::MintOls, BenchMethod::DenseL2};
}

const MethodSummary& BenchmarkReport::at(std::string_view method) const {
  for (const MethodSummary& m : summary) {
    if (m.method == method) return m;
  }
  throw Error(ErrorCode::BadParameter, "no summary for method '" + std::string(method) + "'");
}

std::size_t harness_threads() {
  std::size_t n = 0;
  if (const char* env = std::getenv("FLOWREC_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0') n = static_cast<std::size_t>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

namespace {

MethodOutput run_method(BenchMethod m, const BenchmarkInstance& inst,
                        const FlowAggregationMatrix& s, const BenchmarkOptions& options) {
  MethodOutput out;
  out.name = std::string(to_string(m));
  switch (m) {
    case BenchMethod::Base:
      out.y = inst.base;
      break;
    case BenchMethod::FlowRecL2:
    case BenchMethod::FlowRecL1:
    case BenchMethod::FlowRecHuber:
    case BenchMethod::DenseL2: {
      ReconciliationResult r;
      if (m == BenchMethod::FlowRecL2) {
        r = reconcile_l2(inst.base, s);
      } else if (m == BenchMethod::FlowRecL1) {
        r = reconcile_l1(inst.base, s);
      } else if (m == BenchMethod::DenseL2) {
        r = reconcile_l2_dense(inst.base, s);
      } else {
        const double delta = options.huber_delta ? *options.huber_delta
                                                 : (inst.sigma > 0.0 ? inst.sigma : 1.0);
        r = reconcile_general(inst.base, s, LossSpec::huber(delta));
      }
      out.y = std::move(r.y_tilde);
      out.wall_seconds = r.stats.wall_seconds;
      out.aux_bytes = r.stats.aux_bytes;
      break;
    }
    case BenchMethod::FlowRecRelaxed: {
      RelaxedResult r = reconcile_relaxed(inst.base, s, options.relaxed_epsilon);
      out.y = std::move(r.y_eps);
      out.wall_seconds = r.wall_seconds;
      out.aux_bytes = static_cast<std::size_t>(6 * (s.num_paths() + s.num_edges()) + 2 * s.rows()) *
                      sizeof(double);
      break;
    }
    case BenchMethod::BottomUp: {
      const auto start = std::chrono::steady_clock::now();
      out.y = reconcile_bottom_up(inst.base, s);
      out.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.aux_bytes = s.rows() * sizeof(double);
      break;
    }
    case BenchMethod::MintOls:
    case BenchMethod::MintOlsNonneg: {
      MintResult r = reconcile_mint_ols(inst.base, s, m == BenchMethod::MintOlsNonneg);
      out.y = std::move(r.y);
      out.wall_seconds = r.stats.wall_seconds;
      out.aux_bytes = r.stats.aux_bytes;
      break;
    }
  }
  return out;
}

SummaryStat summarize(const std::vector<double>& xs) {
  SummaryStat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

BenchmarkReport run_benchmark(const GeneratorConfig& cfg, const std::vector<BenchMethod>& methods,
                              const std::filesystem::path& out_dir,
                              const BenchmarkOptions& options) {
  cfg.validate();
  if (methods.empty()) throw Error(ErrorCode::BadParameter, "no methods selected");
  if (!(options.relaxed_epsilon > 0.0)) {
    throw Error(ErrorCode::BadParameter, "relaxed epsilon must be > 0");
  }

  BenchmarkReport report;
  report.instances.resize(cfg.instances);
  const std::size_t workers =
      std::min(cfg.instances, options.threads ? options.threads : harness_threads());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.instances) return;
      try {
        const std::uint64_t seed = cfg.seed + i;
        const BenchmarkInstance inst = generate_instance(cfg, seed);
        const FlowAggregationMatrix s(inst.network);
        std::vector<MethodOutput> outputs;
        for (BenchMethod m : methods) outputs.push_back(run_method(m, inst, s, options));
        InstanceRecord& rec = report.instances[i];
        rec.instance = i;
        rec.seed = seed;
        rec.nodes = inst.network.num_nodes();
        rec.edges = inst.network.num_edges();
        rec.paths = inst.network.num_paths();
        rec.density = inst.density;
        rec.max_path_length = inst.max_path_length;
        rec.sigma = inst.sigma;
        rec.metrics = evaluate(outputs, inst.truth, inst.network.index());
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cfg.instances);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double> rmse, mae, secs, bytes;
    for (const InstanceRecord& rec : report.instances) {
      const MethodMetrics& m = rec.metrics.methods[k];
      rmse.push_back(m.overall.rmse);
      mae.push_back(m.overall.mae);
      secs.push_back(m.wall_seconds);
      bytes.push_back(static_cast<double>(m.aux_bytes));
    }
    report.summary.push_back({std::string(to_string(methods[k])), cfg.instances,
                              summarize(rmse), summarize(mae), summarize(secs),
                              summarize(bytes)});
  }
  if (!out_dir.empty()) write_benchmark_csv(report, cfg, out_dir);
  return report;
}

void write_benchmark_csv(const BenchmarkReport& report, const GeneratorConfig& cfg,
                         const std::filesystem::path& out_dir) {
  using io::format_double;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());

  std::string inst =
      "instance,seed,nodes,edges,paths,density,max_path_length,sigma,method,rmse,mae,"
      "rmse_nodes,rmse_edges,rmse_paths,mae_nodes,mae_edges,mae_paths\n";
  std::string timing = "instance,method,seconds,aux_bytes\n";
  for (const InstanceRecord& r : report.instances) {
    for (const MethodMetrics& m : r.metrics.methods) {
      inst += std::to_string(r.instance) + "," + std::to_string(r.seed) + "," +
              std::to_string(r.nodes) + "," + std::to_string(r.edges) + "," +
              std::to_string(r.paths) + "," + format_double(r.density) + "," +
              std::to_string(r.max_path_length) + "," + format_double(r.sigma) + "," + m.name +
              "," + format_double(m.overall.rmse) + "," + format_double(m.overall.mae) + "," +
              format_double(m.nodes.rmse) + "," + format_double(m.edges.rmse) + "," +
              format_double(m.paths.rmse) + "," + format_double(m.nodes.mae) + "," +
              format_double(m.edges.mae) + "," + format_double(m.paths.mae) + "\n";
      timing += std::to_string(r.instance) + "," + m.name + "," + format_double(m.wall_seconds) +
                "," + std::to_string(m.aux_bytes) + "\n";
    }
  }

  std::string summary = "method,instances,rmse_mean,rmse_sd,mae_mean,mae_sd\n";
  std::string perf =
      "method,rmse_mean,rmse_sd,mae_mean,mae_sd,time_mean_s,time_sd_s,memory_mean_bytes,"
      "memory_sd_bytes\n";
  for (const MethodSummary& m : report.summary) {
    summary += m.method + "," + std::to_string(m.instances) + "," + format_double(m.rmse.mean) +
               "," + format_double(m.rmse.sd) + "," + format_double(m.mae.mean) + "," +
               format_double(m.mae.sd) + "\n";
    perf += m.method + "," + format_double(m.rmse.mean) + "," + format_double(m.rmse.sd) + "," +
            format_double(m.mae.mean) + "," + format_double(m.mae.sd) + "," +
            format_double(m.seconds.mean) + "," + format_double(m.seconds.sd) + "," +
            format_double(m.aux_bytes.mean) + "," + format_double(m.aux_bytes.sd) + "\n";
  }

  // Curves: mean metrics per density decile and per longest-path length.
  struct Acc {
    std::size_t count = 0;
    double rmse = 0.0;
    double mae = 0.0;
  };
  std::map<std::tuple<int, double, std::size_t>, Acc> bins;
  for (const InstanceRecord& r : report.instances) {
    const double decile = std::floor(r.density * 10.0) / 10.0;
    for (std::size_t k = 0; k < r.metrics.methods.size(); ++k) {
      const MethodMetrics& m = r.metrics.methods[k];
      for (const auto& key : {std::tuple<int, double, std::size_t>{0, decile, k},
                              std::tuple<int, double, std::size_t>{
                                  1, static_cast<double>(r.max_path_length), k}}) {
        Acc& a = bins[key];
        ++a.count;
        a.rmse += m.overall.rmse;
        a.mae += m.overall.mae;
      }
    }
  }
  std::string curves = "axis,bin,method,instances,rmse_mean,mae_mean\n";
  for (const auto& [key, a] : bins) {
    const auto& [axis, bin, k] = key;
    curves += std::string(axis == 0 ? "density" : "max_path_length") + "," + format_double(bin) +
              "," + report.summary[k].method + "," + std::to_string(a.count) + "," +
              format_double(a.rmse / static_cast<double>(a.count)) + "," +
              format_double(a.mae / static_cast<double>(a.count)) + "\n";
  }

  std::string config = "key,value\n";
  config += "nodes," + std::to_string(cfg.nodes) + "\n";
  config += "instances," + std::to_string(cfg.instances) + "\n";
  config += "density," + (cfg.density ? format_double(*cfg.density) : std::string("uniform")) + "\n";
  config += "sigma_relative," + format_double(cfg.sigma) + "\n";
  config += "max_paths_per_node," + std::to_string(cfg.max_paths_per_node) + "\n";
  config += "max_path_hops," + std::to_string(cfg.max_path_hops) + "\n";
  config += "flow_range," + format_double(cfg.min_flow) + ":" + format_double(cfg.max_flow) + "\n";
  config += "seed," + std::to_string(cfg.seed) + "\n";

  io::write_text(out_dir / "instances.csv", inst);
  io::write_text(out_dir / "summary.csv", summary);
  io::write_text(out_dir / "curves.csv", curves);
  io::write_text(out_dir / "config.csv", config);
  io::write_text(out_dir / "timing.csv", timing);
  io::write_text(out_dir / "performance.csv", perf);
}

}  // namespace flowrec
