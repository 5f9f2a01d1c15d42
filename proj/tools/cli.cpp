#include "cli.hpp"

#include "flowrec/approx.hpp"
#include "flowrec/base_forecast.hpp"
#include "flowrec/dynamic.hpp"
#include "flowrec/error.hpp"
#include "flowrec/io.hpp"
#include "flowrec/reconcile.hpp"
#include "flowrec/series.hpp"
#include "flowrec/simbench.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace flowrec::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path sidecar(const fs::path& out, std::string_view suffix) {
  return fs::path(out.string() + std::string(suffix));
}

void write_json(const fs::path& path, const json& doc) {
  io::write_text(path, doc.dump(2) + "\n");
}

json coherence_json(const CoherenceReport& r) {
  return {{"max_node_residual", r.max_node_residual},
          {"max_edge_residual", r.max_edge_residual},
          {"tolerance", r.tolerance},
          {"coherent", r.coherent}};
}

std::vector<std::string> split_chain(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find("->", start);
    out.push_back(text.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 2;
  }
  return out;
}

std::size_t node_index(const Network& net, const std::string& id) {
  const auto v = net.find_node(id);
  if (!v) throw Error(ErrorCode::UnknownIndex, "unknown node '" + id + "'");
  return *v;
}

// ---- reconcile ---------------------------------------------------------------

struct ReconcileArgs {
  std::string network;
  std::string forecast;
  std::string loss = "l2";
  std::optional<double> epsilon;
  std::string weights;
  std::string box;
  std::string out;
};

int cmd_reconcile(const ReconcileArgs& a, std::ostream& out) {
  const Network net = io::read_network(a.network);
  const FlowAggregationMatrix s(net);
  const io::ForecastTable input = io::read_forecast(a.forecast, net);
  auto loss = parse_loss(a.loss);
  if (!loss) throw Error(ErrorCode::BadParameter, "unknown loss '" + a.loss + "'");
  if (!a.weights.empty()) loss->weights = io::read_forecast_vector(a.weights, net);
  std::optional<BoxConstraints> box;
  if (!a.box.empty()) box = io::parse_box_csv(io::read_text(a.box), net);
  if (a.epsilon && (loss->kind != LossKind::L2 || box || loss->weights.size())) {
    throw Error(ErrorCode::BadParameter,
                "--epsilon applies to the unweighted, unboxed l2 loss only");
  }

  io::ForecastTable output{input.columns, {}};
  json columns = json::array();
  std::vector<std::string> uncovered;
  for (std::size_t c = 0; c < input.columns.size(); ++c) {
    const Vector& yhat = input.values[c];
    json diag;
    diag["column"] = input.columns[c];
    diag["before"] = coherence_json(check_coherence(yhat, s));
    Vector y;
    if (a.epsilon) {
      const ReconciliationResult exact = reconcile_l2(yhat, s);
      RelaxedOptions ropt;
      ropt.exact = exact.y_tilde;
      const RelaxedResult r = reconcile_relaxed(yhat, s, *a.epsilon, ropt);
      y = r.y_eps;
      diag["method"] = "l2-relaxed";
      diag["epsilon"] = r.epsilon;
      diag["loss_value"] = r.objective;
      diag["max_edge_violation"] = r.max_violation;
      diag["deviation_from_exact"] = *r.deviation;
      diag["deviation_bound"] =
          std::sqrt(r.epsilon * static_cast<double>(net.num_edges())) * exact.y_tilde.norm();
      diag["iterations"] = r.iterations;
      diag["wall_seconds"] = r.wall_seconds;
    } else {
      const ReconciliationResult r = reconcile(yhat, s, *loss, box);
      y = r.y_tilde;
      diag["method"] = r.stats.method;
      diag["loss_value"] = r.loss_value;
      diag["certificate"] = {{"kind", r.certificate_kind}, {"value", r.certificate}};
      diag["iterations"] = r.stats.iterations;
      diag["wall_seconds"] = r.stats.wall_seconds;
      diag["aux_bytes"] = r.stats.aux_bytes;
      if (c == 0) {
        for (std::size_t g : r.uncovered) uncovered.push_back(net.component_label(g));
      }
    }
    diag["after"] = coherence_json(check_coherence(y, s));
    const ConservationReport cons = check_conservation(y, net);
    diag["conservation"] = {{"max_supply_mismatch", cons.max_supply_mismatch},
                            {"max_intermediate_imbalance", cons.max_intermediate_imbalance}};
    columns.push_back(std::move(diag));
    output.values.push_back(std::move(y));
  }
  io::write_forecast(net, output, a.out);
  json doc;
  doc["command"] = "reconcile";
  doc["loss"] = describe(*loss);
  doc["network"] = {{"nodes", net.num_nodes()}, {"edges", net.num_edges()}, {"paths", net.num_paths()}};
  doc["uncovered_components"] = uncovered;
  doc["columns"] = std::move(columns);
  write_json(sidecar(a.out, ".diagnostics.json"), doc);
  out << "reconciled " << input.columns.size() << " column(s) -> " << a.out << "\n";
  return kOk;
}

// ---- update ------------------------------------------------------------------

struct AddEdgeArgs {
  std::string network;
  std::string reconciled;
  std::string tail;
  std::string head;
  double forecast = 0.0;
  std::vector<std::string> paths;
  std::vector<double> path_values;
  std::string out_network;
  std::string out;
};

int cmd_add_edge(const AddEdgeArgs& a, std::ostream& out) {
  const Network net = io::read_network(a.network);
  const Vector y = io::read_forecast_vector(a.reconciled, net);
  if (!a.path_values.empty() && a.path_values.size() != a.paths.size()) {
    throw Error(ErrorCode::BadParameter, "--path-value must be given once per --path");
  }
  std::vector<NewPath> paths;
  for (std::size_t k = 0; k < a.paths.size(); ++k) {
    NewPath p;
    for (const std::string& id : split_chain(a.paths[k])) p.nodes.push_back(node_index(net, id));
    if (!a.path_values.empty()) p.initial_value = a.path_values[k];
    paths.push_back(std::move(p));
  }
  const EdgeEnds edge{node_index(net, a.tail), node_index(net, a.head)};
  const EdgeAdditionResult r = add_edge_update(net, y, edge, a.forecast, paths);
  io::write_network(r.network, a.out_network);
  io::write_forecast_vector(r.network, r.y_tilde, a.out);
  json affected = json::array();
  for (std::size_t p : r.affected_paths) affected.push_back(r.network.path_label(p));
  const FlowAggregationMatrix s(r.network);
  write_json(sidecar(a.out, ".plan.json"),
             {{"command", "update add-edge"},
              {"edge", r.network.edge_label(r.new_edge)},
              {"edge_forecast", a.forecast},
              {"delta", r.delta},
              {"share", r.delta / static_cast<double>(r.affected_paths.size())},
              {"affected_paths", affected},
              {"after", coherence_json(check_coherence(r.y_tilde, s))}});
  out << "added " << r.network.edge_label(r.new_edge) << ", delta " << r.delta << " over "
      << r.affected_paths.size() << " path(s)\n";
  return kOk;
}

struct RemoveEdgeArgs {
  std::string network;
  std::string reconciled;
  std::string edge;
  std::string out_network;
  std::string out;
};

int cmd_remove_edge(const RemoveEdgeArgs& a, std::ostream& out) {
  const Network net = io::read_network(a.network);
  const Vector y = io::read_forecast_vector(a.reconciled, net);
  const auto ends = split_chain(a.edge);
  if (ends.size() != 2) throw Error(ErrorCode::BadParameter, "--edge must look like tail->head");
  const auto e = net.find_edge(node_index(net, ends[0]), node_index(net, ends[1]));
  if (!e) throw Error(ErrorCode::UnknownEdge, "no edge '" + a.edge + "'");
  const RemovalResult r = remove_edge(net, y, *e);
  io::write_network(r.network, a.out_network);
  io::write_forecast_vector(r.network, r.y_tilde, a.out);
  json affected = json::array();
  for (std::size_t p : r.plan.affected_paths) affected.push_back(net.path_label(p));
  json replacements = json::array();
  for (const Replacement& rep : r.plan.replacements) {
    replacements.push_back({{"affected", net.path_label(rep.affected_path)},
                            {"replacement", r.network.path_label(rep.new_path)},
                            {"created", rep.created}});
  }
  const FlowAggregationMatrix s(r.network);
  write_json(sidecar(a.out, ".plan.json"),
             {{"command", "update remove-edge"},
              {"removed_edge", r.plan.removed_label},
              {"affected_paths", affected},
              {"replacements", replacements},
              {"bound", r.plan.bound},
              {"path_change_sq", r.plan.path_change_sq},
              {"dropped_sq", r.plan.dropped_sq},
              {"full_change_sq", r.plan.full_change_sq},
              {"bound_holds", r.plan.bound_holds},
              {"after", coherence_json(check_coherence(r.y_tilde, s))}});
  out << "removed " << r.plan.removed_label << ", rerouted " << r.plan.affected_paths.size()
      << " path(s)\n";
  return kOk;
}

struct CheckUpdateArgs {
  std::string network;
  std::string reconciled;
  std::string forecast;
  std::string kind;
  std::string id;
  double value = 0.0;
  bool constrained = false;
  std::string ledger;
};

int cmd_check_update(const CheckUpdateArgs& a, std::ostream& out) {
  const Network net = io::read_network(a.network);
  const Vector y = io::read_forecast_vector(a.reconciled, net);
  const Vector yhat = io::read_forecast_vector(a.forecast, net);
  std::optional<std::size_t> component;
  const auto kind = parse_component_kind(a.kind);
  if (!kind) throw Error(ErrorCode::UnknownComponent, "unknown kind '" + a.kind + "'");
  for (std::size_t g = net.index().offset(*kind);
       g < net.index().offset(*kind) + net.index().size(*kind); ++g) {
    if (net.component_id(g) == a.id) component = g;
  }
  if (!component) {
    throw Error(ErrorCode::UnknownComponent, a.kind + " '" + a.id + "' is not in the network");
  }
  UpdateLedger ledger(y, yhat, a.constrained);
  const UpdateVerdict v = check_data_update(ledger, *component, a.value);
  const LedgerEntry& e = ledger.entries().back();
  if (!a.ledger.empty()) {
    write_json(a.ledger, {{"command", "update check-update"},
                          {"component", {{"kind", a.kind}, {"id", a.id}}},
                          {"reconciled", e.reconciled},
                          {"old_value", e.old_value},
                          {"new_value", e.new_value},
                          {"constrained", a.constrained},
                          {"verdict", std::string(to_string(v))},
                          {"valid", ledger.valid()}});
  }
  out << to_string(v) << "\n";
  return kOk;
}

// ---- benchmark -----------------------------------------------------------------

struct BenchmarkArgs {
  std::size_t nodes = 50;
  std::size_t instances = 100;
  double sigma = 0.05;
  std::uint64_t seed = 1;
  std::string methods;
  std::optional<double> density;
  std::size_t threads = 0;
  std::string out_dir;
};

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  GeneratorConfig cfg;
  cfg.nodes = a.nodes;
  cfg.instances = a.instances;
  cfg.sigma = a.sigma;
  cfg.seed = a.seed;
  cfg.density = a.density;
  std::vector<BenchMethod> methods;
  if (a.methods.empty()) {
    methods = default_bench_methods();
  } else {
    std::stringstream ss(a.methods);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto m = parse_bench_method(item);
      if (!m) throw Error(ErrorCode::BadParameter, "unknown method '" + item + "'");
      methods.push_back(*m);
    }
  }
  BenchmarkOptions opt;
  opt.threads = a.threads;
  const BenchmarkReport report = run_benchmark(cfg, methods, a.out_dir, opt);
  json summary = json::array();
  for (const MethodSummary& m : report.summary) {
    summary.push_back({{"method", m.method},
                       {"rmse_mean", m.rmse.mean},
                       {"rmse_sd", m.rmse.sd},
                       {"mae_mean", m.mae.mean},
                       {"mae_sd", m.mae.sd},
                       {"time_mean_s", m.seconds.mean},
                       {"memory_mean_bytes", m.aux_bytes.mean}});
    out << m.method << ": rmse " << m.rmse.mean << " +- " << m.rmse.sd << ", mae "
        << m.mae.mean << " +- " << m.mae.sd << ", time " << m.seconds.mean << " s\n";
  }
  write_json(fs::path(a.out_dir) / "diagnostics.json",
             {{"command", "benchmark"},
              {"nodes", a.nodes},
              {"instances", a.instances},
              {"sigma_relative", a.sigma},
              {"seed", a.seed},
              {"summary", summary}});
  return kOk;
}

// ---- forecast ------------------------------------------------------------------

struct ForecastArgs {
  std::string network;
  std::string series;
  std::string method = "naive";
  double alpha = 0.5;
  int horizon = 1;
  std::string out;
};

int cmd_forecast(const ForecastArgs& a, std::ostream& out) {
  const Network net = io::read_network(a.network);
  const HierarchicalSeries series = io::parse_series_csv(io::read_text(a.series), net);
  const auto kind = parse_forecaster_kind(a.method);
  if (!kind) throw Error(ErrorCode::BadParameter, "unknown forecaster '" + a.method + "'");
  const auto fc = forecast(series, {*kind, a.alpha}, a.horizon);
  io::ForecastTable table;
  for (const ForecastVector& f : fc) {
    table.columns.push_back("h" + std::to_string(f.horizon()));
    table.values.push_back(f.values());
  }
  io::write_forecast(net, table, a.out);
  write_json(sidecar(a.out, ".diagnostics.json"),
             {{"command", "forecast"},
              {"method", a.method},
              {"alpha", a.alpha},
              {"horizon", a.horizon},
              {"origin", series.timestamps().back()},
              {"observations", series.length()}});
  out << "wrote " << fc.size() << " horizon(s) -> " << a.out << "\n";
  return kOk;
}

int exit_code_for(ErrorCode code) {
  if (code == ErrorCode::Disconnected) return kDisconnected;
  return is_validation_error(code) ? kValidation : kSolver;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical forecast reconciliation on flow networks"};
  app.require_subcommand(1);

  ReconcileArgs rec;
  auto* rc = app.add_subcommand("reconcile", "Reconcile a forecast file");
  rc->add_option("--network", rec.network, "Network JSON")->required()->check(CLI::ExistingFile);
  rc->add_option("--forecast", rec.forecast, "Forecast CSV")->required()->check(CLI::ExistingFile);
  rc->add_option("--loss", rec.loss, "l2, l1 or huber:<delta>")->capture_default_str();
  rc->add_option("--epsilon", rec.epsilon, "Per-edge coherence slack (l2 only)");
  rc->add_option("--weights", rec.weights, "Per-component weights CSV")->check(CLI::ExistingFile);
  rc->add_option("--box", rec.box, "Bounds CSV (kind,id,lower,upper)")->check(CLI::ExistingFile);
  rc->add_option("--out", rec.out, "Output CSV")->required();

  auto* up = app.add_subcommand("update", "Incremental updates of a reconciliation");
  up->require_subcommand(1);
  AddEdgeArgs add;
  auto* ae = up->add_subcommand("add-edge", "Add an edge and the paths through it");
  ae->add_option("--network", add.network)->required()->check(CLI::ExistingFile);
  ae->add_option("--reconciled", add.reconciled)->required()->check(CLI::ExistingFile);
  ae->add_option("--tail", add.tail)->required();
  ae->add_option("--head", add.head)->required();
  ae->add_option("--forecast", add.forecast, "Forecast for the new edge")->required();
  ae->add_option("--path", add.paths, "Path through the new edge, e.g. s->a->t")->required();
  ae->add_option("--path-value", add.path_values, "Starting value per --path (default 0)");
  ae->add_option("--out-network", add.out_network)->required();
  ae->add_option("--out", add.out)->required();

  RemoveEdgeArgs rem;
  auto* re = up->add_subcommand("remove-edge", "Remove an edge and reroute its flow");
  re->add_option("--network", rem.network)->required()->check(CLI::ExistingFile);
  re->add_option("--reconciled", rem.reconciled)->required()->check(CLI::ExistingFile);
  re->add_option("--edge", rem.edge, "Edge as tail->head")->required();
  re->add_option("--out-network", rem.out_network)->required();
  re->add_option("--out", rem.out)->required();

  CheckUpdateArgs chk;
  auto* cu = up->add_subcommand("check-update", "Test whether a forecast change keeps optimality");
  cu->add_option("--network", chk.network)->required()->check(CLI::ExistingFile);
  cu->add_option("--reconciled", chk.reconciled)->required()->check(CLI::ExistingFile);
  cu->add_option("--forecast", chk.forecast, "Base forecast CSV")->required()->check(CLI::ExistingFile);
  cu->add_option("--kind", chk.kind, "node, edge or path")->required();
  cu->add_option("--id", chk.id)->required();
  cu->add_option("--value", chk.value, "New forecast value")->required();
  cu->add_flag("--constrained", chk.constrained, "Reconciliation was solved under bounds");
  cu->add_option("--ledger", chk.ledger, "Write the ledger entry as JSON");

  BenchmarkArgs bench;
  auto* bm = app.add_subcommand("benchmark", "Run the simulation benchmark");
  bm->add_option("--nodes", bench.nodes)->capture_default_str();
  bm->add_option("--instances", bench.instances)->capture_default_str();
  bm->add_option("--sigma", bench.sigma, "Noise sd relative to mean |truth|")->capture_default_str();
  bm->add_option("--seed", bench.seed)->capture_default_str();
  bm->add_option("--methods", bench.methods, "Comma-separated method list");
  bm->add_option("--density", bench.density, "Fixed edge-count parameter in [0, 1]");
  bm->add_option("--threads", bench.threads, "Worker threads (0 = FLOWREC_THREADS or auto)");
  bm->add_option("--out-dir", bench.out_dir)->required();

  ForecastArgs fa;
  auto* fc = app.add_subcommand("forecast", "Produce base forecasts from a series file");
  fc->add_option("--network", fa.network)->required()->check(CLI::ExistingFile);
  fc->add_option("--series", fa.series)->required()->check(CLI::ExistingFile);
  fc->add_option("--method", fa.method, "naive, ses or drift")->capture_default_str();
  fc->add_option("--alpha", fa.alpha)->capture_default_str();
  fc->add_option("--horizon", fa.horizon)->capture_default_str();
  fc->add_option("--out", fa.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream ee;
    const int code = app.exit(e, o, ee);
    out << o.str();
    err << ee.str();
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (rc->parsed()) return cmd_reconcile(rec, out);
    if (ae->parsed()) return cmd_add_edge(add, out);
    if (re->parsed()) return cmd_remove_edge(rem, out);
    if (cu->parsed()) return cmd_check_update(chk, out);
    if (bm->parsed()) return cmd_benchmark(bench, out);
    if (fc->parsed()) return cmd_forecast(fa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kValidation;
}

}  // namespace flowrec::cli
