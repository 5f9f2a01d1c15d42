#include "flowrec/dynamic.hpp"

#include "flowrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace flowrec {

namespace {

void check_length(const Network& net, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != net.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "reconciled vector has length " +
                                                  std::to_string(y.size()) + ", expected " +
                                                  std::to_string(net.dimension()));
  }
}

Vector path_values(const Network& net, const Vector& y) {
  return y.tail(static_cast<Eigen::Index>(net.num_paths()));
}

std::vector<std::vector<std::size_t>> copy_paths(const Network& net) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(net.num_paths());
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const auto seq = net.path_edges(p);
    out.emplace_back(seq.begin(), seq.end());
  }
  return out;
}

// Fewest-hop path from `from` to `to` avoiding edge `banned`; empty if none.
std::vector<std::size_t> bfs_path(const Network& net, std::size_t from, std::size_t to,
                                  std::size_t banned) {
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> via(net.num_nodes(), kUnseen);
  std::deque<std::size_t> queue{from};
  via[from] = from;
  while (!queue.empty() && via[to] == kUnseen) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t e : net.out_edges(v)) {
      if (e == banned) continue;
      const std::size_t w = net.edge(e).head;
      if (via[w] != kUnseen) continue;
      via[w] = v;
      queue.push_back(w);
    }
  }
  if (via[to] == kUnseen) return {};
  std::vector<std::size_t> nodes{to};
  while (nodes.back() != from) nodes.push_back(via[nodes.back()]);
  std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace

EdgeAdditionResult add_edge_update(const Network& net, const Vector& y_tilde, EdgeEnds edge,
                                   double yhat_edge, const std::vector<NewPath>& new_paths) {
  check_length(net, y_tilde);
  if (edge.tail >= net.num_nodes() || edge.head >= net.num_nodes()) {
    throw Error(ErrorCode::UnknownIndex, "new edge endpoint is not a node of the network");
  }
  if (net.find_edge(edge.tail, edge.head)) {
    throw Error(ErrorCode::EdgeExists, "edge " + net.node_id(edge.tail) + "->" +
                                           net.node_id(edge.head) + " already exists");
  }
  if (new_paths.empty()) {
    throw Error(ErrorCode::NoAffectedPaths, "no paths run through the new edge");
  }
  if (!std::isfinite(yhat_edge)) throw Error(ErrorCode::NonFinite, "edge forecast is not finite");

  const std::size_t new_edge = net.num_edges();
  std::vector<EdgeEnds> edges = net.edges();
  edges.push_back(edge);
  auto paths = copy_paths(net);
  double sum = 0.0;
  for (std::size_t k = 0; k < new_paths.size(); ++k) {
    const NewPath& np = new_paths[k];
    if (!std::isfinite(np.initial_value)) {
      throw Error(ErrorCode::NonFinite, "initial value of new path " + std::to_string(k));
    }
    std::vector<std::size_t> seq;
    bool uses_new = false;
    for (std::size_t i = 0; i + 1 < np.nodes.size(); ++i) {
      const std::size_t a = np.nodes[i];
      const std::size_t b = np.nodes[i + 1];
      if (a == edge.tail && b == edge.head) {
        seq.push_back(new_edge);
        uses_new = true;
      } else if (auto e = a < net.num_nodes() && b < net.num_nodes() ? net.find_edge(a, b)
                                                                     : std::nullopt) {
        seq.push_back(*e);
      } else {
        throw Error(ErrorCode::BrokenPath, "new path " + std::to_string(k) + " step " +
                                               std::to_string(i) + " is not an edge");
      }
    }
    if (!uses_new) {
      throw Error(ErrorCode::BadParameter,
                  "new path " + std::to_string(k) + " does not contain the new edge");
    }
    paths.push_back(std::move(seq));
    sum += np.initial_value;
  }

  EdgeAdditionResult out{
      Network::from_indices(net.node_ids(), std::move(edges), std::move(paths),
                            net.has_roles() ? net.roles() : std::vector<NodeRole>{}),
      {}, new_edge, {}, yhat_edge - sum};
  const double share = out.delta / static_cast<double>(new_paths.size());
  Vector b(static_cast<Eigen::Index>(out.network.num_paths()));
  b.head(static_cast<Eigen::Index>(net.num_paths())) = path_values(net, y_tilde);
  for (std::size_t k = 0; k < new_paths.size(); ++k) {
    const std::size_t p = net.num_paths() + k;
    b[static_cast<Eigen::Index>(p)] = new_paths[k].initial_value + share;
    out.affected_paths.push_back(p);
  }
  out.y_tilde = FlowAggregationMatrix(out.network).multiply(b);
  return out;
}

double apply_edge_increment(const Network& net, Vector& y_tilde, std::size_t edge,
                            double yhat_edge) {
  check_length(net, y_tilde);
  if (edge >= net.num_edges()) {
    throw Error(ErrorCode::UnknownEdge, "edge index " + std::to_string(edge));
  }
  const auto paths = net.paths_through_edge(edge);
  if (paths.empty()) {
    throw Error(ErrorCode::NoAffectedPaths, "edge " + net.edge_label(edge) + " is on no path");
  }
  const IndexMap& idx = net.index();
  const std::size_t path_off = idx.offset(ComponentKind::Path);
  const std::size_t edge_off = idx.offset(ComponentKind::Edge);
  double sum = 0.0;
  for (std::size_t p : paths) sum += y_tilde[static_cast<Eigen::Index>(path_off + p)];
  const double delta = yhat_edge - sum;
  const double share = delta / static_cast<double>(paths.size());
  for (std::size_t p : paths) {
    y_tilde[static_cast<Eigen::Index>(path_off + p)] += share;
    for (std::size_t e : net.path_edges(p)) y_tilde[static_cast<Eigen::Index>(edge_off + e)] += share;
    for (std::size_t v : net.path_nodes(p)) y_tilde[static_cast<Eigen::Index>(v)] += share;
  }
  return delta;
}

std::string_view to_string(UpdateVerdict verdict) noexcept {
  return verdict == UpdateVerdict::StillOptimal ? "still-optimal" : "needs-rereconcile";
}

UpdateLedger::UpdateLedger(Vector y_tilde, Vector yhat, bool constrained)
    : y_tilde_(std::move(y_tilde)), yhat_(std::move(yhat)), constrained_(constrained) {
  if (y_tilde_.size() != yhat_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "reconciled and base vectors differ in length");
  }
}

UpdateVerdict check_data_update(UpdateLedger& ledger, std::size_t component, double new_value) {
  if (component >= static_cast<std::size_t>(ledger.yhat_.size())) {
    throw Error(ErrorCode::UnknownComponent, "component " + std::to_string(component));
  }
  if (!std::isfinite(new_value)) throw Error(ErrorCode::NonFinite, "updated value is not finite");
  const auto i = static_cast<Eigen::Index>(component);
  LedgerEntry entry{component, ledger.y_tilde_[i], ledger.yhat_[i], new_value,
                    UpdateVerdict::NeedsRereconcile};
  if (ledger.valid_ && !ledger.constrained_ &&
      std::abs(entry.reconciled - new_value) < std::abs(entry.reconciled - entry.old_value)) {
    entry.verdict = UpdateVerdict::StillOptimal;
  }
  if (entry.verdict != UpdateVerdict::StillOptimal && ledger.valid_) {
    ledger.valid_ = false;
    ledger.first_failure_ = ledger.entries_.size();
  }
  ledger.yhat_[i] = new_value;
  ledger.entries_.push_back(entry);
  return entry.verdict;
}

UpdateLedger apply_monotone_sequence(UpdateLedger ledger,
                                     const std::vector<ForecastUpdate>& updates) {
  for (const ForecastUpdate& u : updates) {
    if (check_data_update(ledger, u.component, u.new_value) != UpdateVerdict::StillOptimal) break;
  }
  return ledger;
}

RemovalResult remove_edge(const Network& net, const Vector& y_tilde, std::size_t edge) {
  check_length(net, y_tilde);
  if (edge >= net.num_edges()) {
    throw Error(ErrorCode::UnknownEdge, "edge index " + std::to_string(edge));
  }
  RemovalPlan plan;
  plan.removed_edge = edge;
  plan.removed_label = net.edge_label(edge);
  const auto affected = net.paths_through_edge(edge);
  plan.affected_paths.assign(affected.begin(), affected.end());

  const Vector b = path_values(net, y_tilde);
  std::vector<bool> dropped(net.num_paths(), false);
  double affected_sum = 0.0;
  for (std::size_t p : plan.affected_paths) {
    dropped[p] = true;
    affected_sum += b[static_cast<Eigen::Index>(p)];
  }
  plan.bound = affected_sum * affected_sum;

  // Replacement node sequences, in affected-path order.
  for (std::size_t q : plan.affected_paths) {
    auto nodes = bfs_path(net, net.origin(q), net.destination(q), edge);
    if (nodes.empty()) {
      throw Error(ErrorCode::Disconnected, "no route from " + net.node_id(net.origin(q)) +
                                               " to " + net.node_id(net.destination(q)) +
                                               " without " + plan.removed_label);
    }
    plan.replacements.push_back({q, std::move(nodes), 0, false});
  }

  // New edge list and index remap.
  std::vector<EdgeEnds> edges;
  edges.reserve(net.num_edges() - 1);
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    if (e != edge) edges.push_back(net.edge(e));
  }
  auto remap = [edge](std::size_t e) { return e > edge ? e - 1 : e; };

  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> new_index(net.num_paths(), 0);
  std::vector<double> values;
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    if (dropped[p]) continue;
    std::vector<std::size_t> seq;
    for (std::size_t e : net.path_edges(p)) seq.push_back(remap(e));
    new_index[p] = paths.size();
    paths.push_back(std::move(seq));
    values.push_back(b[static_cast<Eigen::Index>(p)]);
  }
  std::vector<double> added(values.size(), 0.0);
  std::map<std::vector<std::size_t>, std::size_t> created;
  for (Replacement& r : plan.replacements) {
    const double flow = b[static_cast<Eigen::Index>(r.affected_path)];
    if (auto existing = net.find_path(r.nodes); existing && !dropped[*existing]) {
      r.new_path = new_index[*existing];
    } else if (auto it = created.find(r.nodes); it != created.end()) {
      r.new_path = it->second;
      r.created = true;
    } else {
      std::vector<std::size_t> seq;
      for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) {
        seq.push_back(remap(*net.find_edge(r.nodes[i], r.nodes[i + 1])));
      }
      r.new_path = paths.size();
      r.created = true;
      created.emplace(r.nodes, r.new_path);
      paths.push_back(std::move(seq));
      values.push_back(0.0);
      added.push_back(0.0);
    }
    values[r.new_path] += flow;
    added[r.new_path] += flow;
  }

  RemovalResult out{plan,
                    Network::from_indices(net.node_ids(), std::move(edges), std::move(paths),
                                          net.has_roles() ? net.roles() : std::vector<NodeRole>{}),
                    {}};
  const Vector bnew = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  out.y_tilde = FlowAggregationMatrix(out.network).multiply(bnew);

  RemovalPlan& pl = out.plan;
  for (double d : added) pl.path_change_sq += d * d;
  for (std::size_t q : pl.affected_paths) {
    const double v = b[static_cast<Eigen::Index>(q)];
    pl.dropped_sq += v * v;
  }
  // Full-vector change: nodes and surviving edges compare position by position,
  // the removed edge and dropped paths count as going to zero.
  const auto nv = static_cast<Eigen::Index>(net.num_nodes());
  double full = (out.y_tilde.head(nv) - y_tilde.head(nv)).squaredNorm();
  const std::size_t old_eoff = net.index().offset(ComponentKind::Edge);
  const std::size_t new_eoff = out.network.index().offset(ComponentKind::Edge);
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    const double before = y_tilde[static_cast<Eigen::Index>(old_eoff + e)];
    const double after =
        e == edge ? 0.0 : out.y_tilde[static_cast<Eigen::Index>(new_eoff + remap(e))];
    full += (after - before) * (after - before);
  }
  pl.full_change_sq = full + pl.path_change_sq + pl.dropped_sq;
  pl.bound_holds = pl.path_change_sq <= pl.bound;
  return out;
}

}  // namespace flowrec
