#include "flowrec/network.hpp"

#include "flowrec/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace flowrec {

std::string_view to_string(NodeRole role) noexcept {
  switch (role) {
    case NodeRole::Source: return "source";
    case NodeRole::Sink: return "sink";
    case NodeRole::Intermediate: return "intermediate";
    case NodeRole::Unspecified: break;
  }
  return "unspecified";
}

std::optional<NodeRole> parse_node_role(std::string_view text) noexcept {
  if (text == "source") return NodeRole::Source;
  if (text == "sink") return NodeRole::Sink;
  if (text == "intermediate") return NodeRole::Intermediate;
  if (text == "unspecified") return NodeRole::Unspecified;
  return std::nullopt;
}

std::string_view to_string(ComponentKind kind) noexcept {
  switch (kind) {
    case ComponentKind::Node: return "node";
    case ComponentKind::Edge: return "edge";
    case ComponentKind::Path: return "path";
  }
  return "?";
}

std::optional<ComponentKind> parse_component_kind(std::string_view text) noexcept {
  if (text == "node") return ComponentKind::Node;
  if (text == "edge") return ComponentKind::Edge;
  if (text == "path") return ComponentKind::Path;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// IndexMap

std::size_t IndexMap::size(ComponentKind kind) const noexcept {
  switch (kind) {
    case ComponentKind::Node: return nodes_;
    case ComponentKind::Edge: return edges_;
    case ComponentKind::Path: return paths_;
  }
  return 0;
}

std::size_t IndexMap::offset(ComponentKind kind) const noexcept {
  switch (kind) {
    case ComponentKind::Node: return 0;
    case ComponentKind::Edge: return nodes_;
    case ComponentKind::Path: return nodes_ + edges_;
  }
  return 0;
}

std::size_t IndexMap::global(ComponentKind kind, std::size_t local) const {
  if (local >= size(kind)) {
    throw Error(ErrorCode::UnknownIndex, std::string(to_string(kind)) + " index " +
                                             std::to_string(local) + " out of range");
  }
  return offset(kind) + local;
}

Component IndexMap::locate(std::size_t global) const {
  if (global < nodes_) return {ComponentKind::Node, global};
  if (global < nodes_ + edges_) return {ComponentKind::Edge, global - nodes_};
  if (global < dimension()) return {ComponentKind::Path, global - nodes_ - edges_};
  throw Error(ErrorCode::UnknownIndex,
              "global index " + std::to_string(global) + " out of range");
}

// ---------------------------------------------------------------------------
// Network

Network Network::build(std::vector<std::string> nodes,
                       const std::vector<std::pair<std::string, std::string>>& edges,
                       std::vector<std::vector<std::size_t>> paths,
                       std::vector<NodeRole> roles) {
  std::unordered_map<std::string, std::size_t> lookup;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!lookup.emplace(nodes[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "node '" + nodes[i] + "' declared twice");
    }
  }
  std::vector<EdgeEnds> ends;
  ends.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& [tail, head] = edges[e];
    auto t = lookup.find(tail);
    auto h = lookup.find(head);
    if (t == lookup.end() || h == lookup.end()) {
      throw Error(ErrorCode::DanglingEdge,
                  "edge " + std::to_string(e) + " (" + tail + "->" + head +
                      ") references undeclared node '" +
                      (t == lookup.end() ? tail : head) + "'");
    }
    ends.push_back({t->second, h->second});
  }
  return from_indices(std::move(nodes), std::move(ends), std::move(paths), std::move(roles));
}

Network Network::from_indices(std::vector<std::string> nodes, std::vector<EdgeEnds> edges,
                              std::vector<std::vector<std::size_t>> paths,
                              std::vector<NodeRole> roles) {
  if (nodes.empty() || edges.empty() || paths.empty()) {
    throw Error(ErrorCode::BadParameter, "network needs at least one node, edge and path");
  }
  Network net;
  const std::size_t nv = nodes.size();
  for (std::size_t i = 0; i < nv; ++i) {
    if (nodes[i].empty()) {
      throw Error(ErrorCode::BadParameter, "node " + std::to_string(i) + " has an empty id");
    }
    if (!net.node_lookup_.emplace(nodes[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "node '" + nodes[i] + "' declared twice");
    }
  }
  if (!roles.empty() && roles.size() != nv) {
    throw Error(ErrorCode::DimensionMismatch, "roles has " + std::to_string(roles.size()) +
                                                  " entries for " + std::to_string(nv) +
                                                  " nodes");
  }

  net.out_edges_.resize(nv);
  net.in_edges_.resize(nv);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [t, h] = edges[e];
    if (t >= nv || h >= nv) {
      throw Error(ErrorCode::DanglingEdge,
                  "edge " + std::to_string(e) + " references undeclared node index");
    }
    if (t == h) {
      throw Error(ErrorCode::SelfLoop, "edge " + std::to_string(e) + " is a self-loop on '" +
                                           nodes[t] + "'");
    }
    if (!net.edge_lookup_.emplace(std::pair{t, h}, e).second) {
      throw Error(ErrorCode::DuplicateId,
                  "edge " + nodes[t] + "->" + nodes[h] + " declared twice");
    }
    net.out_edges_[t].push_back(e);
    net.in_edges_[h].push_back(e);
  }

  net.node_paths_.resize(nv);
  net.edge_paths_.resize(edges.size());
  net.path_nodes_.reserve(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& seq = paths[p];
    if (seq.empty()) {
      throw Error(ErrorCode::BrokenPath, "path " + std::to_string(p) + " is empty");
    }
    std::vector<std::size_t> visited;
    visited.reserve(seq.size() + 1);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (seq[k] >= edges.size()) {
        throw Error(ErrorCode::UnknownIndex, "path " + std::to_string(p) +
                                                 " references edge " + std::to_string(seq[k]));
      }
      const EdgeEnds cur = edges[seq[k]];
      if (k == 0) {
        visited.push_back(cur.tail);
      } else if (edges[seq[k - 1]].head != cur.tail) {
        throw Error(ErrorCode::BrokenPath,
                    "path " + std::to_string(p) + ": edge " + std::to_string(seq[k - 1]) +
                        " does not chain into edge " + std::to_string(seq[k]));
      }
      visited.push_back(cur.head);
    }
    std::vector<std::size_t> sorted = visited;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::BrokenPath,
                  "path " + std::to_string(p) + " revisits a node (paths must be simple)");
    }
    if (!net.path_lookup_.emplace(visited, p).second) {
      throw Error(ErrorCode::DuplicateId, "path " + std::to_string(p) + " duplicates path " +
                                              std::to_string(net.path_lookup_[visited]));
    }
    for (std::size_t v : visited) net.node_paths_[v].push_back(p);
    for (std::size_t e : seq) net.edge_paths_[e].push_back(p);
    net.path_nodes_.push_back(std::move(visited));
  }

  net.has_roles_ = !roles.empty();
  if (roles.empty()) roles.assign(nv, NodeRole::Unspecified);
  net.nodes_ = std::move(nodes);
  net.edges_ = std::move(edges);
  net.path_edges_ = std::move(paths);
  net.roles_ = std::move(roles);
  net.index_ = IndexMap(net.nodes_.size(), net.edges_.size(), net.path_edges_.size());
  return net;
}

const std::string& Network::node_id(std::size_t v) const {
  if (v >= nodes_.size()) throw Error(ErrorCode::UnknownIndex, "node " + std::to_string(v));
  return nodes_[v];
}

EdgeEnds Network::edge(std::size_t e) const {
  if (e >= edges_.size()) throw Error(ErrorCode::UnknownIndex, "edge " + std::to_string(e));
  return edges_[e];
}

std::span<const std::size_t> Network::path_edges(std::size_t p) const {
  if (p >= path_edges_.size()) throw Error(ErrorCode::UnknownIndex, "path " + std::to_string(p));
  return path_edges_[p];
}

std::span<const std::size_t> Network::path_nodes(std::size_t p) const {
  if (p >= path_nodes_.size()) throw Error(ErrorCode::UnknownIndex, "path " + std::to_string(p));
  return path_nodes_[p];
}

NodeRole Network::role(std::size_t v) const {
  if (v >= roles_.size()) throw Error(ErrorCode::UnknownIndex, "node " + std::to_string(v));
  return roles_[v];
}

std::optional<std::size_t> Network::find_node(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_edge(std::size_t tail, std::size_t head) const {
  auto it = edge_lookup_.find({tail, head});
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_path(std::span<const std::size_t> nodes) const {
  auto it = path_lookup_.find(std::vector<std::size_t>(nodes.begin(), nodes.end()));
  if (it == path_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> Network::paths_through_node(std::size_t v) const {
  if (v >= node_paths_.size()) throw Error(ErrorCode::UnknownIndex, "node " + std::to_string(v));
  return node_paths_[v];
}

std::span<const std::size_t> Network::paths_through_edge(std::size_t e) const {
  if (e >= edge_paths_.size()) throw Error(ErrorCode::UnknownIndex, "edge " + std::to_string(e));
  return edge_paths_[e];
}

std::span<const std::size_t> Network::out_edges(std::size_t v) const {
  if (v >= out_edges_.size()) throw Error(ErrorCode::UnknownIndex, "node " + std::to_string(v));
  return out_edges_[v];
}

std::span<const std::size_t> Network::in_edges(std::size_t v) const {
  if (v >= in_edges_.size()) throw Error(ErrorCode::UnknownIndex, "node " + std::to_string(v));
  return in_edges_[v];
}

std::string Network::edge_label(std::size_t e) const {
  const EdgeEnds ends = edge(e);
  return nodes_[ends.tail] + "->" + nodes_[ends.head];
}

std::string Network::path_label(std::size_t p) const {
  std::string out;
  for (std::size_t v : path_nodes(p)) {
    if (!out.empty()) out += "->";
    out += nodes_[v];
  }
  return out;
}

std::string Network::component_label(std::size_t global) const {
  const Component c = index_.locate(global);
  switch (c.kind) {
    case ComponentKind::Node: return "node " + nodes_[c.index];
    case ComponentKind::Edge: return "edge " + edge_label(c.index);
    case ComponentKind::Path: return "path " + path_label(c.index);
  }
  return {};
}

std::string Network::component_id(std::size_t global) const {
  const Component c = index_.locate(global);
  switch (c.kind) {
    case ComponentKind::Node: return nodes_[c.index];
    case ComponentKind::Edge: return edge_label(c.index);
    case ComponentKind::Path: return path_label(c.index);
  }
  return {};
}

std::vector<std::size_t> Network::uncovered_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < node_paths_.size(); ++v) {
    if (node_paths_[v].empty()) out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> Network::uncovered_edges() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < edge_paths_.size(); ++e) {
    if (edge_paths_[e].empty()) out.push_back(e);
  }
  return out;
}

std::vector<std::size_t> paths_through(const Network& net, Component x) {
  switch (x.kind) {
    case ComponentKind::Node: {
      auto s = net.paths_through_node(x.index);
      return {s.begin(), s.end()};
    }
    case ComponentKind::Edge: {
      auto s = net.paths_through_edge(x.index);
      return {s.begin(), s.end()};
    }
    case ComponentKind::Path: break;
  }
  throw Error(ErrorCode::BadParameter, "paths_through expects a node or an edge");
}

// ---------------------------------------------------------------------------
// FlowAggregationMatrix

namespace {

CsrPattern pattern_from_rows(std::size_t cols,
                             std::span<const std::size_t> (Network::*row)(std::size_t) const,
                             const Network& net, std::size_t rows) {
  CsrPattern out;
  out.rows = rows;
  out.cols = cols;
  out.row_ptr.assign(1, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    auto members = (net.*row)(r);
    out.col_idx.insert(out.col_idx.end(), members.begin(), members.end());
    out.row_ptr.push_back(out.col_idx.size());
  }
  return out;
}

}  // namespace

FlowAggregationMatrix::FlowAggregationMatrix(const Network& net)
    : vp_(pattern_from_rows(net.num_paths(), &Network::paths_through_node, net, net.num_nodes())),
      ep_(pattern_from_rows(net.num_paths(), &Network::paths_through_edge, net, net.num_edges())),
      paths_(net.num_paths()) {
  col_nodes_.reserve(paths_);
  col_edges_.reserve(paths_);
  for (std::size_t p = 0; p < paths_; ++p) {
    auto nodes = net.path_nodes(p);
    auto edges = net.path_edges(p);
    std::vector<std::size_t> n(nodes.begin(), nodes.end());
    std::vector<std::size_t> e(edges.begin(), edges.end());
    std::sort(n.begin(), n.end());
    std::sort(e.begin(), e.end());
    col_nodes_.push_back(std::move(n));
    col_edges_.push_back(std::move(e));
  }
}

std::span<const std::size_t> FlowAggregationMatrix::column_nodes(std::size_t p) const {
  if (p >= paths_) throw Error(ErrorCode::UnknownIndex, "path " + std::to_string(p));
  return col_nodes_[p];
}

std::span<const std::size_t> FlowAggregationMatrix::column_edges(std::size_t p) const {
  if (p >= paths_) throw Error(ErrorCode::UnknownIndex, "path " + std::to_string(p));
  return col_edges_[p];
}

Vector FlowAggregationMatrix::multiply(const Vector& b) const {
  if (static_cast<std::size_t>(b.size()) != paths_) {
    throw Error(ErrorCode::DimensionMismatch, "bottom vector has length " +
                                                  std::to_string(b.size()) + ", expected " +
                                                  std::to_string(paths_));
  }
  Vector y(static_cast<Eigen::Index>(rows()));
  Eigen::Index out = 0;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r) {
      double acc = 0.0;
      for (std::size_t c : block->row(r)) acc += b[static_cast<Eigen::Index>(c)];
      y[out++] = acc;
    }
  }
  y.tail(static_cast<Eigen::Index>(paths_)) = b;
  return y;
}

Vector FlowAggregationMatrix::transpose_multiply(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != rows()) {
    throw Error(ErrorCode::DimensionMismatch, "vector has length " + std::to_string(y.size()) +
                                                  ", expected " + std::to_string(rows()));
  }
  const auto np = static_cast<Eigen::Index>(paths_);
  Vector out = y.tail(np);
  Eigen::Index in = 0;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r) {
      const double v = y[in++];
      for (std::size_t c : block->row(r)) out[static_cast<Eigen::Index>(c)] += v;
    }
  }
  return out;
}

CsrMatrix FlowAggregationMatrix::weighted_gram(const Vector& w) const {
  if (static_cast<std::size_t>(w.size()) != rows()) {
    throw Error(ErrorCode::DimensionMismatch, "weight vector length mismatch");
  }
  std::vector<CsrMatrix::Triplet> triplets;
  std::size_t estimate = paths_;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r) {
      const std::size_t k = block->row(r).size();
      estimate += k * k;
    }
  }
  triplets.reserve(estimate);
  Eigen::Index row = 0;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r, ++row) {
      const double wr = w[row];
      if (wr == 0.0) continue;
      auto members = block->row(r);
      for (std::size_t a : members) {
        for (std::size_t b : members) triplets.push_back({a, b, wr});
      }
    }
  }
  for (std::size_t p = 0; p < paths_; ++p, ++row) {
    triplets.push_back({p, p, w[row]});
  }
  return CsrMatrix::from_triplets(paths_, paths_, std::move(triplets));
}

Vector FlowAggregationMatrix::weighted_gram_multiply(const Vector& w, const Vector& x) const {
  if (static_cast<std::size_t>(w.size()) != rows()) {
    throw Error(ErrorCode::DimensionMismatch, "weight vector length mismatch");
  }
  return transpose_multiply(w.cwiseProduct(multiply(x)));
}

Vector FlowAggregationMatrix::weighted_gram_diagonal(const Vector& w) const {
  if (static_cast<std::size_t>(w.size()) != rows()) {
    throw Error(ErrorCode::DimensionMismatch, "weight vector length mismatch");
  }
  const auto np = static_cast<Eigen::Index>(paths_);
  Vector d = w.tail(np);
  Eigen::Index row = 0;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r, ++row) {
      for (std::size_t c : block->row(r)) d[static_cast<Eigen::Index>(c)] += w[row];
    }
  }
  return d;
}

numerics::SparseSpd FlowAggregationMatrix::gram() const {
  return numerics::SparseSpd(weighted_gram(Vector::Ones(static_cast<Eigen::Index>(rows()))));
}

Eigen::MatrixXd FlowAggregationMatrix::dense() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()),
                                            static_cast<Eigen::Index>(paths_));
  Eigen::Index row = 0;
  for (const CsrPattern* block : {&vp_, &ep_}) {
    for (std::size_t r = 0; r < block->rows; ++r, ++row) {
      for (std::size_t c : block->row(r)) s(row, static_cast<Eigen::Index>(c)) = 1.0;
    }
  }
  for (std::size_t p = 0; p < paths_; ++p, ++row) s(row, static_cast<Eigen::Index>(p)) = 1.0;
  return s;
}

}  // namespace flowrec
