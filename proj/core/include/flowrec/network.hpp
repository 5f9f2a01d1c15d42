#pragma once

#include "flowrec/sparse.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace flowrec {

enum class NodeRole { Unspecified, Source, Sink, Intermediate };
enum class ComponentKind { Node, Edge, Path };

std::string_view to_string(NodeRole role) noexcept;
std::optional<NodeRole> parse_node_role(std::string_view text) noexcept;
std::string_view to_string(ComponentKind kind) noexcept;
std::optional<ComponentKind> parse_component_kind(std::string_view text) noexcept;

/// A (kind, local index) address of one component of the forecast vector.
struct Component {
  ComponentKind kind;
  std::size_t index;

  friend bool operator==(const Component&, const Component&) = default;
};

struct EdgeEnds {
  std::size_t tail;
  std::size_t head;

  friend bool operator==(const EdgeEnds&, const EdgeEnds&) = default;
};

/// Canonical layout of the length-n forecast vector: nodes, then edges, then paths.
class IndexMap {
 public:
  IndexMap() = default;
  IndexMap(std::size_t nodes, std::size_t edges, std::size_t paths) noexcept
      : nodes_(nodes), edges_(edges), paths_(paths) {}

  std::size_t dimension() const noexcept { return nodes_ + edges_ + paths_; }
  std::size_t size(ComponentKind kind) const noexcept;
  std::size_t offset(ComponentKind kind) const noexcept;

  std::size_t global(ComponentKind kind, std::size_t local) const;
  std::size_t global(Component c) const { return global(c.kind, c.index); }
  Component locate(std::size_t global) const;

 private:
  std::size_t nodes_ = 0;
  std::size_t edges_ = 0;
  std::size_t paths_ = 0;
};

/// Directed graph G = (V, E) with an explicit, ordered set of simple paths.
/// Immutable after construction.
class Network {
 public:
  /// Validates and builds a network from node names, (tail, head) name pairs and
  /// paths given as edge-index sequences. Throws DanglingEdge, BrokenPath,
  /// DuplicateId, SelfLoop, UnknownIndex or BadParameter.
  static Network build(std::vector<std::string> nodes,
                       const std::vector<std::pair<std::string, std::string>>& edges,
                       std::vector<std::vector<std::size_t>> paths,
                       std::vector<NodeRole> roles = {});

  /// Same as build() with edges already given as node indices.
  static Network from_indices(std::vector<std::string> nodes,
                              std::vector<EdgeEnds> edges,
                              std::vector<std::vector<std::size_t>> paths,
                              std::vector<NodeRole> roles = {});

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_paths() const noexcept { return path_edges_.size(); }
  std::size_t dimension() const noexcept { return index_.dimension(); }
  const IndexMap& index() const noexcept { return index_; }

  const std::vector<std::string>& node_ids() const noexcept { return nodes_; }
  const std::vector<EdgeEnds>& edges() const noexcept { return edges_; }
  const std::vector<std::vector<std::size_t>>& paths() const noexcept { return path_edges_; }
  const std::vector<NodeRole>& roles() const noexcept { return roles_; }

  const std::string& node_id(std::size_t v) const;
  EdgeEnds edge(std::size_t e) const;
  std::span<const std::size_t> path_edges(std::size_t p) const;
  /// Node sequence visited by path p (length = edges + 1).
  std::span<const std::size_t> path_nodes(std::size_t p) const;
  std::size_t origin(std::size_t p) const { return path_nodes(p).front(); }
  std::size_t destination(std::size_t p) const { return path_nodes(p).back(); }
  NodeRole role(std::size_t v) const;
  bool has_roles() const noexcept { return has_roles_; }

  std::optional<std::size_t> find_node(std::string_view id) const;
  std::optional<std::size_t> find_edge(std::size_t tail, std::size_t head) const;
  /// Looks up a path by its node sequence.
  std::optional<std::size_t> find_path(std::span<const std::size_t> nodes) const;

  /// Sorted indices of the paths visiting node v / traversing edge e.
  std::span<const std::size_t> paths_through_node(std::size_t v) const;
  std::span<const std::size_t> paths_through_edge(std::size_t e) const;

  /// Outgoing / incoming edge indices of node v, in edge order.
  std::span<const std::size_t> out_edges(std::size_t v) const;
  std::span<const std::size_t> in_edges(std::size_t v) const;

  /// Human-readable identifiers used by the file formats:
  /// node "S1", edge "W1->S1", path "T->W1->S1".
  std::string edge_label(std::size_t e) const;
  std::string path_label(std::size_t p) const;
  std::string component_label(std::size_t global) const;
  /// Identifier without the kind prefix: "S1", "W1->S1" or "T->W1->S1".
  std::string component_id(std::size_t global) const;

  /// Nodes and edges that lie on no path; their reconciled values are forced to zero.
  std::vector<std::size_t> uncovered_nodes() const;
  std::vector<std::size_t> uncovered_edges() const;

 private:
  Network() = default;

  std::vector<std::string> nodes_;
  std::vector<EdgeEnds> edges_;
  std::vector<std::vector<std::size_t>> path_edges_;
  std::vector<std::vector<std::size_t>> path_nodes_;
  std::vector<NodeRole> roles_;
  bool has_roles_ = false;
  IndexMap index_;

  std::vector<std::vector<std::size_t>> node_paths_;
  std::vector<std::vector<std::size_t>> edge_paths_;
  std::vector<std::vector<std::size_t>> out_edges_;
  std::vector<std::vector<std::size_t>> in_edges_;

  std::unordered_map<std::string, std::size_t> node_lookup_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_lookup_;
  std::map<std::vector<std::size_t>, std::size_t> path_lookup_;
};

/// Paths containing the given node or edge. Throws UnknownIndex for bad indices
/// and BadParameter for a path component.
std::vector<std::size_t> paths_through(const Network& net, Component x);

/// S = [V'; E'; I] with V' the vertex-path and E' the edge-path incidence
/// matrices, stored row-compressed (plus the column view for S^T products).
/// The identity block is implicit.
class FlowAggregationMatrix {
 public:
  explicit FlowAggregationMatrix(const Network& net);

  std::size_t rows() const noexcept { return vp_.rows + ep_.rows + paths_; }
  std::size_t cols() const noexcept { return paths_; }
  std::size_t num_nodes() const noexcept { return vp_.rows; }
  std::size_t num_edges() const noexcept { return ep_.rows; }
  std::size_t num_paths() const noexcept { return paths_; }

  const CsrPattern& vertex_path() const noexcept { return vp_; }
  const CsrPattern& edge_path() const noexcept { return ep_; }
  std::span<const std::size_t> column_nodes(std::size_t p) const;
  std::span<const std::size_t> column_edges(std::size_t p) const;

  /// S b: node, edge and path values for path values b.
  Vector multiply(const Vector& b) const;
  /// S^T y.
  Vector transpose_multiply(const Vector& y) const;
  /// S^T S = V'^T V' + E'^T E' + I as a sparse SPD matrix.
  numerics::SparseSpd gram() const;
  /// S^T diag(w) S for nonnegative weights w of length rows().
  CsrMatrix weighted_gram(const Vector& w) const;
  /// S^T diag(w) S x without forming the product matrix.
  Vector weighted_gram_multiply(const Vector& w, const Vector& x) const;
  /// Diagonal of S^T diag(w) S.
  Vector weighted_gram_diagonal(const Vector& w) const;
  /// Dense n x |P| copy of S (for the dense comparison arm and tests).
  Eigen::MatrixXd dense() const;

 private:
  CsrPattern vp_;
  CsrPattern ep_;
  std::size_t paths_ = 0;
  std::vector<std::vector<std::size_t>> col_nodes_;
  std::vector<std::vector<std::size_t>> col_edges_;
};

}  // namespace flowrec
