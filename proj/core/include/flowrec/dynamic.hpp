#pragma once

#include "flowrec/network.hpp"
#include "flowrec/sparse.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace flowrec {

// ---- edge addition --------------------------------------------------------

/// A path through a newly added edge, given as a node sequence, with the value
/// it starts from before the adjustment.
struct NewPath {
  std::vector<std::size_t> nodes;
  double initial_value = 0.0;
};

struct EdgeAdditionResult {
  Network network;
  Vector y_tilde;
  std::size_t new_edge = 0;
  /// Indices (in the new network) of the paths through the new edge.
  std::vector<std::size_t> affected_paths;
  /// yhat_e - sum of the affected path values before the adjustment.
  double delta = 0.0;
};

/// Adds edge (tail, head) with forecast yhat_edge and the given paths through it.
/// Each affected path gains delta / |P_e|; all other paths are copied unchanged
/// and aggregates are recomputed. Throws EdgeExists, NoAffectedPaths,
/// BadParameter (a path avoids the new edge), DimensionMismatch, and the
/// network validation errors for malformed paths.
EdgeAdditionResult add_edge_update(const Network& net, const Vector& y_tilde, EdgeEnds edge,
                                   double yhat_edge, const std::vector<NewPath>& new_paths);

/// In-place form for an existing edge e with a new forecast: spreads
/// delta = yhat_e - sum_{P on e} y_P equally over the paths through e and
/// updates the node and edge totals they touch. Cost is O(|P_e| * path length).
/// Returns delta. Throws UnknownEdge, NoAffectedPaths, DimensionMismatch.
double apply_edge_increment(const Network& net, Vector& y_tilde, std::size_t edge,
                            double yhat_edge);

// ---- data updates ----------------------------------------------------------

enum class UpdateVerdict { StillOptimal, NeedsRereconcile };

std::string_view to_string(UpdateVerdict verdict) noexcept;

struct ForecastUpdate {
  std::size_t component = 0;  // global index
  double new_value = 0.0;
};

struct LedgerEntry {
  std::size_t component = 0;
  double reconciled = 0.0;
  double old_value = 0.0;
  double new_value = 0.0;
  UpdateVerdict verdict = UpdateVerdict::NeedsRereconcile;
};

/// Tracks single-component forecast updates against a retained reconciliation.
class UpdateLedger {
 public:
  /// `constrained` marks reconciliations solved under box constraints; for
  /// those the optimality test is not applicable and every check fails.
  UpdateLedger(Vector y_tilde, Vector yhat, bool constrained = false);

  const Vector& reconciled() const noexcept { return y_tilde_; }
  /// Base forecast with all recorded updates applied.
  const Vector& forecast() const noexcept { return yhat_; }
  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  bool valid() const noexcept { return valid_; }
  bool constrained() const noexcept { return constrained_; }
  /// Index into entries() of the first failed check.
  std::optional<std::size_t> first_failure() const noexcept { return first_failure_; }

 private:
  friend UpdateVerdict check_data_update(UpdateLedger&, std::size_t, double);

  Vector y_tilde_;
  Vector yhat_;
  bool constrained_ = false;
  bool valid_ = true;
  std::optional<std::size_t> first_failure_;
  std::vector<LedgerEntry> entries_;
};

/// StillOptimal iff |ytilde_x - new| < |ytilde_x - old| (strict) and the ledger
/// is valid and unconstrained. Records the update and its verdict; O(1).
/// Throws UnknownComponent, NonFinite.
UpdateVerdict check_data_update(UpdateLedger& ledger, std::size_t component, double new_value);

/// Applies the updates in order and stops at the first one that fails the check.
UpdateLedger apply_monotone_sequence(UpdateLedger ledger,
                                     const std::vector<ForecastUpdate>& updates);

// ---- edge removal ----------------------------------------------------------

struct Replacement {
  /// Affected path index in the original network.
  std::size_t affected_path = 0;
  /// Node sequence of the replacement path.
  std::vector<std::size_t> nodes;
  /// Index of the replacement in the new network.
  std::size_t new_path = 0;
  /// True if the replacement did not exist before.
  bool created = false;
};

struct RemovalPlan {
  std::size_t removed_edge = 0;
  std::string removed_label;
  std::vector<std::size_t> affected_paths;
  std::vector<Replacement> replacements;
  /// (sum of affected path values)^2.
  double bound = 0.0;
  /// Squared change over the path values of the new network (new paths start at 0).
  double path_change_sq = 0.0;
  /// Sum of squared values of the dropped affected paths.
  double dropped_sq = 0.0;
  /// Squared change over every component, removed ones counted as dropping to 0.
  double full_change_sq = 0.0;
  /// path_change_sq <= bound.
  bool bound_holds = true;
};

struct RemovalResult {
  RemovalPlan plan;
  Network network;
  Vector y_tilde;
};

/// Removes edge e, reroutes each affected path's flow onto a fewest-hop path with
/// the same endpoints, and recomputes aggregates. Edges after e shift down by one;
/// surviving paths keep their order and new replacement paths are appended.
/// Throws UnknownEdge, Disconnected, DimensionMismatch.
RemovalResult remove_edge(const Network& net, const Vector& y_tilde, std::size_t edge);

}  // namespace flowrec
