#pragma once

#include "flowrec/network.hpp"
#include "flowrec/reconcile.hpp"
#include "flowrec/series.hpp"
#include "flowrec/sparse.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flowrec::io {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Strict parse of a whole field; accepts "inf", "-inf". Throws ParseError.
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// {"nodes": [...], "edges": [[tail, head], ...], "paths": [[edge, ...], ...],
///  "roles": {"node": "source" | "sink" | "intermediate"}}
Network parse_network_json(std::string_view text);
std::string network_to_json(const Network& net);
Network read_network(const std::filesystem::path& path);
void write_network(const Network& net, const std::filesystem::path& path);

/// Forecast panel: one row per component, "kind,id,<column>..." where the
/// value columns are usually a single "value" or one column per horizon.
struct ForecastTable {
  std::vector<std::string> columns;
  /// One length-n vector per column, in IndexMap order.
  std::vector<Vector> values;
};

/// Throws ParseError (with the line number or the missing component id),
/// DuplicateId, NonFinite.
ForecastTable parse_forecast_csv(std::string_view text, const Network& net);
ForecastTable read_forecast(const std::filesystem::path& path, const Network& net);
std::string forecast_to_csv(const Network& net, const ForecastTable& table);
void write_forecast(const Network& net, const ForecastTable& table,
                    const std::filesystem::path& path);
/// Single "value" column convenience wrappers.
Vector read_forecast_vector(const std::filesystem::path& path, const Network& net);
void write_forecast_vector(const Network& net, const Vector& y, const std::filesystem::path& path);

/// "kind,id,lower,upper"; empty fields or +-inf mean unbounded; unlisted
/// components are unbounded.
BoxConstraints parse_box_csv(std::string_view text, const Network& net);

/// Wide series file: "kind,id,<t1>,<t2>,..." with integer timestamps as headers.
HierarchicalSeries parse_series_csv(std::string_view text, const Network& net);

}  // namespace flowrec::io
