#pragma once

#include "flowrec/series.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace flowrec {

enum class ForecasterKind { Naive, Ses, Drift };

std::string_view to_string(ForecasterKind kind) noexcept;
std::optional<ForecasterKind> parse_forecaster_kind(std::string_view text) noexcept;

struct ForecasterSpec {
  ForecasterKind kind = ForecasterKind::Naive;
  /// Smoothing weight for ses, in (0, 1].
  double alpha = 0.5;
};

/// Forecasts every component independently for horizons 1..h.
/// naive: last value; ses: smoothed level, flat; drift: last value plus k times
/// the mean first difference. Throws EmptySeries or BadParameter.
std::vector<ForecastVector> forecast(const HierarchicalSeries& series, const ForecasterSpec& spec,
                                     int h);

}  // namespace flowrec
