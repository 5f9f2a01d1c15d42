#include "flowrec/base_forecast.hpp"

#include "flowrec/error.hpp"

namespace flowrec {

std::string_view to_string(ForecasterKind kind) noexcept {
  switch (kind) {
    case ForecasterKind::Naive: return "naive";
    case ForecasterKind::Ses: return "ses";
    case ForecasterKind::Drift: return "drift";
  }
  return "unknown";
}

std::optional<ForecasterKind> parse_forecaster_kind(std::string_view text) noexcept {
  if (text == "naive") return ForecasterKind::Naive;
  if (text == "ses") return ForecasterKind::Ses;
  if (text == "drift") return ForecasterKind::Drift;
  return std::nullopt;
}

std::vector<ForecastVector> forecast(const HierarchicalSeries& series, const ForecasterSpec& spec,
                                     int h) {
  if (series.length() == 0) throw Error(ErrorCode::EmptySeries, "series has no observations");
  if (h < 1) throw Error(ErrorCode::BadParameter, "horizon must be >= 1");
  if (spec.kind == ForecasterKind::Ses && !(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "ses alpha must lie in (0, 1]");
  }
  const auto& ys = series.values();
  const Vector& last = ys.back();
  const std::int64_t origin = series.timestamps().back();

  Vector level = last;
  Vector slope = Vector::Zero(last.size());
  switch (spec.kind) {
    case ForecasterKind::Naive:
      break;
    case ForecasterKind::Ses:
      level = ys.front();
      for (std::size_t t = 1; t < ys.size(); ++t) {
        level = spec.alpha * ys[t] + (1.0 - spec.alpha) * level;
      }
      break;
    case ForecasterKind::Drift:
      if (ys.size() > 1) slope = (last - ys.front()) / static_cast<double>(ys.size() - 1);
      break;
  }

  std::vector<ForecastVector> out;
  out.reserve(static_cast<std::size_t>(h));
  for (int k = 1; k <= h; ++k) {
    out.emplace_back(Vector(level + static_cast<double>(k) * slope), k, origin);
  }
  return out;
}

}  // namespace flowrec
