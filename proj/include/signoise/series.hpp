#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace signoise {

/// One checkpoint on a training curve.
struct Point {
  std::int64_t step = 0;
  double value = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Training curve ordered by strictly increasing step.
using Series = std::vector<Point>;

/// Curves keyed by model id, for computations over derived (non-stored) scores.
using CurveMap = std::map<std::string, Series, std::less<>>;

inline std::vector<double> values_of(std::span<const Point> series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& p : series) out.push_back(p.value);
  return out;
}

}  // namespace signoise
