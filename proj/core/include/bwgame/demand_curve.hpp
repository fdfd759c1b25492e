#pragma once

#include <cstddef>
#include <vector>

#include "bwgame/model.hpp"

namespace bwgame {

/// Price interval (lower, upper] on which every peer keeps the same branch
/// of its best response. On such an interval demand is
///
///   D(p) = active_credits / (p ln2) - active_capacity + saturated_capacity
///
/// so it can be evaluated and inverted in closed form.
struct DemandSegment {
  double lower = 0.0;  // exclusive
  double upper = 0.0;  // inclusive; +inf for the last segment
  std::vector<std::size_t> active;     // interior branch
  std::vector<std::size_t> saturated;  // buying full capacity
  double active_credits = 0.0;
  double active_capacity = 0.0;
  double saturated_capacity = 0.0;

  /// Closed-form demand; valid for prices in [lower, upper].
  double demand_at(double price) const noexcept;

  /// Price at which the closed form equals `demand`. Requires a non-empty
  /// active set.
  double price_for(double demand) const noexcept;
};

/// Piecewise aggregate demand of a game. Breakpoints are the distinct
/// positive thresholds of all peers; coincident thresholds are merged.
class DemandCurve {
 public:
  explicit DemandCurve(const GameInstance& game);

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<DemandSegment>& segments() const noexcept { return segments_; }

  /// Index of the segment containing `price` (> 0).
  std::size_t segment_index(double price) const;

  /// D(price). Throws DomainError for non-positive prices.
  double operator()(double price) const;

  /// Demand on the lowest segment, where every purchasing peer is saturated.
  double max_demand() const noexcept;

 private:
  std::vector<double> breakpoints_;
  std::vector<DemandSegment> segments_;
};

DemandCurve build_demand_curve(const GameInstance& game);

}  // namespace bwgame
