#include "bwgame/demand_curve.hpp"

#include <algorithm>
#include <limits>

#include "bwgame/errors.hpp"

namespace bwgame {

double DemandSegment::demand_at(double price) const noexcept {
  double d = saturated_capacity;
  if (!active.empty()) d += active_credits / (price * kLn2) - active_capacity;
  return std::max(d, 0.0);
}

double DemandSegment::price_for(double demand) const noexcept {
  return active_credits / ((demand - saturated_capacity + active_capacity) * kLn2);
}

DemandCurve::DemandCurve(const GameInstance& game) {
  const auto peers = game.peers();
  for (const auto& p : peers) {
    // Free riders have both thresholds at zero and never buy.
    if (p.credits() > 0.0) {
      breakpoints_.push_back(p.saturation_price());
      breakpoints_.push_back(p.cutoff_price());
    }
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());

  constexpr double inf = std::numeric_limits<double>::infinity();
  segments_.reserve(breakpoints_.size() + 1);
  for (std::size_t k = 0; k <= breakpoints_.size(); ++k) {
    DemandSegment seg;
    seg.lower = k == 0 ? 0.0 : breakpoints_[k - 1];
    seg.upper = k == breakpoints_.size() ? inf : breakpoints_[k];
    for (std::size_t i = 0; i < peers.size(); ++i) {
      const auto& p = peers[i];
      if (p.credits() <= 0.0) continue;
      if (p.saturation_price() >= seg.upper) {
        seg.saturated.push_back(i);
        seg.saturated_capacity += p.capacity();
      } else if (p.cutoff_price() > seg.lower) {
        seg.active.push_back(i);
        seg.active_credits += p.credits();
        seg.active_capacity += p.capacity();
      }
    }
    segments_.push_back(std::move(seg));
  }
}

std::size_t DemandCurve::segment_index(double price) const {
  if (!(price > 0.0)) throw DomainError("demand curve: price must be > 0");
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), price);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

double DemandCurve::operator()(double price) const {
  return segments_[segment_index(price)].demand_at(price);
}

double DemandCurve::max_demand() const noexcept {
  return segments_.front().saturated_capacity;
}

DemandCurve build_demand_curve(const GameInstance& game) { return DemandCurve(game); }

}  // namespace bwgame
