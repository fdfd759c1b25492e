#include "bwgame/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bwgame/errors.hpp"

namespace bwgame {

GridSpec GridSpec::for_game(const GameInstance& game, double relative_resolution) {
  if (!(relative_resolution > 0.0)) throw DomainError("grid: relative resolution must be > 0");
  GridSpec spec;
  spec.min_price = std::numeric_limits<double>::infinity();
  for (const auto& p : game.peers()) {
    if (p.credits() <= 0.0) continue;
    spec.min_price = std::min(spec.min_price, p.saturation_price() / 2.0);
    spec.max_price = std::max(spec.max_price, p.cutoff_price());
  }
  if (!(spec.max_price > 0.0)) {
    // Nobody can buy; any positive window will do.
    spec.min_price = 0.5;
    spec.max_price = 1.0;
  }
  spec.resolution = relative_resolution * (spec.max_price - spec.min_price);
  return spec;
}

namespace {

OracleResult scan(const GameInstance& game, const GridSpec& spec) {
  OracleResult best;
  const double u = game.uploader_capacity();
  const auto steps = static_cast<std::size_t>(std::floor((spec.max_price - spec.min_price) / spec.resolution));
  bool found = false;
  for (std::size_t k = 0; k <= steps + 1; ++k) {
    const double mu = k <= steps ? spec.min_price + static_cast<double>(k) * spec.resolution : spec.max_price;
    double demand = 0.0;
    for (const auto& p : game.peers()) {
      // Interior branch written out from c/(mu ln2) - d directly.
      const double c = p.credits(), d = p.capacity();
      double x = c / (mu * kLn2) - d;
      if (x > d) x = d;
      if (x < 0.0) x = 0.0;
      demand += x;
    }
    if (demand > u) continue;
    ++best.admissible_points;
    const double revenue = mu * demand;
    if (!found || revenue > best.revenue) {
      best.price = mu;
      best.revenue = revenue;
      found = true;
    }
  }
  return best;
}

}  // namespace

OracleResult grid_search_price(const GameInstance& game, const GridSpec& spec) {
  if (!(spec.min_price > 0.0) || !(spec.max_price > spec.min_price) || !(spec.resolution > 0.0)) {
    throw DomainError("grid: need 0 < min_price < max_price and resolution > 0");
  }
  OracleResult r = scan(game, spec);
  if (r.admissible_points > 0) return r;
  GridSpec wider = spec;
  wider.max_price = spec.max_price + (spec.max_price - spec.min_price);
  r = scan(game, wider);
  if (r.admissible_points > 0) return r;
  throw DomainError("grid: no admissible price in the search window");
}

ProbeResult deviation_probe(const PeerProfile& peer, double price, std::size_t steps) {
  if (!(price > 0.0)) throw DomainError("deviation_probe: price must be > 0");
  if (steps < 2) throw DomainError("deviation_probe: need at least two grid points");
  ProbeResult best{0.0, -std::numeric_limits<double>::infinity()};
  const double d = peer.capacity();
  for (std::size_t j = 0; j < steps; ++j) {
    const double x = j + 1 == steps ? d : d * static_cast<double>(j) / static_cast<double>(steps - 1);
    const double v = peer.credits() * std::log2(1.0 + x / d) - price * x;
    if (v > best.utility) best = {x, v};
  }
  return best;
}

}  // namespace bwgame
