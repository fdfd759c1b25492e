#pragma once

// Brute-force references for the uploader and downloader problems. Nothing
// here uses the demand curve or the solver: prices are scanned on a grid and
// demand is rebuilt from per-peer best responses.

#include <cstddef>

#include "bwgame/model.hpp"

namespace bwgame {

struct GridSpec {
  double min_price = 0.0;
  double max_price = 0.0;
  double resolution = 0.0;  // price step

  /// Window [min saturation / 2, max cutoff] split into steps of
  /// `relative_resolution` times its width.
  static GridSpec for_game(const GameInstance& game, double relative_resolution = 1e-4);
};

struct OracleResult {
  double price = 0.0;
  double revenue = 0.0;
  std::size_t admissible_points = 0;
};

/// Revenue-maximizing grid price among prices whose demand fits within u.
/// With no admissible point the window is doubled upward once; if that also
/// fails a DomainError is thrown.
OracleResult grid_search_price(const GameInstance& game, const GridSpec& spec);

struct ProbeResult {
  double bandwidth = 0.0;
  double utility = 0.0;
};

/// Best downloader utility over `steps` evenly spaced bandwidths in [0, d].
/// Throws DomainError for price <= 0 or steps < 2.
ProbeResult deviation_probe(const PeerProfile& peer, double price, std::size_t steps);

}  // namespace bwgame
