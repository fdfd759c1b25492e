#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bwgame/model.hpp"

namespace bwgame {

struct SolverConfig {
  /// Bound on |D(price) - u| / u accepted for an oversubscribed equilibrium.
  double residual_tolerance = 1e-9;
};

/// Uploader's equilibrium price and the allocation it induces.
///
/// For an oversubscribed game this is the highest price at which aggregate
/// demand equals the uploader capacity. It is found by locating the demand
/// segment that brackets u and inverting its closed form; flat stretches of
/// demand resolve to their highest price. If u covers all purchasable
/// capacity every buyer is saturated at the lowest saturation price.
///
/// Throws DomainError for an invalid config.
Equilibrium solve(const GameInstance& game, const SolverConfig& config = {});

/// Two-peer closed form. Requires p1.priority() > p2.priority() and u > 0.
/// Capacities above d1 + d2 fall back to solve().
double two_peer_price(const PeerProfile& p1, const PeerProfile& p2, double uploader_capacity);

/// Price that lets every peer buy on its interior branch, when u lies in the
/// interval where that is optimal:
///   sum(c) / min(h) - sum(d) < u <= 2 sum(c) / max(h) - sum(d)
/// with the precondition min(h) >= max(h) / 2. Absent otherwise.
std::optional<double> balance_region_price(const GameInstance& game);

/// Region table for peers whose thresholds order strictly as
/// h1 > ... > hn > h1/2 > ... > hn/2. Throws DomainError if the ordering
/// does not hold or u is outside (0, sum(d)].
double ordered_threshold_price(const GameInstance& game);

struct SeReport {
  bool ok = true;
  double equilibrium_revenue = 0.0;
  double best_deviation_revenue = 0.0;   // best admissible sampled price
  double best_deviation_price = 0.0;
  std::vector<std::string> violations;
};

/// Samples the leader and follower conditions of a Stackelberg equilibrium.
///
/// Leader: at `samples` random prices in [min saturation / 2, max cutoff],
/// every price whose re-best-responded demand fits within u must not earn
/// more than the equilibrium revenue. Follower: for each peer, `samples`
/// random bandwidths in [0, d] plus +-1% of d around its share must not
/// raise its utility.
SeReport verify_se(const GameInstance& game, const Equilibrium& eq, std::size_t samples,
                   std::uint64_t seed = 0x5eed);

}  // namespace bwgame
