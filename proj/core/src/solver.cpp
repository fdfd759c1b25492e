#include "bwgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bwgame/demand_curve.hpp"
#include "bwgame/errors.hpp"

namespace bwgame {
namespace {

// A breakpoint's demand evaluated through two different closed forms can
// differ by a few ulps; treat that as a tie so plateaus resolve upward.
constexpr double kBracketSlack = 1e-12;

// Price posted when no peer holds credits: every threshold is zero.
constexpr double kNoBuyerPrice = 1.0;

}  // namespace

Equilibrium solve(const GameInstance& game, const SolverConfig& config) {
  if (!(config.residual_tolerance > 0.0)) {
    throw DomainError("solver: residual tolerance must be > 0");
  }
  const DemandCurve curve(game);
  const double u = game.uploader_capacity();

  if (curve.breakpoints().empty()) {
    return make_equilibrium(game, kNoBuyerPrice, RegionLabel::Insufficient);
  }
  if (game.purchasable_capacity() <= u) {
    return make_equilibrium(game, curve.breakpoints().front(), RegionLabel::Saturated);
  }

  const auto& segments = curve.segments();
  std::optional<double> price;
  for (std::size_t k = segments.size(); k-- > 1;) {
    const auto& seg = segments[k];
    // Flat segments never bracket u from the top: the segment above a
    // plateau at level u already reaches u at its lower end.
    if (seg.active.empty()) continue;
    if (seg.demand_at(seg.lower) >= u * (1.0 - kBracketSlack)) {
      const double inverted = seg.price_for(u);
      const double span = seg.upper - seg.lower;
      if (inverted < seg.lower - 1e-9 * span || inverted > seg.upper + 1e-9 * span) {
        throw std::logic_error("solver: segment inversion left its own interval");
      }
      price = std::clamp(inverted, seg.lower, seg.upper);
      break;
    }
  }
  if (!price) {
    throw std::logic_error("solver: no demand segment brackets the uploader capacity");
  }

  Equilibrium eq = make_equilibrium(game, *price);
  const double residual = std::abs(eq.total_bandwidth() - u);
  if (residual > config.residual_tolerance * u + 1e-12 * game.total_capacity()) {
    std::ostringstream msg;
    msg << "solver: residual " << residual << " exceeds tolerance at price " << *price;
    throw std::logic_error(msg.str());
  }
  return eq;
}

double two_peer_price(const PeerProfile& p1, const PeerProfile& p2, double uploader_capacity) {
  const double h1 = p1.priority();
  const double h2 = p2.priority();
  if (!(h1 > h2)) throw DomainError("two_peer_price: requires c1/d1 > c2/d2");
  const double u = uploader_capacity;
  if (!(u > 0.0)) throw DomainError("two_peer_price: uploader capacity must be > 0");

  const double c1 = p1.credits(), d1 = p1.capacity();
  const double c2 = p2.credits(), d2 = p2.capacity();
  if (u > d1 + d2 || c2 == 0.0) {
    return solve(GameInstance(u, {p1, p2})).price;
  }

  if (h2 > h1 / 2.0) {
    // Peer 2 prices out before peer 1 saturates.
    if (u <= c1 / h2 - d1) return c1 / ((u + d1) * kLn2);
    if (u <= c2 / (h1 / 2.0) + d1 - d2) return (c1 + c2) / ((u + d1 + d2) * kLn2);
    return c2 / ((u - d1 + d2) * kLn2);
  }
  // Peer 1 saturates before peer 2 buys anything; the flat stretch between
  // them is never optimal.
  if (u <= d1) return c1 / ((u + d1) * kLn2);
  return c2 / ((u - d1 + d2) * kLn2);
}

std::optional<double> balance_region_price(const GameInstance& game) {
  double sum_c = 0.0, sum_d = 0.0;
  double min_h = std::numeric_limits<double>::infinity();
  double max_h = 0.0;
  for (const auto& p : game.peers()) {
    sum_c += p.credits();
    sum_d += p.capacity();
    min_h = std::min(min_h, p.priority());
    max_h = std::max(max_h, p.priority());
  }
  if (!(sum_c > 0.0) || min_h < max_h / 2.0) return std::nullopt;

  const double u = game.uploader_capacity();
  const double lower = sum_c / min_h - sum_d;
  const double upper = 2.0 * sum_c / max_h - sum_d;
  if (u > lower && u <= upper) return sum_c / ((u + sum_d) * kLn2);
  return std::nullopt;
}

double ordered_threshold_price(const GameInstance& game) {
  const auto peers = game.peers();
  const std::size_t n = peers.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return peers[a].priority() > peers[b].priority(); });

  std::vector<double> h(n), c(n), d(n);
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = peers[order[k]].priority();
    c[k] = peers[order[k]].credits();
    d[k] = peers[order[k]].capacity();
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(h[k] > h[k + 1])) throw DomainError("ordered_threshold_price: priorities must be distinct");
  }
  if (!(h[n - 1] > h[0] / 2.0)) {
    throw DomainError("ordered_threshold_price: requires min(h) > max(h) / 2");
  }
  const double u = game.uploader_capacity();
  const double total_d = game.total_capacity();
  if (!(u <= total_d)) throw DomainError("ordered_threshold_price: requires u <= sum(d)");

  // prefix sums over the first K peers, K = 0..n
  std::vector<double> pc(n + 1, 0.0), pd(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    pc[k + 1] = pc[k] + c[k];
    pd[k + 1] = pd[k] + d[k];
  }
  const double total_c = pc[n];

  // 1-based K as in the region table.
  auto T = [&](std::size_t K) { return pc[K] / h[K - 1] - pd[K]; };
  auto R = [&](std::size_t K) {
    return 2.0 * (total_c - pc[K - 1]) / h[K - 1] + pd[K - 1] - (total_d - pd[K - 1]);
  };
  auto q = [&](std::size_t K) { return pc[K] / ((u + pd[K]) * kLn2); };
  auto p = [&](std::size_t K) {
    return (total_c - pc[K - 1]) / ((u - pd[K - 1] + (total_d - pd[K - 1])) * kLn2);
  };

  for (std::size_t K = 1; K < n; ++K) {
    if (u <= T(K + 1)) return q(K);
  }
  if (u <= R(1)) return q(n);
  for (std::size_t K = 2; K < n; ++K) {
    if (u <= R(K)) return p(K);
  }
  return p(n);
}

SeReport verify_se(const GameInstance& game, const Equilibrium& eq, std::size_t samples, std::uint64_t seed) {
  SeReport report;
  const auto peers = game.peers();
  const double u = game.uploader_capacity();
  auto violate = [&](std::string what) {
    report.ok = false;
    if (report.violations.size() < 16) report.violations.push_back(std::move(what));
  };

  if (eq.shares.size() != peers.size()) {
    violate("equilibrium does not cover the game's peers");
    return report;
  }
  const double revenue = eq.price * eq.total_bandwidth();
  report.equilibrium_revenue = revenue;
  if (eq.total_bandwidth() > u * (1.0 + 1e-9)) {
    violate("allocation exceeds uploader capacity");
  }
  if (samples == 0) return report;

  std::mt19937_64 rng(seed);

  // Leader: admissible price deviations.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& p : peers) {
    if (p.credits() <= 0.0) continue;
    lo = std::min(lo, p.saturation_price() / 2.0);
    hi = std::max(hi, p.cutoff_price());
  }
  const double revenue_tol = 1e-9 * std::max(1.0, revenue);
  if (hi > 0.0) {
    std::uniform_real_distribution<double> price_dist(lo, hi);
    for (std::size_t s = 0; s < samples; ++s) {
      const double mu = price_dist(rng);
      const double demand = aggregate_demand(game, mu);
      if (demand > u * (1.0 + 1e-12)) continue;
      const double r = mu * demand;
      if (r > report.best_deviation_revenue) {
        report.best_deviation_revenue = r;
        report.best_deviation_price = mu;
      }
      if (r > revenue + revenue_tol) {
        std::ostringstream msg;
        msg << "price " << mu << " earns " << r << " > equilibrium revenue " << revenue;
        violate(msg.str());
      }
    }
  }

  // Followers: bandwidth deviations at the posted price.
  for (std::size_t i = 0; i < peers.size(); ++i) {
    const auto& peer = peers[i];
    const double x_star = eq.shares[i].bandwidth;
    if (!(x_star >= 0.0 && x_star <= peer.capacity())) {
      violate("peer '" + peer.id().str() + "' share outside [0, capacity]");
      continue;
    }
    const double base = downloader_utility(peer, x_star, eq.price);
    const double tol = 1e-9 * std::max({1.0, std::abs(base), peer.credits()});
    std::uniform_real_distribution<double> x_dist(0.0, peer.capacity());
    auto probe = [&](double x) {
      x = std::clamp(x, 0.0, peer.capacity());
      const double v = downloader_utility(peer, x, eq.price);
      if (v > base + tol) {
        std::ostringstream msg;
        msg << "peer '" << peer.id().str() << "' gains by buying " << x << " instead of " << x_star;
        violate(msg.str());
      }
    };
    probe(x_star + 0.01 * peer.capacity());
    probe(x_star - 0.01 * peer.capacity());
    for (std::size_t s = 0; s < samples; ++s) probe(x_dist(rng));
  }
  return report;
}

}  // namespace bwgame
