#include "bwgame/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "bwgame/errors.hpp"

namespace bwgame {

PeerProfile::PeerProfile(PeerId id, double credits, double capacity)
    : id_(std::move(id)), credits_(credits), capacity_(capacity) {
  if (id_.empty()) throw DomainError("peer id must not be empty");
  if (!std::isfinite(credits_) || credits_ < 0.0) {
    throw DomainError("peer '" + id_.str() + "': credits must be a finite value >= 0");
  }
  if (!std::isfinite(capacity_) || capacity_ <= 0.0) {
    throw DomainError("peer '" + id_.str() + "': capacity must be a finite value > 0");
  }
  priority_ = credits_ / capacity_;
  // Computed from h rather than c/(d ln2) so that equal ratios give equal
  // thresholds bit for bit.
  cutoff_price_ = priority_ / kLn2;
  saturation_price_ = 0.5 * cutoff_price_;
}

GameInstance::GameInstance(double uploader_capacity, std::vector<PeerProfile> peers)
    : uploader_capacity_(uploader_capacity), peers_(std::move(peers)) {
  if (!std::isfinite(uploader_capacity_) || uploader_capacity_ <= 0.0) {
    throw DomainError("uploader capacity must be a finite value > 0");
  }
  if (peers_.empty()) {
    throw DomainError("game instance needs at least one peer");
  }
  std::unordered_set<PeerId> seen;
  for (const auto& p : peers_) {
    if (!seen.insert(p.id()).second) {
      throw DomainError("duplicate peer id '" + p.id().str() + "'");
    }
    total_capacity_ += p.capacity();
    if (p.credits() > 0.0) purchasable_capacity_ += p.capacity();
  }
}

std::optional<std::size_t> GameInstance::index_of(const PeerId& id) const {
  for (std::size_t i = 0; i < peers_.size(); ++i) {
    if (peers_[i].id() == id) return i;
  }
  return std::nullopt;
}

std::string_view to_string(RegionLabel label) noexcept {
  switch (label) {
    case RegionLabel::Insufficient: return "Insufficient";
    case RegionLabel::Balance: return "Balance";
    case RegionLabel::Sufficient: return "Sufficient";
    case RegionLabel::Saturated: return "Saturated";
  }
  return "Unknown";
}

double Equilibrium::total_bandwidth() const noexcept {
  double total = 0.0;
  for (const auto& s : shares) total += s.bandwidth;
  return total;
}

std::vector<double> Equilibrium::allocation() const {
  std::vector<double> x;
  x.reserve(shares.size());
  for (const auto& s : shares) x.push_back(s.bandwidth);
  return x;
}

const PeerShare* Equilibrium::find(const PeerId& id) const noexcept {
  auto it = std::find_if(shares.begin(), shares.end(), [&](const PeerShare& s) { return s.id == id; });
  return it == shares.end() ? nullptr : &*it;
}

double best_response(const PeerProfile& peer, double price) {
  if (!(price > 0.0)) {
    throw DomainError("best_response: price must be > 0");
  }
  if (price <= peer.saturation_price()) return peer.capacity();
  if (price > peer.cutoff_price()) return 0.0;
  const double x = peer.credits() / (price * kLn2) - peer.capacity();
  return std::clamp(x, 0.0, peer.capacity());
}

double satisfaction(const PeerProfile& peer, double bandwidth) {
  if (!(bandwidth >= 0.0 && bandwidth <= peer.capacity())) {
    throw DomainError("satisfaction: bandwidth must lie in [0, capacity]");
  }
  return std::log2(1.0 + bandwidth / peer.capacity());
}

double downloader_utility(const PeerProfile& peer, double bandwidth, double price) {
  if (!(price > 0.0)) {
    throw DomainError("downloader_utility: price must be > 0");
  }
  return peer.credits() * satisfaction(peer, bandwidth) - price * bandwidth;
}

double aggregate_demand(const GameInstance& game, double price) {
  double total = 0.0;
  for (const auto& p : game.peers()) total += best_response(p, price);
  return total;
}

RegionLabel classify_region(const GameInstance& game, std::span<const double> allocation) {
  const auto peers = game.peers();
  std::size_t zero = 0;
  std::size_t full = 0;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    if (allocation[i] == 0.0) ++zero;
    if (allocation[i] == peers[i].capacity()) ++full;
  }
  if (full == peers.size()) return RegionLabel::Saturated;
  if (zero > 0) return RegionLabel::Insufficient;
  if (full > 0) return RegionLabel::Sufficient;
  return RegionLabel::Balance;
}

Equilibrium make_equilibrium(const GameInstance& game, double price, std::optional<RegionLabel> region) {
  Equilibrium eq;
  eq.price = price;
  eq.shares.reserve(game.size());
  std::vector<double> x;
  x.reserve(game.size());
  for (const auto& p : game.peers()) {
    const double b = best_response(p, price);
    x.push_back(b);
    eq.shares.push_back({p.id(), b, downloader_utility(p, b, price)});
  }
  eq.revenue = price * eq.total_bandwidth();
  eq.region = region ? *region : classify_region(game, x);
  return eq;
}

}  // namespace bwgame
