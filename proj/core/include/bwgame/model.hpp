#pragma once

// Domain types of the single-uploader bandwidth pricing game and the
// downloader side of it: satisfaction, utility and the best response to a
// posted uniform price.

#include <compare>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bwgame {

/// Natural log of two. Every threshold in the model is a multiple of 1/ln2.
inline constexpr double kLn2 = std::numbers::ln2;

/// Opaque peer identifier.
class PeerId {
 public:
  PeerId() = default;
  explicit PeerId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const PeerId&, const PeerId&) = default;
  friend bool operator==(const PeerId&, const PeerId&) = default;

 private:
  std::string value_;
};

/// A downloader: credit balance c and download capacity d.
///
/// The two price thresholds of the best response are computed once here and
/// reused everywhere, so that any recomputation of an allocation from the
/// same price is bit-identical.
class PeerProfile {
 public:
  /// Throws DomainError unless credits >= 0 and capacity > 0 (both finite).
  PeerProfile(PeerId id, double credits, double capacity);

  const PeerId& id() const noexcept { return id_; }
  double credits() const noexcept { return credits_; }
  double capacity() const noexcept { return capacity_; }

  /// h = c / d, credits per unit of capacity.
  double priority() const noexcept { return priority_; }

  /// c / (2 d ln2): at or below this price the peer buys its full capacity.
  double saturation_price() const noexcept { return saturation_price_; }

  /// c / (d ln2): above this price the peer buys nothing.
  double cutoff_price() const noexcept { return cutoff_price_; }

  PeerProfile with_credits(double credits) const { return {id_, credits, capacity_}; }

 private:
  PeerId id_;
  double credits_;
  double capacity_;
  double priority_;
  double saturation_price_;
  double cutoff_price_;
};

/// One uploader with capacity u and the peers requesting from it.
class GameInstance {
 public:
  /// Throws DomainError if peers is empty, ids repeat, or capacity is not
  /// a positive finite number.
  GameInstance(double uploader_capacity, std::vector<PeerProfile> peers);

  double uploader_capacity() const noexcept { return uploader_capacity_; }
  std::span<const PeerProfile> peers() const noexcept { return peers_; }
  std::size_t size() const noexcept { return peers_.size(); }

  double total_capacity() const noexcept { return total_capacity_; }

  /// Sum of d over peers with positive credits, i.e. the most any price can sell.
  double purchasable_capacity() const noexcept { return purchasable_capacity_; }

  /// Sum of d exceeds u.
  bool oversubscribed() const noexcept { return total_capacity_ > uploader_capacity_; }

  std::optional<std::size_t> index_of(const PeerId& id) const;

  GameInstance with_capacity(double uploader_capacity) const { return {uploader_capacity, peers_}; }

 private:
  double uploader_capacity_;
  std::vector<PeerProfile> peers_;
  double total_capacity_ = 0.0;
  double purchasable_capacity_ = 0.0;
};

/// Capacity regime of an equilibrium.
enum class RegionLabel {
  Insufficient,  // at least one peer is priced out
  Balance,       // everybody buys, nobody at full capacity
  Sufficient,    // everybody buys, someone at full capacity
  Saturated,     // u covers every purchasable capacity
};

std::string_view to_string(RegionLabel label) noexcept;

struct PeerShare {
  PeerId id;
  double bandwidth = 0.0;
  double utility = 0.0;
};

/// Uniform price with the allocation and payoffs it induces.
struct Equilibrium {
  double price = 0.0;
  std::vector<PeerShare> shares;  // same order as GameInstance::peers()
  double revenue = 0.0;
  RegionLabel region = RegionLabel::Insufficient;

  double total_bandwidth() const noexcept;
  std::vector<double> allocation() const;
  const PeerShare* find(const PeerId& id) const noexcept;
};

/// Utility-maximizing bandwidth for one downloader at a posted price.
/// Throws DomainError for a non-positive price.
double best_response(const PeerProfile& peer, double price);

/// log2(1 + x / d). Throws DomainError for x outside [0, d].
double satisfaction(const PeerProfile& peer, double bandwidth);

/// c * satisfaction - price * x.
double downloader_utility(const PeerProfile& peer, double bandwidth, double price);

/// Total bandwidth requested by all peers at a price.
double aggregate_demand(const GameInstance& game, double price);

/// Everyone best-responds to `price`; the region is classified from the
/// resulting allocation unless the caller already knows it.
Equilibrium make_equilibrium(const GameInstance& game, double price,
                             std::optional<RegionLabel> region = std::nullopt);

/// Classifies an allocation by how many peers sit at zero or full capacity.
RegionLabel classify_region(const GameInstance& game, std::span<const double> allocation);

}  // namespace bwgame

template <>
struct std::hash<bwgame::PeerId> {
  std::size_t operator()(const bwgame::PeerId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
