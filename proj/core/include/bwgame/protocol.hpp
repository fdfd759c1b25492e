#pragma once

// Message-passing realizations of the game between one uploader and its
// downloaders.
//
// Direct: downloaders send (c, d); the uploader solves for the equilibrium
// price, broadcasts it once, checks every reply against the best response
// and grants the allocation.
//
// Bargaining: the uploader starts at a price nobody buys at and lowers it by
// a fixed step each round, using only the total demand reported back, until
// demand is within epsilon of its capacity.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bwgame/errors.hpp"
#include "bwgame/model.hpp"

namespace bwgame {

struct Request {
  double credits = 0.0;
  double capacity = 0.0;
};
struct PriceBroadcast {
  double price = 0.0;
};
struct DemandReply {
  double bandwidth = 0.0;
};
struct AllocationGrant {
  double bandwidth = 0.0;
};
struct StreamStart {};

using Payload = std::variant<Request, PriceBroadcast, DemandReply, AllocationGrant, StreamStart>;

struct Message {
  PeerId sender;
  PeerId receiver;
  std::uint64_t sequence = 0;  // per sender, starting at 1
  Payload payload;
};

std::string_view payload_name(const Payload& payload) noexcept;

/// Lets a test make a downloader lie about its demand. Receives the honest
/// best response and returns the reported value.
using MisreportHook = std::function<double(const PeerProfile& peer, double price, double honest)>;

struct ProtocolOptions {
  PeerId uploader_id{"uploader"};
  /// Shuffles delivery order within each round. Results must not depend on it.
  std::uint64_t delivery_seed = 0;
  MisreportHook misreport;
};

struct BargainConfig {
  /// Defaults to the highest cutoff price of the game.
  std::optional<double> initial_price;
  double step = 0.01;
  double epsilon = 0.001;
  std::size_t max_rounds = 1'000'000;
  /// On overshoot, resume from the last under-demand price with step / 10.
  bool refine = true;
  std::size_t max_refinements = 6;
};

/// Throws DomainError if the config is unusable for this game. The initial
/// price may sit up to 1e-6 (relative) below the highest cutoff so that
/// published six-digit values are accepted.
double resolve_initial_price(const GameInstance& game, const BargainConfig& config);

enum class ProtocolKind { Direct, Bargaining };

struct TraceRound {
  std::size_t round = 0;  // 1-based
  double price = 0.0;
  std::vector<double> demands;  // game order
  double total_demand = 0.0;
  bool overshoot = false;  // demand exceeded u + epsilon; price was withdrawn
};

enum class BargainStatus { Converged, BandUnreachable };

struct ProtocolTrace {
  ProtocolKind kind = ProtocolKind::Direct;
  std::vector<PeerId> peer_ids;
  std::vector<TraceRound> rounds;
  Equilibrium terminal;
  std::optional<BargainConfig> config;  // bargaining only
  double initial_price = 0.0;           // bargaining only, resolved
  BargainStatus status = BargainStatus::Converged;
  std::size_t refinements = 0;
  std::vector<std::string> diagnostics;

  /// Rounds whose price was not withdrawn.
  std::vector<const TraceRound*> accepted_rounds() const;
};

/// Bargaining stopped by max_rounds or a vanishing price; carries the trace
/// up to the failure.
class BargainingFailure : public ConvergenceError {
 public:
  BargainingFailure(const std::string& what, ProtocolTrace trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const ProtocolTrace& trace() const noexcept { return trace_; }

 private:
  ProtocolTrace trace_;
};

struct ProtocolResult {
  Equilibrium equilibrium;
  ProtocolTrace trace;
  std::vector<Message> messages;  // delivery log, in delivery order
};

/// One round of the direct protocol. Throws ProtocolAbort when a reply
/// disagrees with the best response or nobody demands bandwidth.
ProtocolResult run_direct(const GameInstance& game, const ProtocolOptions& options = {});

/// Iterative price descent. Throws ConvergenceError when max_rounds is hit
/// or the price would reach zero. When the epsilon band cannot be hit (an
/// overshoot with refinement disabled or exhausted) the run stops at the last
/// under-demand price with status BandUnreachable and a diagnostic.
ProtocolResult run_bargaining(const GameInstance& game, const BargainConfig& config,
                              const ProtocolOptions& options = {});

/// Recomputes every reply and every price step of a trace. True iff all of
/// them match bit for bit.
bool replay(const ProtocolTrace& trace, const GameInstance& game);

/// CSV: round,price,peer_id,demand,total_demand, one row per peer and round,
/// then a summary row "final,<price>,*,<allocated>,<allocated>".
void write_trace_csv(std::ostream& out, const ProtocolTrace& trace);

}  // namespace bwgame
