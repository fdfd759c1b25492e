#pragma once

// Discrete-event session of one uploader under peer churn. Every join or
// leave re-solves the game over the peers present (using their current
// ledger balances as credits) and opens a new epoch; settle events charge
// the equilibrium in force.

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "bwgame/model.hpp"

namespace bwgame {

struct Join {
  PeerProfile peer;
};
struct Leave {
  PeerId peer;
};
/// One settlement of the equilibrium in force: each downloader pays
/// price * x once. The duration is recorded but does not scale the charge.
struct Settle {
  double duration = 0.0;
};

struct ScenarioEvent {
  double time = 0.0;
  std::variant<Join, Leave, Settle> kind;
};

struct Transaction {
  double time = 0.0;
  PeerId payer;
  PeerId payee;
  double amount = 0.0;
};

/// Credit balances of every account that has appeared, plus the transfer log.
class Ledger {
 public:
  /// Opens an account; an existing account keeps its balance.
  void open(const PeerId& id, double balance);
  bool has(const PeerId& id) const { return balances_.contains(id); }
  double balance(const PeerId& id) const;
  const std::map<PeerId, double>& balances() const noexcept { return balances_; }
  const std::vector<Transaction>& log() const noexcept { return log_; }
  const std::set<PeerId>& exhausted() const noexcept { return exhausted_; }
  bool is_exhausted(const PeerId& id) const { return exhausted_.contains(id); }

  /// Sum of balances in id order.
  double total() const noexcept;

  /// Moves `amount` from payer to payee and logs it. A payer short of funds
  /// pays its whole balance and is flagged exhausted. Returns the amount
  /// actually moved.
  double transfer(double time, const PeerId& payer, const PeerId& payee, double amount);

 private:
  std::map<PeerId, double> balances_;
  std::vector<Transaction> log_;
  std::set<PeerId> exhausted_;
};

/// Charges every downloader price * x and credits the uploader. Zero shares
/// leave balances untouched.
Ledger apply_transaction(Ledger ledger, const Equilibrium& eq, const PeerId& uploader, double time);

struct Epoch {
  double start = 0.0;
  double end = 0.0;
  std::vector<PeerProfile> peers;          // present peers, credits as solved
  std::optional<Equilibrium> equilibrium;  // absent when nobody is present
};

struct TimelineRecord {
  std::vector<Epoch> epochs;
};

enum class ChurnKind { Join, Leave };

struct ChurnReport {
  ChurnKind kind = ChurnKind::Join;
  PeerId peer;
  double time = 0.0;
  double old_revenue = 0.0;
  double new_revenue = 0.0;
  double departed_contribution = 0.0;  // leave only
  /// Leave: new revenue >= old revenue - departed contribution.
  /// Join: new revenue strictly above old revenue.
  bool holds = false;
};

/// Compares the equilibria before and after one membership change.
/// Revenue comparisons allow 1e-9 relative slack.
ChurnReport churn_check(const std::optional<Equilibrium>& before, const std::optional<Equilibrium>& after,
                        ChurnKind kind, const PeerId& peer);

struct SimulationOptions {
  PeerId uploader_id{"uploader"};
  double uploader_credits = 0.0;
  /// Close of the last epoch; defaults to the last event time.
  std::optional<double> end_time;
};

struct SimulationResult {
  TimelineRecord timeline;
  Ledger ledger;
  std::vector<ChurnReport> churn;  // one per single-change event batch
};

/// Checks ordering and membership before anything runs; throws
/// ValidationError on the first problem.
void validate_scenario(double uploader_capacity, const std::vector<ScenarioEvent>& events,
                       const SimulationOptions& options = {});

/// Events sharing a timestamp are applied together and produce one epoch.
SimulationResult run_scenario(double uploader_capacity, const std::vector<ScenarioEvent>& events,
                              const SimulationOptions& options = {});

}  // namespace bwgame
