#include "bwgame/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "bwgame/errors.hpp"
#include "bwgame/solver.hpp"

namespace bwgame {

void Ledger::open(const PeerId& id, double balance) {
  if (!std::isfinite(balance) || balance < 0.0) {
    throw DomainError("ledger: opening balance of '" + id.str() + "' must be finite and >= 0");
  }
  balances_.try_emplace(id, balance);
}

double Ledger::balance(const PeerId& id) const {
  const auto it = balances_.find(id);
  if (it == balances_.end()) throw DomainError("ledger: unknown account '" + id.str() + "'");
  return it->second;
}

double Ledger::total() const noexcept {
  double t = 0.0;
  for (const auto& [id, b] : balances_) t += b;
  return t;
}

double Ledger::transfer(double time, const PeerId& payer, const PeerId& payee, double amount) {
  if (!(amount > 0.0)) return 0.0;
  auto from = balances_.find(payer);
  if (from == balances_.end()) throw DomainError("ledger: unknown payer '" + payer.str() + "'");
  auto to = balances_.try_emplace(payee, 0.0).first;
  double paid = amount;
  if (paid >= from->second) {
    if (paid > from->second) exhausted_.insert(payer);
    paid = from->second;
    from->second = 0.0;
  } else {
    from->second -= paid;
  }
  to->second += paid;
  if (paid > 0.0) log_.push_back({time, payer, payee, paid});
  return paid;
}

Ledger apply_transaction(Ledger ledger, const Equilibrium& eq, const PeerId& uploader, double time) {
  if (!ledger.has(uploader)) ledger.open(uploader, 0.0);
  for (const auto& share : eq.shares) {
    if (share.bandwidth > 0.0) ledger.transfer(time, share.id, uploader, eq.price * share.bandwidth);
  }
  return ledger;
}

ChurnReport churn_check(const std::optional<Equilibrium>& before, const std::optional<Equilibrium>& after,
                        ChurnKind kind, const PeerId& peer) {
  ChurnReport r;
  r.kind = kind;
  r.peer = peer;
  r.old_revenue = before ? before->revenue : 0.0;
  r.new_revenue = after ? after->revenue : 0.0;
  const double tol = 1e-9 * std::max(1.0, r.old_revenue);
  if (kind == ChurnKind::Leave) {
    if (before) {
      if (const PeerShare* s = before->find(peer)) r.departed_contribution = before->price * s->bandwidth;
    }
    r.holds = r.new_revenue >= r.old_revenue - r.departed_contribution - tol;
  } else {
    r.holds = r.new_revenue > r.old_revenue + tol;
  }
  return r;
}

void validate_scenario(double uploader_capacity, const std::vector<ScenarioEvent>& events,
                       const SimulationOptions& options) {
  if (!std::isfinite(uploader_capacity) || uploader_capacity <= 0.0) {
    throw ValidationError("scenario: uploader_capacity must be a finite value > 0");
  }
  std::unordered_set<PeerId> present;
  double last = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << "scenario event " << i << " (t=" << e.time << "): " << what;
      throw ValidationError(msg.str());
    };
    if (!std::isfinite(e.time) || e.time < 0.0) fail("time must be finite and >= 0");
    if (e.time < last) fail("events must be sorted by time");
    last = e.time;
    if (const auto* join = std::get_if<Join>(&e.kind)) {
      if (join->peer.id() == options.uploader_id) fail("peer id collides with the uploader id");
      if (!present.insert(join->peer.id()).second) fail("peer '" + join->peer.id().str() + "' is already present");
    } else if (const auto* leave = std::get_if<Leave>(&e.kind)) {
      if (present.erase(leave->peer) == 0) fail("peer '" + leave->peer.str() + "' is not present");
    } else if (const auto* settle = std::get_if<Settle>(&e.kind)) {
      if (!std::isfinite(settle->duration) || settle->duration < 0.0) fail("settle duration must be >= 0");
    }
  }
  if (options.end_time && !(events.empty() || *options.end_time >= last)) {
    throw ValidationError("scenario: end_time precedes the last event");
  }
}

SimulationResult run_scenario(double uploader_capacity, const std::vector<ScenarioEvent>& events,
                              const SimulationOptions& options) {
  validate_scenario(uploader_capacity, events, options);

  SimulationResult result;
  result.ledger.open(options.uploader_id, options.uploader_credits);
  auto& epochs = result.timeline.epochs;

  std::vector<PeerProfile> present;  // join order
  std::optional<Equilibrium> current;
  std::vector<std::pair<ChurnKind, PeerId>> pending_changes;

  auto resolve = [&](double t) {
    if (!epochs.empty()) epochs.back().end = t;
    std::vector<PeerProfile> peers;
    peers.reserve(present.size());
    for (const auto& p : present) peers.push_back(p.with_credits(result.ledger.balance(p.id())));
    std::optional<Equilibrium> next;
    if (!peers.empty()) next = solve(GameInstance(uploader_capacity, peers));
    if (pending_changes.size() == 1) {
      ChurnReport r = churn_check(current, next, pending_changes.front().first, pending_changes.front().second);
      r.time = t;
      result.churn.push_back(std::move(r));
    }
    pending_changes.clear();
    epochs.push_back({t, t, std::move(peers), next});
    current = std::move(next);
  };

  std::size_t i = 0;
  while (i < events.size()) {
    const double t = events[i].time;
    for (; i < events.size() && events[i].time == t; ++i) {
      const auto& kind = events[i].kind;
      if (const auto* join = std::get_if<Join>(&kind)) {
        result.ledger.open(join->peer.id(), join->peer.credits());
        present.push_back(join->peer);
        pending_changes.emplace_back(ChurnKind::Join, join->peer.id());
      } else if (const auto* leave = std::get_if<Leave>(&kind)) {
        std::erase_if(present, [&](const PeerProfile& p) { return p.id() == leave->peer; });
        pending_changes.emplace_back(ChurnKind::Leave, leave->peer);
      } else {
        if (!pending_changes.empty()) resolve(t);
        if (current) result.ledger = apply_transaction(std::move(result.ledger), *current, options.uploader_id, t);
      }
    }
    if (!pending_changes.empty()) resolve(t);
  }
  if (!epochs.empty()) epochs.back().end = options.end_time.value_or(events.back().time);
  return result;
}

}  // namespace bwgame
