#include "bwgame/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "bwgame/errors.hpp"
#include "bwgame/io.hpp"
#include "bwgame/solver.hpp"

namespace bwgame {

std::string_view payload_name(const Payload& payload) noexcept {
  struct Namer {
    std::string_view operator()(const Request&) const { return "Request"; }
    std::string_view operator()(const PriceBroadcast&) const { return "PriceBroadcast"; }
    std::string_view operator()(const DemandReply&) const { return "DemandReply"; }
    std::string_view operator()(const AllocationGrant&) const { return "AllocationGrant"; }
    std::string_view operator()(const StreamStart&) const { return "StreamStart"; }
  };
  return std::visit(Namer{}, payload);
}

std::vector<const TraceRound*> ProtocolTrace::accepted_rounds() const {
  std::vector<const TraceRound*> out;
  for (const auto& r : rounds) {
    if (!r.overshoot) out.push_back(&r);
  }
  return out;
}

double resolve_initial_price(const GameInstance& game, const BargainConfig& config) {
  double highest_cutoff = 0.0;
  for (const auto& p : game.peers()) highest_cutoff = std::max(highest_cutoff, p.cutoff_price());
  if (!(config.step > 0.0)) throw DomainError("bargaining: step must be > 0");
  if (!(config.epsilon > 0.0)) throw DomainError("bargaining: epsilon must be > 0");
  if (config.max_rounds == 0) throw DomainError("bargaining: max_rounds must be > 0");
  if (!config.initial_price) {
    if (!(highest_cutoff > 0.0)) throw DomainError("bargaining: no peer holds credits");
    return highest_cutoff;
  }
  const double mu0 = *config.initial_price;
  if (!(mu0 > 0.0) || mu0 < highest_cutoff * (1.0 - 1e-6)) {
    std::ostringstream msg;
    msg << "bargaining: initial price " << mu0 << " is below the highest cutoff " << highest_cutoff;
    throw DomainError(msg.str());
  }
  return mu0;
}

namespace {

// Deterministic in-process transport. Each call to pump() delivers exactly
// the messages that were pending when it started, in seeded random order;
// anything posted by the handlers waits for the next pump.
class MessageBus {
 public:
  explicit MessageBus(std::uint64_t seed) : rng_(seed) {}

  void post(Message m) { pending_.push_back(std::move(m)); }

  /// Delivers everything pending. Each sender's messages keep their send
  /// order; the interleaving across senders is drawn from the seed.
  template <class Handler>
  void pump(Handler&& handler) {
    std::vector<Message> batch;
    batch.swap(pending_);
    std::map<PeerId, std::deque<std::size_t>> queues;
    std::vector<const PeerId*> slots;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto& q = queues[batch[i].sender];
      q.push_back(i);
    }
    for (auto& [sender, q] : queues) slots.insert(slots.end(), q.size(), &sender);
    std::shuffle(slots.begin(), slots.end(), rng_);
    for (const PeerId* sender : slots) {
      auto& q = queues[*sender];
      Message& m = batch[q.front()];
      q.pop_front();
      log_.push_back(m);
      handler(m);
    }
  }

  std::vector<Message> take_log() { return std::move(log_); }

 private:
  std::mt19937_64 rng_;
  std::vector<Message> pending_;
  std::vector<Message> log_;
};

class Downloader {
 public:
  Downloader(PeerProfile profile, PeerId uploader, const MisreportHook* hook)
      : profile_(std::move(profile)), uploader_(std::move(uploader)), hook_(hook) {}

  const PeerId& id() const { return profile_.id(); }

  void start(MessageBus& bus) { send(bus, Request{profile_.credits(), profile_.capacity()}); }

  void receive(const Message& m, MessageBus& bus) {
    if (const auto* price = std::get_if<PriceBroadcast>(&m.payload)) {
      double x = best_response(profile_, price->price);
      if (hook_ && *hook_) x = (*hook_)(profile_, price->price, x);
      send(bus, DemandReply{x});
    } else if (const auto* grant = std::get_if<AllocationGrant>(&m.payload)) {
      granted_ = grant->bandwidth;
    } else if (std::holds_alternative<StreamStart>(m.payload)) {
      streaming_ = true;
    }
  }

 private:
  void send(MessageBus& bus, Payload p) { bus.post({profile_.id(), uploader_, ++sequence_, std::move(p)}); }

  PeerProfile profile_;
  PeerId uploader_;
  const MisreportHook* hook_;
  std::uint64_t sequence_ = 0;
  double granted_ = 0.0;
  bool streaming_ = false;
};

class Uploader {
 public:
  Uploader(PeerId id, std::vector<PeerId> roster)
      : id_(std::move(id)), roster_(std::move(roster)), requests_(roster_.size()), replies_(roster_.size()) {
    for (std::size_t i = 0; i < roster_.size(); ++i) slot_.emplace(roster_[i], i);
  }

  const PeerId& id() const { return id_; }

  void receive(const Message& m) {
    const auto it = slot_.find(m.sender);
    if (it == slot_.end()) throw ProtocolAbort("message from unknown peer '" + m.sender.str() + "'");
    if (const auto* req = std::get_if<Request>(&m.payload)) {
      requests_[it->second] = *req;
    } else if (const auto* reply = std::get_if<DemandReply>(&m.payload)) {
      if (!requests_[it->second]) throw ProtocolAbort("demand reply before request from '" + m.sender.str() + "'");
      replies_[it->second] = reply->bandwidth;
    }
  }

  // Rebuilds the game from the requests, in roster order.
  GameInstance requested_game(double capacity) const {
    std::vector<PeerProfile> peers;
    peers.reserve(roster_.size());
    for (std::size_t i = 0; i < roster_.size(); ++i) {
      if (!requests_[i]) throw ProtocolAbort("missing request from '" + roster_[i].str() + "'");
      peers.emplace_back(roster_[i], requests_[i]->credits, requests_[i]->capacity);
    }
    return GameInstance(capacity, std::move(peers));
  }

  void broadcast(double price, MessageBus& bus) {
    std::fill(replies_.begin(), replies_.end(), std::nullopt);
    for (const auto& peer : roster_) send(bus, peer, PriceBroadcast{price});
  }

  // Per-round barrier: every downloader must have replied.
  std::vector<double> collect() const {
    std::vector<double> out;
    out.reserve(roster_.size());
    for (std::size_t i = 0; i < roster_.size(); ++i) {
      if (!replies_[i]) throw ProtocolAbort("no demand reply from '" + roster_[i].str() + "'");
      out.push_back(*replies_[i]);
    }
    return out;
  }

  void grant(const Equilibrium& eq, MessageBus& bus) {
    for (std::size_t i = 0; i < roster_.size(); ++i) send(bus, roster_[i], AllocationGrant{eq.shares[i].bandwidth});
    for (const auto& peer : roster_) send(bus, peer, StreamStart{});
  }

 private:
  void send(MessageBus& bus, const PeerId& to, Payload p) { bus.post({id_, to, ++sequence_, std::move(p)}); }

  PeerId id_;
  std::vector<PeerId> roster_;
  std::unordered_map<PeerId, std::size_t> slot_;
  std::vector<std::optional<Request>> requests_;
  std::vector<std::optional<double>> replies_;
  std::uint64_t sequence_ = 0;
};

class Session {
 public:
  Session(const GameInstance& game, const ProtocolOptions& options)
      : bus_(options.delivery_seed), uploader_(options.uploader_id, ids_of(game)) {
    for (const auto& p : game.peers()) {
      if (p.id() == options.uploader_id) throw DomainError("peer id collides with the uploader id");
      index_.emplace(p.id(), downloaders_.size());
      downloaders_.emplace_back(p, options.uploader_id, &options.misreport);
    }
  }

  static std::vector<PeerId> ids_of(const GameInstance& game) {
    std::vector<PeerId> ids;
    for (const auto& p : game.peers()) ids.push_back(p.id());
    return ids;
  }

  void collect_requests() {
    for (auto& d : downloaders_) d.start(bus_);
    pump();
  }

  std::vector<double> price_round(double price) {
    uploader_.broadcast(price, bus_);
    pump();  // downloaders answer
    pump();  // uploader reads the answers
    return uploader_.collect();
  }

  void finish(const Equilibrium& eq) {
    uploader_.grant(eq, bus_);
    pump();
  }

  Uploader& uploader() { return uploader_; }
  std::vector<Message> take_log() { return bus_.take_log(); }

 private:
  void pump() {
    bus_.pump([this](const Message& m) {
      if (m.receiver == uploader_.id()) {
        uploader_.receive(m);
      } else {
        downloaders_.at(index_.at(m.receiver)).receive(m, bus_);
      }
    });
  }

  MessageBus bus_;
  Uploader uploader_;
  std::vector<Downloader> downloaders_;
  std::unordered_map<PeerId, std::size_t> index_;
};

double sum(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total;
}

// The uploader's price rule, shared by the live run and by replay so both
// perform identical arithmetic.
struct BargainState {
  double price = 0.0;
  double step = 0.0;
  std::optional<double> last_under;
  std::size_t refinements = 0;
};

enum class Verdict { Converged, Lower, Refine, Stop };

Verdict next_move(BargainState& s, double total, double capacity, const BargainConfig& cfg) {
  if (std::abs(total - capacity) < cfg.epsilon) return Verdict::Converged;
  if (total < capacity) {
    s.last_under = s.price;
    s.price -= s.step;
    return Verdict::Lower;
  }
  if (cfg.refine && s.refinements < cfg.max_refinements && s.last_under) {
    ++s.refinements;
    s.step /= 10.0;
    s.price = *s.last_under - s.step;
    return Verdict::Refine;
  }
  return Verdict::Stop;
}

}  // namespace

ProtocolResult run_direct(const GameInstance& game, const ProtocolOptions& options) {
  Session session(game, options);
  session.collect_requests();

  // Stage 2: the uploader prices from what it was told.
  const Equilibrium eq = solve(session.uploader().requested_game(game.uploader_capacity()));

  // Stage 3: one broadcast, replies checked against the best response.
  const auto demands = session.price_round(eq.price);
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (demands[i] != eq.shares[i].bandwidth) {
      std::ostringstream msg;
      msg << "peer '" << eq.shares[i].id.str() << "' replied " << demands[i] << " at price " << eq.price
          << " but its best response is " << eq.shares[i].bandwidth;
      throw ProtocolAbort(msg.str());
    }
  }
  const double total = sum(demands);
  if (total == 0.0) throw ProtocolAbort("no downloader demands bandwidth at the equilibrium price");

  ProtocolTrace trace;
  trace.kind = ProtocolKind::Direct;
  trace.peer_ids = Session::ids_of(game);
  trace.rounds.push_back({1, eq.price, demands, total, false});
  trace.terminal = eq;

  // Stage 4.
  session.finish(eq);
  return {eq, std::move(trace), session.take_log()};
}

ProtocolResult run_bargaining(const GameInstance& game, const BargainConfig& config,
                              const ProtocolOptions& options) {
  const double mu0 = resolve_initial_price(game, config);
  const double u = game.uploader_capacity();

  ProtocolTrace trace;
  trace.kind = ProtocolKind::Bargaining;
  trace.peer_ids = Session::ids_of(game);
  trace.config = config;
  trace.initial_price = mu0;

  Session session(game, options);
  session.collect_requests();

  BargainState state{mu0, config.step, std::nullopt, 0};
  double terminal_price = 0.0;
  for (std::size_t round = 1;; ++round) {
    if (round > config.max_rounds) {
      trace.refinements = state.refinements;
      std::ostringstream msg;
      msg << "bargaining: no convergence within " << config.max_rounds << " rounds; last price "
          << trace.rounds.back().price << ", demand " << trace.rounds.back().total_demand;
      throw BargainingFailure(msg.str(), std::move(trace));
    }
    const double price = state.price;
    auto demands = session.price_round(price);
    const double total = sum(demands);
    trace.rounds.push_back({round, price, std::move(demands), total, false});

    const Verdict v = next_move(state, total, u, config);
    if (v == Verdict::Converged) {
      terminal_price = price;
      break;
    }
    if (v == Verdict::Lower) {
      if (!(state.price > 0.0)) {
        trace.refinements = state.refinements;
        throw BargainingFailure("bargaining: price reached zero before demand met capacity", std::move(trace));
      }
      continue;
    }
    trace.rounds.back().overshoot = true;
    if (v == Verdict::Refine) {
      std::ostringstream msg;
      msg << "overshoot at price " << price << " (demand " << total << " > " << u << " + " << config.epsilon
          << "); refining step to " << state.step << " from price " << *state.last_under;
      trace.diagnostics.push_back(msg.str());
      continue;
    }
    std::ostringstream msg;
    msg << "epsilon band unreachable: demand jumps from below " << u - config.epsilon << " to " << total
        << " at price " << price << " with step " << state.step;
    if (!state.last_under) {
      trace.refinements = state.refinements;
      throw BargainingFailure("bargaining: " + msg.str() + " on the first round", std::move(trace));
    }
    trace.diagnostics.push_back(msg.str());
    trace.status = BargainStatus::BandUnreachable;
    terminal_price = *state.last_under;
    break;
  }
  trace.refinements = state.refinements;

  Equilibrium eq = make_equilibrium(game, terminal_price);
  trace.terminal = eq;
  session.finish(eq);
  return {std::move(eq), std::move(trace), session.take_log()};
}

bool replay(const ProtocolTrace& trace, const GameInstance& game) {
  const auto peers = game.peers();
  if (trace.peer_ids.size() != peers.size() || trace.rounds.empty()) return false;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    if (trace.peer_ids[i] != peers[i].id()) return false;
  }
  auto round_matches = [&](const TraceRound& r) {
    if (r.demands.size() != peers.size()) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < peers.size(); ++i) {
      if (r.demands[i] != best_response(peers[i], r.price)) return false;
      total += r.demands[i];
    }
    return total == r.total_demand;
  };
  auto terminal_matches = [&](double price) {
    const Equilibrium eq = make_equilibrium(game, price);
    if (trace.terminal.price != eq.price || trace.terminal.shares.size() != eq.shares.size()) return false;
    for (std::size_t i = 0; i < eq.shares.size(); ++i) {
      if (trace.terminal.shares[i].bandwidth != eq.shares[i].bandwidth) return false;
    }
    return true;
  };

  if (trace.kind == ProtocolKind::Direct) {
    if (trace.rounds.size() != 1) return false;
    const auto& r = trace.rounds.front();
    if (r.round != 1 || r.overshoot || r.price != solve(game).price) return false;
    return round_matches(r) && terminal_matches(r.price);
  }

  if (!trace.config) return false;
  const BargainConfig& cfg = *trace.config;
  double mu0 = 0.0;
  try {
    mu0 = resolve_initial_price(game, cfg);
  } catch (const DomainError&) {
    return false;
  }
  if (mu0 != trace.initial_price) return false;

  BargainState state{mu0, cfg.step, std::nullopt, 0};
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const auto& r = trace.rounds[k];
    const bool last = k + 1 == trace.rounds.size();
    if (r.round != k + 1 || r.price != state.price || !round_matches(r)) return false;
    const double price = state.price;
    const Verdict v = next_move(state, r.total_demand, game.uploader_capacity(), cfg);
    if (r.overshoot != (v == Verdict::Refine || v == Verdict::Stop)) return false;
    switch (v) {
      case Verdict::Converged:
        return last && trace.status == BargainStatus::Converged && terminal_matches(price);
      case Verdict::Stop:
        return last && trace.status == BargainStatus::BandUnreachable && state.last_under &&
               terminal_matches(*state.last_under);
      case Verdict::Lower:
      case Verdict::Refine:
        if (last) return false;
        break;
    }
  }
  return false;
}

void write_trace_csv(std::ostream& out, const ProtocolTrace& trace) {
  out << "round,price,peer_id,demand,total_demand\n";
  for (const auto& r : trace.rounds) {
    for (std::size_t i = 0; i < r.demands.size(); ++i) {
      out << r.round << ',' << format_number(r.price) << ',' << trace.peer_ids[i].str() << ','
          << format_number(r.demands[i]) << ',' << format_number(r.total_demand) << '\n';
    }
  }
  const double allocated = trace.terminal.total_bandwidth();
  out << "final," << format_number(trace.terminal.price) << ",*," << format_number(allocated) << ','
      << format_number(allocated) << '\n';
}

}  // namespace bwgame
