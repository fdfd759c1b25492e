// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bwgame/cli/cli.hpp"
#include "bwgame/cli/experiments.hpp"
#include "bwgame/oracle.hpp"
#include "bwgame/protocol.hpp"
#include "bwgame/simulator.hpp"
#include "bwgame/solver.hpp"
#include "support/generators.hpp"

namespace {

using namespace bwgame;
using Clock = std::chrono::steady_clock;

constexpr double kLog2 = std::numbers::ln2;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Every oversubscribed equilibrium produced below, for criterion 5.
struct Produced {
  GameInstance game;
  Equilibrium eq;
  std::string origin;
};
std::vector<Produced> g_produced;

Equilibrium solve_and_keep(const GameInstance& g, const std::string& origin) {
  Equilibrium eq = solve(g);
  if (g.oversubscribed()) g_produced.push_back({g, eq, origin});
  return eq;
}

Outcome criterion1() {
  Outcome o;
  const GameInstance g = testing::example4();
  const Equilibrium eq = solve_and_keep(g, "example4");
  const double want = 1000.0 / (7.0 * kLog2);
  o.check(std::abs(eq.price - want) <= 1e-3, fmt("price %.7f vs 1000/(7 ln2) = %.7f", eq.price, want));
  const std::vector<double> x{0.8, 0.6, 0.4, 0.2};
  double worst = 0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(eq.shares[i].bandwidth - x[i]));
  o.check(worst <= 1e-3, fmt("max allocation error %.3g", worst));

  std::vector<double> times;
  for (int k = 0; k < 101; ++k) {
    const auto t0 = Clock::now();
    const Equilibrium e = solve(g);
    times.push_back(seconds_since(t0));
    if (e.price != eq.price) o.check(false, "repeated solve differs");
  }
  std::nth_element(times.begin(), times.begin() + 50, times.end());
  o.check(times[50] < 1e-3, fmt("median solve time %.3g ms", times[50] * 1e3));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const GameInstance g = testing::example4();
  BargainConfig cfg;
  cfg.initial_price = 288.539;
  cfg.step = 0.01;
  cfg.epsilon = 0.001;
  const auto t0 = Clock::now();
  const ProtocolResult r = run_bargaining(g, cfg);
  const double elapsed = seconds_since(t0);
  const double mu_star = 1000.0 / (7.0 * kLog2);
  o.check(r.trace.status == BargainStatus::Converged, "converged inside the epsilon band");
  o.check(std::abs(r.equilibrium.total_bandwidth() - 2.0) < 0.001,
          fmt("|sum x - 2| = %.3g", std::abs(r.equilibrium.total_bandwidth() - 2.0)));
  o.check(r.trace.rounds.size() <= 8300, fmt("%.0f rounds (limit 8300)", static_cast<double>(r.trace.rounds.size())));
  o.check(std::abs(r.equilibrium.price - mu_star) <= 0.01,
          fmt("terminal price %.5f, off by %.3g", r.equilibrium.price, std::abs(r.equilibrium.price - mu_star)));
  o.check(elapsed < 1.0, fmt("runtime %.3g s", elapsed));
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(0xC3);
  const auto t0 = Clock::now();
  std::size_t failures = 0;
  double worst_gap = 0;
  for (int k = 0; k < 200; ++k) {
    const GameInstance g = testing::random_oversubscribed(rng);
    const Equilibrium eq = solve_and_keep(g, "criterion 3 instance " + std::to_string(k));
    const GridSpec grid = GridSpec::for_game(g, 1e-4);
    const OracleResult ref = grid_search_price(g, grid);
    const double slack = grid.resolution * g.uploader_capacity();
    if (eq.revenue < ref.revenue - slack - 1e-9 * std::max(1.0, ref.revenue)) {
      ++failures;
      const double gap = (ref.revenue - eq.revenue) / ref.revenue;
      if (gap > worst_gap) worst_gap = gap;
      if (failures <= 3) {
        std::ostringstream msg;
        msg << "instance " << k << ": solve revenue " << eq.revenue << " at price " << eq.price
            << ", oracle revenue " << ref.revenue << " at price " << ref.price << " with demand "
            << aggregate_demand(g, ref.price) << " < u = " << g.uploader_capacity();
        o.note(msg.str());
      }
    }
  }
  const double elapsed = seconds_since(t0);
  o.check(failures == 0, fmt("%.0f of 200 instances below the oracle (worst relative gap %.3g)",
                             static_cast<double>(failures), worst_gap));
  o.check(elapsed < 60.0, fmt("suite runtime %.3g s", elapsed));
  return o;
}

Outcome criterion4() {
  Outcome o;
  auto two = [](double c1, double d1, double c2, double d2, double u) {
    return GameInstance(u, {PeerProfile(PeerId("p1"), c1, d1), PeerProfile(PeerId("p2"), c2, d2)});
  };
  struct Case {
    const char* name;
    GameInstance game;
  };
  const std::vector<Case> cases{{"I-a", two(200, 100, 150, 100, 30)},  {"I-b", two(200, 100, 150, 100, 100)},
                                {"I-c", two(200, 100, 150, 100, 180)}, {"II-a", two(400, 100, 100, 100, 50)},
                                {"II-a plateau edge", two(400, 100, 100, 100, 100)},
                                {"II-c", two(400, 100, 100, 100, 150)}};
  for (const auto& c : cases) {
    const double closed = two_peer_price(c.game.peers()[0], c.game.peers()[1], c.game.uploader_capacity());
    const double general = solve_and_keep(c.game, std::string("case ") + c.name).price;
    o.check(testing::relative_error(closed, general) <= 1e-9,
            std::string("case ") + c.name + fmt(": closed form %.10g, solve %.10g", closed, general));
  }
  // II-b: the price never falls strictly inside (h2 / ln2, h1 / (2 ln2)).
  const GameInstance base = two(400, 100, 100, 100, 1);
  const double lo = base.peers()[1].cutoff_price(), hi = base.peers()[0].saturation_price();
  std::size_t inside = 0;
  for (double u = 0.5; u < 200; u += 0.5) {
    const double mu = solve_and_keep(base.with_capacity(u), "case II sweep").price;
    if (mu > lo && mu < hi) ++inside;
  }
  o.check(inside == 0, fmt("case II-b selected at %.0f of 399 capacities", static_cast<double>(inside)));

  std::mt19937_64 rng(0xC4);
  std::uniform_real_distribution<double> spread(1.0, 2.2), base_h(1.0, 200.0), cap(0.1, 5.0), frac(0.01, 0.99);
  std::uniform_int_distribution<int> count(1, 6);
  std::size_t applicable = 0, mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    const double b = base_h(rng);
    std::vector<PeerProfile> peers;
    double total = 0;
    for (int i = count(rng); i > 0; --i) {
      const double d = cap(rng);
      peers.emplace_back(PeerId("p" + std::to_string(i)), b * spread(rng) * d, d);
      total += d;
    }
    const GameInstance g(frac(rng) * total, peers);
    const Equilibrium eq = solve_and_keep(g, "criterion 4 instance " + std::to_string(k));
    if (const auto price = balance_region_price(g)) {
      ++applicable;
      if (testing::relative_error(*price, eq.price) > 1e-9) ++mismatches;
    }
  }
  o.check(mismatches == 0 && applicable > 0,
          fmt("balance formula: %.0f mismatches over %.0f applicable instances", static_cast<double>(mismatches),
              static_cast<double>(applicable)));
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t loose = 0, se_fail = 0;
  std::vector<std::string> examples;
  for (const auto& p : g_produced) {
    const double u = p.game.uploader_capacity();
    if (std::abs(p.eq.total_bandwidth() - u) > 1e-9 * u) ++loose;
    const SeReport r = verify_se(p.game, p.eq, 1000);
    if (!r.ok) {
      ++se_fail;
      if (examples.size() < 3) {
        std::ostringstream msg;
        msg << p.origin << ": revenue " << p.eq.revenue << " at price " << p.eq.price << ", sampled price "
            << r.best_deviation_price << " earns " << r.best_deviation_revenue;
        examples.push_back(msg.str());
      }
    }
  }
  const double n = static_cast<double>(g_produced.size());
  o.check(loose == 0, fmt("sum x = u within 1e-9 relative: %.0f of %.0f violate", static_cast<double>(loose), n));
  o.check(se_fail == 0, fmt("verify_se with 1000 samples: %.0f of %.0f fail", static_cast<double>(se_fail), n));
  for (const auto& e : examples) o.note(e);
  return o;
}

using Table = std::vector<std::vector<double>>;

double table_error(const TimelineRecord& t, const Table& want) {
  if (t.epochs.size() != want.size()) return INFINITY;
  double worst = 0;
  for (std::size_t e = 0; e < want.size(); ++e) {
    if (!t.epochs[e].equilibrium || t.epochs[e].equilibrium->shares.size() != want[e].size()) return INFINITY;
    for (std::size_t i = 0; i < want[e].size(); ++i) {
      worst = std::max(worst, std::abs(t.epochs[e].equilibrium->shares[i].bandwidth - want[e][i]));
    }
  }
  return worst;
}

Outcome criterion6() {
  Outcome o;
  const Scenario s4 = cli::example4_scenario(), s5 = cli::example5_scenario();
  const SimulationResult r4 = run_scenario(s4.uploader_capacity, s4.events, s4.options);
  const SimulationResult r5 = run_scenario(s5.uploader_capacity, s5.events, s5.options);
  for (const auto* r : {&r4, &r5}) {
    for (const auto& e : r->timeline.epochs) {
      if (e.equilibrium) g_produced.push_back({GameInstance(s4.uploader_capacity, e.peers), *e.equilibrium, "churn epoch"});
    }
  }

  // Oracle-derived table (tests/oracle/derive_values.py): per-epoch balance price.
  const Table derived{{2.0}, {8.0 / 7, 6.0 / 7}, {8.0 / 9, 6.0 / 9, 4.0 / 9}, {0.8, 0.6, 0.4, 0.2}};
  const double err4 = table_error(r4.timeline, derived);
  const Table reversed(derived.rbegin(), derived.rend());
  const double err5 = table_error(r5.timeline, reversed);
  o.check(err4 <= 1e-3, fmt("example4 epochs vs derived table: max error %.3g", err4));
  o.check(err5 <= 1e-3, fmt("example5 epochs vs reversed table: max error %.3g", err5));
  bool same = r4.timeline.epochs.size() == 4 && r5.timeline.epochs.size() == 4;
  for (std::size_t e = 0; same && e < 4; ++e) {
    same = r4.timeline.epochs[e].equilibrium->price == r5.timeline.epochs[3 - e].equilibrium->price;
  }
  o.check(same, "example5 epoch prices equal example4's for equal peer counts");

  const std::vector<double> listed{1.0435, 0.7826, 0.5217};
  double listed_sum = 0;
  for (double x : listed) listed_sum += x;
  o.note(fmt("published epoch-3 row [1.0435, 0.7826, 0.5217] sums to %.4f > u = %g; not a feasible allocation",
             listed_sum, s4.uploader_capacity));
  o.note(fmt("epoch-3 price 900/(6.5 ln2) = %.4f gives %.4f for peer1", 900 / (6.5 * kLog2),
             r4.timeline.epochs[2].equilibrium->shares[0].bandwidth));
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(0xC7);
  double worst = 0;
  std::size_t transactions = 0;
  for (int k = 0; k < 100; ++k) {
    const auto events = testing::random_scenario(rng);
    // Replays every prefix so each settlement is checked on its own.
    double minted = 0;
    double previous_total = 0;
    std::size_t previous_log = 0;
    for (std::size_t n = 1; n <= events.size(); ++n) {
      if (const auto* j = std::get_if<Join>(&events[n - 1].kind)) minted += j->peer.credits();
      const std::vector<ScenarioEvent> prefix(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(n));
      const SimulationResult r = run_scenario(2.0, prefix);
      const double total = r.ledger.total();
      worst = std::max(worst, std::abs(total - minted));
      if (r.ledger.log().size() > previous_log) {
        const auto* j = std::get_if<Join>(&events[n - 1].kind);
        const double joined = j ? j->peer.credits() : 0.0;
        worst = std::max(worst, std::abs(total - (previous_total + joined)));
        transactions += r.ledger.log().size() - previous_log;
      }
      previous_total = total;
      previous_log = r.ledger.log().size();
      for (const auto& [id, b] : r.ledger.balances()) {
        if (b < 0) o.check(false, "negative balance for " + id.str());
      }
    }
  }
  o.check(worst <= 1e-9, fmt("max drift %.3g over %.0f transfers in 100 scenarios", worst,
                             static_cast<double>(transactions)));
  return o;
}

std::vector<std::vector<double>> sweep_rows(const char* name, std::vector<std::string>* header) {
  std::ostringstream out, err;
  cli::run_cli({"example", name}, out, err);
  std::vector<std::vector<double>> rows;
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header->push_back(cell);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Outcome criterion8() {
  Outcome o;
  std::vector<std::string> header;
  const auto ex1 = sweep_rows("example1", &header);
  const GameInstance g1 = cli::example1_instance();
  std::size_t v1 = 0;
  for (const auto& row : ex1) {
    for (std::size_t i = 0; i < g1.size(); ++i) {
      for (std::size_t j = 0; j < g1.size(); ++j) {
        if (g1.peers()[i].credits() > g1.peers()[j].credits() && row[1 + i] < row[1 + j]) ++v1;
      }
    }
  }
  o.check(!ex1.empty() && v1 == 0, fmt("example1: %.0f credit-order violations over %.0f prices",
                                       static_cast<double>(v1), static_cast<double>(ex1.size())));

  header.clear();
  const auto ex2 = sweep_rows("example2", &header);
  const GameInstance g2 = cli::example2_instance();
  std::size_t v2 = 0, compared = 0;
  for (const auto& row : ex2) {
    const double mu = row[0];
    for (std::size_t i = 0; i < g2.size(); ++i) {
      for (std::size_t j = 0; j < g2.size(); ++j) {
        const auto& a = g2.peers()[i];
        const auto& b = g2.peers()[j];
        auto interior = [mu](const PeerProfile& p) { return mu > p.saturation_price() && mu < p.cutoff_price(); };
        if (!(a.capacity() < b.capacity()) || !interior(a) || !interior(b)) continue;
        ++compared;
        if (row[1 + i] < row[1 + j]) ++v2;
      }
    }
  }
  o.check(compared > 0 && v2 == 0, fmt("example2: %.0f inverse-capacity violations over %.0f interior comparisons",
                                       static_cast<double>(v2), static_cast<double>(compared)));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Example-4 equilibrium", criterion1},
      {"Bargaining reproduction", criterion2},
      {"Oracle equivalence", criterion3},
      {"Closed-form agreement", criterion4},
      {"Tightness and SE witness", criterion5},
      {"Churn timelines", criterion6},
      {"Ledger conservation", criterion7},
      {"Service differentiation", criterion8},
  };
  // Criterion 5 audits equilibria produced by the others, so it runs last.
  std::vector<Outcome> outcomes(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (i != 4) outcomes[i] = criteria[i].second();
  }
  outcomes[4] = criteria[4].second();

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    all = all && outcomes[i].pass;
    std::printf("criterion %zu %s: %s\n", i + 1, outcomes[i].pass ? "PASS" : "FAIL", criteria[i].first);
    for (const auto& d : outcomes[i].details) std::printf("    %s\n", d.c_str());
  }
  std::printf("%s\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : 1;
}
