#include "bwgame/cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bwgame/demand_curve.hpp"
#include "bwgame/errors.hpp"
#include "bwgame/oracle.hpp"
#include "bwgame/solver.hpp"

namespace bwgame::cli {

namespace {

std::vector<PeerProfile> make_peers(const std::vector<double>& credits, const std::vector<double>& capacities) {
  std::vector<PeerProfile> peers;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    peers.emplace_back(PeerId("peer" + std::to_string(i + 1)), credits[i], capacities[i]);
  }
  return peers;
}

const std::vector<double> kExample4Credits{400, 300, 200, 100};
const std::vector<double> kExample4Capacities{2, 1.5, 1, 0.5};

double grid_point(const SweepRange& r, std::size_t k) {
  if (k == r.steps) return r.to;
  return r.from + (r.to - r.from) * static_cast<double>(k) / static_cast<double>(r.steps);
}

void write_peer_header(std::ostream& out, const GameInstance& game) {
  for (const auto& p : game.peers()) out << ',' << p.id().str();
}

}  // namespace

std::optional<ExperimentName> parse_experiment_name(std::string_view name) {
  if (name == "example1") return ExperimentName::Example1;
  if (name == "example2") return ExperimentName::Example2;
  if (name == "example3") return ExperimentName::Example3;
  if (name == "example4") return ExperimentName::Example4;
  if (name == "example5") return ExperimentName::Example5;
  if (name == "custom") return ExperimentName::Custom;
  return std::nullopt;
}

std::string_view to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::Example1: return "example1";
    case ExperimentName::Example2: return "example2";
    case ExperimentName::Example3: return "example3";
    case ExperimentName::Example4: return "example4";
    case ExperimentName::Example5: return "example5";
    case ExperimentName::Custom: return "custom";
  }
  return "custom";
}

GameInstance example1_instance() {
  return GameInstance(300.0, make_peers({100, 150, 200, 250}, {150, 150, 150, 150}));
}

GameInstance example2_instance() {
  return GameInstance(350.0, make_peers({150, 150, 150, 150}, {100, 150, 200, 250}));
}

GameInstance example4_instance() { return GameInstance(2.0, make_peers(kExample4Credits, kExample4Capacities)); }

Scenario example4_scenario() {
  Scenario s;
  s.uploader_capacity = 2.0;
  s.options.end_time = 100.0;
  const auto peers = make_peers(kExample4Credits, kExample4Capacities);
  for (std::size_t i = 0; i < peers.size(); ++i) {
    s.events.push_back({20.0 * static_cast<double>(i + 1), Join{peers[i]}});
  }
  return s;
}

Scenario example5_scenario() {
  Scenario s;
  s.uploader_capacity = 2.0;
  s.options.end_time = 100.0;
  const auto peers = make_peers(kExample4Credits, kExample4Capacities);
  for (const auto& p : peers) s.events.push_back({20.0, Join{p}});
  s.events.push_back({40.0, Leave{peers[3].id()}});
  s.events.push_back({60.0, Leave{peers[2].id()}});
  s.events.push_back({80.0, Leave{peers[1].id()}});
  return s;
}

std::optional<GameInstance> builtin_instance(std::string_view name) {
  const auto parsed = parse_experiment_name(name);
  if (!parsed) return std::nullopt;
  switch (*parsed) {
    case ExperimentName::Example1:
    case ExperimentName::Example3: return example1_instance();
    case ExperimentName::Example2: return example2_instance();
    case ExperimentName::Example4:
    case ExperimentName::Example5: return example4_instance();
    case ExperimentName::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "example4") return example4_scenario();
  if (name == "example5") return example5_scenario();
  return std::nullopt;
}

SweepRange default_price_range(const GameInstance& game, std::size_t steps) {
  const DemandCurve curve(game);
  const auto& bp = curve.breakpoints();
  if (bp.empty()) throw ValidationError("sweep: no peer has positive credits; give an explicit range");
  return {bp.front() / 2.0, bp.back() * 1.1, steps};
}

void validate_range(const SweepRange& range) {
  if (!std::isfinite(range.from) || !std::isfinite(range.to)) throw ValidationError("sweep: bounds must be finite");
  if (!(range.from < range.to)) throw ValidationError("sweep: range is empty or inverted (from must be < to)");
  if (range.steps == 0) throw ValidationError("sweep: steps must be >= 1");
}

OracleCheck oracle_check(const GameInstance& game, const Equilibrium& eq) {
  const GridSpec grid = GridSpec::for_game(game);
  const OracleResult r = grid_search_price(game, grid);
  const double slack = grid.resolution * game.uploader_capacity() + 1e-9 * std::max(1.0, r.revenue);
  return {r.price, r.revenue, eq.revenue >= r.revenue - slack};
}

void write_price_sweep(std::ostream& out, const GameInstance& game, const SweepRange& range) {
  validate_range(range);
  if (!(range.from > 0.0)) throw ValidationError("sweep: prices must be > 0");
  out << "price";
  write_peer_header(out, game);
  out << ",total_demand\n";
  for (std::size_t k = 0; k <= range.steps; ++k) {
    const double price = grid_point(range, k);
    out << format_number(price);
    double total = 0.0;
    for (const auto& p : game.peers()) {
      const double x = best_response(p, price);
      total += x;
      out << ',' << format_number(x);
    }
    out << ',' << format_number(total) << '\n';
  }
}

std::size_t write_capacity_sweep(std::ostream& out, const GameInstance& game, const SweepRange& range,
                                 bool with_oracle) {
  validate_range(range);
  out << "uploader_capacity,price";
  write_peer_header(out, game);
  out << ",revenue,region";
  if (with_oracle) out << ",oracle_price,oracle_agree";
  out << '\n';
  std::size_t disagreements = 0;
  for (std::size_t k = 0; k <= range.steps; ++k) {
    const double u = grid_point(range, k);
    if (!(u > 0.0)) continue;
    const GameInstance g = game.with_capacity(u);
    const Equilibrium eq = solve(g);
    out << format_number(u) << ',' << format_number(eq.price);
    for (const auto& s : eq.shares) out << ',' << format_number(s.bandwidth);
    out << ',' << format_number(eq.revenue) << ',' << to_string(eq.region);
    if (with_oracle) {
      const OracleCheck oc = oracle_check(g, eq);
      if (!oc.agree) ++disagreements;
      out << ',' << format_number(oc.price) << ',' << (oc.agree ? "yes" : "no");
    }
    out << '\n';
  }
  return disagreements;
}

void write_solve_text(std::ostream& out, const GameInstance& game, const Equilibrium& eq,
                      const std::optional<OracleCheck>& oracle) {
  out << "uploader_capacity: " << format_number(game.uploader_capacity()) << '\n'
      << "price: " << format_number(eq.price) << '\n'
      << "region: " << to_string(eq.region) << '\n'
      << "revenue: " << format_number(eq.revenue) << '\n'
      << "allocation: [";
  for (std::size_t i = 0; i < eq.shares.size(); ++i) {
    out << (i ? ", " : "") << format_number(eq.shares[i].bandwidth);
  }
  out << "]\n";
  for (const auto& s : eq.shares) {
    out << "  " << s.id.str() << ": allocation " << format_number(s.bandwidth) << ", utility "
        << format_number(s.utility) << '\n';
  }
  if (oracle) {
    out << "oracle_price: " << format_number(oracle->price) << '\n'
        << "oracle_revenue: " << format_number(oracle->revenue) << '\n'
        << "oracle_agree: " << (oracle->agree ? "yes" : "no") << '\n';
  }
}

void write_solve_csv(std::ostream& out, const Equilibrium& eq, const std::optional<OracleCheck>& oracle) {
  out << "price,region,revenue,peer_id,allocation,utility";
  if (oracle) out << ",oracle_price,oracle_agree";
  out << '\n';
  for (const auto& s : eq.shares) {
    out << format_number(eq.price) << ',' << to_string(eq.region) << ',' << format_number(eq.revenue) << ','
        << s.id.str() << ',' << format_number(s.bandwidth) << ',' << format_number(s.utility);
    if (oracle) out << ',' << format_number(oracle->price) << ',' << (oracle->agree ? "yes" : "no");
    out << '\n';
  }
}

}  // namespace bwgame::cli
