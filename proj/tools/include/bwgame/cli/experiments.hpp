#pragma once

// Built-in experiments and the sweep/report routines behind the CLI.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bwgame/io.hpp"
#include "bwgame/model.hpp"
#include "bwgame/protocol.hpp"
#include "bwgame/simulator.hpp"

namespace bwgame::cli {

enum class ExperimentName { Example1, Example2, Example3, Example4, Example5, Custom };

std::optional<ExperimentName> parse_experiment_name(std::string_view name);
std::string_view to_string(ExperimentName name);

enum class SweepKind { Price, Capacity };

struct SweepRange {
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 0;  // intervals; steps + 1 points
};

struct ExperimentSpec {
  ExperimentName name = ExperimentName::Custom;
  // Overrides; unset fields take the experiment's defaults.
  std::optional<double> uploader_capacity;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<std::size_t> steps;
  std::optional<std::string> input;  // instance file, custom only
  std::optional<std::string> output;
};

// Example 1: equal capacities 150, credits 100..250. The uploader capacity is
// not part of the published setup; 300 is used so the instance is valid.
GameInstance example1_instance();
// Example 2: equal credits 150, capacities 100..250, uploader capacity 350.
GameInstance example2_instance();
// Example 4 peers with all four present, u = 2.
GameInstance example4_instance();

Scenario example4_scenario();
Scenario example5_scenario();

/// Instance for a built-in name (example1..example5); nullopt otherwise.
std::optional<GameInstance> builtin_instance(std::string_view name);
std::optional<Scenario> builtin_scenario(std::string_view name);

/// Default price window [min breakpoint / 2, max breakpoint * 1.1].
SweepRange default_price_range(const GameInstance& game, std::size_t steps = 200);

/// Throws ValidationError for from >= to, zero steps or non-finite bounds.
void validate_range(const SweepRange& range);

/// Result of re-solving through the grid oracle.
struct OracleCheck {
  double price = 0.0;
  double revenue = 0.0;
  bool agree = false;
};

/// Agreement means the solver's revenue is at least the oracle's minus one
/// grid cell of revenue (resolution * u).
OracleCheck oracle_check(const GameInstance& game, const Equilibrium& eq);

/// price,<peer ids...>,total_demand. Throws ValidationError for a
/// non-positive price point.
void write_price_sweep(std::ostream& out, const GameInstance& game, const SweepRange& range);

/// uploader_capacity,price,<peer ids...>,revenue,region[,oracle_price,oracle_agree].
/// Points with u <= 0 are skipped. Returns the number of oracle disagreements.
std::size_t write_capacity_sweep(std::ostream& out, const GameInstance& game, const SweepRange& range,
                                 bool with_oracle);

/// Human-readable equilibrium report.
void write_solve_text(std::ostream& out, const GameInstance& game, const Equilibrium& eq,
                      const std::optional<OracleCheck>& oracle);
/// price,region,revenue,peer_id,allocation,utility[,oracle_price,oracle_agree]
void write_solve_csv(std::ostream& out, const Equilibrium& eq, const std::optional<OracleCheck>& oracle);

}  // namespace bwgame::cli
