#include "bwgame/cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include "bwgame/cli/experiments.hpp"
#include "bwgame/errors.hpp"
#include "bwgame/io.hpp"
#include "bwgame/protocol.hpp"
#include "bwgame/simulator.hpp"
#include "bwgame/solver.hpp"

namespace bwgame::cli {

namespace {

struct GlobalOptions {
  bool oracle = false;
  std::string output;
  std::string format = "text";
  std::uint64_t seed = 0;
};

struct SweepOptions {
  std::string input;
  std::string kind = "price";
  std::optional<double> from;
  std::optional<double> to;
  std::size_t steps = 200;
  std::optional<double> capacity;
};

struct BargainOptions {
  std::string input;
  std::optional<double> step;
  std::optional<double> epsilon;
  std::optional<double> initial;
  std::optional<std::size_t> max_rounds;
  bool no_refine = false;
  bool direct = false;
};

struct SimulateOptions {
  std::string input;
  std::string ledger;
};

struct ExampleOptions {
  std::string name;
  std::optional<std::string> input;
  std::optional<double> capacity;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<std::size_t> steps;
  std::string kind = "price";
  std::string ledger;
};

/// Either the caller's stream or a file opened for --output.
class Sink {
 public:
  Sink(std::ostream& fallback, const std::string& path) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw ValidationError("cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

GameInstance resolve_instance(const std::string& input) {
  if (!std::filesystem::exists(input)) {
    if (auto game = builtin_instance(input)) return *game;
  }
  return load_instance(input);
}

Scenario resolve_scenario(const std::string& input) {
  if (!std::filesystem::exists(input)) {
    if (auto s = builtin_scenario(input)) return *s;
  }
  return load_scenario(input);
}

void check_format(const GlobalOptions& g) {
  if (g.format != "text" && g.format != "csv") throw ValidationError("--format must be 'text' or 'csv'");
}

int cmd_solve(const GlobalOptions& g, const std::string& input, std::optional<double> capacity, std::ostream& out) {
  check_format(g);
  GameInstance game = resolve_instance(input);
  if (capacity) game = game.with_capacity(*capacity);
  const Equilibrium eq = solve(game);
  std::optional<OracleCheck> oc;
  if (g.oracle) oc = oracle_check(game, eq);
  Sink sink(out, g.output);
  if (g.format == "csv") {
    write_solve_csv(sink.get(), eq, oc);
  } else {
    write_solve_text(sink.get(), game, eq, oc);
  }
  return kExitOk;
}

int run_sweep(const GlobalOptions& g, const GameInstance& game, const std::string& kind, std::optional<double> from,
              std::optional<double> to, std::size_t steps, std::ostream& out, std::ostream& err) {
  if (kind == "price") {
    SweepRange range = default_price_range(game, steps);
    range.from = from.value_or(range.from);
    range.to = to.value_or(range.to);
    Sink sink(out, g.output);
    write_price_sweep(sink.get(), game, range);
    return kExitOk;
  }
  if (kind == "capacity") {
    SweepRange range{0.0, game.total_capacity(), steps};
    range.from = from.value_or(range.from);
    range.to = to.value_or(range.to);
    Sink sink(out, g.output);
    const std::size_t misses = write_capacity_sweep(sink.get(), game, range, g.oracle);
    if (misses > 0) err << "oracle: " << misses << " sweep point(s) where the grid oracle found more revenue\n";
    return kExitOk;
  }
  throw ValidationError("--kind must be 'price' or 'capacity'");
}

int cmd_bargain(const GlobalOptions& g, const BargainOptions& o, std::ostream& out, std::ostream& err) {
  check_format(g);
  const GameInstance game = resolve_instance(o.input);
  ProtocolOptions popts;
  popts.delivery_seed = g.seed;
  std::optional<ProtocolResult> result;
  if (o.direct) {
    result = run_direct(game, popts);
  } else {
    BargainConfig cfg;
    cfg.initial_price = o.initial;
    if (o.step) cfg.step = *o.step;
    if (o.epsilon) cfg.epsilon = *o.epsilon;
    if (o.max_rounds) cfg.max_rounds = *o.max_rounds;
    cfg.refine = !o.no_refine;
    result = run_bargaining(game, cfg, popts);
  }
  const ProtocolTrace& trace = result->trace;
  for (const auto& d : trace.diagnostics) err << "diagnostic: " << d << '\n';
  Sink sink(out, g.output);
  if (g.format == "csv") {
    write_trace_csv(sink.get(), trace);
  } else {
    std::size_t withdrawn = 0;
    for (const auto& r : trace.rounds) withdrawn += r.overshoot ? 1 : 0;
    sink.get() << "rounds: " << trace.rounds.size() << " (" << withdrawn << " withdrawn)\n"
               << "refinements: " << trace.refinements << '\n'
               << "status: " << (trace.status == BargainStatus::Converged ? "converged" : "band-unreachable")
               << '\n';
    write_solve_text(sink.get(), game, result->equilibrium,
                     g.oracle ? std::optional(oracle_check(game, result->equilibrium)) : std::nullopt);
  }
  return trace.status == BargainStatus::Converged ? kExitOk : kExitConvergence;
}

int run_simulation(const GlobalOptions& g, const Scenario& scenario, const std::string& ledger_path,
                   std::ostream& out, std::ostream& err) {
  const SimulationResult result = run_scenario(scenario.uploader_capacity, scenario.events, scenario.options);
  {
    Sink sink(out, g.output);
    if (g.oracle) {
      std::size_t misses = 0;
      write_timeline_csv(sink.get(), result.timeline, "oracle_agree", [&](const Epoch& e) -> std::string {
        if (!e.equilibrium) return "";
        const GameInstance game(scenario.uploader_capacity, e.peers);
        const bool agree = oracle_check(game, *e.equilibrium).agree;
        misses += agree ? 0 : 1;
        return agree ? "yes" : "no";
      });
      if (misses > 0) err << "oracle: " << misses << " epoch(s) where the grid oracle found more revenue\n";
    } else {
      write_timeline_csv(sink.get(), result.timeline);
    }
  }
  if (!ledger_path.empty()) {
    Sink ledger(err, ledger_path);
    write_ledger_csv(ledger.get(), result.ledger);
  }
  for (const auto& c : result.churn) {
    err << "churn t=" << format_number(c.time) << ' ' << (c.kind == ChurnKind::Join ? "join " : "leave ")
        << c.peer.str() << ": revenue " << format_number(c.old_revenue) << " -> " << format_number(c.new_revenue)
        << (c.holds ? "" : (c.kind == ChurnKind::Join ? " (no increase)" : " (below bound)")) << '\n';
  }
  for (const auto& id : result.ledger.exhausted()) err << "credit exhausted: " << id.str() << '\n';
  return kExitOk;
}

int cmd_example(const GlobalOptions& g, const ExampleOptions& o, std::ostream& out, std::ostream& err) {
  const auto name = parse_experiment_name(o.name);
  if (!name) throw ValidationError("unknown example '" + o.name + "' (example1..example5, custom)");
  ExperimentSpec spec{*name, o.capacity, o.from, o.to, o.steps, o.input,
                      g.output.empty() ? std::nullopt : std::optional(g.output)};
  switch (spec.name) {
    case ExperimentName::Example1:
    case ExperimentName::Example2: {
      GameInstance game = *builtin_instance(to_string(spec.name));
      if (spec.uploader_capacity) game = game.with_capacity(*spec.uploader_capacity);
      if (g.oracle) {
        const OracleCheck oc = oracle_check(game, solve(game));
        err << "oracle_agree: " << (oc.agree ? "yes" : "no") << '\n';
      }
      return run_sweep(g, game, "price", spec.from, spec.to, spec.steps.value_or(200), out, err);
    }
    case ExperimentName::Example3:
      return run_sweep(g, example1_instance(), "capacity", spec.from.value_or(0.0), spec.to.value_or(600.0),
                       spec.steps.value_or(120), out, err);
    case ExperimentName::Example4:
    case ExperimentName::Example5: {
      Scenario s = *builtin_scenario(to_string(spec.name));
      if (spec.uploader_capacity) s.uploader_capacity = *spec.uploader_capacity;
      return run_simulation(g, s, o.ledger, out, err);
    }
    case ExperimentName::Custom: {
      if (!spec.input) throw ValidationError("example custom needs --input <instance.json>");
      GameInstance game = load_instance(*spec.input);
      if (spec.uploader_capacity) game = game.with_capacity(*spec.uploader_capacity);
      return run_sweep(g, game, o.kind, spec.from, spec.to, spec.steps.value_or(200), out, err);
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Credit-based bandwidth pricing game: solver, protocols and churn simulator", "bwgame"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_flag("--oracle", g.oracle, "Cross-check every solve against the grid oracle");
  app.add_option("-o,--output", g.output, "Write the main result to this file instead of stdout");
  app.add_option("--format", g.format, "Report format: text or csv")->check(CLI::IsMember({"text", "csv"}));
  app.add_option("--seed", g.seed, "Message delivery-order seed for protocol runs");

  std::string solve_input;
  std::optional<double> solve_capacity;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance (JSON file or built-in example name)");
  solve_cmd->add_option("input", solve_input, "Instance file or built-in name")->required();
  solve_cmd->add_option("--capacity", solve_capacity, "Override the uploader capacity");

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Emit allocation curves as CSV");
  sweep_cmd->add_option("input", sw.input, "Instance file or built-in name")->required();
  sweep_cmd->add_option("--kind", sw.kind, "price or capacity")->check(CLI::IsMember({"price", "capacity"}));
  sweep_cmd->add_option("--from", sw.from, "First grid point");
  sweep_cmd->add_option("--to", sw.to, "Last grid point");
  sweep_cmd->add_option("--steps", sw.steps, "Number of grid intervals");

  BargainOptions bo;
  auto* bargain_cmd = app.add_subcommand("bargain", "Run the bargaining protocol and emit its trace");
  bargain_cmd->add_option("input", bo.input, "Instance file or built-in name")->required();
  bargain_cmd->add_option("--step", bo.step, "Price decrement per round");
  bargain_cmd->add_option("--epsilon", bo.epsilon, "Convergence band around the uploader capacity");
  bargain_cmd->add_option("--initial", bo.initial, "Initial price (default: highest cutoff price)");
  bargain_cmd->add_option("--max-rounds", bo.max_rounds, "Round limit");
  bargain_cmd->add_flag("--no-refine", bo.no_refine, "Stop at the first overshoot instead of refining the step");
  bargain_cmd->add_flag("--direct", bo.direct, "Run the one-round direct protocol instead");

  SimulateOptions so;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a churn scenario and emit the epoch timeline");
  simulate_cmd->add_option("input", so.input, "Scenario file or built-in name (example4, example5)")->required();
  simulate_cmd->add_option("--ledger", so.ledger, "Write the ledger CSV to this file");

  ExampleOptions eo;
  auto* example_cmd = app.add_subcommand("example", "Reproduce a built-in experiment");
  example_cmd->add_option("name", eo.name, "example1..example5 or custom")->required();
  example_cmd->add_option("--input", eo.input, "Instance file for custom");
  example_cmd->add_option("--capacity", eo.capacity, "Override the uploader capacity");
  example_cmd->add_option("--from", eo.from, "First grid point");
  example_cmd->add_option("--to", eo.to, "Last grid point");
  example_cmd->add_option("--steps", eo.steps, "Number of grid intervals");
  example_cmd->add_option("--kind", eo.kind, "Sweep kind for custom")->check(CLI::IsMember({"price", "capacity"}));
  example_cmd->add_option("--ledger", eo.ledger, "Write the ledger CSV to this file (example4, example5)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve_cmd) return cmd_solve(g, solve_input, solve_capacity, out);
    if (*sweep_cmd) return run_sweep(g, resolve_instance(sw.input), sw.kind, sw.from, sw.to, sw.steps, out, err);
    if (*bargain_cmd) return cmd_bargain(g, bo, out, err);
    if (*simulate_cmd) return run_simulation(g, resolve_scenario(so.input), so.ledger, out, err);
    if (*example_cmd) return cmd_example(g, eo, out, err);
  } catch (const BargainingFailure& e) {
    err << "error: " << e.what() << " after " << e.trace().rounds.size() << " rounds\n";
    return kExitConvergence;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const ProtocolAbort& e) {
    err << "error: protocol aborted: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace bwgame::cli
