#pragma once

// JSON instance/scenario files and CSV output.
//
// Instance:  {"uploader_capacity": 2, "peers": [{"id": "p1", "credits": 400, "capacity": 2}, ...]}
// Scenario:  {"uploader_capacity": 2, "end_time": 100,
//             "events": [{"time": 20, "kind": "join", "peer": {"id": "p1", "credits": 400, "capacity": 2}},
//                        {"time": 40, "kind": "leave", "peer": {"id": "p1"}},
//                        {"time": 50, "kind": "settle", "duration": 10}]}

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bwgame/model.hpp"
#include "bwgame/simulator.hpp"

namespace bwgame {

/// Six significant digits, shortest form ("0.8", "206.099", "1e-07").
std::string format_number(double value);

GameInstance parse_instance(std::string_view json_text);
GameInstance load_instance(const std::filesystem::path& path);
std::string instance_to_json(const GameInstance& game);

struct Scenario {
  double uploader_capacity = 0.0;
  std::vector<ScenarioEvent> events;
  SimulationOptions options;
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

/// epoch_start,epoch_end,price,peer_id,allocation,utility ordered by
/// (epoch_start, peer_id). An epoch without peers is one row with empty
/// price and peer fields.
void write_timeline_csv(std::ostream& out, const TimelineRecord& timeline);

/// Same, with one extra trailing column computed per epoch.
void write_timeline_csv(std::ostream& out, const TimelineRecord& timeline, std::string_view extra_header,
                        const std::function<std::string(const Epoch&)>& extra);

/// record,time,account,counterparty,amount: "transfer" rows from the log,
/// then one "balance" row per account.
void write_ledger_csv(std::ostream& out, const Ledger& ledger);

}  // namespace bwgame
