#include "bwgame/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "bwgame/errors.hpp"

namespace bwgame {

using nlohmann::json;

std::string format_number(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

double number_field(const json& obj, const char* key, std::string_view where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ValidationError(std::string(where) + ": field '" + key + "' must be a number");
  }
  return it->get<double>();
}

PeerId id_field(const json& obj, std::string_view where) {
  const auto it = obj.find("id");
  if (it != obj.end()) {
    if (it->is_string()) return PeerId(it->get<std::string>());
    if (it->is_number_integer()) return PeerId(std::to_string(it->get<long long>()));
  }
  throw ValidationError(std::string(where) + ": field 'id' must be a string or an integer");
}

PeerProfile parse_peer(const json& obj, std::string_view where) {
  if (!obj.is_object()) throw ValidationError(std::string(where) + ": peer must be an object");
  PeerId id = id_field(obj, where);
  const double credits = number_field(obj, "credits", where);
  const double capacity = number_field(obj, "capacity", where);
  try {
    return PeerProfile(std::move(id), credits, capacity);
  } catch (const DomainError& e) {
    throw ValidationError(std::string(where) + ": " + e.what());
  }
}

json peer_json(const PeerProfile& p) {
  return json{{"id", p.id().str()}, {"credits", p.credits()}, {"capacity", p.capacity()}};
}

}  // namespace

GameInstance parse_instance(std::string_view json_text) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) throw ValidationError("instance: top level must be an object");
  const double u = number_field(doc, "uploader_capacity", "instance");
  const auto peers_it = doc.find("peers");
  if (peers_it == doc.end() || !peers_it->is_array()) throw ValidationError("instance: 'peers' must be an array");
  std::vector<PeerProfile> peers;
  for (std::size_t i = 0; i < peers_it->size(); ++i) {
    peers.push_back(parse_peer((*peers_it)[i], "instance peer " + std::to_string(i)));
  }
  try {
    return GameInstance(u, std::move(peers));
  } catch (const DomainError& e) {
    throw ValidationError(std::string("instance: ") + e.what());
  }
}

GameInstance load_instance(const std::filesystem::path& path) { return parse_instance(read_file(path)); }

std::string instance_to_json(const GameInstance& game) {
  json peers = json::array();
  for (const auto& p : game.peers()) peers.push_back(peer_json(p));
  return json{{"uploader_capacity", game.uploader_capacity()}, {"peers", peers}}.dump(2);
}

Scenario parse_scenario(std::string_view json_text) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) throw ValidationError("scenario: top level must be an object");
  Scenario s;
  s.uploader_capacity = number_field(doc, "uploader_capacity", "scenario");
  if (doc.contains("end_time")) s.options.end_time = number_field(doc, "end_time", "scenario");
  if (doc.contains("uploader_credits")) s.options.uploader_credits = number_field(doc, "uploader_credits", "scenario");
  if (const auto it = doc.find("uploader_id"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("scenario: 'uploader_id' must be a string");
    s.options.uploader_id = PeerId(it->get<std::string>());
  }
  const auto events_it = doc.find("events");
  if (events_it == doc.end() || !events_it->is_array()) throw ValidationError("scenario: 'events' must be an array");

  for (std::size_t i = 0; i < events_it->size(); ++i) {
    const json& e = (*events_it)[i];
    const std::string where = "scenario event " + std::to_string(i);
    if (!e.is_object()) throw ValidationError(where + ": must be an object");
    const double time = number_field(e, "time", where);
    const auto kind_it = e.find("kind");
    if (kind_it == e.end() || !kind_it->is_string()) throw ValidationError(where + ": 'kind' must be a string");
    const std::string kind = kind_it->get<std::string>();
    if (kind == "join") {
      const auto peer_it = e.find("peer");
      if (peer_it == e.end()) throw ValidationError(where + ": join needs a 'peer'");
      s.events.push_back({time, Join{parse_peer(*peer_it, where)}});
    } else if (kind == "leave") {
      const auto peer_it = e.find("peer");
      if (peer_it != e.end() && peer_it->is_object()) {
        s.events.push_back({time, Leave{id_field(*peer_it, where)}});
      } else {
        s.events.push_back({time, Leave{id_field(json{{"id", e.value("peer_id", json())}}, where)}});
      }
    } else if (kind == "settle") {
      const double duration = e.contains("duration") ? number_field(e, "duration", where) : 0.0;
      s.events.push_back({time, Settle{duration}});
    } else {
      throw ValidationError(where + ": unknown kind '" + kind + "'");
    }
  }
  validate_scenario(s.uploader_capacity, s.events, s.options);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const Scenario& scenario) {
  json events = json::array();
  for (const auto& e : scenario.events) {
    json j{{"time", e.time}};
    if (const auto* join = std::get_if<Join>(&e.kind)) {
      j["kind"] = "join";
      j["peer"] = peer_json(join->peer);
    } else if (const auto* leave = std::get_if<Leave>(&e.kind)) {
      j["kind"] = "leave";
      j["peer"] = json{{"id", leave->peer.str()}};
    } else {
      j["kind"] = "settle";
      j["duration"] = std::get<Settle>(e.kind).duration;
    }
    events.push_back(std::move(j));
  }
  json doc{{"uploader_capacity", scenario.uploader_capacity}, {"events", events}};
  if (scenario.options.end_time) doc["end_time"] = *scenario.options.end_time;
  if (scenario.options.uploader_id.str() != "uploader") doc["uploader_id"] = scenario.options.uploader_id.str();
  if (scenario.options.uploader_credits != 0.0) doc["uploader_credits"] = scenario.options.uploader_credits;
  return doc.dump(2);
}

void write_timeline_csv(std::ostream& out, const TimelineRecord& timeline) {
  write_timeline_csv(out, timeline, {}, {});
}

void write_timeline_csv(std::ostream& out, const TimelineRecord& timeline, std::string_view extra_header,
                        const std::function<std::string(const Epoch&)>& extra) {
  out << "epoch_start,epoch_end,price,peer_id,allocation,utility";
  if (extra) out << ',' << extra_header;
  out << '\n';
  for (const auto& epoch : timeline.epochs) {
    const std::string head = format_number(epoch.start) + ',' + format_number(epoch.end) + ',';
    const std::string tail = extra ? ',' + extra(epoch) : std::string();
    if (!epoch.equilibrium) {
      out << head << ",,," << tail << '\n';
      continue;
    }
    std::vector<const PeerShare*> rows;
    for (const auto& s : epoch.equilibrium->shares) rows.push_back(&s);
    std::stable_sort(rows.begin(), rows.end(), [](const PeerShare* a, const PeerShare* b) { return a->id < b->id; });
    for (const PeerShare* s : rows) {
      out << head << format_number(epoch.equilibrium->price) << ',' << s->id.str() << ','
          << format_number(s->bandwidth) << ',' << format_number(s->utility) << tail << '\n';
    }
  }
}

void write_ledger_csv(std::ostream& out, const Ledger& ledger) {
  out << "record,time,account,counterparty,amount\n";
  for (const auto& t : ledger.log()) {
    out << "transfer," << format_number(t.time) << ',' << t.payer.str() << ',' << t.payee.str() << ','
        << format_number(t.amount) << '\n';
  }
  for (const auto& [id, balance] : ledger.balances()) {
    out << "balance,," << id.str() << ",," << format_number(balance) << '\n';
  }
}

}  // namespace bwgame
