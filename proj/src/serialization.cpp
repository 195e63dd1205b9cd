#include "rmued/serialization.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace rmued {

namespace {

template <class T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

PropId prop_from_json(const Json& j) {
  if (!j.is_string()) throw DataError("proposition must be a string");
  auto id = Alphabet::instance().parse(j.get<std::string>());
  if (!id) throw DataError("unknown proposition '" + j.get<std::string>() + "'");
  return *id;
}

Json object_to_json(const ObjectDescriptor& d) {
  Json j;
  j["kind"] = std::string(to_string(d.kind));
  j["color"] = std::string(to_string(d.color));
  if (d.is_door()) j["state"] = std::string(to_string(d.door_state));
  return j;
}

ObjectDescriptor object_from_json(const Json& j) {
  ObjectDescriptor d;
  auto kind = parse_kind(get_field<std::string>(j, "kind"));
  auto color = parse_color(get_field<std::string>(j, "color"));
  if (!kind) throw DataError("unknown object kind");
  if (!color || *color == Color::unspecified) throw DataError("object color missing or invalid");
  d.kind = *kind;
  d.color = *color;
  if (d.is_door()) {
    auto state = parse_door_state(get_field<std::string>(j, "state"));
    if (!state || *state == DoorState::unspecified) throw DataError("door state invalid");
    d.door_state = *state;
  } else if (j.contains("state")) {
    throw DataError("non-door object with a state");
  }
  return d;
}

}  // namespace

Json to_json(const RewardMachine& rm) {
  Json j;
  Json states = Json::array();
  for (int s = 0; s < rm.num_states; ++s) states.push_back(s);
  j["states"] = states;
  j["initial"] = rm.initial;
  j["accepting"] = rm.accepting;
  Json edges = Json::array();
  const Alphabet& alphabet = Alphabet::instance();
  for (const RmEdge& e : rm.edges) {
    Json negs = Json::array();
    for (PropId n : e.formula.negatives) negs.push_back(alphabet.name(n));
    edges.push_back({{"src", e.source},
                     {"dst", e.target},
                     {"pos", alphabet.name(e.formula.positive)},
                     {"negs", negs},
                     {"reward", e.reward}});
  }
  j["edges"] = edges;
  return j;
}

RewardMachine rm_from_json(const Json& j) {
  auto ids = get_field<std::vector<long long>>(j, "states");
  std::unordered_map<long long, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!index.emplace(ids[i], static_cast<int>(i)).second) throw DataError("duplicate state id");
  auto lookup = [&](long long id) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("unknown state id " + std::to_string(id));
    return it->second;
  };
  RewardMachine rm;
  rm.num_states = static_cast<int>(ids.size());
  rm.initial = lookup(get_field<long long>(j, "initial"));
  rm.accepting = lookup(get_field<long long>(j, "accepting"));
  if (!j.contains("edges") || !j["edges"].is_array()) throw DataError("missing edge list");
  for (const Json& je : j["edges"]) {
    RmEdge e;
    e.source = lookup(get_field<long long>(je, "src"));
    e.target = lookup(get_field<long long>(je, "dst"));
    if (!je.contains("pos")) throw DataError("edge without positive proposition");
    e.formula.positive = prop_from_json(je["pos"]);
    if (je.contains("negs")) {
      if (!je["negs"].is_array()) throw DataError("negs must be an array");
      for (const Json& n : je["negs"]) e.formula.negatives.push_back(prop_from_json(n));
      std::sort(e.formula.negatives.begin(), e.formula.negatives.end());
    }
    e.reward = je.contains("reward") ? get_field<double>(je, "reward") : 0.0;
    rm.edges.push_back(e);
  }
  if (auto problem = structural_problem(rm); !problem.empty())
    throw DataError("invalid reward machine: " + problem);
  return rm;
}

Json to_json(const Level& level) {
  Json j;
  j["rooms"] = level.rooms();
  j["width"] = level.width();
  j["height"] = level.height();
  j["agent"] = {{"x", level.agent.x},
                {"y", level.agent.y},
                {"dir", std::string(to_string(level.direction))}};
  Json objects = Json::array();
  for (Pos p : level.object_positions()) {
    Json o = {{"x", p.x}, {"y", p.y}};
    o.update(object_to_json(*level.object_at(p)));
    objects.push_back(o);
  }
  j["objects"] = objects;
  if (level.carried) j["carried"] = object_to_json(*level.carried);
  return j;
}

Level level_from_json(const Json& j) {
  int rooms = get_field<int>(j, "rooms");
  if (rooms != 1 && rooms != 2 && rooms != 4 && rooms != 6)
    throw DataError("room count must be 1, 2, 4 or 6");
  Level level(rooms);
  if (j.contains("width") && get_field<int>(j, "width") != level.width())
    throw DataError("width does not match room count");
  if (j.contains("height") && get_field<int>(j, "height") != level.height())
    throw DataError("height does not match room count");
  const Json& agent = j.contains("agent") ? j["agent"] : Json();
  level.agent = {get_field<int>(agent, "x"), get_field<int>(agent, "y")};
  auto dir = parse_direction(get_field<std::string>(agent, "dir"));
  if (!dir) throw DataError("unknown agent direction");
  level.direction = *dir;
  if (!j.contains("objects") || !j["objects"].is_array()) throw DataError("missing object list");
  for (const Json& o : j["objects"]) {
    Pos p{get_field<int>(o, "x"), get_field<int>(o, "y")};
    if (!level.in_bounds(p)) throw DataError("object out of bounds");
    if (level.object_at(p)) throw DataError("two objects share a cell");
    level.set_object(p, object_from_json(o));
  }
  if (j.contains("carried") && !j["carried"].is_null())
    level.carried = object_from_json(j["carried"]);
  if (auto problem = level_problem(level); !problem.empty())
    throw DataError("invalid level: " + problem);
  return level;
}

Json to_json(const Problem& problem) {
  return Json{{"rm", to_json(problem.rm)}, {"level", to_json(problem.level)}};
}

Problem problem_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rm") || !j.contains("level"))
    throw DataError("problem needs 'rm' and 'level'");
  Problem p{rm_from_json(j["rm"]), level_from_json(j["level"])};
  if (auto problem = problem_problem(p); !problem.empty()) throw DataError(problem);
  return p;
}

Json to_json(const LiteralFeatures& f) {
  return Json{{"location", f.location}, {"first", f.first}, {"second", f.second}, {"sign", f.sign}};
}

Json to_json(const PolicyGraph& graph) {
  Json j;
  Json nodes = Json::array();
  for (int i = 0; i < graph.num_nodes; ++i) nodes.push_back(i);
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (std::size_t i = 0; i < graph.reversed_edges.size(); ++i) {
    Json features = Json::array();
    for (const LiteralFeatures& f : graph.edge_features[i]) features.push_back(to_json(f));
    edges.push_back({{"src", graph.reversed_edges[i].first},
                     {"dst", graph.reversed_edges[i].second},
                     {"features", features}});
  }
  j["reversed_edges"] = edges;
  j["current_state"] = graph.current_state ? Json(*graph.current_state) : Json();
  return j;
}

Json to_json(const Observation& obs) {
  Json rows = Json::array();
  for (const auto& row : obs.grid) {
    Json r = Json::array();
    for (const auto& cell : row) r.push_back({cell[0], cell[1]});
    rows.push_back(r);
  }
  return rows;
}

Json to_json_names(const PropSet& props) {
  std::vector<std::string> names;
  const Alphabet& alphabet = Alphabet::instance();
  for (std::size_t i = props._Find_first(); i < kAlphabetSize; i = props._Find_next(i))
    names.push_back(alphabet.name(prop_id(i)));
  std::sort(names.begin(), names.end());
  return names;
}

std::string dump_line(const Json& j) { return j.dump(); }

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Problem> read_problem_set(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Problem> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      out.push_back(problem_from_json(j));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(number) + ": " + e.what());
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rmued
