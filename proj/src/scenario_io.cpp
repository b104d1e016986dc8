#include "gridclust/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace gridclust {

using nlohmann::json;

namespace {

constexpr const char* kSourceFields[] = {"S_up", "S_dn", "S_nom"};
constexpr const char* kSinkFields[] = {"D_up", "D_dn", "D_nom", "D_actual"};
constexpr const char* kStorageFields[] = {"b_dn", "b_up", "e_dn", "e_up"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const json& field(const json& obj, const char* name, const char* where) {
  if (!obj.is_object() || !obj.contains(name)) throw ScenarioError(std::string("missing field '") + name + "' in " + where);
  return obj.at(name);
}

// One CSV profile file: rows of (external node id, step, value).
using CsvTable = std::map<long long, std::map<int, double>>;

class Reader {
 public:
  Reader(const json& doc, std::filesystem::path base) : doc_(doc), base_(std::move(base)) {}

  Scenario run() {
    Scenario s;
    read_graph(s);
    read_timeline(s);
    read_units(s);
    read_profiles(s);
    validate(s);
    return s;
  }

 private:
  NodeId dense(long long ext, const char* where) const {
    auto it = dense_.find(ext);
    if (it == dense_.end()) {
      std::ostringstream os;
      os << where << " references unknown node " << ext;
      throw ScenarioError(os.str());
    }
    return it->second;
  }

  void read_graph(Scenario& s) {
    const json& g = field(doc_, "graph", "document");
    std::vector<long long> ids;
    for (const json& v : field(g, "nodes", "graph")) ids.push_back(v.get<long long>());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ScenarioError("duplicate node id in graph.nodes");
    s.external_id.assign(1, 0);
    for (long long id : ids) {
      dense_[id] = static_cast<NodeId>(s.external_id.size());
      s.external_id.push_back(id);
    }
    std::vector<Edge> edges;
    for (const json& e : field(g, "edges", "graph")) {
      Edge edge;
      edge.a = dense(field(e, "a", "edge").get<long long>(), "edge");
      edge.b = dense(field(e, "b", "edge").get<long long>(), "edge");
      edge.length = e.value("length", 1.0);
      edges.push_back(edge);
    }
    s.graph = NetworkGraph(static_cast<int>(ids.size()), std::move(edges));
  }

  void read_timeline(Scenario& s) {
    const json& t = field(doc_, "timeline", "document");
    s.timeline.tau_min = field(t, "tau_min", "timeline").get<double>();
    s.timeline.num_steps = field(t, "N_t", "timeline").get<int>();
    s.timeline.steps_per_period = field(t, "N_c", "timeline").get<int>();
    s.timeline.num_clusters = field(t, "M", "timeline").get<int>();
    s.timeline.horizon = field(t, "N_p", "timeline").get<int>();
    if (s.timeline.num_steps < 1) throw ScenarioError("N_t must be positive");
  }

  std::vector<NodeId> node_list(const json& arr, const char* where) const {
    std::vector<NodeId> out;
    for (const json& v : arr) out.push_back(dense(v.get<long long>(), where));
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
      throw ScenarioError(std::string("duplicate node in units.") + where);
    return out;
  }

  void read_units(Scenario& s) {
    const json& u = field(doc_, "units", "document");
    s.units.sources = node_list(field(u, "sources", "units"), "sources");
    s.units.sinks = node_list(field(u, "sinks", "units"), "sinks");
    if (u.contains("dual_role")) s.units.dual_role = node_list(u.at("dual_role"), "dual_role");
    for (NodeId v : s.units.sources)
      if (std::binary_search(s.units.sinks.begin(), s.units.sinks.end(), v) &&
          !std::binary_search(s.units.dual_role.begin(), s.units.dual_role.end(), v))
        throw ScenarioError("node " + std::to_string(s.external(v)) +
                            ": node is both source and sink without a dual_role declaration");

    std::vector<std::pair<NodeId, const json*>> storages;
    if (u.contains("storages"))
      for (const json& st : u.at("storages"))
        storages.emplace_back(dense(field(st, "node", "storage").get<long long>(), "storage"), &st);
    std::sort(storages.begin(), storages.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [node, st] : storages) {
      s.units.storages.push_back(node);
      StorageProfile p;
      p.node = node;
      std::vector<double>* targets[] = {&p.b_dn, &p.b_up, &p.e_dn, &p.e_up};
      for (int f = 0; f < 4; ++f)
        *targets[f] = series(field(*st, kStorageFields[f], "storage"), s.external(node), s.timeline.num_steps, kStorageFields[f]);
      p.e0 = st->value("e0", 0.0);
      s.storages.push_back(std::move(p));
    }
    if (std::adjacent_find(s.units.storages.begin(), s.units.storages.end()) != s.units.storages.end())
      throw ScenarioError("duplicate storage entry");
  }

  void read_profiles(Scenario& s) {
    const json& prof = field(doc_, "profiles", "document");
    const int n = s.timeline.num_steps;
    for (NodeId v : s.units.sources) {
      SourceProfile p;
      p.node = v;
      std::vector<double>* targets[] = {&p.up, &p.dn, &p.nom};
      for (int f = 0; f < 3; ++f) *targets[f] = profile(prof, kSourceFields[f], s.external(v), n);
      s.sources.push_back(std::move(p));
    }
    for (NodeId v : s.units.sinks) {
      SinkProfile p;
      p.node = v;
      std::vector<double>* targets[] = {&p.up, &p.dn, &p.nom, &p.actual};
      for (int f = 0; f < 4; ++f) *targets[f] = profile(prof, kSinkFields[f], s.external(v), n);
      s.sinks.push_back(std::move(p));
    }
  }

  std::vector<double> profile(const json& prof, const char* name, long long ext, int n) {
    const json& section = field(prof, name, "profiles");
    if (section.is_object() && section.contains("csv")) return series(section, ext, n, name);
    const std::string key = std::to_string(ext);
    if (!section.is_object() || !section.contains(key)) {
      std::ostringstream os;
      os << "profile " << name << " missing for node " << ext;
      throw ScenarioError(os.str());
    }
    return series(section.at(key), ext, n, name);
  }

  // Either an inline array or {"csv": "<file>"}.
  std::vector<double> series(const json& v, long long ext, int n, const char* name) {
    std::vector<double> out;
    if (v.is_array()) {
      for (const json& x : v) out.push_back(x.get<double>());
    } else if (v.is_object() && v.contains("csv")) {
      const CsvTable& table = csv(v.at("csv").get<std::string>());
      auto it = table.find(ext);
      if (it != table.end()) {
        for (const auto& [k, value] : it->second) {
          if (k != static_cast<int>(out.size())) break;
          out.push_back(value);
        }
      }
    } else {
      throw ScenarioError(std::string("profile ") + name + " must be an array or a csv reference");
    }
    if (static_cast<int>(out.size()) != n) {
      std::ostringstream os;
      os << "profile " << name << " for node " << ext << " has " << out.size() << " entries, expected N_t=" << n;
      throw ScenarioError(os.str());
    }
    return out;
  }

  const CsvTable& csv(const std::string& rel) {
    auto it = csv_cache_.find(rel);
    if (it != csv_cache_.end()) return it->second;
    std::istringstream in(read_file(base_ / rel));
    CsvTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (lineno == 1) {
        if (line != "node,k,value") throw ScenarioError(rel + ": header must be 'node,k,value'");
        continue;
      }
      std::istringstream row(line);
      long long node = 0;
      int k = 0;
      double value = 0.0;
      char c1 = 0, c2 = 0;
      if (!(row >> node >> c1 >> k >> c2 >> value) || c1 != ',' || c2 != ',')
        throw ScenarioError(rel + ": malformed row " + std::to_string(lineno));
      if (!table[node].emplace(k, value).second)
        throw ScenarioError(rel + ": duplicate entry at row " + std::to_string(lineno));
    }
    return csv_cache_.emplace(rel, std::move(table)).first->second;
  }

  const json& doc_;
  std::filesystem::path base_;
  std::map<long long, NodeId> dense_;
  std::map<std::string, CsvTable> csv_cache_;
};

json ext_list(const Scenario& s, const std::vector<NodeId>& nodes) {
  json arr = json::array();
  for (NodeId v : nodes) arr.push_back(s.external(v));
  return arr;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  try {
    return Reader(doc, base_dir).run();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("schema error: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  json nodes = json::array(), edges = json::array();
  for (NodeId v = 1; v <= s.graph.num_nodes(); ++v) nodes.push_back(s.external(v));
  for (const Edge& e : s.graph.edges()) edges.push_back({{"a", s.external(e.a)}, {"b", s.external(e.b)}, {"length", e.length}});
  doc["graph"] = {{"nodes", nodes}, {"edges", edges}};

  json storages = json::array();
  for (const StorageProfile& p : s.storages)
    storages.push_back({{"node", s.external(p.node)}, {"b_dn", p.b_dn}, {"b_up", p.b_up}, {"e_dn", p.e_dn}, {"e_up", p.e_up}, {"e0", p.e0}});
  doc["units"] = {{"sources", ext_list(s, s.units.sources)},
                  {"sinks", ext_list(s, s.units.sinks)},
                  {"storages", storages}};
  if (!s.units.dual_role.empty()) doc["units"]["dual_role"] = ext_list(s, s.units.dual_role);

  const Timeline& t = s.timeline;
  doc["timeline"] = {{"tau_min", t.tau_min}, {"N_t", t.num_steps}, {"N_c", t.steps_per_period}, {"M", t.num_clusters}, {"N_p", t.horizon}};

  json prof = json::object();
  for (const SourceProfile& p : s.sources) {
    const std::string key = std::to_string(s.external(p.node));
    prof["S_up"][key] = p.up;
    prof["S_dn"][key] = p.dn;
    prof["S_nom"][key] = p.nom;
  }
  for (const SinkProfile& p : s.sinks) {
    const std::string key = std::to_string(s.external(p.node));
    prof["D_up"][key] = p.up;
    prof["D_dn"][key] = p.dn;
    prof["D_nom"][key] = p.nom;
    prof["D_actual"][key] = p.actual;
  }
  for (const char* f : kSourceFields)
    if (!prof.contains(f)) prof[f] = json::object();
  for (const char* f : kSinkFields)
    if (!prof.contains(f)) prof[f] = json::object();
  doc["profiles"] = prof;
  return doc.dump(1);
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << serialize_scenario(scenario) << '\n';
}

}  // namespace gridclust
