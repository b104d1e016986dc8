#include "gridclust/matpower.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gridclust/scenario_io.hpp"

namespace gridclust {
namespace {

using Matrix = std::vector<std::vector<double>>;

// Rows of `mpc.<name> = [ ... ];`, with `%` comments stripped.
Matrix read_matrix(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  std::size_t at = 0;
  for (;;) {
    at = text.find(key, at);
    if (at == std::string::npos) throw ScenarioError("MATPOWER case has no " + key + " matrix");
    const std::size_t after = at + key.size();
    const std::size_t eq = text.find_first_not_of(" \t", after);
    if (eq != std::string::npos && text[eq] == '=') break;
    at = after;
  }
  const std::size_t open = text.find('[', at), close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos) throw ScenarioError(key + " is not a bracketed matrix");
  Matrix rows;
  std::istringstream body(text.substr(open + 1, close - open - 1));
  std::string line;
  while (std::getline(body, line)) {
    if (const auto pct = line.find('%'); pct != std::string::npos) line.erase(pct);
    std::replace(line.begin(), line.end(), ';', '\n');
    std::istringstream chunks(line);
    std::string chunk;
    while (std::getline(chunks, chunk)) {
      std::replace(chunk.begin(), chunk.end(), ',', ' ');
      std::istringstream in(chunk);
      std::vector<double> row;
      for (std::string tok; in >> tok;) {
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
          throw ScenarioError(key + ": bad number '" + tok + "'");
        row.push_back(v);
      }
      if (!row.empty()) rows.push_back(std::move(row));
    }
  }
  return rows;
}

void need_columns(const Matrix& m, std::size_t n, const std::string& name) {
  for (const auto& row : m)
    if (row.size() < n) throw ScenarioError("mpc." + name + " rows need at least " + std::to_string(n) + " columns");
}

}  // namespace

Scenario import_matpower(const std::string& text, const MatpowerOptions& opt) {
  const Matrix bus = read_matrix(text, "bus"), gen = read_matrix(text, "gen"), branch = read_matrix(text, "branch");
  need_columns(bus, 3, "bus");
  need_columns(gen, 10, "gen");
  need_columns(branch, 4, "branch");
  const int nt = opt.timeline.num_steps;

  std::vector<long long> nodes;
  std::map<long long, double> pd;
  for (const auto& r : bus) {
    const auto id = std::llround(r[0]);
    nodes.push_back(id);
    pd[id] = r[2];
  }
  struct Gen {
    double pg = 0.0, pmax = 0.0, pmin = 0.0;
  };
  std::map<long long, Gen> gens;
  for (const auto& r : gen) {
    if (r[7] <= 0.0) continue;  // GEN_STATUS
    Gen& g = gens[std::llround(r[0])];
    g.pg += r[1];
    g.pmax += r[8];
    g.pmin += r[9];
  }
  std::map<std::pair<long long, long long>, double> lines;
  for (const auto& r : branch) {
    if (r.size() > 10 && r[10] <= 0.0) continue;  // BR_STATUS
    auto a = std::llround(r[0]), b = std::llround(r[1]);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double len = std::max(std::abs(r[3]), opt.min_length);
    auto [it, fresh] = lines.emplace(std::make_pair(a, b), len);
    if (!fresh) it->second = std::min(it->second, len);
  }

  using nlohmann::json;
  json edges = json::array();
  for (const auto& [ab, len] : lines) edges.push_back({{"a", ab.first}, {"b", ab.second}, {"length", len}});
  json sources = json::array(), sinks = json::array(), dual = json::array();
  json s_up, s_dn, s_nom, d_up, d_dn, d_nom, d_act;
  auto flat = [nt](double v) { return std::vector<double>(static_cast<std::size_t>(nt), v); };
  for (const auto& [id, g] : gens) {
    const std::string key = std::to_string(id);
    const double band = opt.source_band * std::abs(g.pg);
    const double hi = std::max(g.pg, std::min(g.pmax, g.pg + band));
    const double lo = std::min(g.pg, std::max(g.pmin, g.pg - band));
    sources.push_back(id);
    s_up[key] = flat(hi);
    s_dn[key] = flat(lo);
    s_nom[key] = flat(g.pg);
  }
  for (const auto& [id, load] : pd) {
    if (!(load > 0.0)) continue;
    const std::string key = std::to_string(id);
    sinks.push_back(id);
    if (gens.count(id)) dual.push_back(id);
    d_up[key] = flat(load * (1.0 + opt.load_band));
    d_dn[key] = flat(load * (1.0 - opt.load_band));
    d_nom[key] = flat(load);
    d_act[key] = flat(load);
  }
  const Timeline& t = opt.timeline;
  json doc = {{"graph", {{"nodes", nodes}, {"edges", edges}}},
              {"units", {{"sources", sources}, {"sinks", sinks}, {"storages", json::array()}, {"dual_role", dual}}},
              {"timeline", {{"tau_min", t.tau_min}, {"N_t", t.num_steps}, {"N_c", t.steps_per_period},
                            {"M", t.num_clusters}, {"N_p", t.horizon}}},
              {"profiles", {{"S_up", s_up}, {"S_dn", s_dn}, {"S_nom", s_nom}, {"D_up", d_up}, {"D_dn", d_dn},
                            {"D_nom", d_nom}, {"D_actual", d_act}}}};
  return parse_scenario(doc.dump());
}

Scenario import_matpower_file(const std::filesystem::path& path, const MatpowerOptions& options) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return import_matpower(os.str(), options);
}

}  // namespace gridclust
