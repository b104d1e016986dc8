#include "gridclust/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace gridclust {

namespace {

constexpr int kRegionStart[] = {1, 31, 60, 90, 119};
constexpr int kRegionSources[] = {14, 13, 14, 13};
constexpr int kSteps = 288;
constexpr int kPeriod = 72;
constexpr double kTau = 5.0;

// Last-period envelope of region A, in MW summed over the region.
constexpr double kCapA = 9.6;
constexpr double kBandA = 10.0;
constexpr double kRampStart = 9.5;
constexpr double kRampEnd = 9.95;

double round4(double x) { return std::round(x * 1e4) / 1e4; }

int region_of(NodeId v) {
  int r = 0;
  while (v >= kRegionStart[r + 1]) ++r;
  return r;
}

double hour(int k) { return k * kTau / 60.0; }

// Daily load shape with the evening peak at 19:00.
double load_shape(int k) { return 0.75 + 0.25 * std::cos(2.0 * std::numbers::pi * (hour(k) - 19.0) / 24.0); }

// Daytime-only availability between 06:00 and 21:00.
double solar_shape(int k) {
  const double h = hour(k);
  if (h <= 6.0 || h >= 21.0) return 0.0;
  return std::sin(std::numbers::pi * (h - 6.0) / 15.0);
}

std::vector<Edge> build_edges(std::mt19937_64& rng) {
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;
  auto add = [&](NodeId a, NodeId b, double length) {
    if (a == b) return;
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) return;
    edges.push_back({key.first, key.second, length});
  };
  auto line_length = [&] { return 0.5 + std::floor(uniform01(rng) * 16.0) / 10.0; };

  for (int r = 0; r < 4; ++r) {
    const int lo = kRegionStart[r], hi = kRegionStart[r + 1] - 1;
    for (NodeId v = lo + 1; v <= hi; ++v) {
      const NodeId parent = std::max(lo, v - 1 - static_cast<int>(uniform01(rng) * 4.0));
      add(parent, v, line_length());
    }
    for (int extra = 0; extra < 15; ++extra) {
      const NodeId v = lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
      const NodeId w = v + 2 + static_cast<int>(uniform01(rng) * 5.0);
      if (w <= hi) add(v, w, line_length());
    }
  }
  for (int r = 0; r < 4; ++r) {
    const int s = (r + 1) % 4;
    for (int tie = 0; tie < 2; ++tie) {
      const NodeId a = kRegionStart[r] + static_cast<int>(uniform01(rng) * (kRegionStart[r + 1] - kRegionStart[r]));
      const NodeId b = kRegionStart[s] + static_cast<int>(uniform01(rng) * (kRegionStart[s + 1] - kRegionStart[s]));
      add(a, b, 4.0);
    }
  }
  return edges;
}

}  // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> bounded_random_walk(const std::vector<double>& lo, const std::vector<double>& hi, double start,
                                        double step_fraction, std::mt19937_64& rng) {
  std::vector<double> out(lo.size());
  double x = start;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (k > 0) x += (2.0 * uniform01(rng) - 1.0) * step_fraction * (hi[k] - lo[k]);
    x = std::clamp(x, lo[k], hi[k]);
    out[k] = x;
  }
  return out;
}

void regenerate_actuals(Scenario& s, std::uint64_t seed, double step_fraction) {
  std::mt19937_64 rng(seed);
  for (SinkProfile& p : s.sinks) {
    std::vector<double> lo(p.nom.size()), hi(p.nom.size());
    for (std::size_t k = 0; k < p.nom.size(); ++k) {
      lo[k] = p.dn[k] - p.nom[k];
      hi[k] = p.up[k] - p.nom[k];
    }
    const std::vector<double> dev = bounded_random_walk(lo, hi, 0.0, step_fraction, rng);
    for (std::size_t k = 0; k < p.nom.size(); ++k) p.actual[k] = p.nom[k] + std::clamp(round4(dev[k]), lo[k], hi[k]);
  }
}

Scenario make_synthetic_day(const SyntheticDayOptions& options) {
  std::mt19937_64 rng(options.seed);
  Scenario s;
  const int V = kRegionStart[4] - 1;
  s.graph = NetworkGraph(V, build_edges(rng));
  s.external_id.resize(static_cast<std::size_t>(V) + 1);
  for (NodeId v = 0; v <= V; ++v) s.external_id[static_cast<std::size_t>(v)] = v;
  s.timeline = {kTau, kSteps, kPeriod, 4, 15};

  for (int r = 0; r < 4; ++r) {
    std::vector<NodeId> nodes;
    for (NodeId v = kRegionStart[r]; v < kRegionStart[r + 1]; ++v) nodes.push_back(v);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    nodes.resize(static_cast<std::size_t>(kRegionSources[r]));
    s.units.sources.insert(s.units.sources.end(), nodes.begin(), nodes.end());
  }
  std::sort(s.units.sources.begin(), s.units.sources.end());
  for (NodeId v = 1; v <= V; ++v)
    if (!std::binary_search(s.units.sources.begin(), s.units.sources.end(), v)) s.units.sinks.push_back(v);
  s.units.storages = s.units.sources;

  const bool deficit = options.deficit_in_last_period;
  const int last = kSteps - kPeriod;
  auto in_deficit = [&](NodeId v, int k) { return deficit && region_of(v) == 0 && k >= last; };

  int sources_a = 0;
  for (NodeId v : s.units.sources) sources_a += region_of(v) == 0;

  for (NodeId v : s.units.sources) {
    SourceProfile p;
    p.node = v;
    const double base = round4(20.0 + 60.0 * uniform01(rng));
    const bool solar = uniform01(rng) < 0.3;
    const double cap = round4(6.0 + 4.0 * uniform01(rng));
    for (int k = 0; k < kSteps; ++k) {
      const double nom = round4(base * load_shape(k));
      const double avail = round4(cap * (solar ? solar_shape(k) : 1.0));
      const double up = in_deficit(v, k) ? round4(kCapA / sources_a) : avail;
      p.nom.push_back(nom);
      p.up.push_back(nom + up);
      p.dn.push_back(nom - avail);
    }
    s.sources.push_back(std::move(p));

    StorageProfile b;
    b.node = v;
    for (int k = 0; k < kSteps; ++k) {
      const double power = in_deficit(v, k) ? 0.0 : 2.0;
      b.b_up.push_back(power);
      b.b_dn.push_back(-power);
      b.e_up.push_back(2.0);
      b.e_dn.push_back(-2.0);
    }
    s.storages.push_back(std::move(b));
  }

  std::vector<double> sink_base;
  double base_a = 0.0;
  for (NodeId v : s.units.sinks) {
    sink_base.push_back(round4(10.0 + 30.0 * uniform01(rng)));
    if (region_of(v) == 0) base_a += sink_base.back();
  }
  for (std::size_t j = 0; j < s.units.sinks.size(); ++j) {
    const NodeId v = s.units.sinks[j];
    SinkProfile p;
    p.node = v;
    const double share = sink_base[j] / base_a;
    for (int k = 0; k < kSteps; ++k) {
      const double nom = round4(sink_base[j] * load_shape(k));
      const double band = in_deficit(v, k) ? round4(share * kBandA) : round4(0.08 * nom);
      p.nom.push_back(nom);
      p.up.push_back(nom + band);
      p.dn.push_back(nom - band);
    }
    p.actual = p.nom;
    s.sinks.push_back(std::move(p));
  }

  regenerate_actuals(s, options.seed + 1);
  if (deficit) {
    for (std::size_t j = 0; j < s.sinks.size(); ++j) {
      SinkProfile& p = s.sinks[j];
      if (region_of(p.node) != 0) continue;
      const double share = sink_base[j] / base_a;
      for (int k = last; k < kSteps; ++k) {
        const double ramp = kRampStart + (kRampEnd - kRampStart) * (k - last) / (kPeriod - 1.0);
        const auto kk = static_cast<std::size_t>(k);
        p.actual[kk] = p.nom[kk] + std::min(share * ramp, p.up[kk] - p.nom[kk]);
      }
    }
  }
  validate(s);
  return s;
}

}  // namespace gridclust
