#include <doctest.h>

#include "gridclust/matpower.hpp"

using namespace gridclust;

namespace {

// Five buses in the public case format, with a parallel circuit, an
// out-of-service branch and an out-of-service generator.
const char* kCase = R"(function mpc = case5
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
%	bus_i	type	Pd	Qd	Gs	Bs	area	Vm	Va	baseKV	zone	Vmax	Vmin
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	300	98.61	0	0	1	1	0	230	1	1.1	0.9;
	3	2	300	98.61	0	0	1	1	0	230	1	1.1	0.9;
	4	1	400	131.47	0	0	1	1	0	230	1	1.1	0.9;
	10	2	0	0	0	0	1	1	0	230	1	1.1	0.9;
];
%% generator data
%	bus	Pg	Qg	Qmax	Qmin	Vg	mBase	status	Pmax	Pmin
mpc.gen = [
	1	40	0	30	-30	1	100	1	40	0;
	1	170	0	127.5	-127.5	1	100	1	170	0;
	3	323.49	0	390	-390	1	100	1	520	0;
	4	0	0	150	-150	1	100	0	200	0;
	10	466.51	0	450	-450	1	100	1	600	0;
];
%% branch data
%	fbus	tbus	r	x	b	rateA	rateB	rateC	ratio	angle	status	angmin	angmax
mpc.branch = [
	1	2	0.00281	0.0281	0.00712	400	400	400	0	0	1	-360	360;
	1	4	0.00304	0.0304	0.00658	0	0	0	0	0	1	-360	360;
	1	10	0.00064	0.0064	0.03126	0	0	0	0	0	1	-360	360;
	2	3	0.00108	0.0108	0.01852	0	0	0	0	0	1	-360	360;
	3	4	0.00297	0.0297	0.00674	0	0	0	0	0	1	-360	360;
	4	10	0.00297	0.0297	0.00674	0	0	0	0	0	1	-360	360;
	10	4	0.00297	0.0200	0.00674	0	0	0	0	0	1	-360	360;
	2	4	0.00297	0.0100	0.00674	0	0	0	0	0	0	-360	360;
];
)";

MatpowerOptions small_timeline() {
  MatpowerOptions o;
  o.timeline = Timeline{5.0, 4, 4, 2, 2};
  return o;
}

}  // namespace

TEST_CASE("buses, in-service lines and units of a MATPOWER case") {
  const Scenario s = import_matpower(kCase, small_timeline());
  CHECK(s.graph.num_nodes() == 5);
  CHECK(s.graph.num_edges() == 6);  // parallel circuit merged, one branch out of service
  CHECK(s.external_id == std::vector<long long>{0, 1, 2, 3, 4, 10});
  const auto e = s.graph.edge_index(4, 5);  // 4-10, the shorter circuit wins
  REQUIRE(e);
  CHECK(s.graph.edge(*e).length == doctest::Approx(0.02));
  CHECK(!s.graph.edge_index(2, 4));
  CHECK(s.units.sources == std::vector<NodeId>{1, 3, 5});  // bus 4's unit is out of service
  CHECK(s.units.sinks == std::vector<NodeId>{2, 3, 4});
  CHECK(s.units.dual_role == std::vector<NodeId>{3});
  CHECK(s.units.storages.empty());
}

TEST_CASE("flat profiles follow the bands and the generator limits") {
  const Scenario s = import_matpower(kCase, small_timeline());
  const SourceProfile& g1 = s.sources[0];  // two units, PG 210, PMAX 210
  CHECK(g1.nom[0] == doctest::Approx(210.0));
  CHECK(g1.up[3] == doctest::Approx(210.0));
  CHECK(g1.dn[0] == doctest::Approx(168.0));
  const SinkProfile& d4 = s.sinks[2];
  CHECK(d4.nom[1] == doctest::Approx(400.0));
  CHECK(d4.up[1] == doctest::Approx(440.0));
  CHECK(d4.dn[1] == doctest::Approx(360.0));
  CHECK(d4.actual == d4.nom);
  CHECK(s.timeline.num_clusters == 2);
}

TEST_CASE("malformed cases are rejected") {
  CHECK_THROWS_AS(import_matpower("mpc.bus = [ 1 3 0; ];", small_timeline()), ScenarioError);
  CHECK_THROWS_AS(import_matpower(std::string(kCase).replace(std::string(kCase).find("323.49"), 6, "3x3.49"),
                                  small_timeline()),
                  ScenarioError);
  CHECK_THROWS_AS(import_matpower_file("/nonexistent/case.m"), ScenarioError);
}
