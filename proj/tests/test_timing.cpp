#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "twa/circuits.hpp"
#include "twa/timing.hpp"

using namespace twa;

namespace {

std::string path_key(const TimingPath& p) {
  std::string key;
  switch (p.launch.kind) {
    case EndpointKind::PrimaryInput: key = "pi " + p.launch.id; break;
    case EndpointKind::FlipFlop: key = "ff " + p.launch.id; break;
    case EndpointKind::PrimaryOutput: key = "po " + p.launch.id; break;
  }
  for (const auto& s : p.steps) key += "|" + s.gate_id + ":" + std::to_string(s.input_pin);
  switch (p.capture.kind) {
    case EndpointKind::PrimaryInput: key += "|pi " + p.capture.id; break;
    case EndpointKind::FlipFlop: key += "|ff " + p.capture.id; break;
    case EndpointKind::PrimaryOutput: key += "|po " + p.capture.id; break;
  }
  return key;
}

struct RefPath {
  Ps total = 0;  // launch offset included
  std::string key;
  TimingPath path;
};

// Exhaustive source-to-capture walk, no pruning. Keeps the random-DAG
// comparison independent of the engine's best-first machinery.
std::vector<RefPath> brute_force_paths(const Netlist& n, const DelayLibrary& lib) {
  std::map<std::string, const GateInstance*> driver;
  for (const auto& g : n.gates) driver[g.output_net] = &g;
  std::map<std::string, std::vector<std::pair<const GateInstance*, int>>> readers;
  for (const auto& g : n.gates) {
    for (std::size_t p = 0; p < g.input_nets.size(); ++p) {
      readers[g.input_nets[p]].push_back({&g, static_cast<int>(p)});
    }
  }
  std::set<std::string> po(n.primary_outputs.begin(), n.primary_outputs.end());
  std::map<std::string, std::string> ff_of_d;
  for (const auto& ff : n.flipflops) ff_of_d[ff.d_net] = ff.id;

  std::vector<RefPath> out;
  std::vector<PathStep> steps;
  auto walk = [&](auto&& self, const PathEndpoint& launch, const std::string& launch_net,
                  const std::string& net, Ps accum) -> void {
    auto capture_at = [&](const PathEndpoint& cap) {
      RefPath rp;
      rp.total = accum;
      rp.path.launch = launch;
      rp.path.capture = cap;
      rp.path.launch_net = launch_net;
      rp.path.steps = steps;
      rp.path.nominal_delay =
          accum - (launch.kind == EndpointKind::FlipFlop ? lib.ff_clk_to_q : 0);
      rp.key = path_key(rp.path);
      out.push_back(rp);
    };
    if (po.count(net)) capture_at({EndpointKind::PrimaryOutput, net});
    auto fit = ff_of_d.find(net);
    if (fit != ff_of_d.end()) capture_at({EndpointKind::FlipFlop, fit->second});
    auto rit = readers.find(net);
    if (rit == readers.end()) return;
    for (const auto& [g, pin] : rit->second) {
      steps.push_back({g->id, pin, g->output_net});
      self(self, launch, launch_net, g->output_net, accum + lib.gate_delay(*g));
      steps.pop_back();
    }
  };
  for (const auto& pi : n.primary_inputs) {
    walk(walk, {EndpointKind::PrimaryInput, pi}, pi, pi, 0);
  }
  for (const auto& ff : n.flipflops) {
    walk(walk, {EndpointKind::FlipFlop, ff.id}, ff.q_net, ff.q_net, lib.ff_clk_to_q);
  }
  std::stable_sort(out.begin(), out.end(), [](const RefPath& a, const RefPath& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.key < b.key;
  });
  return out;
}

}  // namespace

TEST_CASE("gate delay resolution") {
  DelayLibrary lib = demo_delay_library();
  GateInstance inv{"u1", CellKind::INV, {"a"}, "y"};
  CHECK(lib.gate_delay(inv) == 10);
  lib.overrides["u1"] = 42;
  CHECK(lib.gate_delay(inv) == 42);
  GateInstance other{"u2", CellKind::INV, {"a"}, "z"};
  CHECK(lib.gate_delay(other) == 10);

  DelayLibrary empty;
  try {
    empty.gate_delay(inv);
    FAIL("expected MissingDelay");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDelay);
  }
}

TEST_CASE("chain arrival bookkeeping") {
  Netlist chain = four_gate_chain();

  SUBCASE("pure combinational sum with zeroed clocking terms") {
    DelayLibrary lib = demo_delay_library();
    lib.ff_setup = 0;
    lib.ff_clk_to_q = 0;
    StaResult sta = run_sta(chain, lib, {1000, 0.1});
    CHECK(sta.critical_delay == 60);  // 10 + 20 + 20 + 10
    CHECK(sta.arrival.at("n1") == 10);
    CHECK(sta.arrival.at("n2") == 30);
    CHECK(sta.arrival.at("y4") == 60);
    CHECK(sta.critical_path.nominal_delay == 60);
    CHECK(sta.critical_path.slack == 1000 - 60);
  }
  SUBCASE("clk-to-q shifts launches, setup tightens slack") {
    DelayLibrary lib = demo_delay_library();  // setup 20, clk_to_q 15
    StaResult sta = run_sta(chain, lib, {1000, 0.1});
    CHECK(sta.arrival.at("qa") == 15);
    CHECK(sta.arrival.at("y4") == 75);
    CHECK(sta.critical_delay == 75);
    const TimingPath& p = sta.critical_path;
    CHECK(p.launch.kind == EndpointKind::FlipFlop);
    CHECK(p.launch.id == "ff_a");
    CHECK(p.capture.kind == EndpointKind::FlipFlop);
    CHECK(p.capture.id == "ff_b");
    CHECK(p.launch_net == "qa");
    CHECK(p.nominal_delay == 60);  // clocking terms excluded
    CHECK(p.slack == 1000 - 75 - 20);
    REQUIRE(p.steps.size() == 4);
    CHECK(p.steps[0].gate_id == "inv1");
    CHECK(p.steps[1].gate_id == "nand1");
    CHECK(p.steps[1].input_pin == 0);
    CHECK(p.steps[3].output_net == "y4");
    CHECK(p.nets() == std::vector<std::string>{"qa", "n1", "n2", "n3", "y4"});
    CHECK(p.contains_net("n2"));
    CHECK_FALSE(p.contains_net("b"));
  }
  SUBCASE("period must be positive") {
    DelayLibrary lib = demo_delay_library();
    try {
      run_sta(chain, lib, {0, 0.1});
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
}

TEST_CASE("diamond reconvergence") {
  Netlist d = diamond();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(d, lib, {100, 0.1});
  CHECK(sta.arrival.at("n1") == 10);
  CHECK(sta.arrival.at("n2") == 5);
  CHECK(sta.arrival.at("y") == 30);
  CHECK(sta.critical_delay == 30);

  SUBCASE("margin widens the slow branch in") {
    auto one = enumerate_near_critical_paths(d, lib, sta, 0.0, 8);
    REQUIRE(one.size() == 1);
    CHECK(one[0].steps[0].gate_id == "inv1");
    CHECK(one[0].steps[1].input_pin == 0);

    auto both = enumerate_near_critical_paths(d, lib, sta, 0.2, 8);
    REQUIRE(both.size() == 2);
    CHECK(both[0].nominal_delay == 30);
    CHECK(both[1].nominal_delay == 25);
    CHECK(both[1].steps[0].gate_id == "buf1");
    CHECK(both[1].steps[1].input_pin == 1);
  }
  SUBCASE("equal delays order by path key") {
    DelayLibrary tied = lib;
    tied.overrides["inv1"] = 5;  // both branches now 25
    StaResult tsta = run_sta(d, tied, {100, 0.1});
    auto paths = enumerate_near_critical_paths(d, tied, tsta, 0.0, 8);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].steps[0].gate_id == "buf1");  // "buf1" < "inv1"
    CHECK(paths[1].steps[0].gate_id == "inv1");
  }
  SUBCASE("limit truncates the ranking") {
    auto paths = enumerate_near_critical_paths(d, lib, sta, 1.0 - 1e-9, 1);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].nominal_delay == 30);
  }
  SUBCASE("margin must lie in [0, 1)") {
    CHECK_THROWS_AS(enumerate_near_critical_paths(d, lib, sta, -0.1, 8), Error);
    CHECK_THROWS_AS(enumerate_near_critical_paths(d, lib, sta, 1.0, 8), Error);
  }
}

TEST_CASE("path selection") {
  Netlist d = diamond();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(d, lib, {100, 0.1});
  auto paths = enumerate_near_critical_paths(d, lib, sta, 0.2, 8);
  REQUIRE(paths.size() == 2);

  PathSelector longest;
  CHECK(&select_target_path(paths, longest) == &paths[0]);

  PathSelector through;
  through.kind = PathSelector::Kind::ThroughNet;
  through.net = "n2";
  CHECK(&select_target_path(paths, through) == &paths[1]);
  through.net = "ghost";
  CHECK_THROWS_AS(select_target_path(paths, through), Error);

  PathSelector by_index;
  by_index.kind = PathSelector::Kind::Index;
  by_index.index = 1;
  CHECK(&select_target_path(paths, by_index) == &paths[1]);
  by_index.index = 2;
  CHECK_THROWS_AS(select_target_path(paths, by_index), Error);

  try {
    select_target_path({}, longest);
    FAIL("expected NoMatchingPath");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoMatchingPath);
  }
}

TEST_CASE("random dags match exhaustive enumeration") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    RandomDagSpec spec;
    spec.gates = 40;
    spec.inputs = 6;
    spec.outputs = 3;
    spec.ffs = 3;
    spec.seed = seed;
    Netlist n = random_dag(spec);
    REQUIRE(validate_netlist(n).empty());

    DelayLibrary lib = demo_delay_library();
    // Per-gate overrides keyed off the seed keep delay ties plausible but rare.
    int salt = 0;
    for (const auto& g : n.gates) {
      if (((seed + salt++) % 3) == 0) lib.overrides[g.id] = 7 + (salt % 5) * 9;
    }

    auto ref = brute_force_paths(n, lib);
    REQUIRE(!ref.empty());
    Ps critical = 0;
    for (const auto& rp : ref) critical = std::max(critical, rp.total);

    StaResult sta = run_sta(n, lib, {critical + 100, 0.1});
    CHECK(sta.critical_delay == critical);
    // Arrivals are per-net maxima over the same path set.
    std::map<std::string, Ps> best;
    for (const auto& rp : ref) {
      Ps accum = rp.total;
      // Replay to tag the arrival at every net along the path.
      std::vector<std::string> nets = rp.path.nets();
      Ps a = rp.total;
      for (std::size_t i = nets.size(); i-- > 0;) {
        auto it = best.find(nets[i]);
        if (it == best.end() || a > it->second) best[nets[i]] = a;
        if (i > 0) {
          const GateInstance* g = n.find_gate(rp.path.steps[i - 1].gate_id);
          a -= lib.gate_delay(*g);
        }
      }
      (void)accum;
    }
    for (const auto& [net, arr] : best) {
      CHECK(sta.arrival.at(net) == arr);
    }

    for (double margin : {0.0, 0.15, 0.5}) {
      Ps cutoff = critical - static_cast<Ps>(margin * static_cast<double>(critical));
      std::vector<RefPath> want;
      for (const auto& rp : ref) {
        if (static_cast<double>(rp.total) >=
            (1.0 - margin) * static_cast<double>(critical) - 1e-9) {
          want.push_back(rp);
        }
      }
      auto got = enumerate_near_critical_paths(n, lib, sta, margin, want.size() + 8);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(path_key(got[i]) == want[i].key);
        CHECK(got[i].nominal_delay == want[i].path.nominal_delay);
        CHECK(got[i].launch_net == want[i].path.launch_net);
      }
      (void)cutoff;
    }
  }
}

TEST_CASE("critical path agrees with rank one") {
  Netlist m = mac16();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(m, lib, {2000, 0.1});
  auto top = enumerate_near_critical_paths(m, lib, sta, 0.0, 1);
  REQUIRE(top.size() == 1);
  CHECK(path_key(sta.critical_path) == path_key(top[0]));
  CHECK(sta.critical_path.nominal_delay == top[0].nominal_delay);
  CHECK(sta.critical_delay == 1020);
}
