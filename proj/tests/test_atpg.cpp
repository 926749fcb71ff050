#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "twa/atpg.hpp"
#include "twa/circuits.hpp"

using namespace twa;

namespace {

constexpr std::uint8_t kX = 2;

Netlist and_pair() {
  Netlist n;
  n.name = "and_pair";
  n.primary_inputs = {"a", "b"};
  n.primary_outputs = {"y"};
  n.gates.push_back({"and1", CellKind::AND2, {"a", "b"}, "y"});
  return n;
}

// y = a | !a is tautologically 1, so faults on the OR pins never reach y.
Netlist or_tautology() {
  Netlist n;
  n.name = "or_taut";
  n.primary_inputs = {"a"};
  n.primary_outputs = {"y"};
  n.gates.push_back({"inv1", CellKind::INV, {"a"}, "na"});
  n.gates.push_back({"or1", CellKind::OR2, {"a", "na"}, "y"});
  return n;
}

// Plain two-valued reference simulator over the full-scan view, written
// against the public netlist API only. Scan order: primary inputs then FF q.
struct ScanOracle {
  const Netlist* n;
  std::vector<std::string> topo;

  explicit ScanOracle(const Netlist& netlist) : n(&netlist), topo(topological_order(netlist)) {}

  // Observables: every FF d net, then every primary output, in that order.
  std::vector<std::uint8_t> observe(const InputVector& scan, const StuckFault* fault) const {
    std::map<std::string, std::uint8_t> value;
    for (std::size_t i = 0; i < n->primary_inputs.size(); ++i) {
      value[n->primary_inputs[i]] = scan[i];
    }
    for (std::size_t f = 0; f < n->flipflops.size(); ++f) {
      value[n->flipflops[f].q_net] = scan[n->primary_inputs.size() + f];
    }
    for (const auto& id : topo) {
      const GateInstance* g = n->find_gate(id);
      std::uint8_t in[3];
      for (std::size_t p = 0; p < g->input_nets.size(); ++p) {
        in[p] = value.at(g->input_nets[p]);
        if (fault && fault->gate_id == id && fault->pin == static_cast<int>(p)) in[p] = 1;
      }
      value[g->output_net] = eval_cell(g->kind, in);
    }
    std::vector<std::uint8_t> obs;
    for (const auto& ff : n->flipflops) obs.push_back(value.at(ff.d_net));
    for (const auto& po : n->primary_outputs) obs.push_back(value.at(po));
    return obs;
  }

  bool detects(const InputVector& scan, const StuckFault& fault) const {
    return observe(scan, nullptr) != observe(scan, &fault);
  }
};

std::vector<StuckFault> all_pin_faults(const Netlist& n) {
  std::vector<StuckFault> faults;
  for (const auto& g : n.gates) {
    for (int p = 0; p < input_count(g.kind); ++p) {
      faults.push_back({g.id, p, g.input_nets[p], 1});
    }
  }
  return faults;
}

}  // namespace

TEST_CASE("path fault enumeration") {
  Netlist chain = four_gate_chain();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(chain, lib, {1000, 0.1});
  auto faults = enumerate_path_faults(chain, sta.critical_path);
  REQUIRE(faults.size() == 6);  // 1 + 2 + 2 + 1 pins, path order
  CHECK(faults[0].gate_id == "inv1");
  CHECK(faults[0].net == "qa");
  CHECK(faults[1].gate_id == "nand1");
  CHECK(faults[1].pin == 0);
  CHECK(faults[1].net == "n1");
  CHECK(faults[2].net == "b");
  CHECK(faults[3].net == "n2");
  CHECK(faults[4].net == "c");
  CHECK(faults[5].gate_id == "inv2");
  for (const auto& f : faults) CHECK(f.stuck_value == 1);
  CHECK(to_string(faults[0]) == "inv1:0 (qa) stuck-at-1");

  TimingPath bogus;
  bogus.steps.push_back({"ghost", 0, "y"});
  CHECK_THROWS_AS(enumerate_path_faults(chain, bogus), Error);

  CHECK(scan_width(chain) == 5);  // a, b, c + two FFs
  CHECK(scan_width(and_pair()) == 2);
}

TEST_CASE("single gate excitation and propagation") {
  Netlist n = and_pair();
  StuckFault f{"and1", 0, "a", 1};
  TestGenResult r = generate_test(n, f);
  REQUIRE(r.outcome == TestOutcome::Test);
  // Excite: a = 0. Propagate through the AND: b = 1.
  CHECK(r.cube == InputVector{0, 1});
  CHECK(r.vector == InputVector{0, 1});
  CHECK(ScanOracle(n).detects(r.vector, f));

  SUBCASE("don't-care positions zero fill") {
    Netlist wide = and_pair();
    wide.primary_inputs.push_back("c");  // unused input
    TestGenResult rw = generate_test(wide, f);
    REQUIRE(rw.outcome == TestOutcome::Test);
    CHECK(rw.cube == InputVector{0, 1, kX});
    CHECK(rw.vector == InputVector{0, 1, 0});
  }
  SUBCASE("only stuck-at-1 is supported") {
    StuckFault sa0 = f;
    sa0.stuck_value = 0;
    CHECK_THROWS_AS(generate_test(n, sa0), Error);
  }
  SUBCASE("unknown site") {
    CHECK_THROWS_AS(generate_test(n, {"ghost", 0, "a", 1}), Error);
    CHECK_THROWS_AS(generate_test(n, {"and1", 5, "a", 1}), Error);
  }
}

TEST_CASE("undetectable and aborted outcomes") {
  Netlist n = or_tautology();
  StuckFault f{"or1", 0, "a", 1};

  TestGenResult r = generate_test(n, f);
  CHECK(r.outcome == TestOutcome::Undetectable);
  CHECK(r.backtracks > 0);  // proof requires exhausting the decision space
  CHECK_FALSE(ScanOracle(n).detects({0}, f));
  CHECK_FALSE(ScanOracle(n).detects({1}, f));

  // A zero budget turns the same proof into an abort.
  TestGenResult tight = generate_test(n, f, 0);
  CHECK(tight.outcome == TestOutcome::Aborted);

  StuckFault other{"or1", 1, "na", 1};
  CHECK(generate_test(n, other).outcome == TestOutcome::Undetectable);
}

TEST_CASE("generated tests agree with exhaustive evaluation") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    RandomDagSpec spec;
    spec.gates = 14;
    spec.inputs = 4;
    spec.outputs = 2;
    spec.ffs = 2;
    spec.seed = seed;
    Netlist n = random_dag(spec);
    REQUIRE(validate_netlist(n).empty());
    ScanOracle oracle(n);
    const std::size_t w = scan_width(n);
    REQUIRE(w == 6);

    std::vector<InputVector> space;
    for (std::uint64_t mask = 0; mask < (1ull << w); ++mask) {
      InputVector v(w);
      for (std::size_t i = 0; i < w; ++i) v[i] = (mask >> i) & 1;
      space.push_back(v);
    }

    for (const auto& f : all_pin_faults(n)) {
      bool detectable = std::any_of(space.begin(), space.end(), [&](const InputVector& v) {
        return oracle.detects(v, f);
      });
      TestGenResult r = generate_test(n, f);
      REQUIRE(r.outcome != TestOutcome::Aborted);
      if (r.outcome == TestOutcome::Test) {
        CHECK(detectable);
        CHECK(oracle.detects(r.vector, f));
      } else {
        CHECK_FALSE(detectable);
      }
    }

    // Serial fault simulation against the same oracle: a pattern holding the
    // whole space detects exactly the detectable faults.
    TestPattern everything;
    everything.vectors = space;
    auto faults = all_pin_faults(n);
    auto detected = fault_simulate(n, everything, faults);
    std::vector<StuckFault> expect;
    for (const auto& f : faults) {
      if (std::any_of(space.begin(), space.end(),
                      [&](const InputVector& v) { return oracle.detects(v, f); })) {
        expect.push_back(f);
      }
    }
    CHECK(detected == expect);
  }
}

TEST_CASE("fault simulation validates widths") {
  Netlist n = and_pair();
  TestPattern p;
  p.vectors.push_back(InputVector{0});
  CHECK_THROWS_AS(fault_simulate(n, p, all_pin_faults(n)), Error);
}

TEST_CASE("pattern compaction and scoring") {
  Netlist chain = four_gate_chain();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(chain, lib, {1000, 0.1});
  const TimingPath& path = sta.critical_path;

  // Scan order: a, b, c, ff_a, ff_b.
  TestPattern weak;
  weak.id = 0;
  weak.vectors.push_back(InputVector{0, 0, 1, 0, 0});  // c=1 blocks nor1
  TestPattern strong;
  strong.id = 1;
  // qa=0 excites inv1:0; b=1, c=0 open the chain to y4.
  strong.vectors.push_back(InputVector{0, 1, 0, 0, 0});
  strong.vectors.push_back(InputVector{0, 1, 0, 0, 0});  // duplicate collapses
  strong.vectors.push_back(InputVector{0, 1, 0, 1, 0});  // qa=1 variant

  auto ranked = compact_and_score({weak, strong}, chain, path, {});
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].id == 1);  // more path faults covered, wins despite later id
  CHECK(ranked[0].vectors.size() == 2);
  CHECK(ranked[0].path_fault_score > ranked[1].path_fault_score);
  CHECK(ranked[0].path_fault_score ==
        ranked[0].score_on_path_pins + ranked[0].score_side_pins);
  // Every covered fault must genuinely be detected by the kept vectors.
  ScanOracle oracle(chain);
  for (const auto& f : ranked[0].covered_faults) {
    bool hit = std::any_of(ranked[0].vectors.begin(), ranked[0].vectors.end(),
                           [&](const InputVector& v) { return oracle.detects(v, f); });
    CHECK(hit);
  }

  SUBCASE("constraint drops vectors by primary-input prefix") {
    // Bit 2 of the 3-wide prefix is input a (first declared).
    ValidityPredicate only_a0;
    only_a0.fields.push_back({"a", 2, 2, {0}});
    TestPattern mixed;
    mixed.id = 0;
    mixed.vectors.push_back(InputVector{1, 1, 0, 0, 0});  // a=1, rejected
    mixed.vectors.push_back(InputVector{0, 1, 0, 1, 0});  // kept
    auto out = compact_and_score({mixed}, chain, path, only_a0);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].vectors.size() == 1);
    CHECK(out[0].vectors[0] == InputVector{0, 1, 0, 1, 0});
  }
  SUBCASE("equal scores keep id order") {
    TestPattern p0 = strong;
    p0.id = 0;
    TestPattern p1 = strong;
    p1.id = 1;
    auto out = compact_and_score({p1, p0}, chain, path, {});
    REQUIRE(out.size() == 2);
    CHECK(out[0].path_fault_score == out[1].path_fault_score);
    CHECK(out[0].id == 0);
    CHECK(out[1].id == 1);
  }
}

TEST_CASE("full path flow") {
  Netlist chain = four_gate_chain();
  DelayLibrary lib = demo_delay_library();
  StaResult sta = run_sta(chain, lib, {1000, 0.1});
  const TimingPath& path = sta.critical_path;

  AtpgResult res = run_path_atpg(chain, path, {});
  auto faults = enumerate_path_faults(chain, path);

  // Outcome classes partition the fault list.
  CHECK(res.coverage.detectable.size() + res.coverage.undetectable.size() +
            res.coverage.aborted.size() ==
        faults.size());
  CHECK(res.coverage.aborted.empty());
  CHECK(res.coverage.detectable.size() == 6);  // every chain pin is testable
  CHECK(res.coverage.detected.size() == 6);
  CHECK(std::is_sorted(res.coverage.detected.begin(), res.coverage.detected.end()));

  REQUIRE(!res.patterns.empty());
  ScanOracle oracle(chain);
  std::set<std::pair<std::string, int>> detected_sites;
  for (const auto& p : res.patterns) {
    for (const auto& v : p.vectors) REQUIRE(v.size() == scan_width(chain));
    for (const auto& f : p.covered_faults) {
      bool hit = std::any_of(p.vectors.begin(), p.vectors.end(),
                             [&](const InputVector& v) { return oracle.detects(v, f); });
      CHECK(hit);
      detected_sites.insert({f.gate_id, f.pin});
    }
  }
  CHECK(detected_sites.size() == 6);

  SUBCASE("pattern grouping honors vectors_per_pattern") {
    AtpgOptions opts;
    opts.vectors_per_pattern = 1;
    AtpgResult single = run_path_atpg(chain, path, {}, opts);
    for (const auto& p : single.patterns) CHECK(p.vectors.size() == 1);
    // Same detected set regardless of grouping.
    CHECK(single.coverage.detected == res.coverage.detected);
  }
  SUBCASE("constraint propagates into the flow") {
    // Force b = 0; faults needing b = 1 to propagate lose their vectors.
    ValidityPredicate b0;
    b0.fields.push_back({"b", 1, 1, {0}});
    AtpgResult constrained = run_path_atpg(chain, path, b0);
    for (const auto& p : constrained.patterns) {
      for (const auto& v : p.vectors) CHECK(v[1] == 0);
    }
  }
}
