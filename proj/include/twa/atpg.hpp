#pragma once

#include <string>
#include <vector>

#include "twa/constraints.hpp"
#include "twa/logicsim.hpp"
#include "twa/netlist.hpp"
#include "twa/timing.hpp"

namespace twa {

// Stuck-at-1 at a gate input pin. Exciting it means driving the attached net
// to 0, which is also the PMOS-stress condition.
struct StuckFault {
  std::string gate_id;
  int pin = 0;
  std::string net;  // net attached at that pin
  int stuck_value = 1;

  friend bool operator==(const StuckFault& a, const StuckFault& b) {
    return a.gate_id == b.gate_id && a.pin == b.pin && a.stuck_value == b.stuck_value;
  }
  friend bool operator<(const StuckFault& a, const StuckFault& b) {
    if (a.gate_id != b.gate_id) return a.gate_id < b.gate_id;
    return a.pin < b.pin;
  }
};

std::string to_string(const StuckFault& f);

// One fault per input pin of every gate on the path, path order then pin order.
std::vector<StuckFault> enumerate_path_faults(const Netlist& n, const TimingPath& path);

enum class TestOutcome { Test, Undetectable, Aborted };

// Scan vectors cover primary inputs then FF q pseudo-inputs, declared order
// (full-scan combinational view; FF d nets and primary outputs observable).
std::size_t scan_width(const Netlist& n);

struct TestGenResult {
  TestOutcome outcome = TestOutcome::Undetectable;
  InputVector cube;    // 0/1/2, 2 = don't care; meaningful when outcome == Test
  InputVector vector;  // cube with don't-cares filled to 0
  int backtracks = 0;
};

// Path-oriented decision search over five-valued logic with backtracking.
// Undetectable only after exhausting the decision space.
TestGenResult generate_test(const Netlist& n, const StuckFault& fault, int backtrack_budget = 10000);

struct TestPattern {
  int id = 0;
  std::vector<InputVector> vectors;  // scan width, fully specified
  std::vector<StuckFault> covered_faults;
  int path_fault_score = 0;  // covered faults sited at path gates
  int score_on_path_pins = 0;
  int score_side_pins = 0;
};

// Serial fault simulation: a fault is detected when some vector makes any
// observable differ from the golden evaluation.
std::vector<StuckFault> fault_simulate(const Netlist& n, const TestPattern& pattern,
                                       const std::vector<StuckFault>& faults);

// Drops vectors rejected by the predicate, then rescores each pattern via
// fault simulation against the path fault list and ranks by path_fault_score
// descending (stable by pattern id).
std::vector<TestPattern> compact_and_score(std::vector<TestPattern> patterns, const Netlist& n,
                                           const TimingPath& path, const ValidityPredicate& constraint);

struct CoverageReport {
  std::vector<StuckFault> detectable;
  std::vector<StuckFault> detected;
  std::vector<StuckFault> undetectable;
  std::vector<StuckFault> aborted;
};

struct AtpgOptions {
  int backtrack_budget = 10000;
  int vectors_per_pattern = 10;
};

struct AtpgResult {
  std::vector<TestPattern> patterns;  // ranked
  CoverageReport coverage;
};

// Full flow: enumerate path faults, generate per-fault cubes, greedily merge
// compatible cubes, zero-fill, group into patterns, filter and rank.
AtpgResult run_path_atpg(const Netlist& n, const TimingPath& path, const ValidityPredicate& constraint,
                         const AtpgOptions& opts = {});

}  // namespace twa
