#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "twa/constraints.hpp"
#include "twa/logicsim.hpp"
#include "twa/netlist.hpp"

namespace twa {

// Goal: primary-input traces whose last hold_cycles cycles keep every target
// net constant, preferring traces that also hold many objective pins at
// logic 0 (PMOS stress) through that window.
struct StabilityQuery {
  std::vector<std::string> target_nets;
  int hold_cycles = 10;
  ValidityPredicate constraint;  // applied to every cycle's input vector
  std::vector<std::pair<std::string, int>> objective_pins;  // (gate id, pin)
};

struct StimulusTrace {
  std::vector<InputVector> vectors;  // primary-input width, length >= hold_cycles
  int pmos_on_score = 0;
  bool verified = false;
};

struct SearchStrategy {
  enum class Kind { Exhaustive, Mutational };
  Kind kind = Kind::Exhaustive;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 100000;
};

// Count of objective pins at logic 0 in every cycle of the stability window.
int score_trace(const Netlist& n, const StimulusTrace& trace, const StabilityQuery& q);

struct StabilityCheck {
  bool ok = false;
  std::string failing_net;  // first unstable target, empty when stable
  int failing_cycle = -1;   // absolute cycle of the first mismatch
  bool constraint_ok = true;
  int constraint_fail_cycle = -1;
  std::map<std::string, bool> net_stable;
};

// Re-simulates the trace and checks window stability plus the per-cycle
// constraint; stamps trace.verified.
StabilityCheck verify_trace(const Netlist& n, StimulusTrace& trace, const StabilityQuery& q);

// Exhaustive: complete search over the product of FF state, target-net values
// and the consecutive-stable counter; proves Unreachable when no trace exists.
// Mutational: seeded hill climbing over candidate traces; throws Timeout when
// the iteration budget ends empty-handed. Results rank by score descending,
// input-varying traces before constant ones, then by trace bytes.
std::vector<StimulusTrace> search_stable_traces(const Netlist& n, const StabilityQuery& q,
                                                const SearchStrategy& strategy, int want = 20);

StabilityQuery parse_stability_query(const std::string& json_text);
SearchStrategy parse_search_strategy(const std::string& json_text);  // from the same document
std::string serialize_stability_query(const StabilityQuery& q, const SearchStrategy& s);

}  // namespace twa
