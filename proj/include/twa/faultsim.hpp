#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twa/aging.hpp"
#include "twa/logicsim.hpp"
#include "twa/netlist.hpp"
#include "twa/timing.hpp"

namespace twa {

struct FfViolation {
  std::string ff_id;
  int cycle = 0;       // cycle holding the stale value
  Ps arrival_ps = 0;   // last d transition in the violating launch cycle
};

struct TimedSimResult {
  std::vector<std::string> ff_ids;
  std::vector<std::vector<std::uint8_t>> ff_states;  // [cycle][ff]
  std::vector<std::string> po_nets;
  std::vector<std::vector<std::uint8_t>> po_values;  // [cycle][po], settled
  std::vector<std::vector<Ps>> d_arrival_ps;         // [cycle][ff], -1 = no transition
  std::vector<FfViolation> violations;
  bool lateness_cap_hit = false;  // some arrival exceeded a full period
  int lateness_cap_count = 0;

  std::size_t cycles() const { return ff_states.size(); }
};

// Transport-delay event simulation per cycle, starting from the settled state
// of the previous cycle. A flip-flop samples at period - ff_setup; a d pin
// whose last transition lands after that deadline re-latches the old value
// (stale latch) and the violation is recorded at the cycle that holds it.
// Lateness is modeled at most one period deep; the cap is flagged when it
// binds. Cycle 0 starts settled, so nominal delays reproduce functional
// simulation exactly.
TimedSimResult timed_simulate(const Netlist& n, const AgedDelays& delays, const ClockSpec& clk,
                              const std::vector<InputVector>& stimulus);

struct CorruptionDiff {
  int first_divergence_cycle = -1;  // -1 = traces agree
  std::uint64_t corrupted_bits = 0;
  std::vector<int> corrupted_bits_per_cycle;
  std::vector<std::vector<std::uint8_t>> mismatch;  // [cycle][po]
  std::vector<std::string> golden_hex;              // output word per cycle, first output = MSB
  std::vector<std::string> faulty_hex;
  std::vector<std::string> po_nets;
};

// Bitwise per-output comparison of a functional golden trace against a timed
// run of the same stimulus. Throws LengthMismatch.
CorruptionDiff diff_golden(const SimTrace& golden, const TimedSimResult& faulty);

// Bits rendered as a hex word, first bit most significant.
std::string bits_to_hex(const std::vector<std::uint8_t>& bits);

}  // namespace twa
