#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twa/netlist.hpp"

namespace twa {

// One bit per primary input, declared order.
using InputVector = std::vector<std::uint8_t>;

std::string pin_key(const std::string& gate_id, int pin);  // "gate:pin"

struct SimTrace {
  std::vector<std::string> net_names;  // index order from NetlistIndex
  std::map<std::string, int> net_id;
  std::vector<std::vector<std::uint8_t>> net_values;  // [cycle][net]
  std::vector<std::string> ff_ids;
  std::vector<std::vector<std::uint8_t>> ff_states;  // [cycle][ff], state held during the cycle

  struct PinSample {
    std::string gate_id;
    int pin = 0;
    int net = 0;
  };
  std::vector<PinSample> pins;  // every gate input pin, gate then pin order
  std::vector<int> po_nets;

  std::size_t cycles() const { return net_values.size(); }
  std::uint8_t value(const std::string& net, std::size_t cycle) const;
};

// Two-valued cycle simulation. FF init values hold at cycle 0; q at cycle c+1
// equals d at cycle c. The stimulus is looped `repeat` times.
SimTrace simulate_cycles(const Netlist& n, const std::vector<InputVector>& stimulus, int repeat = 1);

enum class IdleMode { Multiplicative, Subtractive };
const char* to_string(IdleMode mode);
IdleMode idle_mode_from_string(const std::string& name);

// beta = fraction of cycles a gate input pin holds logic 0, the PMOS-stress
// condition for the gate it feeds.
struct DutyProfile {
  std::map<std::string, double> beta;  // keyed pin_key(gate, pin)
  std::size_t cycle_count = 0;
  double idle_fraction = 0.0;
  IdleMode mode = IdleMode::Multiplicative;

  double beta_at(const std::string& gate_id, int pin) const;  // throws MissingBeta
  bool has(const std::string& gate_id, int pin) const;
};

DutyProfile compute_duty_profile(const SimTrace& trace);

// multiplicative: beta * (1 - idle); subtractive: max(0, beta - idle).
DutyProfile adjust_for_idle(const DutyProfile& profile, double idle_fraction, IdleMode mode);

struct ActivityReport {
  std::map<std::string, std::uint64_t> net_toggles;
  std::uint64_t total_toggles = 0;
  std::size_t cycle_count = 0;
  double mean_toggles_per_cycle = 0.0;
};

// Toggle = value change between consecutive cycles. Power proxy only.
ActivityReport activity_proxy(const SimTrace& trace);

}  // namespace twa
