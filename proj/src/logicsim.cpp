#include "twa/logicsim.hpp"

#include <algorithm>

namespace twa {

std::string pin_key(const std::string& gate_id, int pin) {
  return gate_id + ":" + std::to_string(pin);
}

std::uint8_t SimTrace::value(const std::string& net, std::size_t cycle) const {
  auto it = net_id.find(net);
  if (it == net_id.end()) throw Error(ErrorCode::UnknownNet, "net " + net);
  return net_values.at(cycle)[it->second];
}

SimTrace simulate_cycles(const Netlist& n, const std::vector<InputVector>& stimulus, int repeat) {
  if (stimulus.empty() || repeat < 1) {
    throw Error(ErrorCode::WidthMismatch, "stimulus must supply at least one vector");
  }
  for (const auto& v : stimulus) {
    if (v.size() != n.primary_inputs.size()) {
      throw Error(ErrorCode::WidthMismatch, "vector width " + std::to_string(v.size()) +
                                                ", netlist has " +
                                                std::to_string(n.primary_inputs.size()) + " inputs");
    }
  }

  NetlistIndex ix = build_index(n);
  SimTrace trace;
  trace.net_names = ix.net_names;
  for (std::size_t i = 0; i < ix.net_names.size(); ++i) trace.net_id[ix.net_names[i]] = static_cast<int>(i);
  for (const auto& ff : n.flipflops) trace.ff_ids.push_back(ff.id);
  for (std::size_t g = 0; g < n.gates.size(); ++g) {
    for (std::size_t p = 0; p < ix.gate_inputs[g].size(); ++p) {
      trace.pins.push_back({n.gates[g].id, static_cast<int>(p), ix.gate_inputs[g][p]});
    }
  }
  trace.po_nets = ix.po_nets;

  std::vector<std::uint8_t> state(n.flipflops.size());
  for (std::size_t f = 0; f < n.flipflops.size(); ++f) state[f] = n.flipflops[f].init_value;

  const std::size_t total = stimulus.size() * static_cast<std::size_t>(repeat);
  std::vector<std::uint8_t> values(ix.net_names.size(), 0);
  std::uint8_t ins[3];
  for (std::size_t c = 0; c < total; ++c) {
    const InputVector& v = stimulus[c % stimulus.size()];
    for (std::size_t i = 0; i < v.size(); ++i) values[ix.pi_nets[i]] = v[i];
    for (std::size_t f = 0; f < state.size(); ++f) values[ix.ff_q[f]] = state[f];
    for (int gi : ix.topo_gates) {
      const auto& in = ix.gate_inputs[gi];
      for (std::size_t p = 0; p < in.size(); ++p) ins[p] = values[in[p]];
      values[ix.gate_output[gi]] = eval_cell(n.gates[gi].kind, ins);
    }
    trace.net_values.push_back(values);
    trace.ff_states.push_back(state);
    for (std::size_t f = 0; f < state.size(); ++f) state[f] = values[ix.ff_d[f]];
  }
  return trace;
}

const char* to_string(IdleMode mode) {
  return mode == IdleMode::Multiplicative ? "multiplicative" : "subtractive";
}

IdleMode idle_mode_from_string(const std::string& name) {
  if (name == "multiplicative") return IdleMode::Multiplicative;
  if (name == "subtractive") return IdleMode::Subtractive;
  throw Error(ErrorCode::SchemaError, "unknown idle mode '" + name + "'");
}

double DutyProfile::beta_at(const std::string& gate_id, int pin) const {
  auto it = beta.find(pin_key(gate_id, pin));
  if (it == beta.end()) throw Error(ErrorCode::MissingBeta, pin_key(gate_id, pin));
  return it->second;
}

bool DutyProfile::has(const std::string& gate_id, int pin) const {
  return beta.count(pin_key(gate_id, pin)) != 0;
}

DutyProfile compute_duty_profile(const SimTrace& trace) {
  if (trace.cycles() == 0) throw Error(ErrorCode::TraceTooShort, "empty trace");
  DutyProfile profile;
  profile.cycle_count = trace.cycles();
  for (const auto& pin : trace.pins) {
    std::size_t zeros = 0;
    for (const auto& cycle : trace.net_values) zeros += cycle[pin.net] == 0;
    profile.beta[pin_key(pin.gate_id, pin.pin)] =
        static_cast<double>(zeros) / static_cast<double>(trace.cycles());
  }
  return profile;
}

DutyProfile adjust_for_idle(const DutyProfile& profile, double idle_fraction, IdleMode mode) {
  if (idle_fraction < 0.0 || idle_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidFraction, "idle fraction " + std::to_string(idle_fraction));
  }
  DutyProfile out = profile;
  out.idle_fraction = idle_fraction;
  out.mode = mode;
  for (auto& [key, b] : out.beta) {
    b = mode == IdleMode::Multiplicative ? b * (1.0 - idle_fraction)
                                         : std::max(0.0, b - idle_fraction);
  }
  return out;
}

ActivityReport activity_proxy(const SimTrace& trace) {
  if (trace.cycles() < 2) throw Error(ErrorCode::TraceTooShort, "need at least two cycles");
  ActivityReport report;
  report.cycle_count = trace.cycles();
  for (std::size_t i = 0; i < trace.net_names.size(); ++i) {
    std::uint64_t toggles = 0;
    for (std::size_t c = 1; c < trace.cycles(); ++c) {
      toggles += trace.net_values[c][i] != trace.net_values[c - 1][i];
    }
    report.net_toggles[trace.net_names[i]] = toggles;
    report.total_toggles += toggles;
  }
  report.mean_toggles_per_cycle =
      static_cast<double>(report.total_toggles) / static_cast<double>(trace.cycles());
  return report;
}

}  // namespace twa
