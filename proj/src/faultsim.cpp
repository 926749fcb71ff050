#include "twa/faultsim.hpp"

#include <algorithm>
#include <queue>

namespace twa {

namespace {

struct NetEvent {
  Ps time = 0;
  std::uint64_t seq = 0;  // scheduling order breaks same-time ties
  int net = -1;
  std::uint8_t value = 0;
};

struct EventAfter {
  bool operator()(const NetEvent& a, const NetEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

void settle(const Netlist& n, const NetlistIndex& ix, const InputVector& pi,
            const std::vector<std::uint8_t>& ff_state, std::vector<std::uint8_t>& values) {
  for (std::size_t i = 0; i < pi.size(); ++i) values[ix.pi_nets[i]] = pi[i];
  for (std::size_t f = 0; f < ff_state.size(); ++f) values[ix.ff_q[f]] = ff_state[f];
  std::uint8_t in[3];
  for (int gi : ix.topo_gates) {
    const auto& nets = ix.gate_inputs[gi];
    for (std::size_t p = 0; p < nets.size(); ++p) in[p] = values[nets[p]];
    values[ix.gate_output[gi]] = eval_cell(n.gates[gi].kind, in);
  }
}

}  // namespace

TimedSimResult timed_simulate(const Netlist& n, const AgedDelays& delays, const ClockSpec& clk,
                              const std::vector<InputVector>& stimulus) {
  if (clk.period <= 0) throw Error(ErrorCode::DomainError, "clock period must be positive");
  if (stimulus.empty()) throw Error(ErrorCode::WidthMismatch, "empty stimulus");
  for (const auto& v : stimulus) {
    if (v.size() != n.primary_inputs.size()) {
      throw Error(ErrorCode::WidthMismatch, "vector width " + std::to_string(v.size()) +
                                                ", netlist has " +
                                                std::to_string(n.primary_inputs.size()) + " inputs");
    }
  }

  NetlistIndex ix = build_index(n);
  std::vector<Ps> gate_ps(n.gates.size());
  for (std::size_t g = 0; g < n.gates.size(); ++g) gate_ps[g] = delays.gate_delay(n.gates[g]);
  const Ps deadline = clk.period - delays.ff_setup;

  TimedSimResult res;
  for (const auto& ff : n.flipflops) res.ff_ids.push_back(ff.id);
  for (int net : ix.po_nets) res.po_nets.push_back(ix.net_names[net]);

  std::vector<std::uint8_t> state(n.flipflops.size());
  for (std::size_t f = 0; f < state.size(); ++f) state[f] = n.flipflops[f].init_value;

  // Cycle 0 starts from a settled network: no in-cycle transitions.
  std::vector<std::uint8_t> values(ix.net_names.size(), 0);
  settle(n, ix, stimulus[0], state, values);
  res.ff_states.push_back(state);
  res.po_values.emplace_back();
  for (int net : ix.po_nets) res.po_values.back().push_back(values[net]);
  res.d_arrival_ps.emplace_back(n.flipflops.size(), -1);

  std::vector<std::uint8_t> next_state(state.size());
  for (std::size_t f = 0; f < state.size(); ++f) next_state[f] = values[ix.ff_d[f]];

  std::vector<std::uint8_t> cur = values;  // settled values carried across cycles
  std::vector<Ps> last_trans(ix.net_names.size());

  for (std::size_t c = 1; c < stimulus.size(); ++c) {
    state = next_state;

    std::priority_queue<NetEvent, std::vector<NetEvent>, EventAfter> events;
    std::uint64_t seq = 0;
    std::fill(last_trans.begin(), last_trans.end(), Ps{-1});

    for (std::size_t i = 0; i < stimulus[c].size(); ++i) {
      if (stimulus[c][i] != cur[ix.pi_nets[i]]) {
        events.push({0, seq++, ix.pi_nets[i], stimulus[c][i]});
      }
    }
    for (std::size_t f = 0; f < state.size(); ++f) {
      if (state[f] != cur[ix.ff_q[f]]) {
        events.push({delays.ff_clk_to_q, seq++, ix.ff_q[f], state[f]});
      }
    }

    std::vector<int> changed;
    std::vector<int> wake;
    while (!events.empty()) {
      const Ps t = events.top().time;
      changed.clear();
      while (!events.empty() && events.top().time == t) {
        NetEvent e = events.top();
        events.pop();
        if (cur[e.net] != e.value) {
          cur[e.net] = e.value;
          last_trans[e.net] = t;
          changed.push_back(e.net);
        }
      }
      wake.clear();
      for (int net : changed) {
        for (const PinRef& r : ix.net_readers[net]) wake.push_back(r.gate);
      }
      std::sort(wake.begin(), wake.end());
      wake.erase(std::unique(wake.begin(), wake.end()), wake.end());
      std::uint8_t in[3];
      for (int gi : wake) {
        const auto& nets = ix.gate_inputs[gi];
        for (std::size_t p = 0; p < nets.size(); ++p) in[p] = cur[nets[p]];
        events.push({t + gate_ps[gi], seq++, ix.gate_output[gi], eval_cell(n.gates[gi].kind, in)});
      }
    }

    res.ff_states.push_back(state);
    res.po_values.emplace_back();
    for (int net : ix.po_nets) res.po_values.back().push_back(cur[net]);
    res.d_arrival_ps.emplace_back(n.flipflops.size(), -1);

    for (std::size_t f = 0; f < state.size(); ++f) {
      Ps arr = last_trans[ix.ff_d[f]];
      res.d_arrival_ps.back()[f] = arr;
      if (arr > clk.period) {
        res.lateness_cap_hit = true;
        ++res.lateness_cap_count;
      }
      if (arr > deadline) {
        next_state[f] = state[f];  // stale latch
        if (c + 1 < stimulus.size()) {
          res.violations.push_back({n.flipflops[f].id, static_cast<int>(c + 1), arr});
        }
      } else {
        next_state[f] = cur[ix.ff_d[f]];
      }
    }
  }
  return res;
}

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
  const std::size_t digits = bits.empty() ? 1 : (bits.size() + 3) / 4;
  const std::size_t padded = digits * 4;
  std::string out;
  out.reserve(digits);
  for (std::size_t d = 0; d < digits; ++d) {
    int nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      std::size_t i = d * 4 + k;
      std::uint8_t bit = i < padded - bits.size() ? 0 : bits[i - (padded - bits.size())];
      nibble = (nibble << 1) | bit;
    }
    out.push_back("0123456789abcdef"[nibble]);
  }
  return out;
}

CorruptionDiff diff_golden(const SimTrace& golden, const TimedSimResult& faulty) {
  if (golden.cycles() != faulty.cycles()) {
    throw Error(ErrorCode::LengthMismatch, "golden has " + std::to_string(golden.cycles()) +
                                               " cycles, faulty " + std::to_string(faulty.cycles()));
  }
  std::vector<std::string> golden_pos;
  for (int net : golden.po_nets) golden_pos.push_back(golden.net_names[net]);
  if (golden_pos != faulty.po_nets) {
    throw Error(ErrorCode::LengthMismatch, "output sets differ between the traces");
  }

  CorruptionDiff diff;
  diff.po_nets = faulty.po_nets;
  for (std::size_t c = 0; c < golden.cycles(); ++c) {
    std::vector<std::uint8_t> gbits;
    for (int net : golden.po_nets) gbits.push_back(golden.net_values[c][net]);
    const std::vector<std::uint8_t>& fbits = faulty.po_values[c];
    std::vector<std::uint8_t> miss(gbits.size());
    int bad = 0;
    for (std::size_t i = 0; i < gbits.size(); ++i) {
      miss[i] = gbits[i] != fbits[i];
      bad += miss[i];
    }
    if (bad > 0 && diff.first_divergence_cycle < 0) diff.first_divergence_cycle = static_cast<int>(c);
    diff.corrupted_bits += static_cast<std::uint64_t>(bad);
    diff.corrupted_bits_per_cycle.push_back(bad);
    diff.mismatch.push_back(std::move(miss));
    diff.golden_hex.push_back(bits_to_hex(gbits));
    diff.faulty_hex.push_back(bits_to_hex(fbits));
  }
  return diff;
}

}  // namespace twa
