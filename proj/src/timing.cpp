#include "twa/timing.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace twa {

Ps DelayLibrary::gate_delay(const GateInstance& g) const {
  auto ov = overrides.find(g.id);
  if (ov != overrides.end()) return ov->second;
  auto it = cell_delay.find(to_string(g.kind));
  if (it == cell_delay.end()) {
    throw Error(ErrorCode::MissingDelay, std::string(to_string(g.kind)) + " for gate " + g.id);
  }
  return it->second;
}

std::vector<std::string> TimingPath::nets() const {
  std::vector<std::string> out;
  out.reserve(steps.size() + 1);
  out.push_back(launch_net);
  for (const auto& step : steps) out.push_back(step.output_net);
  return out;
}

bool TimingPath::contains_net(const std::string& net) const {
  if (launch_net == net) return true;
  for (const auto& step : steps) {
    if (step.output_net == net) return true;
  }
  return false;
}

namespace {

constexpr Ps kNoSuffix = -1;

// Longest remaining gate-delay sum from each net to any capture endpoint,
// kNoSuffix when no capture is reachable.
std::vector<Ps> suffix_delays(const NetlistIndex& ix, const std::vector<Ps>& gate_ps) {
  std::vector<Ps> suffix(ix.net_names.size(), kNoSuffix);
  for (int net : ix.ff_d) suffix[net] = 0;
  for (int net : ix.po_nets) suffix[net] = 0;
  for (auto it = ix.topo_gates.rbegin(); it != ix.topo_gates.rend(); ++it) {
    int gi = *it;
    Ps s = suffix[ix.gate_output[gi]];
    if (s == kNoSuffix) continue;
    Ps cand = gate_ps[gi] + s;
    for (int in : ix.gate_inputs[gi]) suffix[in] = std::max(suffix[in], cand);
  }
  return suffix;
}

struct SearchEntry {
  Ps bound = 0;        // accumulated + best possible suffix; exact total when complete
  bool complete = false;
  std::string key;     // lexicographic path identity, prefix for partials
  PathEndpoint launch;
  std::string launch_net;
  std::vector<PathStep> steps;
  Ps accum = 0;        // launch offset + gate delays so far
  int net = -1;        // current net, partials only
  PathEndpoint capture;  // completes only
};

// Pop order: higher bound first; at equal bound partials expand before
// completes so every path at that delay materializes; then smaller key.
struct EntryAfter {
  bool operator()(const SearchEntry& a, const SearchEntry& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.complete != b.complete) return a.complete;
    return a.key > b.key;
  }
};

std::string endpoint_tag(const PathEndpoint& e) {
  switch (e.kind) {
    case EndpointKind::PrimaryInput: return "pi " + e.id;
    case EndpointKind::PrimaryOutput: return "po " + e.id;
    case EndpointKind::FlipFlop: return "ff " + e.id;
  }
  return e.id;
}

std::vector<TimingPath> enumerate_from_arrivals(const Netlist& n, const DelayLibrary& lib,
                                                Ps critical_delay, const ClockSpec& clk,
                                                double margin_fraction, std::size_t limit) {
  if (margin_fraction < 0.0 || margin_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidFraction, "margin " + std::to_string(margin_fraction));
  }
  NetlistIndex ix = build_index(n);
  std::vector<Ps> gate_ps(n.gates.size(), 0);
  for (std::size_t i = 0; i < n.gates.size(); ++i) gate_ps[i] = lib.gate_delay(n.gates[i]);
  std::vector<Ps> suffix = suffix_delays(ix, gate_ps);

  const double threshold = (1.0 - margin_fraction) * static_cast<double>(critical_delay);
  auto qualifies = [&](Ps total) { return static_cast<double>(total) >= threshold - 1e-9; };

  // Capture options per net.
  std::vector<std::vector<int>> ffs_at_net(ix.net_names.size());
  for (std::size_t f = 0; f < n.flipflops.size(); ++f) ffs_at_net[ix.ff_d[f]].push_back(static_cast<int>(f));
  std::vector<char> is_po(ix.net_names.size(), 0);
  for (int net : ix.po_nets) is_po[net] = 1;

  std::priority_queue<SearchEntry, std::vector<SearchEntry>, EntryAfter> queue;

  auto seed = [&](int net, const PathEndpoint& launch, Ps offset) {
    if (suffix[net] == kNoSuffix) return;
    SearchEntry e;
    e.launch = launch;
    e.launch_net = ix.net_names[net];
    e.accum = offset;
    e.net = net;
    e.bound = offset + suffix[net];
    e.key = endpoint_tag(launch) + "|";
    if (qualifies(e.bound)) queue.push(std::move(e));
  };
  for (std::size_t i = 0; i < n.primary_inputs.size(); ++i) {
    seed(ix.pi_nets[i], {EndpointKind::PrimaryInput, n.primary_inputs[i]}, 0);
  }
  for (std::size_t f = 0; f < n.flipflops.size(); ++f) {
    seed(ix.ff_q[f], {EndpointKind::FlipFlop, n.flipflops[f].id}, lib.ff_clk_to_q);
  }

  std::vector<TimingPath> out;
  while (!queue.empty() && out.size() < limit) {
    SearchEntry cur = queue.top();
    queue.pop();
    if (!qualifies(cur.bound)) break;

    if (cur.complete) {
      TimingPath p;
      p.launch = cur.launch;
      p.capture = cur.capture;
      p.launch_net = cur.launch_net;
      p.steps = cur.steps;
      Ps offset = cur.launch.kind == EndpointKind::FlipFlop ? lib.ff_clk_to_q : 0;
      p.nominal_delay = cur.accum - offset;
      Ps setup = cur.capture.kind == EndpointKind::FlipFlop ? lib.ff_setup : 0;
      p.slack = clk.period - cur.accum - setup;
      out.push_back(std::move(p));
      continue;
    }

    for (int f : ffs_at_net[cur.net]) {
      SearchEntry done = cur;
      done.complete = true;
      done.capture = {EndpointKind::FlipFlop, n.flipflops[f].id};
      done.bound = cur.accum;
      done.key += endpoint_tag(done.capture);
      if (qualifies(done.bound)) queue.push(std::move(done));
    }
    if (is_po[cur.net]) {
      SearchEntry done = cur;
      done.complete = true;
      done.capture = {EndpointKind::PrimaryOutput, ix.net_names[cur.net]};
      done.bound = cur.accum;
      done.key += endpoint_tag(done.capture);
      if (qualifies(done.bound)) queue.push(std::move(done));
    }
    for (const PinRef& r : ix.net_readers[cur.net]) {
      int outn = ix.gate_output[r.gate];
      if (suffix[outn] == kNoSuffix) continue;  // no capture reachable
      SearchEntry next = cur;
      next.accum = cur.accum + gate_ps[r.gate];
      next.net = outn;
      next.bound = next.accum + suffix[outn];
      next.steps.push_back({n.gates[r.gate].id, r.pin, ix.net_names[outn]});
      next.key += n.gates[r.gate].id + ":" + std::to_string(r.pin) + "|";
      if (qualifies(next.bound)) queue.push(std::move(next));
    }
  }
  return out;
}

}  // namespace

StaResult run_sta(const Netlist& n, const DelayLibrary& lib, const ClockSpec& clk) {
  if (clk.period <= 0) throw Error(ErrorCode::DomainError, "clock period must be positive");
  NetlistIndex ix = build_index(n);

  std::vector<Ps> arrival(ix.net_names.size(), 0);
  for (int net : ix.ff_q) arrival[net] = lib.ff_clk_to_q;
  for (int gi : ix.topo_gates) {
    Ps worst = 0;
    for (int in : ix.gate_inputs[gi]) worst = std::max(worst, arrival[in]);
    arrival[ix.gate_output[gi]] = worst + lib.gate_delay(n.gates[gi]);
  }

  StaResult res;
  res.clock = clk;
  res.ff_setup = lib.ff_setup;
  res.ff_clk_to_q = lib.ff_clk_to_q;
  for (std::size_t i = 0; i < ix.net_names.size(); ++i) res.arrival[ix.net_names[i]] = arrival[i];

  res.critical_delay = 0;
  for (int net : ix.ff_d) res.critical_delay = std::max(res.critical_delay, arrival[net]);
  for (int net : ix.po_nets) res.critical_delay = std::max(res.critical_delay, arrival[net]);

  auto worst = enumerate_from_arrivals(n, lib, res.critical_delay, clk, 0.0, 1);
  if (!worst.empty()) res.critical_path = worst.front();
  return res;
}

std::vector<TimingPath> enumerate_near_critical_paths(const Netlist& n, const DelayLibrary& lib,
                                                      const StaResult& sta, double margin_fraction,
                                                      std::size_t limit) {
  return enumerate_from_arrivals(n, lib, sta.critical_delay, sta.clock, margin_fraction, limit);
}

const TimingPath& select_target_path(const std::vector<TimingPath>& paths, const PathSelector& sel) {
  if (paths.empty()) throw Error(ErrorCode::NoMatchingPath, "path list is empty");
  switch (sel.kind) {
    case PathSelector::Kind::Longest:
      return paths.front();
    case PathSelector::Kind::Index:
      if (sel.index >= paths.size()) {
        throw Error(ErrorCode::NoMatchingPath, "index " + std::to_string(sel.index) + " of " +
                                                   std::to_string(paths.size()));
      }
      return paths[sel.index];
    case PathSelector::Kind::ThroughNet:
      break;
  }
  for (const auto& p : paths) {
    if (p.contains_net(sel.net)) return p;
  }
  throw Error(ErrorCode::NoMatchingPath, "no enumerated path through net " + sel.net);
}

}  // namespace twa
