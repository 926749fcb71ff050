#include "twa/atpg.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace twa {

std::string to_string(const StuckFault& f) {
  return f.gate_id + ":" + std::to_string(f.pin) + " (" + f.net + ") stuck-at-" +
         std::to_string(f.stuck_value);
}

std::vector<StuckFault> enumerate_path_faults(const Netlist& n, const TimingPath& path) {
  std::vector<StuckFault> faults;
  for (const auto& step : path.steps) {
    const GateInstance* g = n.find_gate(step.gate_id);
    if (!g) throw Error(ErrorCode::UnknownNet, "path gate " + step.gate_id);
    for (int p = 0; p < input_count(g->kind); ++p) {
      faults.push_back({g->id, p, g->input_nets[p], 1});
    }
  }
  return faults;
}

std::size_t scan_width(const Netlist& n) {
  return n.primary_inputs.size() + n.flipflops.size();
}

namespace {

constexpr std::uint8_t kX = 2;

// Three-valued evaluation by completion: X inputs expand both ways; a
// determined result must agree across all completions.
std::uint8_t eval3(CellKind kind, const std::uint8_t* in) {
  int count = input_count(kind);
  int xpos[3];
  int nx = 0;
  std::uint8_t buf[3];
  for (int p = 0; p < count; ++p) {
    buf[p] = in[p];
    if (in[p] == kX) xpos[nx++] = p;
  }
  std::uint8_t first = 0;
  for (int m = 0; m < (1 << nx); ++m) {
    for (int k = 0; k < nx; ++k) buf[xpos[k]] = static_cast<std::uint8_t>((m >> k) & 1);
    std::uint8_t r = eval_cell(kind, buf);
    if (m == 0) {
      first = r;
    } else if (r != first) {
      return kX;
    }
  }
  return first;
}

// Combinational full-scan view of the netlist with a single pin fault.
struct ScanView {
  const Netlist* n = nullptr;
  NetlistIndex ix;
  std::vector<int> scan_nets;   // PI nets then FF q nets
  std::vector<int> scan_slot;   // net -> slot, -1 otherwise
  std::vector<int> observables; // FF d nets and PO nets, deduplicated
  std::vector<char> observable_mark;

  explicit ScanView(const Netlist& netlist) : n(&netlist), ix(build_index(netlist)) {
    scan_nets.reserve(scan_width(netlist));
    for (int net : ix.pi_nets) scan_nets.push_back(net);
    for (int net : ix.ff_q) scan_nets.push_back(net);
    scan_slot.assign(ix.net_names.size(), -1);
    for (std::size_t s = 0; s < scan_nets.size(); ++s) scan_slot[scan_nets[s]] = static_cast<int>(s);
    observable_mark.assign(ix.net_names.size(), 0);
    for (int net : ix.ff_d) observable_mark[net] = 1;
    for (int net : ix.po_nets) observable_mark[net] = 1;
    for (std::size_t i = 0; i < observable_mark.size(); ++i) {
      if (observable_mark[i]) observables.push_back(static_cast<int>(i));
    }
  }
};

struct FaultSite {
  int gate = -1;  // index into gates
  int pin = 0;
  int net = -1;   // net feeding the pin
};

FaultSite resolve_fault(const ScanView& view, const StuckFault& fault) {
  const Netlist& n = *view.n;
  for (std::size_t g = 0; g < n.gates.size(); ++g) {
    if (n.gates[g].id != fault.gate_id) continue;
    if (fault.pin < 0 || fault.pin >= input_count(n.gates[g].kind)) {
      throw Error(ErrorCode::UnknownNet, "fault pin " + pin_key(fault.gate_id, fault.pin));
    }
    return {static_cast<int>(g), fault.pin, view.ix.gate_inputs[g][fault.pin]};
  }
  throw Error(ErrorCode::UnknownNet, "fault gate " + fault.gate_id);
}

// good/faulty values per net under a partial scan assignment.
struct PairState {
  std::vector<std::uint8_t> good;
  std::vector<std::uint8_t> faulty;
};

void forward_eval(const ScanView& view, const FaultSite& site, const InputVector& scan,
                  PairState& s) {
  const Netlist& n = *view.n;
  s.good.assign(view.ix.net_names.size(), kX);
  s.faulty.assign(view.ix.net_names.size(), kX);
  for (std::size_t slot = 0; slot < view.scan_nets.size(); ++slot) {
    s.good[view.scan_nets[slot]] = scan[slot];
    s.faulty[view.scan_nets[slot]] = scan[slot];
  }
  std::uint8_t gin[3], fin[3];
  for (int gi : view.ix.topo_gates) {
    const auto& in = view.ix.gate_inputs[gi];
    for (std::size_t p = 0; p < in.size(); ++p) {
      gin[p] = s.good[in[p]];
      fin[p] = s.faulty[in[p]];
    }
    if (gi == site.gate) fin[site.pin] = 1;
    s.good[view.ix.gate_output[gi]] = eval3(n.gates[gi].kind, gin);
    s.faulty[view.ix.gate_output[gi]] = eval3(n.gates[gi].kind, fin);
  }
}

bool is_diff(const PairState& s, int net) {
  return s.good[net] != kX && s.faulty[net] != kX && s.good[net] != s.faulty[net];
}

bool is_x(const PairState& s, int net) { return s.good[net] == kX || s.faulty[net] == kX; }

bool has_controlling(CellKind kind, std::uint8_t& value) {
  switch (kind) {
    case CellKind::AND2: case CellKind::AND3: case CellKind::NAND2: case CellKind::NAND3:
      value = 0;
      return true;
    case CellKind::OR2: case CellKind::OR3: case CellKind::NOR2: case CellKind::NOR3:
      value = 1;
      return true;
    default:
      return false;
  }
}

bool inverts(CellKind kind) {
  switch (kind) {
    case CellKind::INV: case CellKind::NAND2: case CellKind::NAND3:
    case CellKind::NOR2: case CellKind::NOR3: case CellKind::XNOR2:
      return true;
    default:
      return false;
  }
}

// Gates whose output is still undetermined while some input carries a fault
// difference, topological order.
std::vector<int> d_frontier(const ScanView& view, const FaultSite& site, const PairState& s) {
  std::vector<int> frontier;
  for (int gi : view.ix.topo_gates) {
    int out = view.ix.gate_output[gi];
    if (!is_x(s, out)) continue;
    const auto& in = view.ix.gate_inputs[gi];
    bool carries = false;
    for (std::size_t p = 0; p < in.size(); ++p) {
      std::uint8_t g = s.good[in[p]];
      std::uint8_t f = gi == site.gate && static_cast<int>(p) == site.pin ? 1 : s.faulty[in[p]];
      if (g != kX && f != kX && g != f) {
        carries = true;
        break;
      }
    }
    if (carries) frontier.push_back(gi);
  }
  return frontier;
}

// Some all-X route from a frontier output to an observable must remain open.
bool x_path_exists(const ScanView& view, const PairState& s, const std::vector<int>& frontier) {
  std::vector<char> seen(view.ix.net_names.size(), 0);
  std::vector<int> work;
  for (int gi : frontier) {
    int out = view.ix.gate_output[gi];
    if (is_x(s, out) && !seen[out]) {
      seen[out] = 1;
      work.push_back(out);
    }
  }
  while (!work.empty()) {
    int net = work.back();
    work.pop_back();
    if (view.observable_mark[net]) return true;
    for (const PinRef& r : view.ix.net_readers[net]) {
      int out = view.ix.gate_output[r.gate];
      if (!seen[out] && is_x(s, out)) {
        seen[out] = 1;
        work.push_back(out);
      }
    }
  }
  return false;
}

struct Objective {
  int net = -1;
  std::uint8_t value = 0;
};

// Walk undetermined pins back to an unassigned scan input.
std::pair<int, std::uint8_t> backtrace(const ScanView& view, const PairState& s, Objective obj) {
  int net = obj.net;
  std::uint8_t v = obj.value;
  while (view.scan_slot[net] < 0) {
    int gi = view.ix.driver_index[net];
    const auto& in = view.ix.gate_inputs[gi];
    int pick = -1;
    for (std::size_t p = 0; p < in.size(); ++p) {
      if (is_x(s, in[p])) {
        pick = static_cast<int>(p);
        break;
      }
    }
    if (pick < 0) throw Error(ErrorCode::Unreachable, "backtrace hit a determined cone");
    if (inverts(view.n->gates[gi].kind)) v = static_cast<std::uint8_t>(1 - v);
    net = in[pick];
  }
  return {view.scan_slot[net], v};
}

}  // namespace

TestGenResult generate_test(const Netlist& n, const StuckFault& fault, int backtrack_budget) {
  if (fault.stuck_value != 1) {
    throw Error(ErrorCode::DomainError, "only stuck-at-1 generation is supported");
  }
  ScanView view(n);
  FaultSite site = resolve_fault(view, fault);

  InputVector scan(view.scan_nets.size(), kX);
  struct Decision {
    int slot;
    std::uint8_t value;
    bool flipped;
  };
  std::vector<Decision> stack;
  PairState s;
  TestGenResult result;

  while (true) {
    forward_eval(view, site, scan, s);

    bool success = false;
    for (int net : view.observables) {
      if (is_diff(s, net)) {
        success = true;
        break;
      }
    }
    if (success) {
      result.outcome = TestOutcome::Test;
      result.cube = scan;
      result.vector = scan;
      for (auto& b : result.vector) {
        if (b == kX) b = 0;
      }
      return result;
    }

    bool conflict = false;
    Objective obj;
    if (s.good[site.net] == 1) {
      conflict = true;  // excitation impossible under current assignment
    } else if (s.good[site.net] == kX) {
      obj = {site.net, 0};
    } else {
      std::vector<int> frontier = d_frontier(view, site, s);
      if (frontier.empty() || !x_path_exists(view, s, frontier)) {
        conflict = true;
      } else {
        int gi = frontier.front();
        const auto& in = view.ix.gate_inputs[gi];
        int pick = -1;
        for (std::size_t p = 0; p < in.size(); ++p) {
          if (is_x(s, in[p])) {
            pick = static_cast<int>(p);
            break;
          }
        }
        if (pick < 0) {
          conflict = true;  // frontier gate with no free pin cannot be steered
        } else {
          std::uint8_t ctrl;
          std::uint8_t want = has_controlling(n.gates[gi].kind, ctrl)
                                  ? static_cast<std::uint8_t>(1 - ctrl)
                                  : 0;
          obj = {in[pick], want};
        }
      }
    }

    if (conflict) {
      while (!stack.empty() && stack.back().flipped) {
        scan[stack.back().slot] = kX;
        stack.pop_back();
      }
      if (stack.empty()) {
        result.outcome = TestOutcome::Undetectable;
        return result;
      }
      ++result.backtracks;
      if (result.backtracks > backtrack_budget) {
        result.outcome = TestOutcome::Aborted;
        return result;
      }
      Decision& d = stack.back();
      d.value = static_cast<std::uint8_t>(1 - d.value);
      d.flipped = true;
      scan[d.slot] = d.value;
      continue;
    }

    auto [slot, value] = backtrace(view, s, obj);
    scan[slot] = value;
    stack.push_back({slot, value, false});
  }
}

namespace {

// Two-valued full-scan evaluation, optionally with the pin forced.
void eval_scan(const ScanView& view, const InputVector& scan, const FaultSite* site,
               std::vector<std::uint8_t>& values) {
  values.assign(view.ix.net_names.size(), 0);
  for (std::size_t slot = 0; slot < view.scan_nets.size(); ++slot) {
    values[view.scan_nets[slot]] = scan[slot];
  }
  std::uint8_t in[3];
  for (int gi : view.ix.topo_gates) {
    const auto& nets = view.ix.gate_inputs[gi];
    for (std::size_t p = 0; p < nets.size(); ++p) in[p] = values[nets[p]];
    if (site && gi == site->gate) in[site->pin] = 1;
    values[view.ix.gate_output[gi]] = eval_cell(view.n->gates[gi].kind, in);
  }
}

}  // namespace

std::vector<StuckFault> fault_simulate(const Netlist& n, const TestPattern& pattern,
                                       const std::vector<StuckFault>& faults) {
  ScanView view(n);
  for (const auto& v : pattern.vectors) {
    if (v.size() != view.scan_nets.size()) {
      throw Error(ErrorCode::WidthMismatch, "scan vector width " + std::to_string(v.size()) +
                                                ", expected " +
                                                std::to_string(view.scan_nets.size()));
    }
  }
  std::vector<std::vector<std::uint8_t>> golden(pattern.vectors.size());
  for (std::size_t i = 0; i < pattern.vectors.size(); ++i) {
    eval_scan(view, pattern.vectors[i], nullptr, golden[i]);
  }

  std::vector<StuckFault> detected;
  std::vector<std::uint8_t> faulty;
  for (const auto& f : faults) {
    FaultSite site = resolve_fault(view, f);
    bool hit = false;
    for (std::size_t i = 0; i < pattern.vectors.size() && !hit; ++i) {
      eval_scan(view, pattern.vectors[i], &site, faulty);
      for (int net : view.observables) {
        if (faulty[net] != golden[i][net]) {
          hit = true;
          break;
        }
      }
    }
    if (hit) detected.push_back(f);
  }
  return detected;
}

std::vector<TestPattern> compact_and_score(std::vector<TestPattern> patterns, const Netlist& n,
                                           const TimingPath& path, const ValidityPredicate& constraint) {
  std::vector<StuckFault> path_faults = enumerate_path_faults(n, path);
  std::set<std::pair<std::string, int>> on_path;
  for (const auto& step : path.steps) on_path.insert({step.gate_id, step.input_pin});
  std::set<std::string> path_gates;
  for (const auto& step : path.steps) path_gates.insert(step.gate_id);

  // The predicate indexes primary-input bits; scan vectors are judged on
  // their primary-input prefix (FF pseudo-inputs are not instruction bits).
  const std::size_t pi_width = n.primary_inputs.size();
  auto accepts = [&](const InputVector& v) {
    if (constraint.empty()) return true;
    if (v.size() <= pi_width) return constraint.accepts(v);
    return constraint.accepts(InputVector(v.begin(), v.begin() + pi_width));
  };

  for (auto& pattern : patterns) {
    std::vector<InputVector> kept;
    for (const auto& v : pattern.vectors) {
      if (!accepts(v)) continue;
      if (std::find(kept.begin(), kept.end(), v) != kept.end()) continue;
      kept.push_back(v);
    }
    pattern.vectors = std::move(kept);
    pattern.covered_faults = fault_simulate(n, pattern, path_faults);
    pattern.path_fault_score = 0;
    pattern.score_on_path_pins = 0;
    pattern.score_side_pins = 0;
    for (const auto& f : pattern.covered_faults) {
      if (!path_gates.count(f.gate_id)) continue;
      ++pattern.path_fault_score;
      if (on_path.count({f.gate_id, f.pin})) {
        ++pattern.score_on_path_pins;
      } else {
        ++pattern.score_side_pins;
      }
    }
  }
  std::stable_sort(patterns.begin(), patterns.end(), [](const TestPattern& a, const TestPattern& b) {
    if (a.path_fault_score != b.path_fault_score) return a.path_fault_score > b.path_fault_score;
    return a.id < b.id;
  });
  return patterns;
}

AtpgResult run_path_atpg(const Netlist& n, const TimingPath& path, const ValidityPredicate& constraint,
                         const AtpgOptions& opts) {
  AtpgResult result;
  std::vector<StuckFault> faults = enumerate_path_faults(n, path);

  std::vector<InputVector> cubes;
  for (const auto& f : faults) {
    TestGenResult gen = generate_test(n, f, opts.backtrack_budget);
    switch (gen.outcome) {
      case TestOutcome::Test:
        result.coverage.detectable.push_back(f);
        cubes.push_back(gen.cube);
        break;
      case TestOutcome::Undetectable:
        result.coverage.undetectable.push_back(f);
        break;
      case TestOutcome::Aborted:
        result.coverage.aborted.push_back(f);
        break;
    }
  }

  // Greedy static compaction: fold each cube into the first compatible slot.
  std::vector<InputVector> merged;
  for (const auto& cube : cubes) {
    bool placed = false;
    for (auto& m : merged) {
      bool ok = true;
      for (std::size_t i = 0; i < cube.size(); ++i) {
        if (m[i] != kX && cube[i] != kX && m[i] != cube[i]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (std::size_t i = 0; i < cube.size(); ++i) {
        if (m[i] == kX) m[i] = cube[i];
      }
      placed = true;
      break;
    }
    if (!placed) merged.push_back(cube);
  }
  for (auto& m : merged) {
    for (auto& b : m) {
      if (b == kX) b = 0;  // zero fill, the PMOS-stress value
    }
  }

  int per = std::max(1, opts.vectors_per_pattern);
  for (std::size_t start = 0; start < merged.size(); start += per) {
    TestPattern p;
    p.id = static_cast<int>(result.patterns.size());
    for (std::size_t i = start; i < merged.size() && i < start + per; ++i) {
      p.vectors.push_back(merged[i]);
    }
    result.patterns.push_back(std::move(p));
  }

  result.patterns = compact_and_score(std::move(result.patterns), n, path, constraint);

  std::set<StuckFault> seen;
  for (const auto& p : result.patterns) {
    for (const auto& f : p.covered_faults) {
      if (seen.insert(f).second) result.coverage.detected.push_back(f);
    }
  }
  std::sort(result.coverage.detected.begin(), result.coverage.detected.end());
  return result;
}

}  // namespace twa
