#include "twa/netlist.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "json.hpp"

namespace twa {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateDriver: return "DuplicateDriver";
    case ErrorCode::UndrivenNet: return "UndrivenNet";
    case ErrorCode::CombinationalLoop: return "CombinationalLoop";
    case ErrorCode::UnknownNet: return "UnknownNet";
    case ErrorCode::MissingDelay: return "MissingDelay";
    case ErrorCode::NoMatchingPath: return "NoMatchingPath";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::MissingBeta: return "MissingBeta";
    case ErrorCode::ZeroStress: return "ZeroStress";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::FieldMapMismatch: return "FieldMapMismatch";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

namespace {

struct KindInfo {
  CellKind kind;
  const char* name;
  int inputs;
};

constexpr KindInfo kKinds[kCellKindCount] = {
    {CellKind::INV, "INV", 1},     {CellKind::BUF, "BUF", 1},
    {CellKind::AND2, "AND2", 2},   {CellKind::AND3, "AND3", 3},
    {CellKind::OR2, "OR2", 2},     {CellKind::OR3, "OR3", 3},
    {CellKind::NAND2, "NAND2", 2}, {CellKind::NAND3, "NAND3", 3},
    {CellKind::NOR2, "NOR2", 2},   {CellKind::NOR3, "NOR3", 3},
    {CellKind::XOR2, "XOR2", 2},   {CellKind::XNOR2, "XNOR2", 2},
    {CellKind::MUX2, "MUX2", 3},
};

}  // namespace

int input_count(CellKind kind) { return kKinds[static_cast<int>(kind)].inputs; }

const char* to_string(CellKind kind) { return kKinds[static_cast<int>(kind)].name; }

CellKind cell_kind_from_string(const std::string& name) {
  for (const auto& info : kKinds) {
    if (name == info.name) return info.kind;
  }
  throw Error(ErrorCode::SchemaError, "unknown cell kind '" + name + "'");
}

std::uint8_t eval_cell(CellKind kind, const std::uint8_t* in) {
  switch (kind) {
    case CellKind::INV: return !in[0];
    case CellKind::BUF: return in[0];
    case CellKind::AND2: return in[0] & in[1];
    case CellKind::AND3: return in[0] & in[1] & in[2];
    case CellKind::OR2: return in[0] | in[1];
    case CellKind::OR3: return in[0] | in[1] | in[2];
    case CellKind::NAND2: return !(in[0] & in[1]);
    case CellKind::NAND3: return !(in[0] & in[1] & in[2]);
    case CellKind::NOR2: return !(in[0] | in[1]);
    case CellKind::NOR3: return !(in[0] | in[1] | in[2]);
    case CellKind::XOR2: return in[0] ^ in[1];
    case CellKind::XNOR2: return !(in[0] ^ in[1]);
    case CellKind::MUX2: return in[0] ? in[2] : in[1];
  }
  return 0;
}

const GateInstance* Netlist::find_gate(const std::string& id) const {
  for (const auto& g : gates) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

const FlipFlop* Netlist::find_ff(const std::string& id) const {
  for (const auto& ff : flipflops) {
    if (ff.id == id) return &ff;
  }
  return nullptr;
}

const char* to_string(DiagCode code) {
  switch (code) {
    case DiagCode::SchemaError: return "SchemaError";
    case DiagCode::DuplicateId: return "DuplicateId";
    case DiagCode::DuplicateDriver: return "DuplicateDriver";
    case DiagCode::UndrivenNet: return "UndrivenNet";
    case DiagCode::ArityMismatch: return "ArityMismatch";
    case DiagCode::CombinationalLoop: return "CombinationalLoop";
  }
  return "Diagnostic";
}

namespace {

using nlohmann::json;

void require_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::SchemaError, "missing field '" + std::string(key) + "' in " + where);
  }
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& where) {
  require_field(j, key, where);
  const json& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::SchemaError, "field '" + std::string(key) + "' must be an array in " + where);
  }
  std::vector<std::string> out;
  for (const auto& item : arr) {
    if (!item.is_string()) {
      throw Error(ErrorCode::SchemaError, "non-string entry under '" + std::string(key) + "' in " + where);
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Driver bookkeeping shared by parse and validate.
struct DriverMap {
  std::map<std::string, std::vector<std::string>> drivers;  // net -> driver labels

  void add(const std::string& net, const std::string& label) { drivers[net].push_back(label); }
  bool driven(const std::string& net) const { return drivers.count(net) != 0; }
};

DriverMap collect_drivers(const Netlist& n) {
  DriverMap dm;
  for (const auto& pi : n.primary_inputs) dm.add(pi, "input " + pi);
  for (const auto& g : n.gates) dm.add(g.output_net, "gate " + g.id);
  for (const auto& ff : n.flipflops) dm.add(ff.q_net, "ff " + ff.id);
  return dm;
}

// Returns the lexicographically smallest output net on some combinational
// cycle among the given gates, or empty when acyclic.
std::string find_loop_net(const Netlist& n, const std::vector<int>& gate_ids) {
  std::map<std::string, int> producer;  // net -> gate index (within n.gates)
  for (int gi : gate_ids) producer[n.gates[gi].output_net] = gi;

  std::map<int, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::string> cycle_nets;

  // Iterative DFS keeping the current stack for cycle extraction.
  for (int start : gate_ids) {
    if (state[start]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
    std::vector<int> path{start};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [gi, edge] = stack.back();
      const auto& gate = n.gates[gi];
      bool advanced = false;
      while (edge < gate.input_nets.size()) {
        auto it = producer.find(gate.input_nets[edge]);
        ++edge;
        if (it == producer.end()) continue;
        int next = it->second;
        if (state[next] == 1) {
          // Found a cycle: everything on `path` from `next` onward.
          auto pos = std::find(path.begin(), path.end(), next);
          for (auto p = pos; p != path.end(); ++p) cycle_nets.push_back(n.gates[*p].output_net);
          std::sort(cycle_nets.begin(), cycle_nets.end());
          return cycle_nets.front();
        }
        if (state[next] == 0) {
          state[next] = 1;
          stack.emplace_back(next, 0);
          path.push_back(next);
          advanced = true;
          break;
        }
      }
      if (!advanced && edge >= gate.input_nets.size()) {
        state[gi] = 2;
        stack.pop_back();
        path.pop_back();
      }
    }
  }
  return {};
}

}  // namespace

Netlist parse_netlist(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "netlist document must be an object");

  Netlist n;
  require_field(j, "name", "netlist");
  if (!j.at("name").is_string()) throw Error(ErrorCode::SchemaError, "'name' must be a string");
  n.name = j.at("name").get<std::string>();
  n.primary_inputs = string_list(j, "inputs", "netlist");
  n.primary_outputs = string_list(j, "outputs", "netlist");

  require_field(j, "gates", "netlist");
  for (const auto& gj : j.at("gates")) {
    GateInstance g;
    require_field(gj, "id", "gate");
    require_field(gj, "kind", "gate");
    require_field(gj, "out", "gate");
    g.id = gj.at("id").get<std::string>();
    g.kind = cell_kind_from_string(gj.at("kind").get<std::string>());
    g.input_nets = string_list(gj, "in", "gate " + g.id);
    g.output_net = gj.at("out").get<std::string>();
    if (static_cast<int>(g.input_nets.size()) != input_count(g.kind)) {
      throw Error(ErrorCode::SchemaError,
                  "gate " + g.id + " (" + to_string(g.kind) + ") expects " +
                      std::to_string(input_count(g.kind)) + " inputs, got " +
                      std::to_string(g.input_nets.size()));
    }
    n.gates.push_back(std::move(g));
  }

  require_field(j, "ffs", "netlist");
  for (const auto& fj : j.at("ffs")) {
    FlipFlop ff;
    require_field(fj, "id", "ff");
    require_field(fj, "d", "ff");
    require_field(fj, "q", "ff");
    require_field(fj, "init", "ff");
    ff.id = fj.at("id").get<std::string>();
    ff.d_net = fj.at("d").get<std::string>();
    ff.q_net = fj.at("q").get<std::string>();
    int init = fj.at("init").get<int>();
    if (init != 0 && init != 1) {
      throw Error(ErrorCode::SchemaError, "ff " + ff.id + " init must be 0 or 1");
    }
    ff.init_value = static_cast<std::uint8_t>(init);
    n.flipflops.push_back(std::move(ff));
  }

  // Linking checks: unique ids, unique drivers, all referenced nets driven.
  std::set<std::string> ids;
  for (const auto& g : n.gates) {
    if (!ids.insert(g.id).second) throw Error(ErrorCode::SchemaError, "duplicate id " + g.id);
  }
  for (const auto& ff : n.flipflops) {
    if (!ids.insert(ff.id).second) throw Error(ErrorCode::SchemaError, "duplicate id " + ff.id);
  }

  DriverMap dm = collect_drivers(n);
  for (const auto& [net, who] : dm.drivers) {
    if (who.size() > 1) {
      throw Error(ErrorCode::DuplicateDriver, "net " + net + " driven by " + who[0] + " and " + who[1]);
    }
  }
  auto check_driven = [&](const std::string& net, const std::string& where) {
    if (!dm.driven(net)) throw Error(ErrorCode::UndrivenNet, "net " + net + " referenced by " + where);
  };
  for (const auto& g : n.gates) {
    for (const auto& in : g.input_nets) check_driven(in, "gate " + g.id);
  }
  for (const auto& ff : n.flipflops) check_driven(ff.d_net, "ff " + ff.id);
  for (const auto& po : n.primary_outputs) check_driven(po, "outputs");

  return n;
}

std::string serialize_netlist(const Netlist& n) {
  json j;
  j["name"] = n.name;
  j["inputs"] = n.primary_inputs;
  j["outputs"] = n.primary_outputs;
  j["gates"] = json::array();
  for (const auto& g : n.gates) {
    json gj;
    gj["id"] = g.id;
    gj["kind"] = to_string(g.kind);
    gj["in"] = g.input_nets;
    gj["out"] = g.output_net;
    j["gates"].push_back(gj);
  }
  j["ffs"] = json::array();
  for (const auto& ff : n.flipflops) {
    json fj;
    fj["id"] = ff.id;
    fj["d"] = ff.d_net;
    fj["q"] = ff.q_net;
    fj["init"] = static_cast<int>(ff.init_value);
    j["ffs"].push_back(fj);
  }
  return j.dump(2) + "\n";
}

std::vector<Diagnostic> validate_netlist(const Netlist& n) {
  std::vector<Diagnostic> diags;

  std::set<std::string> ids;
  for (const auto& g : n.gates) {
    if (!ids.insert(g.id).second) {
      diags.push_back({DiagCode::DuplicateId, g.id, "id " + g.id + " declared more than once"});
    }
    if (static_cast<int>(g.input_nets.size()) != input_count(g.kind)) {
      diags.push_back({DiagCode::ArityMismatch, g.id,
                       "gate " + g.id + " has " + std::to_string(g.input_nets.size()) +
                           " inputs, kind " + to_string(g.kind) + " expects " +
                           std::to_string(input_count(g.kind))});
    }
  }
  for (const auto& ff : n.flipflops) {
    if (!ids.insert(ff.id).second) {
      diags.push_back({DiagCode::DuplicateId, ff.id, "id " + ff.id + " declared more than once"});
    }
  }

  DriverMap dm = collect_drivers(n);
  for (const auto& [net, who] : dm.drivers) {
    if (who.size() > 1) {
      std::string list = who[0];
      for (std::size_t i = 1; i < who.size(); ++i) list += ", " + who[i];
      diags.push_back({DiagCode::DuplicateDriver, net, "net " + net + " driven by " + list});
    }
  }

  std::set<std::string> reported;
  auto check_driven = [&](const std::string& net, const std::string& where) {
    if (!dm.driven(net) && reported.insert(net).second) {
      diags.push_back({DiagCode::UndrivenNet, net, "net " + net + " referenced by " + where + " has no driver"});
    }
  };
  for (const auto& g : n.gates) {
    for (const auto& in : g.input_nets) check_driven(in, "gate " + g.id);
  }
  for (const auto& ff : n.flipflops) check_driven(ff.d_net, "ff " + ff.id);
  for (const auto& po : n.primary_outputs) check_driven(po, "outputs");

  // Combinational cycles: gates whose in-degree never clears under Kahn.
  std::map<std::string, int> producer;
  for (std::size_t i = 0; i < n.gates.size(); ++i) producer[n.gates[i].output_net] = static_cast<int>(i);
  std::vector<int> indeg(n.gates.size(), 0);
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    for (const auto& in : n.gates[i].input_nets) {
      if (producer.count(in)) ++indeg[i];
    }
  }
  std::queue<int> ready;
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  }
  std::size_t done = 0;
  while (!ready.empty()) {
    int gi = ready.front();
    ready.pop();
    ++done;
    for (std::size_t j = 0; j < n.gates.size(); ++j) {
      for (const auto& in : n.gates[j].input_nets) {
        if (in == n.gates[gi].output_net && --indeg[j] == 0) ready.push(static_cast<int>(j));
      }
    }
  }
  if (done != n.gates.size()) {
    // Gates with indeg > 0 at fixpoint are in or behind a cycle.
    std::vector<int> leftover;
    for (std::size_t i = 0; i < n.gates.size(); ++i) {
      if (indeg[i] > 0) leftover.push_back(static_cast<int>(i));
    }
    std::string net = find_loop_net(n, leftover);
    diags.push_back({DiagCode::CombinationalLoop, net, "combinational cycle through net " + net});
  }

  return diags;
}

std::vector<std::string> topological_order(const Netlist& n) {
  std::map<std::string, int> producer;
  for (std::size_t i = 0; i < n.gates.size(); ++i) producer[n.gates[i].output_net] = static_cast<int>(i);

  std::vector<std::vector<int>> readers(n.gates.size());
  std::vector<int> indeg(n.gates.size(), 0);
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    for (const auto& in : n.gates[i].input_nets) {
      auto it = producer.find(in);
      if (it != producer.end()) {
        readers[it->second].push_back(static_cast<int>(i));
        ++indeg[i];
      }
    }
  }

  // Min-heap on gate id for deterministic tie-breaks.
  auto cmp = [&](int a, int b) { return n.gates[a].id > n.gates[b].id; };
  std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  }

  std::vector<std::string> order;
  order.reserve(n.gates.size());
  while (!ready.empty()) {
    int gi = ready.top();
    ready.pop();
    order.push_back(n.gates[gi].id);
    for (int r : readers[gi]) {
      if (--indeg[r] == 0) ready.push(r);
    }
  }
  if (order.size() != n.gates.size()) {
    std::vector<int> leftover;
    for (std::size_t i = 0; i < n.gates.size(); ++i) {
      if (indeg[i] > 0) leftover.push_back(static_cast<int>(i));
    }
    throw Error(ErrorCode::CombinationalLoop, "cycle through net " + find_loop_net(n, leftover));
  }
  return order;
}

std::set<std::string> fanin_cone(const Netlist& n, const std::string& net) {
  std::map<std::string, int> producer;
  for (std::size_t i = 0; i < n.gates.size(); ++i) producer[n.gates[i].output_net] = static_cast<int>(i);
  std::set<std::string> pis(n.primary_inputs.begin(), n.primary_inputs.end());
  std::set<std::string> ffq;
  for (const auto& ff : n.flipflops) ffq.insert(ff.q_net);

  if (!producer.count(net) && !pis.count(net) && !ffq.count(net)) {
    throw Error(ErrorCode::UnknownNet, "net " + net);
  }

  std::set<std::string> cone;
  std::set<std::string> seen_nets;
  std::vector<std::string> work{net};
  while (!work.empty()) {
    std::string cur = work.back();
    work.pop_back();
    if (!seen_nets.insert(cur).second) continue;
    if (pis.count(cur) || ffq.count(cur)) {
      cone.insert(cur);  // source boundary
      continue;
    }
    auto it = producer.find(cur);
    if (it == producer.end()) continue;  // undriven; validate reports it
    const auto& g = n.gates[it->second];
    cone.insert(g.id);
    for (const auto& in : g.input_nets) work.push_back(in);
  }
  return cone;
}

int NetlistIndex::require_net(const std::string& name) const {
  auto it = net_id.find(name);
  if (it == net_id.end()) throw Error(ErrorCode::UnknownNet, "net " + name);
  return it->second;
}

NetlistIndex build_index(const Netlist& n) {
  NetlistIndex ix;
  ix.netlist = &n;

  auto add_net = [&](const std::string& name, DriverKind kind, int driver) {
    if (ix.net_id.count(name)) {
      throw Error(ErrorCode::DuplicateDriver, "net " + name + " has more than one driver");
    }
    int id = static_cast<int>(ix.net_names.size());
    ix.net_id.emplace(name, id);
    ix.net_names.push_back(name);
    ix.driver_kind.push_back(kind);
    ix.driver_index.push_back(driver);
    return id;
  };

  for (const auto& pi : n.primary_inputs) ix.pi_nets.push_back(add_net(pi, DriverKind::PrimaryInput, -1));
  for (std::size_t i = 0; i < n.flipflops.size(); ++i) {
    ix.ff_q.push_back(add_net(n.flipflops[i].q_net, DriverKind::FlipFlopQ, static_cast<int>(i)));
  }
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    ix.gate_output.push_back(add_net(n.gates[i].output_net, DriverKind::GateOutput, static_cast<int>(i)));
  }

  ix.net_readers.resize(ix.net_names.size());
  ix.gate_inputs.resize(n.gates.size());
  for (std::size_t i = 0; i < n.gates.size(); ++i) {
    const auto& g = n.gates[i];
    for (std::size_t p = 0; p < g.input_nets.size(); ++p) {
      int net = ix.require_net(g.input_nets[p]);
      ix.gate_inputs[i].push_back(net);
      ix.net_readers[net].push_back({static_cast<int>(i), static_cast<int>(p)});
    }
  }
  for (const auto& ff : n.flipflops) ix.ff_d.push_back(ix.require_net(ff.d_net));
  for (const auto& po : n.primary_outputs) ix.po_nets.push_back(ix.require_net(po));

  std::unordered_map<std::string, int> gate_pos;
  for (std::size_t i = 0; i < n.gates.size(); ++i) gate_pos.emplace(n.gates[i].id, static_cast<int>(i));
  for (const auto& id : topological_order(n)) ix.topo_gates.push_back(gate_pos.at(id));

  return ix;
}

}  // namespace twa
