#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "twa/error.hpp"

namespace twa {

// Fixed basic-cell vocabulary. MUX2 input order is {S, A, B}: S=0 selects A.
enum class CellKind {
  INV,
  BUF,
  AND2,
  AND3,
  OR2,
  OR3,
  NAND2,
  NAND3,
  NOR2,
  NOR3,
  XOR2,
  XNOR2,
  MUX2,
};

inline constexpr int kCellKindCount = 13;

int input_count(CellKind kind);
const char* to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& name);  // throws SchemaError

// Two-valued evaluation; `in` holds one 0/1 value per input pin.
std::uint8_t eval_cell(CellKind kind, const std::uint8_t* in);

struct GateInstance {
  std::string id;
  CellKind kind = CellKind::INV;
  std::vector<std::string> input_nets;
  std::string output_net;
};

struct FlipFlop {
  std::string id;
  std::string d_net;
  std::string q_net;
  std::uint8_t init_value = 0;
};

struct Netlist {
  std::string name;
  std::vector<std::string> primary_inputs;
  std::vector<std::string> primary_outputs;
  std::vector<GateInstance> gates;
  std::vector<FlipFlop> flipflops;

  const GateInstance* find_gate(const std::string& id) const;
  const FlipFlop* find_ff(const std::string& id) const;
};

enum class DiagCode {
  SchemaError,
  DuplicateId,
  DuplicateDriver,
  UndrivenNet,
  ArityMismatch,
  CombinationalLoop,
};

const char* to_string(DiagCode code);

struct Diagnostic {
  DiagCode code;
  std::string element;  // offending net / gate / ff
  std::string message;
};

Netlist parse_netlist(const std::string& json_text);
std::string serialize_netlist(const Netlist& n);
std::vector<Diagnostic> validate_netlist(const Netlist& n);

// Gate ids such that every gate appears after all gates driving its inputs.
// Ties broken by lexicographic gate id. Throws CombinationalLoop.
std::vector<std::string> topological_order(const Netlist& n);

// Gate ids plus primary-input and FF q net names that can influence `net`
// within one cycle (reverse traversal halting at FF outputs and inputs).
std::set<std::string> fanin_cone(const Netlist& n, const std::string& net);

// Dense-index view of a valid netlist, shared by the simulators, timing and
// test generation. Net order: primary inputs, FF q nets, gate outputs, each
// in declaration order.
struct PinRef {
  int gate = -1;
  int pin = -1;
};

enum class DriverKind { PrimaryInput, FlipFlopQ, GateOutput, None };

struct NetlistIndex {
  const Netlist* netlist = nullptr;
  std::vector<std::string> net_names;
  std::unordered_map<std::string, int> net_id;
  std::vector<DriverKind> driver_kind;           // per net
  std::vector<int> driver_index;                 // gate or ff index, -1 for PI
  std::vector<std::vector<int>> gate_inputs;     // gate -> input net ids
  std::vector<int> gate_output;                  // gate -> output net id
  std::vector<std::vector<PinRef>> net_readers;  // net -> gate pins it feeds
  std::vector<int> ff_d;                         // ff -> d net id
  std::vector<int> ff_q;                         // ff -> q net id
  std::vector<int> pi_nets;                      // declared order
  std::vector<int> po_nets;                      // declared order
  std::vector<int> topo_gates;                   // gate indices, topological

  int require_net(const std::string& name) const;  // throws UnknownNet
};

// Requires a netlist with unique drivers and no combinational cycle; throws
// the corresponding Error otherwise.
NetlistIndex build_index(const Netlist& n);

}  // namespace twa
