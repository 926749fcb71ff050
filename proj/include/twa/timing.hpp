#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "twa/netlist.hpp"

namespace twa {

using Ps = std::int64_t;  // picoseconds

struct DelayLibrary {
  std::map<std::string, Ps> cell_delay;  // keyed by CellKind name
  std::map<std::string, Ps> overrides;   // keyed by gate id, wins over cell_delay
  Ps ff_setup = 0;
  Ps ff_clk_to_q = 0;

  Ps gate_delay(const GateInstance& g) const;  // throws MissingDelay
};

struct ClockSpec {
  Ps period = 0;
  double guardband_fraction = 0.10;
};

enum class EndpointKind { PrimaryInput, PrimaryOutput, FlipFlop };

struct PathEndpoint {
  EndpointKind kind = EndpointKind::PrimaryInput;
  std::string id;  // net name for PI/PO, FF id otherwise
};

// One gate traversal: the path enters through `input_pin` and leaves at
// `output_net`.
struct PathStep {
  std::string gate_id;
  int input_pin = 0;
  std::string output_net;
};

struct TimingPath {
  PathEndpoint launch;
  PathEndpoint capture;
  std::string launch_net;  // q net for FF launches, the input net otherwise
  std::vector<PathStep> steps;
  Ps nominal_delay = 0;  // sum of member gate delays, clocking terms excluded
  Ps slack = 0;

  // Launch net followed by each step's output net.
  std::vector<std::string> nets() const;
  bool contains_net(const std::string& net) const;
};

struct StaResult {
  std::map<std::string, Ps> arrival;  // worst-case arrival per net
  Ps critical_delay = 0;              // max arrival over FF d nets and primary outputs
  TimingPath critical_path;
  ClockSpec clock;
  Ps ff_setup = 0;
  Ps ff_clk_to_q = 0;
};

// Vectorless worst-case arrival propagation. Sources start at ff_clk_to_q
// (FF outputs) or 0 (primary inputs). Setup condition only.
StaResult run_sta(const Netlist& n, const DelayLibrary& lib, const ClockSpec& clk);

// All launch-to-capture paths whose arrival-based delay reaches
// (1 - margin_fraction) * critical_delay, best first, at most `limit`.
// Ordering: launch-offset-inclusive delay descending, then a lexicographic
// path key. Exact best-first expansion, no sampling.
std::vector<TimingPath> enumerate_near_critical_paths(const Netlist& n, const DelayLibrary& lib,
                                                      const StaResult& sta, double margin_fraction,
                                                      std::size_t limit);

struct PathSelector {
  enum class Kind { Longest, ThroughNet, Index };
  Kind kind = Kind::Longest;
  std::string net;        // ThroughNet
  std::size_t index = 0;  // Index
};

// Deterministic pick from an already-ranked path list. Throws NoMatchingPath.
const TimingPath& select_target_path(const std::vector<TimingPath>& paths, const PathSelector& sel);

}  // namespace twa
