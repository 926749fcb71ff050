#pragma once

#include <cstdint>
#include <vector>

#include "twa/logicsim.hpp"
#include "twa/netlist.hpp"
#include "twa/timing.hpp"

namespace twa {

// FF-launched four-gate chain: ff_a -> inv1 -> nand1 -> nor1 -> inv2 -> ff_b,
// side inputs b (nand1) and c (nor1), primary input a feeding ff_a.d.
Netlist four_gate_chain();

// a forks into INV and BUF, reconverging at an AND2 that drives the output.
Netlist diamond();

// 8x8 multiplier plus 16-bit adder, sum registered into 16 output FFs.
// Inputs a0..a7, b0..b7, c0..c15; outputs p0..p15 (FF q nets).
Netlist mac16();

// Library used by the bundled demos.
DelayLibrary demo_delay_library();

struct RandomDagSpec {
  int gates = 50;
  int inputs = 8;
  int outputs = 4;
  int ffs = 2;
  std::uint64_t seed = 1;
  // Construction keeps the total source-to-capture path count at or below
  // this budget so brute-force enumeration stays exact and cheap.
  std::uint64_t path_budget = 50000;
};

Netlist random_dag(const RandomDagSpec& spec);

// Deterministic stimulus generators (explicit bit extraction from the engine;
// no library distributions).
std::vector<InputVector> random_vectors(int width, int count, std::uint64_t seed);
// Each bit is 1 with probability num/den.
std::vector<InputVector> biased_vectors(int width, int count, std::uint64_t seed, int num, int den);

}  // namespace twa
