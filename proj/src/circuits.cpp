#include "twa/circuits.hpp"

#include <cstdio>
#include <random>

namespace twa {

namespace {

std::string pad2(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string pad3(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", v);
  return buf;
}

void add_gate(Netlist& n, std::string id, CellKind kind, std::vector<std::string> in,
              std::string out) {
  n.gates.push_back({std::move(id), kind, std::move(in), std::move(out)});
}

// sum = x^y, carry = x&y
void half_adder(Netlist& n, const std::string& base, const std::string& x, const std::string& y,
                const std::string& sum, const std::string& carry) {
  add_gate(n, base + "_hx", CellKind::XOR2, {x, y}, sum);
  add_gate(n, base + "_ha", CellKind::AND2, {x, y}, carry);
}

// sum = x^y^z, carry = (x&y) | ((x^y)&z)
void full_adder(Netlist& n, const std::string& base, const std::string& x, const std::string& y,
                const std::string& z, const std::string& sum, const std::string& carry) {
  add_gate(n, base + "_x1", CellKind::XOR2, {x, y}, base + "_p");
  add_gate(n, base + "_x2", CellKind::XOR2, {base + "_p", z}, sum);
  add_gate(n, base + "_a1", CellKind::AND2, {x, y}, base + "_g");
  add_gate(n, base + "_a2", CellKind::AND2, {base + "_p", z}, base + "_t");
  add_gate(n, base + "_or", CellKind::OR2, {base + "_g", base + "_t"}, carry);
}

}  // namespace

Netlist four_gate_chain() {
  Netlist n;
  n.name = "chain4";
  n.primary_inputs = {"a", "b", "c"};
  n.primary_outputs = {"qb"};
  add_gate(n, "inv1", CellKind::INV, {"qa"}, "n1");
  add_gate(n, "nand1", CellKind::NAND2, {"n1", "b"}, "n2");
  add_gate(n, "nor1", CellKind::NOR2, {"n2", "c"}, "n3");
  add_gate(n, "inv2", CellKind::INV, {"n3"}, "y4");
  n.flipflops.push_back({"ff_a", "a", "qa", 0});
  n.flipflops.push_back({"ff_b", "y4", "qb", 0});
  return n;
}

Netlist diamond() {
  Netlist n;
  n.name = "diamond";
  n.primary_inputs = {"a"};
  n.primary_outputs = {"y"};
  add_gate(n, "and1", CellKind::AND2, {"n1", "n2"}, "y");
  add_gate(n, "buf1", CellKind::BUF, {"a"}, "n2");
  add_gate(n, "inv1", CellKind::INV, {"a"}, "n1");
  return n;
}

Netlist mac16() {
  Netlist n;
  n.name = "mac16";
  for (int i = 0; i < 8; ++i) n.primary_inputs.push_back("a" + std::to_string(i));
  for (int i = 0; i < 8; ++i) n.primary_inputs.push_back("b" + std::to_string(i));
  for (int i = 0; i < 16; ++i) n.primary_inputs.push_back("c" + std::to_string(i));

  // pp[i][j] = a_j & b_i, weight 2^(i+j)
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      add_gate(n, "pp" + std::to_string(i) + std::to_string(j), CellKind::AND2,
               {"a" + std::to_string(j), "b" + std::to_string(i)},
               "pp" + std::to_string(i) + "_" + std::to_string(j));
    }
  }

  // Row-ripple array. Row 0 is the bare partial products; each later row i
  // adds pp[i][*] to the shifted running sum. s{i}_{j} has weight 2^(i+j+1),
  // m{k} is product bit k.
  auto pp = [](int i, int j) { return "pp" + std::to_string(i) + "_" + std::to_string(j); };
  auto s = [](int i, int j) { return "s" + std::to_string(i) + "_" + std::to_string(j); };
  auto c = [](int i, int j) { return "c" + std::to_string(i) + "_" + std::to_string(j); };
  auto m = [](int k) { return "m" + std::to_string(k); };

  // Row 0 sums are the pp0 bits themselves; rename via BUF-free aliasing is
  // not possible with single drivers, so row 1 consumes pp0 directly.
  // m0 = pp0_0.
  {
    int i = 1;
    half_adder(n, "r1c0", pp(0, 1), pp(i, 0), m(1), c(i, 0));
    for (int j = 1; j <= 6; ++j) {
      full_adder(n, "r1c" + std::to_string(j), pp(0, j + 1), pp(i, j), c(i, j - 1), s(i, j),
                 c(i, j));
    }
    half_adder(n, "r1c7", pp(i, 7), c(i, 6), s(i, 7), c(i, 7));
  }
  for (int i = 2; i <= 7; ++i) {
    std::string r = "r" + std::to_string(i) + "c";
    half_adder(n, r + "0", s(i - 1, 1), pp(i, 0), m(i), c(i, 0));
    for (int j = 1; j <= 6; ++j) {
      full_adder(n, r + std::to_string(j), s(i - 1, j + 1), pp(i, j), c(i, j - 1), s(i, j),
                 c(i, j));
    }
    full_adder(n, r + "7", c(i - 1, 7), pp(i, 7), c(i, 6), s(i, 7), c(i, 7));
  }
  // m8..m14 = s7_1..s7_7, m15 = c7_7; wired below through the final adder.

  auto mul_bit = [&](int k) -> std::string {
    if (k == 0) return pp(0, 0);
    if (k <= 7) return m(k);
    if (k <= 14) return s(7, k - 7);
    return c(7, 7);
  };

  // z = (a*b + c) mod 2^16, registered.
  half_adder(n, "fa0", mul_bit(0), "c0", "z0", "k0");
  for (int j = 1; j <= 15; ++j) {
    full_adder(n, "fa" + std::to_string(j), mul_bit(j), "c" + std::to_string(j),
               "k" + std::to_string(j - 1), "z" + std::to_string(j), "k" + std::to_string(j));
  }
  for (int j = 0; j < 16; ++j) {
    n.flipflops.push_back(
        {"ff_p" + std::to_string(j), "z" + std::to_string(j), "p" + std::to_string(j), 0});
    n.primary_outputs.push_back("p" + std::to_string(j));
  }
  return n;
}

DelayLibrary demo_delay_library() {
  DelayLibrary lib;
  lib.cell_delay["INV"] = 10;
  lib.cell_delay["BUF"] = 5;
  lib.cell_delay["AND2"] = 20;
  lib.cell_delay["AND3"] = 25;
  lib.cell_delay["OR2"] = 20;
  lib.cell_delay["OR3"] = 25;
  lib.cell_delay["NAND2"] = 20;
  lib.cell_delay["NAND3"] = 25;
  lib.cell_delay["NOR2"] = 20;
  lib.cell_delay["NOR3"] = 25;
  lib.cell_delay["XOR2"] = 30;
  lib.cell_delay["XNOR2"] = 30;
  lib.cell_delay["MUX2"] = 25;
  lib.ff_setup = 20;
  lib.ff_clk_to_q = 15;
  return lib;
}

Netlist random_dag(const RandomDagSpec& spec) {
  std::mt19937_64 eng(spec.seed);
  Netlist n;
  n.name = "dag" + std::to_string(spec.seed);

  std::vector<std::string> nets;        // drivable sources for later gates
  std::vector<std::uint64_t> path_cnt;  // source-to-net path count
  for (int i = 0; i < spec.inputs; ++i) {
    n.primary_inputs.push_back("i" + pad2(i));
    nets.push_back(n.primary_inputs.back());
    path_cnt.push_back(1);
  }
  for (int f = 0; f < spec.ffs; ++f) {
    nets.push_back("q" + std::to_string(f));
    path_cnt.push_back(1);
  }

  const CellKind kinds[] = {CellKind::INV,   CellKind::BUF,   CellKind::AND2, CellKind::AND3,
                            CellKind::OR2,   CellKind::OR3,   CellKind::NAND2, CellKind::NAND3,
                            CellKind::NOR2,  CellKind::NOR3,  CellKind::XOR2, CellKind::XNOR2,
                            CellKind::MUX2};
  std::uint64_t total_paths = nets.size();
  const std::uint64_t budget = spec.path_budget;

  std::vector<std::string> gate_outs;
  for (int g = 0; g < spec.gates; ++g) {
    CellKind kind = kinds[eng() % 13];
    int arity = input_count(kind);
    std::vector<int> pick(arity);
    std::uint64_t sum = 0;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      sum = 0;
      for (int p = 0; p < arity; ++p) {
        pick[p] = static_cast<int>(eng() % nets.size());
        sum += path_cnt[pick[p]];
      }
      ok = total_paths + sum <= budget;
    }
    if (!ok) {
      // wire to primary inputs, each contributing one path
      for (int p = 0; p < arity; ++p) pick[p] = static_cast<int>(eng() % spec.inputs);
      sum = static_cast<std::uint64_t>(arity);
    }
    std::vector<std::string> ins;
    for (int p = 0; p < arity; ++p) ins.push_back(nets[pick[p]]);
    std::string out = "n" + pad3(g);
    add_gate(n, "g" + pad3(g), kind, ins, out);
    gate_outs.push_back(out);
    nets.push_back(out);
    path_cnt.push_back(sum);
    total_paths += sum;
  }

  // captures: FF d pins and primary outputs, drawn without replacement
  std::vector<std::string> pool = gate_outs.empty() ? n.primary_inputs : gate_outs;
  auto draw = [&]() {
    std::string net = pool[eng() % pool.size()];
    return net;
  };
  for (int f = 0; f < spec.ffs; ++f) {
    n.flipflops.push_back({"ff" + std::to_string(f), draw(), "q" + std::to_string(f),
                           static_cast<std::uint8_t>(eng() & 1)});
  }
  std::set<std::string> used;
  for (int o = 0; o < spec.outputs; ++o) {
    std::string net = draw();
    if (used.insert(net).second) n.primary_outputs.push_back(net);
  }
  if (n.primary_outputs.empty()) n.primary_outputs.push_back(pool.front());
  return n;
}

std::vector<InputVector> random_vectors(int width, int count, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<InputVector> out(count);
  for (auto& v : out) {
    v.resize(width);
    for (int i = 0; i < width; ++i) v[i] = static_cast<std::uint8_t>(eng() & 1);
  }
  return out;
}

std::vector<InputVector> biased_vectors(int width, int count, std::uint64_t seed, int num,
                                        int den) {
  if (den <= 0 || num < 0 || num > den) {
    throw Error(ErrorCode::InvalidFraction, "bit bias must satisfy 0 <= num <= den");
  }
  std::mt19937_64 eng(seed);
  std::vector<InputVector> out(count);
  for (auto& v : out) {
    v.resize(width);
    for (int i = 0; i < width; ++i) {
      v[i] = eng() % static_cast<std::uint64_t>(den) < static_cast<std::uint64_t>(num) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace twa
