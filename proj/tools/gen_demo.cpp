// Writes the bundled demo data set. Every byte is a function of nothing but
// this source, so regenerating leaves committed files unchanged.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "twa/aging.hpp"
#include "twa/circuits.hpp"
#include "twa/json_io.hpp"
#include "twa/pipeline.hpp"
#include "twa/stabsearch.hpp"
#include "twa/timing.hpp"

namespace {

// mac16 input order: a0..a7, b0..b7, c0..c15, each word LSB first.
twa::InputVector mac_vec(std::uint8_t a, std::uint8_t b, std::uint16_t c) {
  twa::InputVector v(32, 0);
  for (int j = 0; j < 8; ++j) v[j] = (a >> j) & 1;
  for (int i = 0; i < 8; ++i) v[8 + i] = (b >> i) & 1;
  for (int k = 0; k < 16; ++k) v[16 + k] = (c >> k) & 1;
  return v;
}

void put(const std::filesystem::path& path, const std::string& text) {
  twa::write_text_file(path.string(), text);
  std::printf("wrote %s\n", path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir / "workloads");

  twa::Netlist mac = twa::mac16();
  twa::DelayLibrary lib = twa::demo_delay_library();
  put(dir / "mac16.json", twa::serialize_netlist(mac));
  put(dir / "chain4.json", twa::serialize_netlist(twa::four_gate_chain()));
  put(dir / "delay_lib.json", twa::serialize_delay_library(lib));

  twa::AgingParams params;
  put(dir / "aging_params.json", twa::serialize_aging_params(params));

  // Baseline workloads standing in for a reference suite: uniform operands, a
  // one-biased stream and a fixed multiply-accumulate kernel loop.
  twa::StimulusFile uniform;
  uniform.vectors = twa::random_vectors(32, 64, 101);
  uniform.repeat = 4;
  put(dir / "workloads" / "uniform.json", twa::serialize_stimulus_file(uniform));

  twa::StimulusFile biased;
  biased.vectors = twa::biased_vectors(32, 64, 202, 3, 4);
  biased.repeat = 4;
  put(dir / "workloads" / "biased.json", twa::serialize_stimulus_file(biased));

  // Fixed operands, op slice held at 0b0011 (c14, c15 high), address sweep in
  // the low addend bits.
  twa::StimulusFile kernel;
  for (int i = 0; i < 8; ++i) {
    kernel.vectors.push_back(
        mac_vec(0x5A, 0x3C, static_cast<std::uint16_t>(0xC000 | (0x021 + 0x010 * i))));
  }
  kernel.repeat = 32;
  put(dir / "workloads" / "kernel.json", twa::serialize_stimulus_file(kernel));

  // Random operand stream; full-swing hand vectors settle too fast in this
  // array (parity cancellation), random data reaches the deep carry chains.
  twa::StimulusFile victim;
  victim.vectors = twa::random_vectors(32, 64, 13);
  victim.repeat = 2;
  put(dir / "victim.json", twa::serialize_stimulus_file(victim));

  // Instruction-shaped field layout over the 32 mac16 inputs; only the op
  // slice is constrained.
  twa::ValidityPredicate pred;
  pred.fields.push_back({"op", 3, 0, {0x0, 0x3, 0xC, 0xF}});
  pred.fields.push_back({"a", 31, 24, {}});
  pred.fields.push_back({"b", 23, 16, {}});
  pred.fields.push_back({"imm", 15, 4, {}});
  put(dir / "constraints.json", twa::serialize_predicate(pred));

  twa::StabilityQuery query;
  query.target_nets = {"pp0_0", "pp7_7"};
  query.hold_cycles = 10;
  query.objective_pins = {{"pp00", 0}, {"pp00", 1}, {"pp77", 0}, {"pp77", 1}, {"fa0_ha", 0}};
  twa::SearchStrategy strat;
  strat.kind = twa::SearchStrategy::Kind::Mutational;
  strat.seed = 42;
  strat.iterations = 20000;
  put(dir / "stab_query.json", twa::serialize_stability_query(query, strat));

  // Period with a 10% guard over the nominal critical delay, so only aged
  // silicon can miss setup.
  twa::ClockSpec probe;
  probe.period = 1;
  twa::StaResult sta = twa::run_sta(mac, lib, probe);
  twa::Ps period = lib.ff_clk_to_q + (sta.critical_delay * 110 + 99) / 100 + lib.ff_setup;

  twa::AttackConfig cfg;
  cfg.netlist_path = "mac16.json";
  cfg.delay_lib_path = "delay_lib.json";
  cfg.aging_params_path = "aging_params.json";
  cfg.constraints_path = "constraints.json";
  cfg.period_ps = period;
  cfg.margin = 0.02;
  cfg.path_limit = 8;
  cfg.source = twa::PatternSource::Atpg;
  cfg.baseline_paths = {"workloads/uniform.json", "workloads/biased.json",
                        "workloads/kernel.json"};
  cfg.victim_path = "victim.json";
  cfg.horizon_seconds = 5.0 * twa::kSecondsPerYear;
  cfg.seed = 7;
  cfg.out_dir = "out";
  cfg.pattern_loop_cycles = 256;
  cfg.stab_iterations = 20000;
  put(dir / "attack_config.json", twa::serialize_attack_config(cfg));

  std::printf("critical delay %" PRId64 " ps, demo period %" PRId64 " ps\n", sta.critical_delay,
              period);
  return 0;
}
