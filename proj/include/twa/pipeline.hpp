#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twa/aging.hpp"
#include "twa/atpg.hpp"
#include "twa/constraints.hpp"
#include "twa/faultsim.hpp"
#include "twa/json_io.hpp"
#include "twa/stabsearch.hpp"
#include "twa/timing.hpp"

namespace twa {

enum class PatternSource { Atpg, Stability, File };
const char* to_string(PatternSource s);
PatternSource pattern_source_from_string(const std::string& name);

struct AttackConfig {
  std::string netlist_path;
  std::string delay_lib_path;
  std::string aging_params_path;
  std::string constraints_path;  // optional validity predicate
  Ps period_ps = 0;
  double margin = 0.05;
  std::size_t path_limit = 64;
  PathSelector selector;
  PatternSource source = PatternSource::Atpg;
  std::string patterns_path;    // source File: a stimulus file
  std::string stab_query_path;  // source Stability; built from the path when empty
  std::vector<std::string> baseline_paths;  // stimulus files, mean is the aging reference
  std::string victim_path;      // stimulus for corruption evaluation; first baseline when empty
  double idle_fraction = 0.0;   // applied to attack-pattern duty only
  IdleMode idle_mode = IdleMode::Multiplicative;
  double horizon_seconds = 5.0 * kSecondsPerYear;
  CalibrationRef calibration;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int pattern_loop_cycles = 256;
  AtpgOptions atpg;
  int stab_want = 20;
  std::uint64_t stab_iterations = 20000;
};

AttackConfig parse_attack_config(const std::string& json_text);
std::string serialize_attack_config(const AttackConfig& cfg);

struct WorkloadSummary {
  std::string name;
  std::string source;  // baseline | atpg | stability | file
  double stress_sum = 0.0;
  double lifetime_ratio = 1.0;
  double aging_acceleration = 1.0;
  double degradation_pct_at_t = 0.0;
  bool guardband_fails = false;
  double mean_toggles_per_cycle = 0.0;
  double time_to_failure_seconds = 0.0;
};

struct CorruptionSummary {
  std::string pattern_name;
  int first_divergence_cycle = -1;
  std::uint64_t corrupted_bits = 0;
  int violation_count = 0;
  bool lateness_cap_hit = false;
};

struct AttackReport {
  std::string tool_version;
  std::string netlist_name;
  std::uint64_t seed = 0;
  Ps period_ps = 0;
  double margin = 0.0;
  TimingPath target_path;
  Ps critical_delay = 0;
  AgingParams params;      // A holds the calibrated value
  double calibrated_A = 0.0;
  CalibrationRef calibration;
  double idle_fraction = 0.0;
  IdleMode idle_mode = IdleMode::Multiplicative;
  double horizon_seconds = 0.0;
  double reference_stress = 0.0;  // mean baseline stress sum
  double threshold_ps = 0.0;
  std::string beta_convention;
  std::vector<WorkloadSummary> baselines;
  std::vector<WorkloadSummary> patterns;  // acceleration descending
  CorruptionSummary corruption;
};

// Full flow: load, sta, select, patterns, duty, aging, faultsim, emit.
// Intermediate artifacts land in cfg.out_dir; the report JSON is byte-stable
// across identical runs (wall-clock metadata lives in run_meta.json).
// Errors carry the failing stage name.
AttackReport run_attack_pipeline(const AttackConfig& cfg);

std::string report_to_json(const AttackReport& r);
AttackReport parse_report(const std::string& json_text);
// One row per workload and pattern: name, source, acceleration,
// lifetime_ratio, degradation_pct_at_t, guardband_verdict,
// mean_toggles_per_cycle.
std::string report_to_csv(const AttackReport& r);
void emit_report(const AttackReport& r, const std::string& dir);

// Text listing: const declarations for distinct operand values, then a loop
// body with one op line per vector. The opcode field is the one named "op",
// else the first field. Throws FieldMapMismatch unless the fields exactly
// partition the vector bits.
std::string emit_stimulus_program(const std::vector<InputVector>& vectors,
                                  const ValidityPredicate& field_map);

}  // namespace twa
