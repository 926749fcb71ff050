#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "twa/json_io.hpp"
#include "twa/pipeline.hpp"

using namespace twa;

namespace {

std::string data_path(const std::string& rel) { return std::string(TWA_DATA_DIR) + "/" + rel; }

std::string temp_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// The bundled config names its inputs relative to the data directory.
AttackConfig demo_config(const std::string& out_dir) {
  AttackConfig cfg = parse_attack_config(read_text_file(data_path("attack_config.json")));
  auto rebase = [](std::string& p) {
    if (!p.empty()) p = data_path(p);
  };
  rebase(cfg.netlist_path);
  rebase(cfg.delay_lib_path);
  rebase(cfg.aging_params_path);
  rebase(cfg.constraints_path);
  rebase(cfg.patterns_path);
  rebase(cfg.stab_query_path);
  rebase(cfg.victim_path);
  for (auto& b : cfg.baseline_paths) rebase(b);
  cfg.out_dir = out_dir;
  return cfg;
}

struct DemoRun {
  AttackReport report;
  std::string out;
};

// One shared end-to-end run; several cases below read its artifacts.
const DemoRun& demo_run() {
  static DemoRun run = [] {
    std::string out = temp_dir("twa_demo_run");
    return DemoRun{run_attack_pipeline(demo_config(out)), out};
  }();
  return run;
}

InputVector bits(const std::string& s) {
  InputVector v;
  for (char c : s) v.push_back(c == '1');
  return v;
}

void check_error_stage(const AttackConfig& cfg, ErrorCode code, const std::string& stage_tag) {
  try {
    run_attack_pipeline(cfg);
    FAIL(("expected a pipeline error in " + stage_tag).c_str());
  } catch (const Error& e) {
    CHECK(e.code() == code);
    CHECK(std::string(e.what()).find(stage_tag) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("attack config round trip") {
  AttackConfig cfg;
  cfg.netlist_path = "n.json";
  cfg.delay_lib_path = "d.json";
  cfg.aging_params_path = "ag.json";
  cfg.constraints_path = "c.json";
  cfg.period_ps = 1234;
  cfg.margin = 0.07;
  cfg.path_limit = 9;
  cfg.selector.kind = PathSelector::Kind::ThroughNet;
  cfg.selector.net = "n42";
  cfg.source = PatternSource::Stability;
  cfg.patterns_path = "p.json";
  cfg.stab_query_path = "q.json";
  cfg.baseline_paths = {"b1.json", "b2.json"};
  cfg.victim_path = "v.json";
  cfg.idle_fraction = 0.25;
  cfg.idle_mode = IdleMode::Subtractive;
  cfg.horizon_seconds = 1.0e7;
  cfg.calibration.beta_cal = 0.6;
  cfg.calibration.lifetime_cal_seconds = 2.0e7;
  cfg.seed = 99;
  cfg.out_dir = "elsewhere";
  cfg.pattern_loop_cycles = 77;
  cfg.atpg.backtrack_budget = 123;
  cfg.atpg.vectors_per_pattern = 4;
  cfg.stab_want = 5;
  cfg.stab_iterations = 555;

  AttackConfig back = parse_attack_config(serialize_attack_config(cfg));
  CHECK(back.netlist_path == cfg.netlist_path);
  CHECK(back.delay_lib_path == cfg.delay_lib_path);
  CHECK(back.aging_params_path == cfg.aging_params_path);
  CHECK(back.constraints_path == cfg.constraints_path);
  CHECK(back.period_ps == cfg.period_ps);
  CHECK(back.margin == cfg.margin);
  CHECK(back.path_limit == cfg.path_limit);
  CHECK(back.selector.kind == PathSelector::Kind::ThroughNet);
  CHECK(back.selector.net == "n42");
  CHECK(back.source == PatternSource::Stability);
  CHECK(back.patterns_path == cfg.patterns_path);
  CHECK(back.stab_query_path == cfg.stab_query_path);
  CHECK(back.baseline_paths == cfg.baseline_paths);
  CHECK(back.victim_path == cfg.victim_path);
  CHECK(back.idle_fraction == cfg.idle_fraction);
  CHECK(back.idle_mode == IdleMode::Subtractive);
  CHECK(back.horizon_seconds == cfg.horizon_seconds);
  CHECK(back.calibration.beta_cal == cfg.calibration.beta_cal);
  CHECK(back.calibration.lifetime_cal_seconds == cfg.calibration.lifetime_cal_seconds);
  CHECK(back.seed == cfg.seed);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(back.pattern_loop_cycles == cfg.pattern_loop_cycles);
  CHECK(back.atpg.backtrack_budget == cfg.atpg.backtrack_budget);
  CHECK(back.atpg.vectors_per_pattern == cfg.atpg.vectors_per_pattern);
  CHECK(back.stab_want == cfg.stab_want);
  CHECK(back.stab_iterations == cfg.stab_iterations);

  cfg.selector.kind = PathSelector::Kind::Index;
  cfg.selector.index = 3;
  back = parse_attack_config(serialize_attack_config(cfg));
  CHECK(back.selector.kind == PathSelector::Kind::Index);
  CHECK(back.selector.index == 3);

  SUBCASE("an empty document keeps the defaults") {
    AttackConfig def = parse_attack_config("{}");
    CHECK(def.margin == 0.05);
    CHECK(def.path_limit == 64);
    CHECK(def.selector.kind == PathSelector::Kind::Longest);
    CHECK(def.source == PatternSource::Atpg);
    CHECK(def.horizon_seconds == 5.0 * kSecondsPerYear);
    CHECK(def.calibration.beta_cal == 0.5);
    CHECK(def.out_dir == "out");
    CHECK(def.pattern_loop_cycles == 256);
    CHECK(def.seed == 1);
  }
  SUBCASE("unknown enum names are rejected") {
    CHECK_THROWS_AS(parse_attack_config(R"({"source":"fuzz"})"), Error);
    CHECK_THROWS_AS(parse_attack_config(R"({"select":{"kind":"widest"}})"), Error);
    CHECK_THROWS_AS(parse_attack_config("not json"), Error);
    CHECK_THROWS_AS(pattern_source_from_string("x"), Error);
    CHECK(pattern_source_from_string("file") == PatternSource::File);
    CHECK(std::string(to_string(PatternSource::Stability)) == "stability");
  }
}

TEST_CASE("stimulus files round trip and expand") {
  StimulusFile s;
  s.vectors = {bits("101"), bits("000")};
  s.repeat = 3;
  StimulusFile back = parse_stimulus_file(serialize_stimulus_file(s));
  CHECK(back.vectors == s.vectors);
  CHECK(back.repeat == 3);
  std::vector<InputVector> ex = back.expand(3);
  REQUIRE(ex.size() == 6);
  CHECK(ex[2] == s.vectors[0]);
  CHECK(ex[5] == s.vectors[1]);
  CHECK_THROWS_AS(back.expand(4), Error);
}

TEST_CASE("pipeline errors carry the failing stage") {
  AttackConfig cfg;
  check_error_stage(cfg, ErrorCode::IoError, "stage load");

  std::string tmp = temp_dir("twa_stage_errors");
  StimulusFile base;
  base.vectors = {bits("000"), bits("100"), bits("110"), bits("111")};
  base.repeat = 2;
  write_text_file(tmp + "/base3.json", serialize_stimulus_file(base));

  cfg.netlist_path = data_path("chain4.json");
  cfg.delay_lib_path = data_path("delay_lib.json");
  cfg.aging_params_path = data_path("aging_params.json");
  cfg.out_dir = tmp + "/out";
  check_error_stage(cfg, ErrorCode::SchemaError, "stage load");  // no baselines

  cfg.baseline_paths = {tmp + "/base3.json"};
  cfg.period_ps = 0;
  check_error_stage(cfg, ErrorCode::DomainError, "stage sta");

  cfg.period_ps = 200;
  cfg.source = PatternSource::File;
  check_error_stage(cfg, ErrorCode::IoError, "stage patterns");  // no patterns path
}

TEST_CASE("file-source run on the relaxed chain") {
  std::string tmp = temp_dir("twa_chain_run");
  StimulusFile base;
  base.vectors = {bits("000"), bits("100"), bits("110"), bits("111")};
  base.repeat = 2;
  write_text_file(tmp + "/base3.json", serialize_stimulus_file(base));
  StimulusFile attack;
  attack.vectors = {bits("010"), bits("110"), bits("010"), bits("100")};
  write_text_file(tmp + "/attack3.json", serialize_stimulus_file(attack));

  AttackConfig cfg;
  cfg.netlist_path = data_path("chain4.json");
  cfg.delay_lib_path = data_path("delay_lib.json");
  cfg.aging_params_path = data_path("aging_params.json");
  cfg.period_ps = 200;
  cfg.margin = 0.0;
  cfg.path_limit = 4;
  cfg.source = PatternSource::File;
  cfg.patterns_path = tmp + "/attack3.json";
  cfg.baseline_paths = {tmp + "/base3.json"};
  cfg.pattern_loop_cycles = 8;
  cfg.out_dir = tmp + "/out";

  AttackReport r = run_attack_pipeline(cfg);
  CHECK(r.netlist_name == "chain4");
  CHECK(r.critical_delay == 75);
  CHECK(r.target_path.nominal_delay == 60);
  REQUIRE(r.baselines.size() == 1);
  REQUIRE(r.patterns.size() == 1);
  CHECK(r.baselines[0].name == "base3");
  CHECK(r.baselines[0].source == "baseline");
  CHECK(r.patterns[0].name == "attack3");
  CHECK(r.patterns[0].source == "file");
  CHECK(r.corruption.pattern_name == "attack3");
  // Ample slack: the aged netlist still meets timing, nothing corrupts.
  CHECK(r.corruption.first_divergence_cycle == -1);
  CHECK(r.corruption.corrupted_bits == 0);
  CHECK(r.corruption.violation_count == 0);

  for (const char* f : {"sta_report.json", "target_path.json", "duty_base3.json",
                        "duty_attack3.json", "aged_delays.json", "corruption_diff.json",
                        "report.json", "report.csv"}) {
    CHECK(std::filesystem::exists(tmp + "/out/" + f));
  }
  // wall-clock metadata is the driver's business, not the library's
  CHECK_FALSE(std::filesystem::exists(tmp + "/out/run_meta.json"));
}

TEST_CASE("demo run produces a ranked, corrupting attack") {
  const AttackReport& r = demo_run().report;
  CHECK(r.netlist_name == "mac16");
  CHECK(r.period_ps == 1157);
  CHECK(r.critical_delay == 1020);
  CHECK(r.target_path.nominal_delay > 0);
  CHECK(r.calibrated_A > 0.0);
  CHECK(r.threshold_ps > 0.0);
  CHECK(r.beta_convention == "worst-pin");
  CHECK_FALSE(r.tool_version.empty());

  REQUIRE(r.baselines.size() == 3);
  CHECK(r.baselines[0].name == "uniform");
  CHECK(r.baselines[1].name == "biased");
  CHECK(r.baselines[2].name == "kernel");
  for (const auto& b : r.baselines) CHECK(b.source == "baseline");

  REQUIRE_FALSE(r.patterns.empty());
  for (const auto& p : r.patterns) CHECK(p.source == "atpg");
  for (std::size_t i = 1; i < r.patterns.size(); ++i) {
    CHECK(r.patterns[i - 1].aging_acceleration >= r.patterns[i].aging_acceleration);
  }
  CHECK(r.patterns.front().aging_acceleration > 1.0);
  CHECK(r.patterns.front().guardband_fails);

  CHECK(r.corruption.pattern_name == r.patterns.front().name);
  CHECK(r.corruption.first_divergence_cycle >= 0);
  CHECK(r.corruption.corrupted_bits > 0);
  CHECK(r.corruption.violation_count > 0);

  // constraint fields partition the inputs, so a program listing is emitted
  CHECK(std::filesystem::exists(demo_run().out + "/attack_program.txt"));
  CHECK(std::filesystem::exists(demo_run().out + "/patterns.json"));
}

TEST_CASE("demo run is byte-stable") {
  std::string again = temp_dir("twa_demo_run_again");
  run_attack_pipeline(demo_config(again));
  CHECK(read_text_file(demo_run().out + "/report.json") ==
        read_text_file(again + "/report.json"));
  CHECK(read_text_file(demo_run().out + "/report.csv") == read_text_file(again + "/report.csv"));
  CHECK(read_text_file(demo_run().out + "/target_path.json") ==
        read_text_file(again + "/target_path.json"));
  CHECK(read_text_file(demo_run().out + "/attack_program.txt") ==
        read_text_file(again + "/attack_program.txt"));
}

TEST_CASE("report rows agree with the aging model recomputed from artifacts") {
  const DemoRun& d = demo_run();
  const AttackReport& r = d.report;
  TimingPath path = parse_paths(read_text_file(d.out + "/target_path.json")).front();
  CHECK(path.nominal_delay == r.target_path.nominal_delay);
  CHECK(path.launch_net == r.target_path.launch_net);
  REQUIRE(path.steps.size() == r.target_path.steps.size());

  CHECK(failure_threshold_ps(path, r.params) ==
        doctest::Approx(r.threshold_ps).epsilon(1e-12));

  double ref = 0.0;
  for (const auto& b : r.baselines) ref += b.stress_sum;
  ref /= static_cast<double>(r.baselines.size());
  CHECK(ref == doctest::Approx(r.reference_stress).epsilon(1e-12));

  std::vector<WorkloadSummary> rows = r.baselines;
  rows.insert(rows.end(), r.patterns.begin(), r.patterns.end());
  for (const auto& w : rows) {
    DutyProfile duty = parse_duty_profile(read_text_file(d.out + "/duty_" + w.name + ".json"));
    double stress = path_stress_sum(duty, path, r.params.n, r.params.beta_clamp_epsilon);
    CHECK(stress == doctest::Approx(w.stress_sum).epsilon(1e-12));

    PathDelta dd = delta_delay(duty, path, r.params, r.horizon_seconds);
    double pct = dd.total_ps / static_cast<double>(path.nominal_delay) * 100.0;
    CHECK(pct == doctest::Approx(w.degradation_pct_at_t).epsilon(1e-12));
    CHECK(w.guardband_fails == (dd.total_ps >= r.threshold_ps));

    CHECK(std::pow(stress / r.reference_stress, 1.0 / r.params.n) ==
          doctest::Approx(w.aging_acceleration).epsilon(1e-12));
    CHECK(w.lifetime_ratio == doctest::Approx(1.0 / w.aging_acceleration).epsilon(1e-12));

    double ttf = time_to_failure(duty, path, r.params);
    CHECK(ttf == doctest::Approx(w.time_to_failure_seconds).epsilon(1e-9));
  }
}

TEST_CASE("report JSON and CSV round trip, infinities included") {
  AttackReport r = demo_run().report;
  r.patterns[0].lifetime_ratio = std::numeric_limits<double>::infinity();
  r.patterns[0].aging_acceleration = 0.0;
  r.patterns[0].time_to_failure_seconds = std::numeric_limits<double>::infinity();
  r.baselines[0].degradation_pct_at_t = std::numeric_limits<double>::quiet_NaN();

  std::string text = report_to_json(r);
  CHECK(text.find("\"inf\"") != std::string::npos);
  CHECK(text.find("\"nan\"") != std::string::npos);

  AttackReport back = parse_report(text);
  CHECK(back.tool_version == r.tool_version);
  CHECK(back.netlist_name == r.netlist_name);
  CHECK(back.seed == r.seed);
  CHECK(back.period_ps == r.period_ps);
  CHECK(back.margin == r.margin);
  CHECK(back.critical_delay == r.critical_delay);
  CHECK(back.calibrated_A == r.calibrated_A);
  CHECK(back.calibration.beta_cal == r.calibration.beta_cal);
  CHECK(back.calibration.lifetime_cal_seconds == r.calibration.lifetime_cal_seconds);
  CHECK(back.idle_fraction == r.idle_fraction);
  CHECK(back.horizon_seconds == r.horizon_seconds);
  CHECK(back.reference_stress == r.reference_stress);
  CHECK(back.threshold_ps == r.threshold_ps);
  CHECK(back.beta_convention == r.beta_convention);
  CHECK(back.params.A == r.params.A);
  CHECK(back.params.n == r.params.n);
  CHECK(back.target_path.nominal_delay == r.target_path.nominal_delay);
  CHECK(back.target_path.steps.size() == r.target_path.steps.size());

  REQUIRE(back.baselines.size() == r.baselines.size());
  REQUIRE(back.patterns.size() == r.patterns.size());
  CHECK(std::isinf(back.patterns[0].lifetime_ratio));
  CHECK(back.patterns[0].aging_acceleration == 0.0);
  CHECK(std::isinf(back.patterns[0].time_to_failure_seconds));
  CHECK(std::isnan(back.baselines[0].degradation_pct_at_t));
  for (std::size_t i = 1; i < back.patterns.size(); ++i) {
    CHECK(back.patterns[i].stress_sum == r.patterns[i].stress_sum);
    CHECK(back.patterns[i].aging_acceleration == r.patterns[i].aging_acceleration);
    CHECK(back.patterns[i].guardband_fails == r.patterns[i].guardband_fails);
    CHECK(back.patterns[i].name == r.patterns[i].name);
  }
  CHECK(back.corruption.pattern_name == r.corruption.pattern_name);
  CHECK(back.corruption.corrupted_bits == r.corruption.corrupted_bits);

  std::string csv = report_to_csv(r);
  CHECK(csv.rfind("name,source,acceleration,lifetime_ratio,degradation_pct_at_t,"
                  "guardband_verdict,mean_toggles_per_cycle\n",
                  0) == 0);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + r.baselines.size() + r.patterns.size());
  bool csv_has_inf =
      csv.find(",inf\n") != std::string::npos || csv.find(",inf,") != std::string::npos;
  CHECK(csv_has_inf);  // sentinel text lands in the CSV too
  CHECK(csv.find(",fails,") != std::string::npos);
  CHECK(csv.find(",nan,") != std::string::npos);
}

TEST_CASE("a pattern equal to the baseline accelerates nothing") {
  std::string tmp = temp_dir("twa_self_compare");
  AttackConfig cfg = demo_config(tmp);
  cfg.source = PatternSource::File;
  cfg.patterns_path = data_path("workloads/uniform.json");
  cfg.baseline_paths = {data_path("workloads/uniform.json")};
  // 64 vectors repeated 4 times in the file; the loop budget reproduces that
  cfg.pattern_loop_cycles = 256;

  AttackReport r = run_attack_pipeline(cfg);
  REQUIRE(r.baselines.size() == 1);
  REQUIRE(r.patterns.size() == 1);
  CHECK(r.patterns[0].stress_sum == r.baselines[0].stress_sum);
  CHECK(r.patterns[0].aging_acceleration == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.patterns[0].lifetime_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.patterns[0].degradation_pct_at_t == r.baselines[0].degradation_pct_at_t);
  CHECK(r.patterns[0].mean_toggles_per_cycle == r.baselines[0].mean_toggles_per_cycle);
  CHECK(r.patterns[0].time_to_failure_seconds == r.baselines[0].time_to_failure_seconds);
}

TEST_CASE("stimulus program listing") {
  ValidityPredicate map = parse_predicate(R"({"fields":[
    {"name":"op","bits":[3,0],"allowed":["0x3"]},
    {"name":"a","bits":[7,4],"allowed":[]}]})");

  SUBCASE("single vector") {
    CHECK(emit_stimulus_program({bits("10100011")}, map) ==
          "const a0 = 0xA\nloop:\n  op 0x3, a0\nend\n");
  }
  SUBCASE("constants are pooled in first-appearance order") {
    std::vector<InputVector> vs = {bits("10100011"), bits("00010011"), bits("10100111")};
    CHECK(emit_stimulus_program(vs, map) ==
          "const a0 = 0xA\n"
          "const a1 = 0x1\n"
          "loop:\n"
          "  op 0x3, a0\n"
          "  op 0x3, a1\n"
          "  op 0x7, a0\n"
          "end\n");
  }
  SUBCASE("without an op field the first field carries the opcode") {
    ValidityPredicate xy = parse_predicate(R"({"fields":[
      {"name":"x","bits":[1,0],"allowed":[]},
      {"name":"y","bits":[3,2],"allowed":[]}]})");
    CHECK(emit_stimulus_program({bits("1101")}, xy) ==
          "const y0 = 0x3\nloop:\n  op 0x1, y0\nend\n");
  }
  SUBCASE("no vectors still yields an empty loop") {
    CHECK(emit_stimulus_program({}, map) == "loop:\nend\n");
  }
  SUBCASE("field map must partition the vector exactly") {
    auto code_of = [](const std::vector<InputVector>& vs,
                      const ValidityPredicate& p) -> std::optional<ErrorCode> {
      try {
        emit_stimulus_program(vs, p);
        return std::nullopt;
      } catch (const Error& e) {
        return e.code();
      }
    };
    ValidityPredicate overlap = parse_predicate(R"({"fields":[
      {"name":"op","bits":[3,0],"allowed":[]},
      {"name":"a","bits":[4,2],"allowed":[]}]})");
    ValidityPredicate gap = parse_predicate(R"({"fields":[
      {"name":"op","bits":[3,0],"allowed":[]},
      {"name":"a","bits":[7,5],"allowed":[]}]})");
    CHECK(code_of({bits("10100011")}, ValidityPredicate{}) == ErrorCode::FieldMapMismatch);
    CHECK(code_of({bits("10100011")}, overlap) == ErrorCode::FieldMapMismatch);
    CHECK(code_of({bits("10100011")}, gap) == ErrorCode::FieldMapMismatch);
    CHECK(code_of({bits("10100")}, map) == ErrorCode::FieldMapMismatch);  // width 5, map covers 8
  }
}
