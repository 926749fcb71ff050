#include "twa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "json.hpp"
#include "twa/circuits.hpp"
#include "twa/version.hpp"

namespace twa {

namespace {

using njson = nlohmann::ordered_json;

// Infinities survive the JSON round trip as strings.
njson num(double v) {
  if (std::isfinite(v)) return njson(v);
  if (std::isnan(v)) return njson("nan");
  return njson(v > 0 ? "inf" : "-inf");
}

double num_from(const njson& j) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::SchemaError, "bad numeric sentinel '" + s + "'");
  }
  return j.get<double>();
}

std::string num_str(double v) {
  if (std::isfinite(v)) return njson(v).dump();
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

njson parse_json(const std::string& text) {
  njson j = njson::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "malformed JSON document");
  return j;
}

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("stage ") + name + ": " + e.what());
  }
}

std::string hex_upper(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const char* to_string(PatternSource s) {
  switch (s) {
    case PatternSource::Atpg: return "atpg";
    case PatternSource::Stability: return "stability";
    case PatternSource::File: return "file";
  }
  return "atpg";
}

PatternSource pattern_source_from_string(const std::string& name) {
  if (name == "atpg") return PatternSource::Atpg;
  if (name == "stability") return PatternSource::Stability;
  if (name == "file") return PatternSource::File;
  throw Error(ErrorCode::SchemaError, "unknown pattern source '" + name + "'");
}

AttackConfig parse_attack_config(const std::string& json_text) {
  njson j = parse_json(json_text);
  AttackConfig cfg;
  auto gets = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j[key].get<std::string>();
  };
  gets("netlist", cfg.netlist_path);
  gets("delay_lib", cfg.delay_lib_path);
  gets("aging_params", cfg.aging_params_path);
  gets("constraints", cfg.constraints_path);
  gets("patterns", cfg.patterns_path);
  gets("stab_query", cfg.stab_query_path);
  gets("victim", cfg.victim_path);
  gets("out_dir", cfg.out_dir);
  if (j.contains("period_ps")) cfg.period_ps = j["period_ps"].get<Ps>();
  if (j.contains("margin")) cfg.margin = j["margin"].get<double>();
  if (j.contains("path_limit")) cfg.path_limit = j["path_limit"].get<std::size_t>();
  if (j.contains("select")) {
    const njson& s = j["select"];
    std::string kind = s.contains("kind") ? s["kind"].get<std::string>() : "longest";
    if (kind == "longest") {
      cfg.selector.kind = PathSelector::Kind::Longest;
    } else if (kind == "through_net") {
      cfg.selector.kind = PathSelector::Kind::ThroughNet;
      cfg.selector.net = s.contains("net") ? s["net"].get<std::string>() : "";
    } else if (kind == "index") {
      cfg.selector.kind = PathSelector::Kind::Index;
      cfg.selector.index = s.contains("index") ? s["index"].get<std::size_t>() : 0;
    } else {
      throw Error(ErrorCode::SchemaError, "unknown path selector '" + kind + "'");
    }
  }
  if (j.contains("source")) cfg.source = pattern_source_from_string(j["source"].get<std::string>());
  if (j.contains("baselines")) {
    for (const auto& b : j["baselines"]) cfg.baseline_paths.push_back(b.get<std::string>());
  }
  if (j.contains("idle_fraction")) cfg.idle_fraction = j["idle_fraction"].get<double>();
  if (j.contains("idle_mode")) cfg.idle_mode = idle_mode_from_string(j["idle_mode"].get<std::string>());
  if (j.contains("horizon_seconds")) cfg.horizon_seconds = j["horizon_seconds"].get<double>();
  if (j.contains("calibration")) {
    const njson& c = j["calibration"];
    if (c.contains("beta_cal")) cfg.calibration.beta_cal = c["beta_cal"].get<double>();
    if (c.contains("lifetime_cal_seconds")) {
      cfg.calibration.lifetime_cal_seconds = c["lifetime_cal_seconds"].get<double>();
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("pattern_loop_cycles")) cfg.pattern_loop_cycles = j["pattern_loop_cycles"].get<int>();
  if (j.contains("atpg")) {
    const njson& a = j["atpg"];
    if (a.contains("backtrack_budget")) cfg.atpg.backtrack_budget = a["backtrack_budget"].get<int>();
    if (a.contains("vectors_per_pattern")) {
      cfg.atpg.vectors_per_pattern = a["vectors_per_pattern"].get<int>();
    }
  }
  if (j.contains("stab_want")) cfg.stab_want = j["stab_want"].get<int>();
  if (j.contains("stab_iterations")) cfg.stab_iterations = j["stab_iterations"].get<std::uint64_t>();
  return cfg;
}

std::string serialize_attack_config(const AttackConfig& cfg) {
  njson select{{"kind", cfg.selector.kind == PathSelector::Kind::Longest      ? "longest"
                        : cfg.selector.kind == PathSelector::Kind::ThroughNet ? "through_net"
                                                                              : "index"}};
  if (cfg.selector.kind == PathSelector::Kind::ThroughNet) select["net"] = cfg.selector.net;
  if (cfg.selector.kind == PathSelector::Kind::Index) select["index"] = cfg.selector.index;
  return njson{{"netlist", cfg.netlist_path},
               {"delay_lib", cfg.delay_lib_path},
               {"aging_params", cfg.aging_params_path},
               {"constraints", cfg.constraints_path},
               {"period_ps", cfg.period_ps},
               {"margin", cfg.margin},
               {"path_limit", cfg.path_limit},
               {"select", std::move(select)},
               {"source", to_string(cfg.source)},
               {"patterns", cfg.patterns_path},
               {"stab_query", cfg.stab_query_path},
               {"baselines", cfg.baseline_paths},
               {"victim", cfg.victim_path},
               {"idle_fraction", cfg.idle_fraction},
               {"idle_mode", to_string(cfg.idle_mode)},
               {"horizon_seconds", cfg.horizon_seconds},
               {"calibration", njson{{"beta_cal", cfg.calibration.beta_cal},
                                     {"lifetime_cal_seconds", cfg.calibration.lifetime_cal_seconds}}},
               {"seed", cfg.seed},
               {"out_dir", cfg.out_dir},
               {"pattern_loop_cycles", cfg.pattern_loop_cycles},
               {"atpg", njson{{"backtrack_budget", cfg.atpg.backtrack_budget},
                              {"vectors_per_pattern", cfg.atpg.vectors_per_pattern}}},
               {"stab_want", cfg.stab_want},
               {"stab_iterations", cfg.stab_iterations}}
             .dump(2) +
         "\n";
}

namespace {

struct NamedStimulus {
  std::string name;
  std::vector<InputVector> vectors;  // primary-input width
  int repeat = 1;
};

std::string file_stem(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  return stem.empty() ? path : stem;
}

InputVector pi_prefix(const InputVector& v, std::size_t pi_width) {
  if (v.size() <= pi_width) return v;
  return InputVector(v.begin(), v.begin() + pi_width);
}

struct WorkloadEval {
  WorkloadSummary summary;
  DutyProfile duty;
};

}  // namespace

AttackReport run_attack_pipeline(const AttackConfig& cfg) {
  AttackReport report;
  report.tool_version = kVersion;
  report.seed = cfg.seed;
  report.period_ps = cfg.period_ps;
  report.margin = cfg.margin;
  report.idle_fraction = cfg.idle_fraction;
  report.idle_mode = cfg.idle_mode;
  report.horizon_seconds = cfg.horizon_seconds;
  report.calibration = cfg.calibration;

  const std::string out = cfg.out_dir;

  // load
  Netlist net;
  DelayLibrary lib;
  AgingParams params;
  ValidityPredicate constraint;
  std::vector<NamedStimulus> baselines;
  StimulusFile victim;
  stage("load", [&] {
    if (cfg.netlist_path.empty()) throw Error(ErrorCode::IoError, "no netlist configured");
    net = parse_netlist(read_text_file(cfg.netlist_path));
    auto diags = validate_netlist(net);
    if (!diags.empty()) {
      throw Error(ErrorCode::SchemaError, "netlist invalid: " + diags.front().message);
    }
    lib = parse_delay_library(read_text_file(cfg.delay_lib_path));
    if (!cfg.aging_params_path.empty()) {
      params = parse_aging_params(read_text_file(cfg.aging_params_path));
    }
    if (!cfg.constraints_path.empty()) {
      constraint = parse_predicate(read_text_file(cfg.constraints_path));
    }
    if (cfg.baseline_paths.empty()) {
      throw Error(ErrorCode::SchemaError, "at least one baseline stimulus is required");
    }
    for (const auto& path : cfg.baseline_paths) {
      StimulusFile s = parse_stimulus_file(read_text_file(path));
      std::string name = file_stem(path);
      for (const auto& b : baselines) {
        if (b.name == name) name += "_" + std::to_string(baselines.size());
      }
      for (const auto& v : s.vectors) {
        if (v.size() != net.primary_inputs.size()) {
          throw Error(ErrorCode::WidthMismatch, "baseline '" + name + "' vector width");
        }
      }
      baselines.push_back({name, s.vectors, s.repeat});
    }
    victim = cfg.victim_path.empty()
                 ? StimulusFile{baselines.front().vectors, baselines.front().repeat}
                 : parse_stimulus_file(read_text_file(cfg.victim_path));
    std::filesystem::create_directories(out);
  });
  report.netlist_name = net.name;

  // sta
  StaResult sta;
  std::vector<TimingPath> paths;
  TimingPath target;
  stage("sta", [&] {
    if (cfg.period_ps <= 0) throw Error(ErrorCode::DomainError, "period_ps must be positive");
    ClockSpec clk{cfg.period_ps, params.guardband_fraction};
    sta = run_sta(net, lib, clk);
    paths = enumerate_near_critical_paths(net, lib, sta, cfg.margin, cfg.path_limit);
    target = select_target_path(paths, cfg.selector);
    write_text_file(out + "/sta_report.json", serialize_sta_report(sta, paths));
    write_text_file(out + "/target_path.json", serialize_path(target));
  });
  report.target_path = target;
  report.critical_delay = sta.critical_delay;

  // patterns
  std::vector<NamedStimulus> attacks;
  stage("patterns", [&] {
    const std::size_t pi_width = net.primary_inputs.size();
    switch (cfg.source) {
      case PatternSource::Atpg: {
        AtpgResult res = run_path_atpg(net, target, constraint, cfg.atpg);
        write_text_file(out + "/patterns.json", serialize_patterns(res.patterns, res.coverage));
        for (const auto& p : res.patterns) {
          if (p.vectors.empty()) continue;
          NamedStimulus s;
          s.name = "atpg" + std::to_string(p.id);
          for (const auto& v : p.vectors) s.vectors.push_back(pi_prefix(v, pi_width));
          attacks.push_back(std::move(s));
        }
        break;
      }
      case PatternSource::Stability: {
        StabilityQuery q;
        SearchStrategy strat;
        strat.kind = SearchStrategy::Kind::Mutational;
        strat.seed = cfg.seed;
        strat.iterations = cfg.stab_iterations;
        if (!cfg.stab_query_path.empty()) {
          std::string text = read_text_file(cfg.stab_query_path);
          q = parse_stability_query(text);
          strat = parse_search_strategy(text);
        } else {
          q.target_nets = target.nets();
          q.hold_cycles = 10;
          q.constraint = constraint;
          for (const auto& s : target.steps) q.objective_pins.push_back({s.gate_id, s.input_pin});
        }
        write_text_file(out + "/stab_query.json", serialize_stability_query(q, strat));
        auto traces = search_stable_traces(net, q, strat, cfg.stab_want);
        write_text_file(out + "/traces.json", serialize_traces(traces));
        for (std::size_t i = 0; i < traces.size(); ++i) {
          attacks.push_back({"stab" + std::to_string(i), traces[i].vectors, 1});
        }
        break;
      }
      case PatternSource::File: {
        if (cfg.patterns_path.empty()) {
          throw Error(ErrorCode::IoError, "pattern source 'file' needs a patterns path");
        }
        StimulusFile s = parse_stimulus_file(read_text_file(cfg.patterns_path));
        for (const auto& v : s.vectors) {
          if (v.size() != pi_width) {
            throw Error(ErrorCode::WidthMismatch, "pattern file vector width");
          }
        }
        attacks.push_back({file_stem(cfg.patterns_path), s.vectors, s.repeat});
        break;
      }
    }
  });

  // duty
  std::vector<WorkloadEval> base_eval;
  std::vector<WorkloadEval> attack_eval;
  stage("duty", [&] {
    for (const auto& b : baselines) {
      SimTrace tr = simulate_cycles(net, b.vectors, b.repeat);
      WorkloadEval w;
      w.summary.name = b.name;
      w.summary.source = "baseline";
      w.duty = compute_duty_profile(tr);
      w.summary.mean_toggles_per_cycle = activity_proxy(tr).mean_toggles_per_cycle;
      write_text_file(out + "/duty_" + b.name + ".json", serialize_duty_profile(w.duty));
      base_eval.push_back(std::move(w));
    }
    for (const auto& a : attacks) {
      int len = static_cast<int>(a.vectors.size());
      int repeat = std::max(1, cfg.pattern_loop_cycles / std::max(1, len));
      SimTrace tr = simulate_cycles(net, a.vectors, repeat);
      WorkloadEval w;
      w.summary.name = a.name;
      w.summary.source = to_string(cfg.source);
      w.duty = compute_duty_profile(tr);
      if (cfg.idle_fraction != 0.0) {
        w.duty = adjust_for_idle(w.duty, cfg.idle_fraction, cfg.idle_mode);
      }
      w.summary.mean_toggles_per_cycle = activity_proxy(tr).mean_toggles_per_cycle;
      write_text_file(out + "/duty_" + a.name + ".json", serialize_duty_profile(w.duty));
      attack_eval.push_back(std::move(w));
    }
  });

  // aging
  stage("aging", [&] {
    const double threshold = failure_threshold_ps(target, params);
    params.A = calibrate_fitting_constant(target, params, cfg.calibration);
    report.calibrated_A = params.A;
    report.threshold_ps = threshold;

    double ref = 0.0;
    for (auto& w : base_eval) {
      w.summary.stress_sum =
          path_stress_sum(w.duty, target, params.n, params.beta_clamp_epsilon);
      ref += w.summary.stress_sum;
    }
    ref /= static_cast<double>(base_eval.size());
    report.reference_stress = ref;

    auto evaluate = [&](WorkloadEval& w) {
      const double s = w.summary.stress_sum;
      if (s == 0.0 && ref == 0.0) {
        w.summary.lifetime_ratio = 1.0;
        w.summary.aging_acceleration = 1.0;
      } else if (s == 0.0) {
        w.summary.lifetime_ratio = std::numeric_limits<double>::infinity();
        w.summary.aging_acceleration = 0.0;
      } else if (ref == 0.0) {
        w.summary.lifetime_ratio = 0.0;
        w.summary.aging_acceleration = std::numeric_limits<double>::infinity();
      } else {
        w.summary.lifetime_ratio = std::pow(ref / s, 1.0 / params.n);
        w.summary.aging_acceleration = std::pow(s / ref, 1.0 / params.n);
      }
      PathDelta dd = delta_delay(w.duty, target, params, cfg.horizon_seconds);
      w.summary.degradation_pct_at_t =
          dd.total_ps / static_cast<double>(target.nominal_delay) * 100.0;
      w.summary.guardband_fails = dd.total_ps >= threshold;
      w.summary.time_to_failure_seconds = time_to_failure(w.duty, target, params);
    };
    for (auto& w : base_eval) evaluate(w);
    for (auto& w : attack_eval) {
      w.summary.stress_sum =
          path_stress_sum(w.duty, target, params.n, params.beta_clamp_epsilon);
      evaluate(w);
    }
    // The flow's objective is acceleration; the corruption run takes the best.
    std::stable_sort(attack_eval.begin(), attack_eval.end(),
                     [](const WorkloadEval& a, const WorkloadEval& b) {
                       if (a.summary.aging_acceleration != b.summary.aging_acceleration) {
                         return a.summary.aging_acceleration > b.summary.aging_acceleration;
                       }
                       return a.summary.name < b.summary.name;
                     });
  });
  report.params = params;
  report.beta_convention = "worst-pin";
  for (const auto& w : base_eval) report.baselines.push_back(w.summary);
  for (const auto& w : attack_eval) report.patterns.push_back(w.summary);

  // faultsim
  stage("faultsim", [&] {
    if (attack_eval.empty()) return;
    const WorkloadEval& top = attack_eval.front();
    AgedDelays aged = age_delays(net, lib, top.duty, params, cfg.horizon_seconds);
    write_text_file(out + "/aged_delays.json", serialize_aged_delays(aged));
    std::vector<InputVector> victim_vectors = victim.expand(net.primary_inputs.size());
    SimTrace golden = simulate_cycles(net, victim.vectors, victim.repeat);
    ClockSpec clk{cfg.period_ps, params.guardband_fraction};
    TimedSimResult timed = timed_simulate(net, aged, clk, victim_vectors);
    CorruptionDiff diff = diff_golden(golden, timed);
    write_text_file(out + "/corruption_diff.json", serialize_corruption_diff(diff));
    report.corruption.pattern_name = top.summary.name;
    report.corruption.first_divergence_cycle = diff.first_divergence_cycle;
    report.corruption.corrupted_bits = diff.corrupted_bits;
    report.corruption.violation_count = static_cast<int>(timed.violations.size());
    report.corruption.lateness_cap_hit = timed.lateness_cap_hit;
  });

  // emit
  stage("emit", [&] {
    emit_report(report, out);
    if (!attacks.empty() && !constraint.empty()) {
      try {
        write_text_file(out + "/attack_program.txt",
                        emit_stimulus_program(attacks.front().vectors, constraint));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::FieldMapMismatch) throw;
        // constraint fields need not partition the inputs; no program then
      }
    }
  });
  return report;
}

namespace {

njson workload_to_json(const WorkloadSummary& w) {
  return njson{{"name", w.name},
               {"source", w.source},
               {"stress_sum", num(w.stress_sum)},
               {"lifetime_ratio", num(w.lifetime_ratio)},
               {"aging_acceleration", num(w.aging_acceleration)},
               {"degradation_pct_at_t", num(w.degradation_pct_at_t)},
               {"guardband_fails", w.guardband_fails},
               {"mean_toggles_per_cycle", num(w.mean_toggles_per_cycle)},
               {"time_to_failure_seconds", num(w.time_to_failure_seconds)}};
}

WorkloadSummary workload_from_json(const njson& j) {
  WorkloadSummary w;
  w.name = j.at("name").get<std::string>();
  w.source = j.at("source").get<std::string>();
  w.stress_sum = num_from(j.at("stress_sum"));
  w.lifetime_ratio = num_from(j.at("lifetime_ratio"));
  w.aging_acceleration = num_from(j.at("aging_acceleration"));
  w.degradation_pct_at_t = num_from(j.at("degradation_pct_at_t"));
  w.guardband_fails = j.at("guardband_fails").get<bool>();
  w.mean_toggles_per_cycle = num_from(j.at("mean_toggles_per_cycle"));
  w.time_to_failure_seconds = num_from(j.at("time_to_failure_seconds"));
  return w;
}

}  // namespace

std::string report_to_json(const AttackReport& r) {
  njson baselines = njson::array();
  for (const auto& w : r.baselines) baselines.push_back(workload_to_json(w));
  njson patterns = njson::array();
  for (const auto& w : r.patterns) patterns.push_back(workload_to_json(w));
  njson j{{"tool_version", r.tool_version},
          {"netlist", r.netlist_name},
          {"seed", r.seed},
          {"period_ps", r.period_ps},
          {"margin", r.margin},
          {"critical_delay_ps", r.critical_delay},
          {"target_path", njson::parse(serialize_path(r.target_path))},
          {"params", njson::parse(serialize_aging_params(r.params))},
          {"calibrated_A", num(r.calibrated_A)},
          {"calibration", njson{{"beta_cal", r.calibration.beta_cal},
                                {"lifetime_cal_seconds", r.calibration.lifetime_cal_seconds}}},
          {"idle_fraction", r.idle_fraction},
          {"idle_mode", to_string(r.idle_mode)},
          {"horizon_seconds", r.horizon_seconds},
          {"reference_stress", num(r.reference_stress)},
          {"threshold_ps", num(r.threshold_ps)},
          {"beta_convention", r.beta_convention},
          {"baselines", std::move(baselines)},
          {"patterns", std::move(patterns)},
          {"corruption", njson{{"pattern", r.corruption.pattern_name},
                               {"first_divergence_cycle", r.corruption.first_divergence_cycle},
                               {"corrupted_bits", r.corruption.corrupted_bits},
                               {"violations", r.corruption.violation_count},
                               {"lateness_cap_hit", r.corruption.lateness_cap_hit}}}};
  return j.dump(2) + "\n";
}

AttackReport parse_report(const std::string& json_text) {
  njson j = parse_json(json_text);
  AttackReport r;
  r.tool_version = j.at("tool_version").get<std::string>();
  r.netlist_name = j.at("netlist").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.period_ps = j.at("period_ps").get<Ps>();
  r.margin = j.at("margin").get<double>();
  r.critical_delay = j.at("critical_delay_ps").get<Ps>();
  r.target_path = parse_paths(j.at("target_path").dump()).front();
  r.params = parse_aging_params(j.at("params").dump());
  r.calibrated_A = num_from(j.at("calibrated_A"));
  r.calibration.beta_cal = j.at("calibration").at("beta_cal").get<double>();
  r.calibration.lifetime_cal_seconds = j.at("calibration").at("lifetime_cal_seconds").get<double>();
  r.idle_fraction = j.at("idle_fraction").get<double>();
  r.idle_mode = idle_mode_from_string(j.at("idle_mode").get<std::string>());
  r.horizon_seconds = j.at("horizon_seconds").get<double>();
  r.reference_stress = num_from(j.at("reference_stress"));
  r.threshold_ps = num_from(j.at("threshold_ps"));
  r.beta_convention = j.at("beta_convention").get<std::string>();
  for (const auto& w : j.at("baselines")) r.baselines.push_back(workload_from_json(w));
  for (const auto& w : j.at("patterns")) r.patterns.push_back(workload_from_json(w));
  const njson& c = j.at("corruption");
  r.corruption.pattern_name = c.at("pattern").get<std::string>();
  r.corruption.first_divergence_cycle = c.at("first_divergence_cycle").get<int>();
  r.corruption.corrupted_bits = c.at("corrupted_bits").get<std::uint64_t>();
  r.corruption.violation_count = c.at("violations").get<int>();
  r.corruption.lateness_cap_hit = c.at("lateness_cap_hit").get<bool>();
  return r;
}

std::string report_to_csv(const AttackReport& r) {
  std::string csv =
      "name,source,acceleration,lifetime_ratio,degradation_pct_at_t,guardband_verdict,"
      "mean_toggles_per_cycle\n";
  auto row = [&](const WorkloadSummary& w) {
    csv += w.name + "," + w.source + "," + num_str(w.aging_acceleration) + "," +
           num_str(w.lifetime_ratio) + "," + num_str(w.degradation_pct_at_t) + "," +
           (w.guardband_fails ? "fails" : "holds") + "," + num_str(w.mean_toggles_per_cycle) +
           "\n";
  };
  for (const auto& w : r.baselines) row(w);
  for (const auto& w : r.patterns) row(w);
  return csv;
}

void emit_report(const AttackReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/report.json", report_to_json(r));
  write_text_file(dir + "/report.csv", report_to_csv(r));
}

std::string emit_stimulus_program(const std::vector<InputVector>& vectors,
                                  const ValidityPredicate& field_map) {
  const auto& fields = field_map.fields;
  if (fields.empty()) throw Error(ErrorCode::FieldMapMismatch, "no fields declared");
  std::size_t width = 0;
  for (const auto& f : fields) width = std::max(width, static_cast<std::size_t>(f.hi) + 1);
  std::vector<int> owner(width, -1);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (int k = fields[i].lo; k <= fields[i].hi; ++k) {
      if (owner[k] != -1) {
        throw Error(ErrorCode::FieldMapMismatch,
                    "fields '" + fields[owner[k]].name + "' and '" + fields[i].name + "' overlap");
      }
      owner[k] = static_cast<int>(i);
    }
  }
  for (std::size_t k = 0; k < width; ++k) {
    if (owner[k] == -1) {
      throw Error(ErrorCode::FieldMapMismatch, "bit " + std::to_string(k) + " not covered");
    }
  }
  for (const auto& v : vectors) {
    if (v.size() != width) {
      throw Error(ErrorCode::FieldMapMismatch, "vector width " + std::to_string(v.size()) +
                                                   ", field map covers " + std::to_string(width));
    }
  }

  std::size_t op_index = 0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == "op") {
      op_index = i;
      break;
    }
  }

  // one constant per distinct operand value, first appearance order
  std::vector<std::map<std::uint64_t, std::string>> names(fields.size());
  std::string preamble;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == op_index) continue;
      std::uint64_t value = field_value(v, fields[i]);
      auto [it, fresh] = names[i].try_emplace(value);
      if (fresh) {
        it->second = fields[i].name + std::to_string(names[i].size() - 1);
        preamble += "const " + it->second + " = " + hex_upper(value) + "\n";
      }
    }
  }

  std::string body;
  for (const auto& v : vectors) {
    body += "  op " + hex_upper(field_value(v, fields[op_index]));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == op_index) continue;
      body += ", " + names[i][field_value(v, fields[i])];
    }
    body += "\n";
  }
  return preamble + "loop:\n" + body + "end\n";
}

}  // namespace twa
