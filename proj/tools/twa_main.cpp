#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "twa/aging.hpp"
#include "twa/atpg.hpp"
#include "twa/constraints.hpp"
#include "twa/error.hpp"
#include "twa/faultsim.hpp"
#include "twa/json_io.hpp"
#include "twa/logicsim.hpp"
#include "twa/netlist.hpp"
#include "twa/pipeline.hpp"
#include "twa/stabsearch.hpp"
#include "twa/timing.hpp"
#include "twa/version.hpp"

namespace {

using njson = nlohmann::ordered_json;

twa::Netlist load_netlist_checked(const std::string& path) {
  twa::Netlist n = twa::parse_netlist(twa::read_text_file(path));
  auto diags = twa::validate_netlist(n);
  if (!diags.empty()) {
    for (const auto& d : diags) {
      std::fprintf(stderr, "%s %s: %s\n", twa::to_string(d.code), d.element.c_str(),
                   d.message.c_str());
    }
    throw twa::Error(twa::ErrorCode::SchemaError,
                     path + ": " + std::to_string(diags.size()) + " validation finding(s)");
  }
  return n;
}

njson finite_or_str(double v) {
  if (std::isnan(v)) return njson("nan");
  if (std::isinf(v)) return njson(v > 0 ? "inf" : "-inf");
  return njson(v);
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Config-relative input paths keep bundled configs runnable from anywhere;
// the output directory stays relative to the working directory.
void rebase_config_paths(twa::AttackConfig& cfg, const std::filesystem::path& config_dir) {
  auto rebase = [&](std::string& p) {
    if (p.empty()) return;
    std::filesystem::path fp(p);
    if (fp.is_relative()) p = (config_dir / fp).string();
  };
  rebase(cfg.netlist_path);
  rebase(cfg.delay_lib_path);
  rebase(cfg.aging_params_path);
  rebase(cfg.constraints_path);
  rebase(cfg.patterns_path);
  rebase(cfg.stab_query_path);
  rebase(cfg.victim_path);
  for (auto& b : cfg.baseline_paths) rebase(b);
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gate-level wearout attack toolkit"};
  app.require_subcommand(1);

  std::uint64_t g_seed = 0;
  std::string g_out_dir;
  std::string g_config;
  auto* seed_opt = app.add_option("--seed", g_seed, "seed override for seeded stages");
  auto* out_dir_opt = app.add_option("--out-dir", g_out_dir, "output directory override");
  app.add_option("--config", g_config, "attack config JSON (attack subcommand)");

  int rc = 0;

  // netlist validate <file>
  auto* netlist_cmd = app.add_subcommand("netlist", "netlist utilities");
  netlist_cmd->require_subcommand(1);
  auto* validate_cmd = netlist_cmd->add_subcommand("validate", "parse and check a netlist");
  std::string v_file;
  validate_cmd->add_option("file", v_file, "netlist JSON")->required();
  validate_cmd->callback([&] {
    twa::Netlist n = twa::parse_netlist(twa::read_text_file(v_file));
    auto diags = twa::validate_netlist(n);
    for (const auto& d : diags) {
      std::printf("%s %s: %s\n", twa::to_string(d.code), d.element.c_str(), d.message.c_str());
    }
    if (diags.empty()) {
      std::printf("ok: %s (%zu inputs, %zu outputs, %zu gates, %zu ffs)\n", n.name.c_str(),
                  n.primary_inputs.size(), n.primary_outputs.size(), n.gates.size(),
                  n.flipflops.size());
    } else {
      rc = 1;
    }
  });

  // sta <netlist> --lib F --period-ps N [--margin f] [--limit K] [--report out]
  auto* sta_cmd = app.add_subcommand("sta", "static timing analysis and path enumeration");
  sta_cmd->fallthrough();
  std::string sta_netlist, sta_lib, sta_report;
  std::int64_t sta_period = 0;
  double sta_margin = 0.05;
  std::size_t sta_limit = 64;
  sta_cmd->add_option("netlist", sta_netlist, "netlist JSON")->required();
  sta_cmd->add_option("--lib", sta_lib, "delay library JSON")->required();
  sta_cmd->add_option("--period-ps", sta_period, "clock period in ps")->required();
  sta_cmd->add_option("--margin", sta_margin, "near-critical margin fraction");
  sta_cmd->add_option("--limit", sta_limit, "max enumerated paths");
  sta_cmd->add_option("--report", sta_report, "report JSON output path");
  sta_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(sta_netlist);
    twa::DelayLibrary lib = twa::parse_delay_library(twa::read_text_file(sta_lib));
    twa::ClockSpec clk;
    clk.period = sta_period;
    twa::StaResult sta = twa::run_sta(n, lib, clk);
    auto paths = twa::enumerate_near_critical_paths(n, lib, sta, sta_margin, sta_limit);
    if (!sta_report.empty()) {
      twa::write_text_file(sta_report, twa::serialize_sta_report(sta, paths));
    }
    std::printf("critical delay %" PRId64 " ps, slack %" PRId64 " ps, %zu path(s) within %.4g\n",
                sta.critical_delay, sta.critical_path.slack, paths.size(), sta_margin);
  });

  // sim <netlist> --stimulus F [--duty out] [--activity out]
  auto* sim_cmd = app.add_subcommand("sim", "cycle simulation with duty extraction");
  sim_cmd->fallthrough();
  std::string sim_netlist, sim_stim, sim_duty, sim_activity;
  sim_cmd->add_option("netlist", sim_netlist, "netlist JSON")->required();
  sim_cmd->add_option("--stimulus", sim_stim, "stimulus JSON")->required();
  sim_cmd->add_option("--duty", sim_duty, "duty profile output path");
  sim_cmd->add_option("--activity", sim_activity, "activity report output path");
  sim_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(sim_netlist);
    twa::StimulusFile st = twa::parse_stimulus_file(twa::read_text_file(sim_stim));
    twa::SimTrace trace = twa::simulate_cycles(n, st.vectors, st.repeat);
    twa::ActivityReport act = twa::activity_proxy(trace);
    if (!sim_duty.empty()) {
      twa::write_text_file(sim_duty, twa::serialize_duty_profile(twa::compute_duty_profile(trace)));
    }
    if (!sim_activity.empty()) {
      twa::write_text_file(sim_activity, twa::serialize_activity_report(act));
    }
    std::printf("%zu cycle(s), %.6g mean toggles/cycle\n", trace.cycles(),
                act.mean_toggles_per_cycle);
  });

  // age --netlist F --lib F --duty F --t-seconds N [--params F] [--out F]
  auto* age_cmd = app.add_subcommand("age", "whole-netlist delay aging");
  age_cmd->fallthrough();
  std::string age_netlist, age_lib, age_duty, age_params, age_out = "aged_delays.json";
  double age_t = 0.0;
  age_cmd->add_option("--netlist", age_netlist, "netlist JSON")->required();
  age_cmd->add_option("--lib", age_lib, "delay library JSON")->required();
  age_cmd->add_option("--duty", age_duty, "duty profile JSON")->required();
  age_cmd->add_option("--t-seconds", age_t, "aging horizon in seconds")->required();
  age_cmd->add_option("--params", age_params, "aging parameter JSON");
  age_cmd->add_option("--out", age_out, "aged delays output path");
  age_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(age_netlist);
    twa::DelayLibrary lib = twa::parse_delay_library(twa::read_text_file(age_lib));
    twa::DutyProfile duty = twa::parse_duty_profile(twa::read_text_file(age_duty));
    twa::AgingParams params;
    if (!age_params.empty()) params = twa::parse_aging_params(twa::read_text_file(age_params));
    twa::AgedDelays aged = twa::age_delays(n, lib, duty, params, age_t);
    twa::write_text_file(age_out, twa::serialize_aged_delays(aged));
    twa::Ps worst_shift = 0;
    std::string worst_gate;
    for (const auto& g : n.gates) {
      twa::Ps shift = aged.gate_delay(g) - lib.gate_delay(g);
      if (shift > worst_shift) {
        worst_shift = shift;
        worst_gate = g.id;
      }
    }
    std::printf("aged %zu gate(s) at t=%.6g s; worst shift %+" PRId64 " ps%s%s -> %s\n",
                aged.delay_ps.size(), age_t, worst_shift, worst_gate.empty() ? "" : " at ",
                worst_gate.c_str(), age_out.c_str());
  });

  // af --dut F --ref F --path F [--params F]
  auto* af_cmd = app.add_subcommand("af", "acceleration factor between two duty profiles");
  af_cmd->fallthrough();
  std::string af_dut, af_ref, af_path, af_params;
  af_cmd->add_option("--dut", af_dut, "duty profile under test")->required();
  af_cmd->add_option("--ref", af_ref, "reference duty profile")->required();
  af_cmd->add_option("--path", af_path, "timing path JSON")->required();
  af_cmd->add_option("--params", af_params, "aging parameter JSON");
  af_cmd->callback([&] {
    twa::DutyProfile dut = twa::parse_duty_profile(twa::read_text_file(af_dut));
    twa::DutyProfile ref = twa::parse_duty_profile(twa::read_text_file(af_ref));
    auto paths = twa::parse_paths(twa::read_text_file(af_path));
    if (paths.empty()) throw twa::Error(twa::ErrorCode::SchemaError, af_path + ": no path");
    twa::AgingParams params;
    if (!af_params.empty()) params = twa::parse_aging_params(twa::read_text_file(af_params));
    twa::AccelResult r = twa::acceleration_factor(dut, paths.front(), ref, paths.front(),
                                                  params.n, params.beta_clamp_epsilon);
    njson j{{"lifetime_ratio", finite_or_str(r.lifetime_ratio)},
            {"aging_acceleration", finite_or_str(r.aging_acceleration)},
            {"stress_dut", r.stress_dut},
            {"stress_ref", r.stress_ref}};
    std::printf("%s\n", j.dump(2).c_str());
  });

  // atpg <netlist> --path F [--constraints F] [--out F] [--budget N] [--vectors-per-pattern N]
  auto* atpg_cmd = app.add_subcommand("atpg", "stuck-at-1 pattern generation along a path");
  atpg_cmd->fallthrough();
  std::string atpg_netlist, atpg_path, atpg_constraints, atpg_out = "patterns.json";
  twa::AtpgOptions atpg_opts;
  atpg_cmd->add_option("netlist", atpg_netlist, "netlist JSON")->required();
  atpg_cmd->add_option("--path", atpg_path, "timing path JSON")->required();
  atpg_cmd->add_option("--constraints", atpg_constraints, "validity predicate JSON");
  atpg_cmd->add_option("--out", atpg_out, "pattern output path");
  atpg_cmd->add_option("--budget", atpg_opts.backtrack_budget, "backtrack budget per fault");
  atpg_cmd->add_option("--vectors-per-pattern", atpg_opts.vectors_per_pattern,
                       "vectors grouped into one pattern");
  atpg_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(atpg_netlist);
    auto paths = twa::parse_paths(twa::read_text_file(atpg_path));
    if (paths.empty()) throw twa::Error(twa::ErrorCode::SchemaError, atpg_path + ": no path");
    twa::ValidityPredicate pred;
    if (!atpg_constraints.empty()) {
      pred = twa::parse_predicate(twa::read_text_file(atpg_constraints));
    }
    twa::AtpgResult r = twa::run_path_atpg(n, paths.front(), pred, atpg_opts);
    twa::write_text_file(atpg_out, twa::serialize_patterns(r.patterns, r.coverage));
    std::printf(
        "%zu pattern(s); faults: %zu detectable, %zu detected, %zu undetectable, %zu aborted -> "
        "%s\n",
        r.patterns.size(), r.coverage.detectable.size(), r.coverage.detected.size(),
        r.coverage.undetectable.size(), r.coverage.aborted.size(), atpg_out.c_str());
  });

  // stab <netlist> --query F [--want N] [--out F]
  auto* stab_cmd = app.add_subcommand("stab", "bounded search for stable-net input traces");
  stab_cmd->fallthrough();
  std::string stab_netlist, stab_query, stab_out = "traces.json";
  int stab_want = 20;
  stab_cmd->add_option("netlist", stab_netlist, "netlist JSON")->required();
  stab_cmd->add_option("--query", stab_query, "stability query JSON")->required();
  stab_cmd->add_option("--want", stab_want, "trace count to produce");
  stab_cmd->add_option("--out", stab_out, "trace output path");
  stab_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(stab_netlist);
    std::string text = twa::read_text_file(stab_query);
    twa::StabilityQuery q = twa::parse_stability_query(text);
    twa::SearchStrategy strat = twa::parse_search_strategy(text);
    if (seed_opt->count() > 0) strat.seed = g_seed;
    auto traces = twa::search_stable_traces(n, q, strat, stab_want);
    twa::write_text_file(stab_out, twa::serialize_traces(traces));
    int best = traces.empty() ? 0 : traces.front().pmos_on_score;
    std::printf("%zu trace(s), best score %d -> %s\n", traces.size(), best, stab_out.c_str());
  });

  // faultsim <netlist> --aged F --period-ps N --stimulus F [--golden-diff F]
  auto* fsim_cmd = app.add_subcommand("faultsim", "timed simulation against a functional golden");
  fsim_cmd->fallthrough();
  std::string fsim_netlist, fsim_aged, fsim_stim, fsim_diff = "corruption_diff.json";
  std::int64_t fsim_period = 0;
  fsim_cmd->add_option("netlist", fsim_netlist, "netlist JSON")->required();
  fsim_cmd->add_option("--aged", fsim_aged, "aged delays JSON")->required();
  fsim_cmd->add_option("--period-ps", fsim_period, "clock period in ps")->required();
  fsim_cmd->add_option("--stimulus", fsim_stim, "stimulus JSON")->required();
  fsim_cmd->add_option("--golden-diff", fsim_diff, "corruption diff output path");
  fsim_cmd->callback([&] {
    twa::Netlist n = load_netlist_checked(fsim_netlist);
    twa::AgedDelays aged = twa::parse_aged_delays(twa::read_text_file(fsim_aged));
    twa::StimulusFile st = twa::parse_stimulus_file(twa::read_text_file(fsim_stim));
    auto expanded = st.expand(n.primary_inputs.size());
    twa::SimTrace golden = twa::simulate_cycles(n, st.vectors, st.repeat);
    twa::ClockSpec clk;
    clk.period = fsim_period;
    twa::TimedSimResult timed = twa::timed_simulate(n, aged, clk, expanded);
    twa::CorruptionDiff diff = twa::diff_golden(golden, timed);
    twa::write_text_file(fsim_diff, twa::serialize_corruption_diff(diff));
    std::printf("%zu violation(s), first divergence cycle %d, %" PRIu64
                " corrupted output bit(s)%s -> %s\n",
                timed.violations.size(), diff.first_divergence_cycle, diff.corrupted_bits,
                timed.lateness_cap_hit ? " [lateness cap hit]" : "", fsim_diff.c_str());
  });

  // attack --config F [--seed N] [--out-dir P]
  auto* attack_cmd = app.add_subcommand("attack", "run the full pipeline from a config");
  attack_cmd->fallthrough();
  attack_cmd->callback([&] {
    if (g_config.empty()) {
      throw twa::Error(twa::ErrorCode::IoError, "attack needs --config FILE");
    }
    std::string started = utc_now();
    twa::AttackConfig cfg = twa::parse_attack_config(twa::read_text_file(g_config));
    rebase_config_paths(cfg, std::filesystem::absolute(g_config).parent_path());
    if (seed_opt->count() > 0) cfg.seed = g_seed;
    if (out_dir_opt->count() > 0) cfg.out_dir = g_out_dir;
    twa::AttackReport report = twa::run_attack_pipeline(cfg);
    njson meta{{"tool_version", twa::kVersion},
               {"config", g_config},
               {"seed", cfg.seed},
               {"started_utc", started},
               {"finished_utc", utc_now()}};
    twa::write_text_file((std::filesystem::path(cfg.out_dir) / "run_meta.json").string(),
                         meta.dump(2) + "\n");
    std::printf("target path %s -> %s, nominal %" PRId64 " ps (critical %" PRId64 " ps)\n",
                report.target_path.launch.id.c_str(), report.target_path.capture.id.c_str(),
                report.target_path.nominal_delay, report.critical_delay);
    for (const auto& w : report.patterns) {
      std::printf("  %s [%s]: acceleration %s, degradation %.4g%% at horizon, guardband %s\n",
                  w.name.c_str(), w.source.c_str(), fmt_double(w.aging_acceleration).c_str(),
                  w.degradation_pct_at_t, w.guardband_fails ? "fails" : "holds");
    }
    if (!report.corruption.pattern_name.empty()) {
      std::printf("corruption via %s: first divergence cycle %d, %" PRIu64
                  " bit(s), %d violation(s)\n",
                  report.corruption.pattern_name.c_str(), report.corruption.first_divergence_cycle,
                  report.corruption.corrupted_bits, report.corruption.violation_count);
    }
    std::printf("report: %s\n",
                (std::filesystem::path(cfg.out_dir) / "report.json").string().c_str());
  });

  // emit-program [--stimulus F | --patterns F --index N --netlist F | --traces F --index N]
  //   --fields F [--out F]
  auto* emit_cmd = app.add_subcommand("emit-program", "render vectors as a stimulus program");
  emit_cmd->fallthrough();
  std::string emit_stim, emit_patterns, emit_traces, emit_netlist, emit_fields, emit_out;
  std::size_t emit_index = 0;
  emit_cmd->add_option("--stimulus", emit_stim, "stimulus JSON source");
  emit_cmd->add_option("--patterns", emit_patterns, "pattern JSON source (takes --index)");
  emit_cmd->add_option("--traces", emit_traces, "trace JSON source (takes --index)");
  emit_cmd->add_option("--index", emit_index, "pattern or trace index");
  emit_cmd->add_option("--netlist", emit_netlist,
                       "netlist JSON, projects pattern vectors to primary inputs");
  emit_cmd->add_option("--fields", emit_fields, "field layout JSON")->required();
  emit_cmd->add_option("--out", emit_out, "output path, stdout when omitted");
  emit_cmd->callback([&] {
    twa::ValidityPredicate pred = twa::parse_predicate(twa::read_text_file(emit_fields));
    std::vector<twa::InputVector> vectors;
    int sources = (!emit_stim.empty()) + (!emit_patterns.empty()) + (!emit_traces.empty());
    if (sources != 1) {
      throw twa::Error(twa::ErrorCode::IoError,
                       "need exactly one of --stimulus, --patterns, --traces");
    }
    if (!emit_stim.empty()) {
      vectors = twa::parse_stimulus_file(twa::read_text_file(emit_stim)).vectors;
    } else if (!emit_patterns.empty()) {
      auto patterns = twa::parse_patterns(twa::read_text_file(emit_patterns));
      if (emit_index >= patterns.size()) {
        throw twa::Error(twa::ErrorCode::SchemaError, "pattern index out of range");
      }
      vectors = patterns[emit_index].vectors;
      if (!emit_netlist.empty()) {
        twa::Netlist n = load_netlist_checked(emit_netlist);
        std::size_t width = n.primary_inputs.size();
        for (auto& v : vectors) {
          if (v.size() > width) v.resize(width);
        }
      }
    } else {
      auto traces = twa::parse_traces(twa::read_text_file(emit_traces));
      if (emit_index >= traces.size()) {
        throw twa::Error(twa::ErrorCode::SchemaError, "trace index out of range");
      }
      vectors = traces[emit_index].vectors;
    }
    std::string text = twa::emit_stimulus_program(vectors, pred);
    if (emit_out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      twa::write_text_file(emit_out, text);
      std::printf("program -> %s\n", emit_out.c_str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const twa::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
