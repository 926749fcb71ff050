#include "twa/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace twa {

namespace {

using njson = nlohmann::ordered_json;

njson parse_json(const std::string& text) {
  njson j = njson::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "malformed JSON document");
  return j;
}

const njson& require(const njson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::SchemaError, std::string("missing field '") + key + "'");
  return *it;
}

std::string dump(const njson& j) { return j.dump(2) + "\n"; }

std::string vector_to_bits(const InputVector& v) {
  std::string s;
  s.reserve(v.size());
  for (std::uint8_t b : v) s.push_back(b == 2 ? 'x' : char('0' + b));
  return s;
}

InputVector bits_to_vector(const std::string& s) {
  InputVector v;
  v.reserve(s.size());
  for (char c : s) {
    if (c == '0') {
      v.push_back(0);
    } else if (c == '1') {
      v.push_back(1);
    } else if (c == 'x' || c == 'X') {
      v.push_back(2);
    } else {
      throw Error(ErrorCode::SchemaError, std::string("bad bit character '") + c + "'");
    }
  }
  return v;
}

const char* endpoint_kind_name(EndpointKind k) {
  switch (k) {
    case EndpointKind::PrimaryInput: return "pi";
    case EndpointKind::PrimaryOutput: return "po";
    case EndpointKind::FlipFlop: return "ff";
  }
  return "pi";
}

EndpointKind endpoint_kind_from(const std::string& s) {
  if (s == "pi") return EndpointKind::PrimaryInput;
  if (s == "po") return EndpointKind::PrimaryOutput;
  if (s == "ff") return EndpointKind::FlipFlop;
  throw Error(ErrorCode::SchemaError, "unknown endpoint kind '" + s + "'");
}

njson endpoint_to_json(const PathEndpoint& e) {
  return njson{{"kind", endpoint_kind_name(e.kind)}, {"id", e.id}};
}

PathEndpoint endpoint_from_json(const njson& j) {
  PathEndpoint e;
  e.kind = endpoint_kind_from(require(j, "kind").get<std::string>());
  e.id = require(j, "id").get<std::string>();
  return e;
}

njson path_to_json(const TimingPath& p) {
  njson steps = njson::array();
  for (const auto& s : p.steps) {
    steps.push_back(njson{{"gate", s.gate_id}, {"pin", s.input_pin}, {"out", s.output_net}});
  }
  return njson{{"launch", endpoint_to_json(p.launch)},
               {"capture", endpoint_to_json(p.capture)},
               {"launch_net", p.launch_net},
               {"steps", std::move(steps)},
               {"nominal_delay_ps", p.nominal_delay},
               {"slack_ps", p.slack}};
}

TimingPath path_from_json(const njson& j) {
  TimingPath p;
  p.launch = endpoint_from_json(require(j, "launch"));
  p.capture = endpoint_from_json(require(j, "capture"));
  p.launch_net = require(j, "launch_net").get<std::string>();
  for (const auto& s : require(j, "steps")) {
    PathStep step;
    step.gate_id = require(s, "gate").get<std::string>();
    step.input_pin = require(s, "pin").get<int>();
    step.output_net = require(s, "out").get<std::string>();
    p.steps.push_back(std::move(step));
  }
  p.nominal_delay = require(j, "nominal_delay_ps").get<Ps>();
  p.slack = require(j, "slack_ps").get<Ps>();
  return p;
}

njson aging_params_to_json(const AgingParams& p) {
  return njson{{"A", p.A},
               {"Ea_eV", p.Ea_eV},
               {"T_K", p.T_K},
               {"n", p.n},
               {"beta_clamp_epsilon", p.beta_clamp_epsilon},
               {"guardband_fraction", p.guardband_fraction}};
}

AgingParams aging_params_from_json(const njson& j) {
  AgingParams p;
  if (j.contains("A")) p.A = j["A"].get<double>();
  if (j.contains("Ea_eV")) p.Ea_eV = j["Ea_eV"].get<double>();
  if (j.contains("T_K")) p.T_K = j["T_K"].get<double>();
  if (j.contains("n")) p.n = j["n"].get<double>();
  if (j.contains("beta_clamp_epsilon")) p.beta_clamp_epsilon = j["beta_clamp_epsilon"].get<double>();
  if (j.contains("guardband_fraction")) p.guardband_fraction = j["guardband_fraction"].get<double>();
  if (!(p.A > 0)) throw Error(ErrorCode::DomainError, "A must be positive");
  if (!(p.T_K > 0)) throw Error(ErrorCode::DomainError, "T_K must be positive");
  if (!(p.n > 0 && p.n < 1)) throw Error(ErrorCode::DomainError, "n must lie in (0, 1)");
  if (!(p.beta_clamp_epsilon > 0 && p.beta_clamp_epsilon < 0.1)) {
    throw Error(ErrorCode::DomainError, "beta_clamp_epsilon must lie in (0, 0.1)");
  }
  if (!(p.guardband_fraction >= 0 && p.guardband_fraction < 1)) {
    throw Error(ErrorCode::DomainError, "guardband_fraction must lie in [0, 1)");
  }
  return p;
}

njson fault_to_json(const StuckFault& f) {
  return njson{{"gate", f.gate_id}, {"pin", f.pin}, {"net", f.net}, {"stuck", f.stuck_value}};
}

StuckFault fault_from_json(const njson& j) {
  StuckFault f;
  f.gate_id = require(j, "gate").get<std::string>();
  f.pin = require(j, "pin").get<int>();
  f.net = require(j, "net").get<std::string>();
  if (j.contains("stuck")) f.stuck_value = j["stuck"].get<int>();
  return f;
}

njson fault_list_to_json(const std::vector<StuckFault>& faults) {
  njson arr = njson::array();
  for (const auto& f : faults) arr.push_back(fault_to_json(f));
  return arr;
}

std::vector<StuckFault> fault_list_from_json(const njson& arr) {
  std::vector<StuckFault> out;
  for (const auto& f : arr) out.push_back(fault_from_json(f));
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failure on '" + path + "'");
}

DelayLibrary parse_delay_library(const std::string& json_text) {
  njson j = parse_json(json_text);
  DelayLibrary lib;
  for (const auto& [name, val] : require(j, "cells").items()) {
    cell_kind_from_string(name);  // rejects unknown kinds
    Ps ps = val.get<Ps>();
    if (ps < 0) throw Error(ErrorCode::DomainError, "negative delay for cell " + name);
    lib.cell_delay[name] = ps;
  }
  if (j.contains("overrides")) {
    for (const auto& [gate, val] : j["overrides"].items()) {
      Ps ps = val.get<Ps>();
      if (ps < 0) throw Error(ErrorCode::DomainError, "negative override for gate " + gate);
      lib.overrides[gate] = ps;
    }
  }
  if (j.contains("ff_setup")) lib.ff_setup = j["ff_setup"].get<Ps>();
  if (j.contains("ff_clk_to_q")) lib.ff_clk_to_q = j["ff_clk_to_q"].get<Ps>();
  if (lib.ff_setup < 0 || lib.ff_clk_to_q < 0) {
    throw Error(ErrorCode::DomainError, "flip-flop timing must be nonnegative");
  }
  return lib;
}

std::string serialize_delay_library(const DelayLibrary& lib) {
  njson cells = njson::object();
  for (const auto& [name, ps] : lib.cell_delay) cells[name] = ps;
  njson overrides = njson::object();
  for (const auto& [gate, ps] : lib.overrides) overrides[gate] = ps;
  return dump(njson{{"cells", std::move(cells)},
                    {"overrides", std::move(overrides)},
                    {"ff_setup", lib.ff_setup},
                    {"ff_clk_to_q", lib.ff_clk_to_q}});
}

std::vector<InputVector> StimulusFile::expand(std::size_t expected_width) const {
  std::vector<InputVector> out;
  for (const auto& v : vectors) {
    if (v.size() != expected_width) {
      throw Error(ErrorCode::WidthMismatch, "vector width " + std::to_string(v.size()) +
                                                ", expected " + std::to_string(expected_width));
    }
  }
  out.reserve(vectors.size() * static_cast<std::size_t>(repeat));
  for (int r = 0; r < repeat; ++r) out.insert(out.end(), vectors.begin(), vectors.end());
  return out;
}

StimulusFile parse_stimulus_file(const std::string& json_text) {
  njson j = parse_json(json_text);
  StimulusFile s;
  for (const auto& v : require(j, "vectors")) s.vectors.push_back(bits_to_vector(v.get<std::string>()));
  if (j.contains("repeat")) s.repeat = j["repeat"].get<int>();
  if (s.repeat < 1) throw Error(ErrorCode::SchemaError, "repeat must be at least 1");
  return s;
}

std::string serialize_stimulus_file(const StimulusFile& s) {
  njson vectors = njson::array();
  for (const auto& v : s.vectors) vectors.push_back(vector_to_bits(v));
  return dump(njson{{"vectors", std::move(vectors)}, {"repeat", s.repeat}});
}

DutyProfile parse_duty_profile(const std::string& json_text) {
  njson j = parse_json(json_text);
  DutyProfile p;
  p.cycle_count = require(j, "cycles").get<std::size_t>();
  if (j.contains("idle_fraction")) p.idle_fraction = j["idle_fraction"].get<double>();
  if (j.contains("mode")) p.mode = idle_mode_from_string(j["mode"].get<std::string>());
  for (const auto& [pin, val] : require(j, "beta").items()) {
    double b = val.get<double>();
    if (b < 0.0 || b > 1.0) throw Error(ErrorCode::InvalidFraction, "beta outside [0, 1] at " + pin);
    p.beta[pin] = b;
  }
  return p;
}

std::string serialize_duty_profile(const DutyProfile& p) {
  njson beta = njson::object();
  for (const auto& [pin, b] : p.beta) beta[pin] = b;
  return dump(njson{{"cycles", p.cycle_count},
                    {"idle_fraction", p.idle_fraction},
                    {"mode", to_string(p.mode)},
                    {"beta", std::move(beta)}});
}

AgingParams parse_aging_params(const std::string& json_text) {
  return aging_params_from_json(parse_json(json_text));
}

std::string serialize_aging_params(const AgingParams& p) { return dump(aging_params_to_json(p)); }

std::string serialize_activity_report(const ActivityReport& r) {
  njson toggles = njson::object();
  for (const auto& [net, count] : r.net_toggles) toggles[net] = count;
  return dump(njson{{"cycles", r.cycle_count},
                    {"total_toggles", r.total_toggles},
                    {"mean_toggles_per_cycle", r.mean_toggles_per_cycle},
                    {"net_toggles", std::move(toggles)}});
}

std::string serialize_sta_report(const StaResult& sta, const std::vector<TimingPath>& paths) {
  njson arrival = njson::object();
  for (const auto& [net, ps] : sta.arrival) arrival[net] = ps;
  njson path_arr = njson::array();
  for (const auto& p : paths) path_arr.push_back(path_to_json(p));
  return dump(njson{{"period_ps", sta.clock.period},
                    {"guardband_fraction", sta.clock.guardband_fraction},
                    {"ff_setup_ps", sta.ff_setup},
                    {"ff_clk_to_q_ps", sta.ff_clk_to_q},
                    {"critical_delay_ps", sta.critical_delay},
                    {"critical_path", path_to_json(sta.critical_path)},
                    {"arrival_ps", std::move(arrival)},
                    {"paths", std::move(path_arr)}});
}

std::string serialize_path(const TimingPath& p) { return dump(path_to_json(p)); }

std::vector<TimingPath> parse_paths(const std::string& json_text) {
  njson j = parse_json(json_text);
  std::vector<TimingPath> out;
  if (j.is_array()) {
    for (const auto& p : j) out.push_back(path_from_json(p));
  } else if (j.contains("paths")) {
    for (const auto& p : j["paths"]) out.push_back(path_from_json(p));
  } else {
    out.push_back(path_from_json(j));
  }
  return out;
}

AgedDelays parse_aged_delays(const std::string& json_text) {
  njson j = parse_json(json_text);
  AgedDelays d;
  d.t_seconds = require(j, "t_seconds").get<double>();
  if (j.contains("beta_convention")) d.beta_convention = j["beta_convention"].get<std::string>();
  if (j.contains("params")) d.params = aging_params_from_json(j["params"]);
  if (j.contains("ff_setup")) d.ff_setup = j["ff_setup"].get<Ps>();
  if (j.contains("ff_clk_to_q")) d.ff_clk_to_q = j["ff_clk_to_q"].get<Ps>();
  for (const auto& [gate, val] : require(j, "delays").items()) d.delay_ps[gate] = val.get<Ps>();
  return d;
}

std::string serialize_aged_delays(const AgedDelays& d) {
  njson delays = njson::object();
  for (const auto& [gate, ps] : d.delay_ps) delays[gate] = ps;
  return dump(njson{{"t_seconds", d.t_seconds},
                    {"beta_convention", d.beta_convention},
                    {"ff_setup", d.ff_setup},
                    {"ff_clk_to_q", d.ff_clk_to_q},
                    {"params", aging_params_to_json(d.params)},
                    {"delays", std::move(delays)}});
}

std::string serialize_patterns(const std::vector<TestPattern>& patterns,
                               const CoverageReport& coverage) {
  njson arr = njson::array();
  for (const auto& p : patterns) {
    njson vectors = njson::array();
    for (const auto& v : p.vectors) vectors.push_back(vector_to_bits(v));
    arr.push_back(njson{{"id", p.id},
                        {"vectors", std::move(vectors)},
                        {"covered_faults", fault_list_to_json(p.covered_faults)},
                        {"path_fault_score", p.path_fault_score},
                        {"on_path_pins", p.score_on_path_pins},
                        {"side_pins", p.score_side_pins}});
  }
  return dump(njson{{"patterns", std::move(arr)},
                    {"coverage", njson{{"detectable", fault_list_to_json(coverage.detectable)},
                                       {"detected", fault_list_to_json(coverage.detected)},
                                       {"undetectable", fault_list_to_json(coverage.undetectable)},
                                       {"aborted", fault_list_to_json(coverage.aborted)}}}});
}

std::vector<TestPattern> parse_patterns(const std::string& json_text) {
  njson j = parse_json(json_text);
  std::vector<TestPattern> out;
  for (const auto& p : require(j, "patterns")) {
    TestPattern pat;
    pat.id = require(p, "id").get<int>();
    for (const auto& v : require(p, "vectors")) pat.vectors.push_back(bits_to_vector(v.get<std::string>()));
    if (p.contains("covered_faults")) pat.covered_faults = fault_list_from_json(p["covered_faults"]);
    if (p.contains("path_fault_score")) pat.path_fault_score = p["path_fault_score"].get<int>();
    if (p.contains("on_path_pins")) pat.score_on_path_pins = p["on_path_pins"].get<int>();
    if (p.contains("side_pins")) pat.score_side_pins = p["side_pins"].get<int>();
    out.push_back(std::move(pat));
  }
  return out;
}

std::string serialize_traces(const std::vector<StimulusTrace>& traces) {
  njson arr = njson::array();
  for (const auto& t : traces) {
    njson vectors = njson::array();
    for (const auto& v : t.vectors) vectors.push_back(vector_to_bits(v));
    arr.push_back(njson{{"vectors", std::move(vectors)},
                        {"pmos_on_score", t.pmos_on_score},
                        {"verified", t.verified}});
  }
  return dump(njson{{"traces", std::move(arr)}});
}

std::vector<StimulusTrace> parse_traces(const std::string& json_text) {
  njson j = parse_json(json_text);
  std::vector<StimulusTrace> out;
  for (const auto& t : require(j, "traces")) {
    StimulusTrace trace;
    for (const auto& v : require(t, "vectors")) trace.vectors.push_back(bits_to_vector(v.get<std::string>()));
    if (t.contains("pmos_on_score")) trace.pmos_on_score = t["pmos_on_score"].get<int>();
    if (t.contains("verified")) trace.verified = t["verified"].get<bool>();
    out.push_back(std::move(trace));
  }
  return out;
}

std::string serialize_corruption_diff(const CorruptionDiff& d) {
  njson cycles = njson::array();
  for (std::size_t c = 0; c < d.mismatch.size(); ++c) {
    std::string mask;
    mask.reserve(d.mismatch[c].size());
    for (std::uint8_t m : d.mismatch[c]) mask.push_back(char('0' + m));
    cycles.push_back(njson{{"cycle", c},
                           {"golden", "0x" + d.golden_hex[c]},
                           {"faulty", "0x" + d.faulty_hex[c]},
                           {"corrupted_bits", d.corrupted_bits_per_cycle[c]},
                           {"mismatch", std::move(mask)}});
  }
  return dump(njson{{"first_divergence_cycle", d.first_divergence_cycle},
                    {"corrupted_bits", d.corrupted_bits},
                    {"outputs", d.po_nets},
                    {"cycles", std::move(cycles)}});
}

std::string serialize_stability_check(const StabilityCheck& c) {
  njson stable = njson::object();
  for (const auto& [net, ok] : c.net_stable) stable[net] = ok;
  return dump(njson{{"ok", c.ok},
                    {"failing_net", c.failing_net},
                    {"failing_cycle", c.failing_cycle},
                    {"constraint_ok", c.constraint_ok},
                    {"constraint_fail_cycle", c.constraint_fail_cycle},
                    {"net_stable", std::move(stable)}});
}

}  // namespace twa
