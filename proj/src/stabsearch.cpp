#include "twa/stabsearch.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_map>

#include "json.hpp"

namespace twa {

namespace {

// Shared simulation scaffolding for a query: resolved target nets, objective
// pin nets, and single-cycle stepping.
struct QueryContext {
  const Netlist* n = nullptr;
  NetlistIndex ix;
  std::vector<int> target_nets;
  std::vector<int> objective_nets;

  QueryContext(const Netlist& netlist, const StabilityQuery& q) : n(&netlist), ix(build_index(netlist)) {
    if (q.target_nets.empty()) throw Error(ErrorCode::SchemaError, "query has no target nets");
    if (q.hold_cycles < 2) throw Error(ErrorCode::SchemaError, "hold_cycles must be at least 2");
    for (const auto& net : q.target_nets) target_nets.push_back(ix.require_net(net));
    for (const auto& [gate_id, pin] : q.objective_pins) {
      const GateInstance* g = netlist.find_gate(gate_id);
      if (!g) throw Error(ErrorCode::UnknownNet, "objective gate " + gate_id);
      if (pin < 0 || pin >= input_count(g->kind)) {
        throw Error(ErrorCode::UnknownNet, "objective pin " + pin_key(gate_id, pin));
      }
      objective_nets.push_back(ix.require_net(g->input_nets[pin]));
    }
  }

  std::size_t width() const { return n->primary_inputs.size(); }

  // One cycle: evaluate nets from inputs and FF state, then advance the state.
  void step(const InputVector& v, std::vector<std::uint8_t>& ff_state,
            std::vector<std::uint8_t>& values) const {
    for (std::size_t i = 0; i < v.size(); ++i) values[ix.pi_nets[i]] = v[i];
    for (std::size_t f = 0; f < ff_state.size(); ++f) values[ix.ff_q[f]] = ff_state[f];
    std::uint8_t in[3];
    for (int gi : ix.topo_gates) {
      const auto& nets = ix.gate_inputs[gi];
      for (std::size_t p = 0; p < nets.size(); ++p) in[p] = values[nets[p]];
      values[ix.gate_output[gi]] = eval_cell(n->gates[gi].kind, in);
    }
    for (std::size_t f = 0; f < ff_state.size(); ++f) ff_state[f] = values[ix.ff_d[f]];
  }

  std::vector<std::uint8_t> initial_state() const {
    std::vector<std::uint8_t> state;
    for (const auto& ff : n->flipflops) state.push_back(ff.init_value);
    return state;
  }
};

std::uint64_t pack_bits(const std::vector<std::uint8_t>& bits) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) v |= static_cast<std::uint64_t>(bits[i] & 1) << i;
  return v;
}

bool is_varying(const std::vector<InputVector>& vectors) {
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i] != vectors.front()) return true;
  }
  return false;
}

// Ranking: score, then input-varying before constant, then raw bytes.
bool trace_before(const StimulusTrace& a, const StimulusTrace& b) {
  if (a.pmos_on_score != b.pmos_on_score) return a.pmos_on_score > b.pmos_on_score;
  bool va = is_varying(a.vectors), vb = is_varying(b.vectors);
  if (va != vb) return va;
  return a.vectors < b.vectors;
}

InputVector decode_vector(std::uint64_t value, std::size_t width) {
  InputVector v(width);
  for (std::size_t i = 0; i < width; ++i) v[i] = static_cast<std::uint8_t>((value >> i) & 1);
  return v;
}

std::vector<InputVector> valid_vectors(const QueryContext& ctx, const ValidityPredicate& constraint) {
  std::vector<InputVector> out;
  const std::size_t w = ctx.width();
  for (std::uint64_t value = 0; value < (std::uint64_t{1} << w); ++value) {
    InputVector v = decode_vector(value, w);
    if (constraint.accepts(v)) out.push_back(std::move(v));
  }
  return out;
}

std::vector<StimulusTrace> exhaustive_search(const Netlist& n, const StabilityQuery& q, int want) {
  QueryContext ctx(n, q);
  if (ctx.width() > 20) {
    throw Error(ErrorCode::DomainError, "exhaustive search supports at most 20 inputs");
  }
  if (n.flipflops.size() + q.target_nets.size() > 40) {
    throw Error(ErrorCode::DomainError, "state space too wide for exhaustive search");
  }
  std::vector<InputVector> choices = valid_vectors(ctx, q.constraint);
  if (choices.empty()) throw Error(ErrorCode::Unreachable, "constraint rejects every input vector");

  const int N = q.hold_cycles;
  const std::size_t ff_bits = n.flipflops.size();
  const std::size_t tg_bits = ctx.target_nets.size();
  auto key_of = [&](std::uint64_t ff, std::uint64_t tg, int count) {
    return ff | (tg << ff_bits) | (static_cast<std::uint64_t>(count) << (ff_bits + tg_bits));
  };

  // Successors depend only on the FF state and the chosen vector.
  struct Edge {
    std::uint64_t targets;
    std::uint64_t next_ff;
  };
  std::unordered_map<std::uint64_t, std::vector<Edge>> edge_cache;
  std::vector<std::uint8_t> values(ctx.ix.net_names.size(), 0);
  auto edges_for = [&](std::uint64_t ff_key) -> const std::vector<Edge>& {
    auto it = edge_cache.find(ff_key);
    if (it != edge_cache.end()) return it->second;
    std::vector<Edge> edges;
    edges.reserve(choices.size());
    for (const auto& v : choices) {
      std::vector<std::uint8_t> state(ff_bits);
      for (std::size_t f = 0; f < ff_bits; ++f) state[f] = static_cast<std::uint8_t>((ff_key >> f) & 1);
      ctx.step(v, state, values);
      std::uint64_t tg = 0;
      for (std::size_t t = 0; t < tg_bits; ++t) {
        tg |= static_cast<std::uint64_t>(values[ctx.target_nets[t]] & 1) << t;
      }
      edges.push_back({tg, pack_bits(state)});
    }
    return edge_cache.emplace(ff_key, std::move(edges)).first->second;
  };

  struct Arrival {
    std::uint64_t parent_key;
    std::uint32_t choice;
    bool initial;
  };
  std::unordered_map<std::uint64_t, Arrival> parent;
  std::deque<std::uint64_t> queue;
  std::vector<std::uint64_t> accepts;

  std::uint64_t init_ff = pack_bits(ctx.initial_state());
  {
    const auto& edges = edges_for(init_ff);
    for (std::size_t c = 0; c < edges.size(); ++c) {
      std::uint64_t key = key_of(edges[c].next_ff, edges[c].targets, 1);
      if (parent.count(key)) continue;
      parent[key] = {0, static_cast<std::uint32_t>(c), true};
      queue.push_back(key);
    }
  }
  const std::uint64_t ff_mask = (std::uint64_t{1} << ff_bits) - 1;
  const std::uint64_t tg_mask = (std::uint64_t{1} << tg_bits) - 1;
  while (!queue.empty()) {
    std::uint64_t cur = queue.front();
    queue.pop_front();
    std::uint64_t ff = cur & ff_mask;
    std::uint64_t tg = (cur >> ff_bits) & tg_mask;
    int count = static_cast<int>(cur >> (ff_bits + tg_bits));
    if (count >= N) continue;  // accept states need no expansion
    const auto& edges = edges_for(ff);
    for (std::size_t c = 0; c < edges.size(); ++c) {
      int next_count = edges[c].targets == tg ? count + 1 : 1;
      std::uint64_t key = key_of(edges[c].next_ff, edges[c].targets, std::min(next_count, N));
      if (parent.count(key)) continue;
      parent[key] = {cur, static_cast<std::uint32_t>(c), false};
      queue.push_back(key);
      if (next_count >= N) accepts.push_back(key);
    }
  }

  if (accepts.empty()) {
    throw Error(ErrorCode::Unreachable, "no constraint-satisfying trace stabilizes the targets");
  }

  std::vector<StimulusTrace> traces;
  for (std::uint64_t key : accepts) {
    std::vector<std::uint32_t> rev;
    std::uint64_t cur = key;
    while (true) {
      const Arrival& a = parent.at(cur);
      rev.push_back(a.choice);
      if (a.initial) break;
      cur = a.parent_key;
    }
    StimulusTrace trace;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) trace.vectors.push_back(choices[*it]);
    trace.pmos_on_score = score_trace(n, trace, q);
    StabilityCheck check = verify_trace(n, trace, q);
    if (check.ok) traces.push_back(std::move(trace));
  }
  std::sort(traces.begin(), traces.end(), trace_before);
  traces.erase(std::unique(traces.begin(), traces.end(),
                           [](const StimulusTrace& a, const StimulusTrace& b) {
                             return a.vectors == b.vectors;
                           }),
               traces.end());
  if (static_cast<int>(traces.size()) > want) traces.resize(want);
  return traces;
}

// Number of adjacent window cycles whose target values differ; 0 = stable.
int window_distance(const QueryContext& ctx, const StabilityQuery& q,
                    const std::vector<InputVector>& vectors) {
  std::vector<std::uint8_t> state = ctx.initial_state();
  std::vector<std::uint8_t> values(ctx.ix.net_names.size(), 0);
  const std::size_t start = vectors.size() - static_cast<std::size_t>(q.hold_cycles);
  int dist = 0;
  std::uint64_t prev = 0;
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    ctx.step(vectors[c], state, values);
    std::uint64_t tg = 0;
    for (std::size_t t = 0; t < ctx.target_nets.size(); ++t) {
      tg |= static_cast<std::uint64_t>(values[ctx.target_nets[t]] & 1) << t;
    }
    if (c > start) dist += tg != prev;
    prev = tg;
  }
  return dist;
}

std::vector<StimulusTrace> mutational_search(const Netlist& n, const StabilityQuery& q,
                                             const SearchStrategy& strategy, int want) {
  QueryContext ctx(n, q);
  std::mt19937_64 engine(strategy.seed);
  const std::size_t w = ctx.width();

  auto random_bit = [&]() { return static_cast<std::uint8_t>(engine() & 1); };
  auto sample_valid = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      InputVector v(w);
      for (auto& b : v) b = random_bit();
      if (q.constraint.accepts(v)) return v;
    }
    throw Error(ErrorCode::Timeout, "could not sample a constraint-satisfying vector");
  };

  const std::size_t len = static_cast<std::size_t>(q.hold_cycles) * 2;
  std::vector<StimulusTrace> results;
  auto record = [&](std::vector<InputVector> vectors) {
    StimulusTrace trace;
    trace.vectors = std::move(vectors);
    StabilityCheck check = verify_trace(n, trace, q);
    if (!check.ok) return;
    trace.pmos_on_score = score_trace(n, trace, q);
    for (const auto& r : results) {
      if (r.vectors == trace.vectors) return;
    }
    results.push_back(std::move(trace));
  };

  // Constant traces give the search a floor; varying mutants outrank them.
  for (int probe = 0; probe < 32; ++probe) {
    InputVector v = sample_valid();
    record(std::vector<InputVector>(len, v));
  }

  std::vector<InputVector> candidate(len);
  for (auto& v : candidate) v = sample_valid();
  int best_dist = window_distance(ctx, q, candidate);

  for (std::uint64_t iter = 0; iter < strategy.iterations; ++iter) {
    std::vector<InputVector> trial = candidate;
    trial[engine() % len] = sample_valid();
    int d = window_distance(ctx, q, trial);
    if (d <= best_dist) {
      candidate = std::move(trial);
      best_dist = d;
    }
    if (best_dist == 0) {
      record(candidate);
      for (auto& v : candidate) v = sample_valid();  // restart for diversity
      best_dist = window_distance(ctx, q, candidate);
    }
  }

  if (results.empty()) {
    throw Error(ErrorCode::Timeout, "mutation budget exhausted without a stable trace");
  }
  std::sort(results.begin(), results.end(), trace_before);
  if (static_cast<int>(results.size()) > want) results.resize(want);
  return results;
}

}  // namespace

int score_trace(const Netlist& n, const StimulusTrace& trace, const StabilityQuery& q) {
  QueryContext ctx(n, q);
  if (trace.vectors.size() < static_cast<std::size_t>(q.hold_cycles)) {
    throw Error(ErrorCode::TraceTooShort, "trace shorter than the stability window");
  }
  std::vector<std::uint8_t> state = ctx.initial_state();
  std::vector<std::uint8_t> values(ctx.ix.net_names.size(), 0);
  const std::size_t start = trace.vectors.size() - static_cast<std::size_t>(q.hold_cycles);
  std::vector<char> held(ctx.objective_nets.size(), 1);
  for (std::size_t c = 0; c < trace.vectors.size(); ++c) {
    ctx.step(trace.vectors[c], state, values);
    if (c < start) continue;
    for (std::size_t i = 0; i < ctx.objective_nets.size(); ++i) {
      if (values[ctx.objective_nets[i]] != 0) held[i] = 0;
    }
  }
  int score = 0;
  for (char h : held) score += h;
  return score;
}

StabilityCheck verify_trace(const Netlist& n, StimulusTrace& trace, const StabilityQuery& q) {
  QueryContext ctx(n, q);
  StabilityCheck check;
  trace.verified = false;
  for (const auto& net : q.target_nets) check.net_stable[net] = false;

  for (std::size_t c = 0; c < trace.vectors.size(); ++c) {
    if (trace.vectors[c].size() != ctx.width()) {
      throw Error(ErrorCode::WidthMismatch, "vector " + std::to_string(c) + " has width " +
                                                std::to_string(trace.vectors[c].size()));
    }
    if (check.constraint_ok && !q.constraint.accepts(trace.vectors[c])) {
      check.constraint_ok = false;
      check.constraint_fail_cycle = static_cast<int>(c);
    }
  }
  if (trace.vectors.size() < static_cast<std::size_t>(q.hold_cycles)) return check;

  std::vector<std::uint8_t> state = ctx.initial_state();
  std::vector<std::uint8_t> values(ctx.ix.net_names.size(), 0);
  const std::size_t start = trace.vectors.size() - static_cast<std::size_t>(q.hold_cycles);
  std::vector<std::uint8_t> first(ctx.target_nets.size(), 0);
  std::vector<int> first_bad(ctx.target_nets.size(), -1);
  for (std::size_t c = 0; c < trace.vectors.size(); ++c) {
    ctx.step(trace.vectors[c], state, values);
    if (c < start) continue;
    for (std::size_t t = 0; t < ctx.target_nets.size(); ++t) {
      std::uint8_t v = values[ctx.target_nets[t]];
      if (c == start) {
        first[t] = v;
      } else if (v != first[t] && first_bad[t] < 0) {
        first_bad[t] = static_cast<int>(c);
      }
    }
  }

  bool all_stable = true;
  for (std::size_t t = 0; t < ctx.target_nets.size(); ++t) {
    bool stable = first_bad[t] < 0;
    check.net_stable[q.target_nets[t]] = stable;
    if (!stable && all_stable) {
      all_stable = false;
      check.failing_net = q.target_nets[t];
      check.failing_cycle = first_bad[t];
    }
  }
  check.ok = all_stable && check.constraint_ok;
  trace.verified = check.ok;
  return check;
}

std::vector<StimulusTrace> search_stable_traces(const Netlist& n, const StabilityQuery& q,
                                                const SearchStrategy& strategy, int want) {
  if (want < 1) throw Error(ErrorCode::DomainError, "want must be positive");
  if (strategy.kind == SearchStrategy::Kind::Exhaustive) return exhaustive_search(n, q, want);
  return mutational_search(n, q, strategy, want);
}

StabilityQuery parse_stability_query(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  StabilityQuery q;
  if (!j.is_object() || !j.contains("targets")) {
    throw Error(ErrorCode::SchemaError, "query needs a 'targets' array");
  }
  for (const auto& t : j.at("targets")) q.target_nets.push_back(t.get<std::string>());
  q.hold_cycles = j.value("hold_cycles", 10);
  if (j.contains("objective_pins")) {
    for (const auto& p : j.at("objective_pins")) {
      std::string s = p.get<std::string>();
      auto colon = s.rfind(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::SchemaError, "objective pin '" + s + "' must be gate:pin");
      }
      q.objective_pins.emplace_back(s.substr(0, colon), std::stoi(s.substr(colon + 1)));
    }
  }
  if (j.contains("constraints") && !j.at("constraints").is_null()) {
    q.constraint = parse_predicate(j.at("constraints").dump());
  }
  return q;
}

SearchStrategy parse_search_strategy(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  SearchStrategy s;
  if (!j.is_object() || !j.contains("strategy")) return s;
  const auto& sj = j.at("strategy");
  std::string kind = sj.value("kind", "exhaustive");
  if (kind == "exhaustive") {
    s.kind = SearchStrategy::Kind::Exhaustive;
  } else if (kind == "mutational") {
    s.kind = SearchStrategy::Kind::Mutational;
  } else {
    throw Error(ErrorCode::SchemaError, "unknown strategy kind '" + kind + "'");
  }
  s.seed = sj.value("seed", std::uint64_t{0});
  s.iterations = sj.value("iterations", std::uint64_t{100000});
  return s;
}

std::string serialize_stability_query(const StabilityQuery& q, const SearchStrategy& s) {
  nlohmann::ordered_json j;
  j["targets"] = q.target_nets;
  j["hold_cycles"] = q.hold_cycles;
  j["objective_pins"] = nlohmann::ordered_json::array();
  for (const auto& [gate_id, pin] : q.objective_pins) j["objective_pins"].push_back(pin_key(gate_id, pin));
  if (!q.constraint.empty()) {
    j["constraints"] = nlohmann::ordered_json::parse(serialize_predicate(q.constraint));
  }
  nlohmann::ordered_json sj;
  sj["kind"] = s.kind == SearchStrategy::Kind::Exhaustive ? "exhaustive" : "mutational";
  sj["seed"] = s.seed;
  sj["iterations"] = s.iterations;
  j["strategy"] = sj;
  return j.dump(2) + "\n";
}

}  // namespace twa
