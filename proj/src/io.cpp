#include "dfsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dfsim/errors.hpp"

namespace dfsim {
namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

std::string rational_text(const Rational& r) { return std::to_string(r.num()) + "/" + std::to_string(r.den()); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Writing

ojson edge_names(const Network& net, const Path& p) {
  ojson out = ojson::array();
  for (EdgeId e : p) out.push_back(net.edge(e).id);
  return out;
}

ojson scenario_to_json(const ScenarioConfig& c) {
  const auto& net = c.network;
  ojson j;
  j["name"] = c.name;

  ojson edges = ojson::array();
  for (const auto& e : net.edges()) {
    ojson je;
    je["id"] = e.id;
    je["tail"] = net.node_name(e.tail);
    je["head"] = net.node_name(e.head);
    if (e.slowness != 1) je["slowness"] = e.slowness;
    edges.push_back(std::move(je));
  }
  j["network"] = {{"nodes", net.nodes()}, {"edges", std::move(edges)}};

  j["adversary"] = {{"r", rational_text(c.adversary.rate)},
                    {"b", c.adversary.burstiness},
                    {"delta", c.adversary.delay},
                    {"tau", c.tau},
                    {"tau_prime", c.tau_prime}};
  j["policy"] = {{"name", to_string(c.policy.base)}, {"priorities", c.policy.priorities}};

  ojson s;
  s["injections"] = ojson::array();
  for (const auto& i : c.injections) {
    ojson ji = {{"round", i.round}, {"path", edge_names(net, i.path)}};
    if (i.priority != 0) ji["priority"] = i.priority;
    s["injections"].push_back(std::move(ji));
  }
  s["stalls"] = ojson::array();
  for (const auto& st : c.stalls) s["stalls"].push_back({{"edge", net.edge(st.edge).id}, {"rounds", st.rounds}});
  s["annihilations"] = ojson::array();
  for (const auto& a : c.annihilations) {
    s["annihilations"].push_back({{"edge", net.edge(a.edge).id}, {"round", a.round}, {"delay", a.delay}});
  }
  s["failures"] = ojson::array();
  for (const auto& f : c.failures) {
    s["failures"].push_back({{"edge", net.edge(f.edge).id}, {"round", f.round}, {"notify_delay", f.notify_delay}});
  }
  s["recoveries"] = ojson::array();
  for (const auto& r : c.recoveries) s["recoveries"].push_back({{"edge", net.edge(r.edge).id}, {"round", r.round}});
  if (c.injection_generator || c.stall_generator || c.annihilation_generator) {
    ojson gens = ojson::object();
    if (const auto& g = c.injection_generator) {
      gens["injection"] = {{"attempts_per_round", g->attempts_per_round},
                           {"max_path_length", g->max_path_length},
                           {"until", g->until}};
    }
    if (const auto& g = c.stall_generator) {
      gens["stall"] = {{"probability", rational_text(g->probability)}, {"max_consecutive", g->max_consecutive}};
    }
    if (c.annihilation_generator) gens["annihilation"] = ojson::object();
    s["generators"] = std::move(gens);
  }
  j["schedules"] = std::move(s);

  j["run"] = {{"horizon", c.horizon},
              {"seed", c.seed},
              {"promote_after_tau", c.promote_after_tau},
              {"enforce_tokens", c.enforce_tokens}};
  return j;
}

// ---------------------------------------------------------------------------
// Strict reading

[[noreturn]] void fail_at(const std::string& path, const std::string& what) {
  throw ParseError("at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

void expect_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail_at(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail_at(path + "/" + key, "unknown key");
  }
}

const json& require_key(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail_at(path, std::string("missing key '") + key + "'");
  return *it;
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail_at(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    fail_at(path, "integer out of range");
  }
  return j.get<std::int64_t>();
}

std::int64_t get_int(const json& j, const std::string& path, const char* key) {
  return as_int(require_key(j, path, key), path + "/" + key);
}

std::int64_t get_int_or(const json& j, const std::string& path, const char* key, std::int64_t fallback) {
  return j.contains(key) ? get_int(j, path, key) : fallback;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_at(path, "expected a string");
  return j.get<std::string>();
}

std::string get_string(const json& j, const std::string& path, const char* key) {
  return as_string(require_key(j, path, key), path + "/" + key);
}

bool get_bool_or(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail_at(path + "/" + key, "expected a boolean");
  return v.get<bool>();
}

Rational get_rational(const json& j, const std::string& path, const char* key) {
  const auto& v = require_key(j, path, key);
  if (!v.is_string()) fail_at(path + "/" + key, "expected a \"num/den\" string");
  try {
    return Rational::parse(v.get<std::string>());
  } catch (const std::exception& e) {
    fail_at(path + "/" + key, e.what());
  }
}

const json& get_array(const json& j, const std::string& path, const char* key) {
  const auto& v = require_key(j, path, key);
  if (!v.is_array()) fail_at(path + "/" + key, "expected an array");
  return v;
}

const json& get_array_or_empty(const json& j, const std::string& path, const char* key) {
  static const json empty = json::array();
  return j.contains(key) ? get_array(j, path, key) : empty;
}

EdgeId edge_ref(const Network& net, const json& j, const std::string& path) {
  auto name = as_string(j, path);
  auto e = net.find_edge(name);
  if (!e) fail_at(path, "unknown edge '" + name + "'");
  return *e;
}

EdgeId get_edge(const Network& net, const json& j, const std::string& path, const char* key) {
  return edge_ref(net, require_key(j, path, key), path + "/" + key);
}

Path path_ref(const Network& net, const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array of edge ids");
  Path p;
  for (std::size_t i = 0; i < j.size(); ++i) p.push_back(edge_ref(net, j[i], path + "/" + std::to_string(i)));
  return p;
}

Network network_from_json(const json& j, const std::string& path) {
  expect_object(j, path, {"nodes", "edges"});
  Network net;
  const auto& nodes = get_array(j, path, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto p = path + "/nodes/" + std::to_string(i);
    auto name = as_string(nodes[i], p);
    if (net.find_node(name)) fail_at(p, "duplicate node '" + name + "'");
    net.add_node(name);
  }
  const auto& edges = get_array(j, path, "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto p = path + "/edges/" + std::to_string(i);
    expect_object(edges[i], p, {"id", "tail", "head", "slowness"});
    auto id = get_string(edges[i], p, "id");
    auto tail = get_string(edges[i], p, "tail");
    auto head = get_string(edges[i], p, "head");
    if (!net.find_node(tail)) fail_at(p + "/tail", "unknown node '" + tail + "'");
    if (!net.find_node(head)) fail_at(p + "/head", "unknown node '" + head + "'");
    try {
      net.add_edge(id, tail, head, get_int_or(edges[i], p, "slowness", 1));
    } catch (const std::invalid_argument& e) {
      fail_at(p, e.what());
    }
  }
  return net;
}

ScenarioConfig scenario_from_json(const json& j) {
  expect_object(j, "", {"name", "network", "adversary", "policy", "schedules", "run"});
  ScenarioConfig c;
  if (j.contains("name")) c.name = get_string(j, "", "name");
  c.network = network_from_json(require_key(j, "", "network"), "/network");
  const auto& net = c.network;

  const auto& adv = require_key(j, "", "adversary");
  expect_object(adv, "/adversary", {"r", "b", "delta", "tau", "tau_prime"});
  c.adversary.rate = get_rational(adv, "/adversary", "r");
  c.adversary.burstiness = get_int(adv, "/adversary", "b");
  c.adversary.delay = get_int(adv, "/adversary", "delta");
  c.tau = get_int_or(adv, "/adversary", "tau", 1);
  c.tau_prime = get_int_or(adv, "/adversary", "tau_prime", 1);

  const auto& pol = require_key(j, "", "policy");
  expect_object(pol, "/policy", {"name", "priorities"});
  try {
    c.policy = make_policy(get_string(pol, "/policy", "name"),
                           static_cast<int>(get_int_or(pol, "/policy", "priorities", 1)));
  } catch (const std::invalid_argument& e) {
    fail_at("/policy", e.what());
  }

  if (j.contains("schedules")) {
    const std::string sp = "/schedules";
    const auto& s = j.at("schedules");
    expect_object(s, sp, {"injections", "stalls", "annihilations", "failures", "recoveries", "generators"});
    const auto& injections = get_array_or_empty(s, sp, "injections");
    for (std::size_t i = 0; i < injections.size(); ++i) {
      auto p = sp + "/injections/" + std::to_string(i);
      expect_object(injections[i], p, {"round", "path", "priority"});
      auto prio = get_int_or(injections[i], p, "priority", 0);
      if (prio < 0 || prio > 255) fail_at(p + "/priority", "priority out of range");
      c.injections.push_back({get_int(injections[i], p, "round"),
                              path_ref(net, require_key(injections[i], p, "path"), p + "/path"),
                              static_cast<std::uint8_t>(prio)});
    }
    const auto& stalls = get_array_or_empty(s, sp, "stalls");
    for (std::size_t i = 0; i < stalls.size(); ++i) {
      auto p = sp + "/stalls/" + std::to_string(i);
      expect_object(stalls[i], p, {"edge", "rounds"});
      StallSchedule st{get_edge(net, stalls[i], p, "edge"), {}};
      const auto& rounds = get_array(stalls[i], p, "rounds");
      for (std::size_t k = 0; k < rounds.size(); ++k) st.rounds.push_back(as_int(rounds[k], p + "/rounds/" + std::to_string(k)));
      c.stalls.push_back(std::move(st));
    }
    const auto& ann = get_array_or_empty(s, sp, "annihilations");
    for (std::size_t i = 0; i < ann.size(); ++i) {
      auto p = sp + "/annihilations/" + std::to_string(i);
      expect_object(ann[i], p, {"edge", "round", "delay"});
      c.annihilations.push_back({get_edge(net, ann[i], p, "edge"), get_int(ann[i], p, "round"), get_int(ann[i], p, "delay")});
    }
    const auto& fails = get_array_or_empty(s, sp, "failures");
    for (std::size_t i = 0; i < fails.size(); ++i) {
      auto p = sp + "/failures/" + std::to_string(i);
      expect_object(fails[i], p, {"edge", "round", "notify_delay"});
      c.failures.push_back({get_edge(net, fails[i], p, "edge"), get_int(fails[i], p, "round"),
                            get_int_or(fails[i], p, "notify_delay", 0)});
    }
    const auto& recs = get_array_or_empty(s, sp, "recoveries");
    for (std::size_t i = 0; i < recs.size(); ++i) {
      auto p = sp + "/recoveries/" + std::to_string(i);
      expect_object(recs[i], p, {"edge", "round"});
      c.recoveries.push_back({get_edge(net, recs[i], p, "edge"), get_int(recs[i], p, "round")});
    }
    if (s.contains("generators")) {
      const std::string gp = sp + "/generators";
      const auto& g = s.at("generators");
      expect_object(g, gp, {"injection", "stall", "annihilation"});
      if (g.contains("injection")) {
        const auto& gi = g.at("injection");
        expect_object(gi, gp + "/injection", {"attempts_per_round", "max_path_length", "until"});
        InjectionGenerator d;
        c.injection_generator = InjectionGenerator{
            get_int_or(gi, gp + "/injection", "attempts_per_round", d.attempts_per_round),
            get_int_or(gi, gp + "/injection", "max_path_length", d.max_path_length),
            get_int_or(gi, gp + "/injection", "until", d.until)};
      }
      if (g.contains("stall")) {
        const auto& gs = g.at("stall");
        expect_object(gs, gp + "/stall", {"probability", "max_consecutive"});
        StallGenerator d;
        if (gs.contains("probability")) d.probability = get_rational(gs, gp + "/stall", "probability");
        d.max_consecutive = get_int_or(gs, gp + "/stall", "max_consecutive", d.max_consecutive);
        c.stall_generator = d;
      }
      if (g.contains("annihilation")) {
        expect_object(g.at("annihilation"), gp + "/annihilation", {});
        c.annihilation_generator = AnnihilationGenerator{};
      }
    }
  }

  const auto& run = require_key(j, "", "run");
  expect_object(run, "/run", {"horizon", "seed", "promote_after_tau", "enforce_tokens"});
  c.horizon = get_int(run, "/run", "horizon");
  if (run.contains("seed")) {
    const auto& seed = run.at("seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      fail_at("/run/seed", "expected a non-negative integer");
    }
    c.seed = seed.get<std::uint64_t>();
  }
  c.promote_after_tau = get_bool_or(run, "/run", "promote_after_tau", false);
  c.enforce_tokens = get_bool_or(run, "/run", "enforce_tokens", true);

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid scenario: ") + e.what());
  }
  return c;
}

json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Byte offset -> 1-based line and column.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t upto = e.byte == 0 ? 0 : std::min(e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(what + " line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Trace records

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

ojson event_to_json(const Network& net, Round round, const Event& ev) {
  ojson j;
  j["type"] = event_name(ev);
  j["round"] = round;
  auto edge = [&net](EdgeId e) { return net.edge(e).id; };
  std::visit(Overloaded{
                 [&](const InjectionEvent& e) {
                   j["packet"] = e.packet;
                   j["path"] = edge_names(net, e.path);
                   j["priority"] = e.priority;
                 },
                 [&](const TransmissionEvent& e) {
                   j["packet"] = e.packet;
                   j["edge"] = edge(e.edge);
                 },
                 [&](const StallEvent& e) {
                   j["packet"] = e.packet;
                   j["edge"] = edge(e.edge);
                 },
                 [&](const GroupCreatedEvent& e) {
                   j["group"] = e.group;
                   j["edge"] = edge(e.stalled_edge);
                   j["packet"] = e.packet;
                   j["members"] = edge_names(net, e.members);
                 },
                 [&](const AnnihilationEvent& e) {
                   j["group"] = e.group;
                   j["forced"] = e.forced;
                 },
                 [&](const FailureEvent& e) {
                   j["edge"] = edge(e.edge);
                   j["promoted"] = e.promoted;
                 },
                 [&](const FailNotifiedEvent& e) {
                   j["edge"] = edge(e.edge);
                   j["failed_at"] = e.failed_at;
                 },
                 [&](const RerouteEvent& e) {
                   j["packet"] = e.packet;
                   j["edge"] = edge(e.failed_edge);
                   j["failed_at"] = e.failed_at;
                   j["old"] = edge_names(net, e.old_suffix);
                   j["new"] = edge_names(net, e.new_suffix);
                 },
                 [&](const RecoveryEvent& e) {
                   j["edge"] = edge(e.edge);
                   j["failed_at"] = e.failed_at;
                 },
                 [&](const AbsorptionEvent& e) { j["packet"] = e.packet; },
             },
             ev);
  return j;
}

Event event_from_json(const Network& net, const json& j, const std::string& p) {
  const auto type = get_string(j, p, "type");
  auto edge = [&](const char* key) { return get_edge(net, j, p, key); };
  auto path = [&](const char* key) { return path_ref(net, require_key(j, p, key), p + "/" + key); };
  auto flag = [&](const char* key) {
    const auto& v = require_key(j, p, key);
    if (!v.is_boolean()) fail_at(p + "/" + key, "expected a boolean");
    return v.get<bool>();
  };
  if (type == "inject") {
    expect_object(j, p, {"type", "round", "packet", "path", "priority"});
    auto prio = get_int(j, p, "priority");
    if (prio < 0 || prio > 255) fail_at(p + "/priority", "priority out of range");
    return InjectionEvent{get_int(j, p, "packet"), path("path"), static_cast<std::uint8_t>(prio)};
  }
  if (type == "transmit") {
    expect_object(j, p, {"type", "round", "packet", "edge"});
    return TransmissionEvent{get_int(j, p, "packet"), edge("edge")};
  }
  if (type == "stall") {
    expect_object(j, p, {"type", "round", "packet", "edge"});
    return StallEvent{get_int(j, p, "packet"), edge("edge")};
  }
  if (type == "group") {
    expect_object(j, p, {"type", "round", "group", "edge", "packet", "members"});
    return GroupCreatedEvent{get_int(j, p, "group"), edge("edge"), get_int(j, p, "packet"), path("members")};
  }
  if (type == "annihilate") {
    expect_object(j, p, {"type", "round", "group", "forced"});
    return AnnihilationEvent{get_int(j, p, "group"), flag("forced")};
  }
  if (type == "fail") {
    expect_object(j, p, {"type", "round", "edge", "promoted"});
    return FailureEvent{edge("edge"), flag("promoted")};
  }
  if (type == "notify") {
    expect_object(j, p, {"type", "round", "edge", "failed_at"});
    return FailNotifiedEvent{edge("edge"), get_int(j, p, "failed_at")};
  }
  if (type == "reroute") {
    expect_object(j, p, {"type", "round", "packet", "edge", "failed_at", "old", "new"});
    return RerouteEvent{get_int(j, p, "packet"), edge("edge"), get_int(j, p, "failed_at"), path("old"), path("new")};
  }
  if (type == "recover") {
    expect_object(j, p, {"type", "round", "edge", "failed_at"});
    return RecoveryEvent{edge("edge"), get_int(j, p, "failed_at")};
  }
  if (type == "absorb") {
    expect_object(j, p, {"type", "round", "packet"});
    return AbsorptionEvent{get_int(j, p, "packet")};
  }
  fail_at(p + "/type", "unknown record type '" + type + "'");
}

ojson witness_json(const Network& net, const std::optional<IntervalWitness>& w) {
  if (!w) return nullptr;
  return {{"queue", net.edge(static_cast<EdgeId>(w->queue)).id},
          {"first", w->first},
          {"last", w->last},
          {"excess", rational_text(w->excess)}};
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string serialize_scenario(const ScenarioConfig& config) { return dump(scenario_to_json(config)); }

ScenarioConfig parse_scenario(std::string_view text) {
  return scenario_from_json(parse_json_text(text, "scenario"));
}

ScenarioConfig load_scenario(const std::string& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_scenario(config);
}

std::string scenario_hash(const ScenarioConfig& config) {
  const auto text = scenario_to_json(config).dump();
  Fnv64 h;
  h.add_bytes(text.data(), text.size());
  return hex64(h.value());
}

void write_trace(const ExecutionTrace& trace, std::ostream& out) {
  const auto& net = trace.config.network;
  ojson header;
  header["format"] = kTraceFormat;
  header["version"] = kTraceVersion;
  header["scenario_hash"] = scenario_hash(trace.config);
  header["scenario"] = scenario_to_json(trace.config);
  out << header.dump() << '\n';
  for (const auto& rec : trace.rounds) {
    for (const auto& ev : rec.events) out << event_to_json(net, rec.round, ev).dump() << '\n';
    ojson r;
    r["type"] = "round";
    r["round"] = rec.round;
    r["total"] = rec.total;
    if (!rec.queue_sizes.empty()) r["sizes"] = rec.queue_sizes;
    out << r.dump() << '\n';
  }
  ojson end;
  end["type"] = "end";
  end["digest"] = hex64(trace.digest);
  out << end.dump() << '\n';
}

ExecutionTrace read_trace(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::optional<json> {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      return parse_json_text(line, "trace record on line " + std::to_string(lineno) + ",");
    }
    return std::nullopt;
  };
  auto where = [&] { return "line " + std::to_string(lineno); };

  auto header = next();
  if (!header) throw ParseError("empty trace");
  expect_object(*header, where(), {"format", "version", "scenario_hash", "scenario"});
  if (get_string(*header, where(), "format") != kTraceFormat) throw ParseError("not a dfsim trace");
  auto version = get_int(*header, where(), "version");
  if (version != kTraceVersion) {
    throw ParseError("trace version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kTraceVersion) + ")");
  }
  ExecutionTrace trace;
  trace.config = scenario_from_json(require_key(*header, where(), "scenario"));
  auto claimed = get_string(*header, where(), "scenario_hash");
  if (claimed != scenario_hash(trace.config)) {
    throw ParseError("scenario hash mismatch: header says " + claimed + ", scenario hashes to " +
                     scenario_hash(trace.config));
  }
  const auto& net = trace.config.network;

  RoundRecord current;
  bool ended = false;
  while (auto rec = next()) {
    if (ended) throw ParseError(where() + ": records after the end record");
    const auto type = get_string(*rec, where(), "type");
    if (type == "end") {
      expect_object(*rec, where(), {"type", "digest"});
      trace.digest = std::stoull(get_string(*rec, where(), "digest"), nullptr, 16);
      ended = true;
      continue;
    }
    const Round round = get_int(*rec, where(), "round");
    const Round expected = static_cast<Round>(trace.rounds.size()) + 1;
    if (round != expected) {
      throw ParseError(where() + ": record for round " + std::to_string(round) + " where round " +
                       std::to_string(expected) + " was expected");
    }
    if (type == "round") {
      expect_object(*rec, where(), {"type", "round", "total", "sizes"});
      current.round = round;
      current.total = get_int(*rec, where(), "total");
      if (rec->contains("sizes")) {
        const auto& sizes = get_array(*rec, where(), "sizes");
        if (sizes.size() != net.edge_count()) throw ParseError(where() + ": sizes must list every edge");
        for (const auto& s : sizes) current.queue_sizes.push_back(as_int(s, where() + "/sizes"));
      }
      trace.rounds.push_back(std::move(current));
      current = RoundRecord{};
    } else {
      current.events.push_back(event_from_json(net, *rec, where()));
    }
  }
  if (!ended) throw ParseError("trace is truncated (no end record)");
  if (!current.events.empty()) throw ParseError("events after the last round record");
  return trace;
}

void save_trace(const ExecutionTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace(trace, out);
}

ExecutionTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return read_trace(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_metrics_csv(const ExecutionTrace& trace, std::ostream& out) {
  const auto& net = trace.config.network;
  out << "round,edge,queue_len,Q_total\n";
  for (const auto& rec : trace.rounds) {
    for (std::size_t e = 0; e < rec.queue_sizes.size(); ++e) {
      out << rec.round << ',' << net.edge(static_cast<EdgeId>(e)).id << ',' << rec.queue_sizes[e] << ',' << rec.total
          << '\n';
    }
  }
}

std::string report_json(const ExecutionTrace& trace, const IntervalVerdict& verdict, std::string_view mode) {
  ojson j;
  j["mode"] = mode;
  j["scenario_hash"] = scenario_hash(trace.config);
  j["holds"] = verdict.holds;
  j["worst"] = witness_json(trace.config.network, verdict.worst);
  return dump(j);
}

std::string report_json(const ExecutionTrace& trace, const RecoveryVerdict& verdict) {
  const auto& net = trace.config.network;
  ojson j;
  j["mode"] = "recovery";
  j["scenario_hash"] = scenario_hash(trace.config);
  j["holds"] = verdict.valid;
  j["violations"] = ojson::array();
  for (const auto& v : verdict.violations) {
    j["violations"].push_back({{"edge", net.edge(v.edge).id},
                               {"failed_at", v.failed_at},
                               {"recovered_at", v.recovered_at},
                               {"packet", v.packet},
                               {"absorbed_at", v.absorbed_at < 0 ? ojson(nullptr) : ojson(v.absorbed_at)}});
  }
  return dump(j);
}

std::string report_json(const StabilityReport& report) {
  ojson j;
  j["horizon"] = report.horizon;
  j["window"] = report.params.window;
  j["k"] = report.params.k;
  j["g"] = report.params.g;
  j["verdict"] = to_string(report.verdict);
  j["overall_max"] = report.overall_max;
  j["window_max"] = report.window_max;
  j["witness"] = report.witness;
  j["note"] = "finite-horizon probe; a bounded verdict does not prove stability";
  return dump(j);
}

std::string report_json(const ExecutionTrace& trace, const ReductionVerdict& verdict, const TwoPriorityTrace& two) {
  const auto& net = trace.config.network;
  const auto& p = verdict.params;
  ojson j;
  j["scenario_hash"] = scenario_hash(trace.config);
  j["params"] = {{"r", rational_text(p.source_rate)},
                 {"b", p.source_burstiness},
                 {"delta", p.delay},
                 {"tau", p.tau},
                 {"r_prime", rational_text(p.rate)},
                 {"b_prime", rational_text(p.burstiness)}};
  auto list = [&net](const std::vector<ScriptedInjection>& xs) {
    ojson a = ojson::array();
    for (const auto& x : xs) a.push_back({{"round", x.round}, {"path", edge_names(net, x.path)}, {"priority", x.priority}});
    return a;
  };
  j["two_priority"] = {{"low", list(two.low)}, {"high", list(two.high)}};
  j["checks"] = {{"one_high_priority", verdict.one_high_priority},
                 {"transmissions_match", verdict.transmissions_match},
                 {"high_priority_slot", verdict.high_priority_slot},
                 {"congestion_bound", verdict.congestion_bound}};
  j["congestion_worst"] = witness_json(net, verdict.congestion_worst);
  j["first_divergence"] = verdict.first_divergence ? ojson(*verdict.first_divergence) : ojson(nullptr);
  j["holds"] = verdict.holds();
  return dump(j);
}

}  // namespace dfsim
