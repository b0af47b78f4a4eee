#pragma once
// Scenario files: strict JSON schema for a full verification deployment.
// Parsing is deliberately unforgiving: unknown fields, missing mandatory
// fields, or type mismatches raise ConfigError with the JSON path (and
// line/column for syntax errors), because a silently defaulted timing field
// invalidates every number downstream.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keytag/adversary.hpp"
#include "keytag/bitkeys.hpp"
#include "keytag/errors.hpp"
#include "keytag/protocol.hpp"
#include "keytag/spacetime.hpp"

namespace keytag {

using json = nlohmann::ordered_json;

struct VerifierConfig {
  Position position;
  DelayProfile delays; // delta3, delta4 used
  ClockModel clock;
};

struct TrajectorySegmentConfig {
  double start_seconds = 0.0;
  Velocity velocity;
};

struct ProverConfig {
  Position position; // initial / base
  std::vector<TrajectorySegmentConfig> segments;
  DelayProfile delays; // delta1, delta2, delta2_uncertainty used
  ClockModel clock;
  bool broadcast = true;
  double key_flip_probability = 0.0;
};

struct MasterConfig {
  std::optional<double> timeout_seconds; // extra wait after T_j; absent = formula
  double delta5 = 0.0;
};

struct ScenarioConfig {
  int dimension = 1;
  Scheme scheme = Scheme::clockless;
  int n = 2;
  int m = 1; // 0 under the clocked scheme
  double gamma = 0.0;
  int round_count = 1;
  std::vector<VerifierConfig> verifiers;
  ProverConfig prover;
  MasterConfig master;
  std::vector<double> round_times; // T_j, seconds
  double tolerance_seconds = 0.0;  // eps_t, mandatory
  double signal_speed = kSignalSpeed;
  std::vector<AttackStrategy> adversary;
  std::uint64_t seed = 0;
  // Optional refinements.
  std::optional<Position> expected_position; // L; defaults to prover start
  double delta_d_bound_seconds = 0.0;        // clocked completion-offset allowance
  bool schedule_encrypted = false;
  bool collinear_mode = false;
  std::optional<double> clock_resync_period_seconds;

  Position expected() const { return expected_position ? *expected_position : prover.position; }

  Trajectory prover_trajectory() const {
    Trajectory t(prover.position);
    for (const auto& s : prover.segments) t.add_segment(to_ticks(s.start_seconds), s.velocity);
    return t;
  }

  int verifier_count() const { return static_cast<int>(verifiers.size()); }
};

// --- Strict JSON helpers ---

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError("scenario" + (path.empty() ? "" : " at " + path) + ": " + what);
}

inline const json& require_field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) config_fail(path, std::string("missing required field '") + key + "'");
  return *it;
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) config_fail(path, "unknown field '" + it.key() + "'");
  }
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) config_fail(path, "expected an integer");
  return v.get<int>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) config_fail(path, "expected a boolean");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

inline double get_number(const json& obj, const std::string& path, const char* key) {
  return as_number(require_field(obj, path, key), path + "." + key);
}

inline double opt_number(const json& obj, const std::string& path, const char* key, double dflt) {
  auto it = obj.find(key);
  return it == obj.end() ? dflt : as_number(*it, path + "." + key);
}

inline Position parse_position(const json& v, const std::string& path, int dimension) {
  if (!v.is_array() || v.empty() || v.size() > 3) config_fail(path, "expected [x], [x,y] or [x,y,z]");
  std::vector<double> coords;
  for (std::size_t i = 0; i < v.size(); ++i)
    coords.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  if (static_cast<int>(coords.size()) != dimension)
    config_fail(path, "expected " + std::to_string(dimension) + " coordinate(s)");
  return make_position(coords);
}

inline ClockModel parse_clock(const json& v, const std::string& path) {
  reject_unknown(v, path, {"offset_seconds", "drift", "reference_epoch_seconds"});
  ClockModel c;
  c.offset = opt_number(v, path, "offset_seconds", 0.0);
  c.drift = opt_number(v, path, "drift", 0.0);
  c.reference_epoch = opt_number(v, path, "reference_epoch_seconds", 0.0);
  if (c.drift <= -1.0) config_fail(path, "drift must exceed -1");
  return c;
}

inline DelayProfile parse_delays(const json& v, const std::string& path) {
  reject_unknown(v, path,
                 {"delta1", "delta2", "delta3", "delta4", "delta5", "delta2_uncertainty"});
  DelayProfile d;
  d.delta1 = opt_number(v, path, "delta1", 0.0);
  d.delta2 = opt_number(v, path, "delta2", 0.0);
  d.delta3 = opt_number(v, path, "delta3", 0.0);
  d.delta4 = opt_number(v, path, "delta4", 0.0);
  d.delta5 = opt_number(v, path, "delta5", 0.0);
  d.delta2_uncertainty = opt_number(v, path, "delta2_uncertainty", 0.0);
  validate(d, path.c_str());
  return d;
}

inline ChannelTap parse_tap(const json& v, const std::string& path) {
  ChannelTap tap;
  const std::string ch = as_string(require_field(v, path, "channel"), path + ".channel");
  if (ch == "query") tap.channel = Channel::query;
  else if (ch == "reply") tap.channel = Channel::reply;
  else if (ch == "confirm") tap.channel = Channel::confirm;
  else if (ch == "schedule") tap.channel = Channel::schedule;
  else config_fail(path + ".channel", "expected query|reply|confirm|schedule");
  auto it = v.find("verifier");
  tap.verifier = it == v.end() ? 0 : as_int(*it, path + ".verifier");
  if (tap.verifier < 0) config_fail(path + ".verifier", "must be >= 0 (0 = all)");
  return tap;
}

inline AttackStrategy parse_strategy(const json& v, const std::string& path, int dimension) {
  const std::string type = as_string(require_field(v, path, "type"), path + ".type");
  if (type == "impersonate") {
    reject_unknown(v, path, {"type", "targets"});
    Impersonate s;
    if (auto it = v.find("targets"); it != v.end()) {
      if (!it->is_array()) config_fail(path + ".targets", "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i)
        s.targets.push_back(as_int((*it)[i], path + ".targets[" + std::to_string(i) + "]"));
    }
    return s;
  }
  if (type == "delay") {
    reject_unknown(v, path, {"type", "channel", "verifier", "seconds"});
    Delay s;
    s.tap = parse_tap(v, path);
    s.seconds = get_number(v, path, "seconds");
    validate(s);
    return s;
  }
  if (type == "jam") {
    reject_unknown(v, path, {"type", "channel", "verifier"});
    Jam s;
    s.tap = parse_tap(v, path);
    return s;
  }
  if (type == "desync_alice") {
    reject_unknown(v, path, {"type", "verifier", "clock"});
    DesyncAlice s;
    s.verifier = as_int(require_field(v, path, "verifier"), path + ".verifier");
    s.delta = parse_clock(require_field(v, path, "clock"), path + ".clock");
    return s;
  }
  if (type == "desync_bob") {
    reject_unknown(v, path, {"type", "clock"});
    DesyncBob s;
    s.delta = parse_clock(require_field(v, path, "clock"), path + ".clock");
    return s;
  }
  if (type == "relocate") {
    reject_unknown(v, path, {"type", "start_seconds", "velocity", "speed_cap", "duration_seconds"});
    Relocate s;
    s.start_time = get_number(v, path, "start_seconds");
    s.velocity = parse_position(require_field(v, path, "velocity"), path + ".velocity", dimension);
    s.speed_cap = opt_number(v, path, "speed_cap", kSignalSpeed);
    s.duration = opt_number(v, path, "duration_seconds", 0.0);
    validate(s);
    return s;
  }
  if (type == "schedule_exploit") {
    reject_unknown(v, path, {"type", "max_speed"});
    ScheduleExploit s;
    s.max_speed = get_number(v, path, "max_speed");
    if (!(s.max_speed >= 0.0)) config_fail(path + ".max_speed", "must be non-negative");
    return s;
  }
  config_fail(path + ".type", "unknown strategy '" + type + "'");
}

} // namespace detail

inline ScenarioConfig parse_scenario(const json& root) {
  using namespace detail;
  const std::string top;
  reject_unknown(root, "(top level)",
                 {"dimension", "scheme", "security", "verifiers", "prover", "master", "rounds",
                  "tolerance_seconds", "signal_speed", "adversary", "seed", "expected_position",
                  "delta_d_bound_seconds", "schedule_encrypted", "collinear_mode",
                  "clock_resync_period_seconds"});

  ScenarioConfig c;
  c.dimension = as_int(require_field(root, top, "dimension"), "dimension");
  if (c.dimension < 1 || c.dimension > 3) config_fail("dimension", "must be 1, 2 or 3");

  const int scheme = as_int(require_field(root, top, "scheme"), "scheme");
  if (scheme != 1 && scheme != 2) config_fail("scheme", "must be 1 or 2");
  c.scheme = scheme == 1 ? Scheme::clockless : Scheme::clocked;

  {
    const json& sec = require_field(root, top, "security");
    reject_unknown(sec, "security", {"n", "m", "gamma", "N"});
    c.n = as_int(require_field(sec, "security", "n"), "security.n");
    c.gamma = opt_number(sec, "security", "gamma", 0.0);
    c.round_count = as_int(require_field(sec, "security", "N"), "security.N");
    if (c.round_count < 1) config_fail("security.N", "need at least one round");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) config_fail("security.gamma", "need 0 <= gamma < 1");
    if (c.scheme == Scheme::clockless) {
      c.m = as_int(require_field(sec, "security", "m"), "security.m");
      if (c.n < 2 || c.m < 1 || c.m > c.n - 1)
        config_fail("security", "need 1 <= m <= n-1 for the query/reply split");
    } else {
      auto it = sec.find("m");
      c.m = it == sec.end() ? 0 : as_int(*it, "security.m");
      if (c.m != 0)
        config_fail("security.m", "reply-only keys have no split; omit m or set it to 0");
      if (c.n < 1) config_fail("security.n", "must be positive");
    }
  }

  {
    const json& vs = require_field(root, top, "verifiers");
    if (!vs.is_array() || vs.empty()) config_fail("verifiers", "expected a non-empty array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string path = "verifiers[" + std::to_string(i) + "]";
      reject_unknown(vs[i], path, {"position", "delays", "clock"});
      VerifierConfig vc;
      vc.position = parse_position(require_field(vs[i], path, "position"), path + ".position",
                                   c.dimension);
      if (auto it = vs[i].find("delays"); it != vs[i].end())
        vc.delays = parse_delays(*it, path + ".delays");
      if (auto it = vs[i].find("clock"); it != vs[i].end())
        vc.clock = parse_clock(*it, path + ".clock");
      c.verifiers.push_back(vc);
    }
  }

  {
    const json& p = require_field(root, top, "prover");
    reject_unknown(p, "prover",
                   {"position", "trajectory", "delays", "clock", "reply_mode",
                    "key_flip_probability"});
    const bool has_pos = p.contains("position");
    const bool has_traj = p.contains("trajectory");
    if (has_pos == has_traj)
      config_fail("prover", "give exactly one of 'position' or 'trajectory'");
    if (has_pos) {
      c.prover.position = parse_position(p["position"], "prover.position", c.dimension);
    } else {
      const json& t = p["trajectory"];
      reject_unknown(t, "prover.trajectory", {"base", "segments"});
      c.prover.position =
          parse_position(require_field(t, "prover.trajectory", "base"), "prover.trajectory.base",
                         c.dimension);
      if (auto it = t.find("segments"); it != t.end()) {
        if (!it->is_array()) config_fail("prover.trajectory.segments", "expected an array");
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < it->size(); ++i) {
          const std::string path = "prover.trajectory.segments[" + std::to_string(i) + "]";
          reject_unknown((*it)[i], path, {"start_seconds", "velocity"});
          TrajectorySegmentConfig seg;
          seg.start_seconds = get_number((*it)[i], path, "start_seconds");
          seg.velocity =
              parse_position(require_field((*it)[i], path, "velocity"), path + ".velocity",
                             c.dimension);
          if (seg.start_seconds < prev) config_fail(path, "segments must be time-ordered");
          prev = seg.start_seconds;
          c.prover.segments.push_back(seg);
        }
      }
    }
    if (auto it = p.find("delays"); it != p.end())
      c.prover.delays = parse_delays(*it, "prover.delays");
    if (auto it = p.find("clock"); it != p.end()) c.prover.clock = parse_clock(*it, "prover.clock");
    if (auto it = p.find("reply_mode"); it != p.end()) {
      const std::string mode = as_string(*it, "prover.reply_mode");
      if (mode == "broadcast") c.prover.broadcast = true;
      else if (mode == "addressee-only") c.prover.broadcast = false;
      else config_fail("prover.reply_mode", "expected broadcast|addressee-only");
    }
    c.prover.key_flip_probability = opt_number(p, "prover", "key_flip_probability", 0.0);
    if (!(c.prover.key_flip_probability >= 0.0 && c.prover.key_flip_probability < 1.0))
      config_fail("prover.key_flip_probability", "need 0 <= p < 1");
  }

  if (auto it = root.find("master"); it != root.end()) {
    reject_unknown(*it, "master", {"timeout_seconds", "delta5"});
    if (auto t = it->find("timeout_seconds"); t != it->end()) {
      c.master.timeout_seconds = as_number(*t, "master.timeout_seconds");
      if (!(*c.master.timeout_seconds > 0.0))
        config_fail("master.timeout_seconds", "must be positive");
    }
    c.master.delta5 = opt_number(*it, "master", "delta5", 0.0);
    if (c.master.delta5 < 0.0) config_fail("master.delta5", "must be non-negative");
  }

  {
    const json& rounds = require_field(root, top, "rounds");
    if (!rounds.is_array() || rounds.empty()) config_fail("rounds", "expected a non-empty array");
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      const double t = as_number(rounds[i], "rounds[" + std::to_string(i) + "]");
      if (!(t > prev)) config_fail("rounds", "round times must be strictly increasing");
      prev = t;
      c.round_times.push_back(t);
    }
    if (static_cast<int>(c.round_times.size()) != c.round_count)
      config_fail("rounds", "length must equal security.N");
  }

  c.tolerance_seconds = as_number(require_field(root, top, "tolerance_seconds"),
                                  "tolerance_seconds");
  if (!(c.tolerance_seconds >= 0.0)) config_fail("tolerance_seconds", "must be non-negative");

  c.signal_speed = opt_number(root, top, "signal_speed", kSignalSpeed);
  if (!(c.signal_speed > 0.0)) config_fail("signal_speed", "must be positive");

  if (auto it = root.find("adversary"); it != root.end()) {
    if (!it->is_array()) config_fail("adversary", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      c.adversary.push_back(
          detail::parse_strategy((*it)[i], "adversary[" + std::to_string(i) + "]", c.dimension));
  }

  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer())
      config_fail("seed", "expected an unsigned integer");
    c.seed = it->get<std::uint64_t>();
  }

  if (auto it = root.find("expected_position"); it != root.end())
    c.expected_position = detail::parse_position(*it, "expected_position", c.dimension);

  c.delta_d_bound_seconds = opt_number(root, top, "delta_d_bound_seconds", 0.0);
  if (c.delta_d_bound_seconds < 0.0) config_fail("delta_d_bound_seconds", "must be non-negative");

  if (auto it = root.find("schedule_encrypted"); it != root.end())
    c.schedule_encrypted = as_bool(*it, "schedule_encrypted");
  if (auto it = root.find("collinear_mode"); it != root.end())
    c.collinear_mode = as_bool(*it, "collinear_mode");
  if (auto it = root.find("clock_resync_period_seconds"); it != root.end()) {
    c.clock_resync_period_seconds = as_number(*it, "clock_resync_period_seconds");
    if (!(*c.clock_resync_period_seconds > 0.0))
      config_fail("clock_resync_period_seconds", "must be positive");
  }

  // Cross-field checks.
  for (const AttackStrategy& s : c.adversary) {
    if (std::holds_alternative<Impersonate>(s)) {
      if (c.scheme != Scheme::clockless)
        config_fail("adversary", "impersonation targets the query/reply scheme (scheme 1)");
      if (c.verifier_count() != 1)
        config_fail("adversary", "staged impersonation is modeled for a single verifier");
    }
    if (const auto* d = std::get_if<DesyncAlice>(&s)) {
      if (d->verifier < 1 || d->verifier > c.verifier_count())
        config_fail("adversary", "desync_alice verifier index out of range");
    }
    if (const auto* t = std::get_if<Delay>(&s); t && t->tap.verifier > c.verifier_count())
      config_fail("adversary", "delay verifier index out of range");
    if (const auto* jm = std::get_if<Jam>(&s); jm && jm->tap.verifier > c.verifier_count())
      config_fail("adversary", "jam verifier index out of range");
  }
  if (c.collinear_mode && c.dimension == 1) config_fail("collinear_mode", "only meaningful in 2D/3D");
  return c;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Map the byte offset to line/column for the diagnostic.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("scenario: JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  return parse_scenario(root);
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

} // namespace keytag
