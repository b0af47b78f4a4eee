#pragma once
// Deterministic state machines for the query/reply rounds: prover, the ring
// of timing verifiers, and the master aggregator. Each reducer maps
// (state, event) -> (state', emitted messages) with no hidden clock access:
// every time it sees or produces is in the owning agent's local timeline, and
// the transport layer converts to and from true time.
//
// Channels between the verifiers and the master are ideal (unforgeable,
// though messages may be delayed or dropped); the reply channel is open.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "keytag/bitkeys.hpp"
#include "keytag/errors.hpp"
#include "keytag/geometry.hpp"
#include "keytag/spacetime.hpp"

namespace keytag {

enum class AgentKind { master, verifier, prover, adversary };

struct AgentId {
  AgentKind kind = AgentKind::master;
  int index = 0; // verifier index 1..M; 0 elsewhere

  friend bool operator==(const AgentId&, const AgentId&) = default;
};

// destination {verifier, 0} addresses every verifier (broadcast reply).
inline constexpr AgentId kMaster{AgentKind::master, 0};
inline constexpr AgentId kProver{AgentKind::prover, 0};
inline constexpr AgentId kAllVerifiers{AgentKind::verifier, 0};
inline AgentId verifier_id(int i) { return AgentId{AgentKind::verifier, i}; }

enum class FailReason { none, late, missing, sequencing, mismatch, non_causal };

inline const char* to_string(FailReason r) {
  switch (r) {
    case FailReason::none: return "none";
    case FailReason::late: return "late";
    case FailReason::missing: return "missing";
    case FailReason::sequencing: return "sequencing";
    case FailReason::mismatch: return "mismatch";
    case FailReason::non_causal: return "non_causal";
  }
  return "unknown";
}

struct QueryBody {
  int verifier = 0; // i
  int round = 0;    // j
  BitString bits;   // q_ij, m bits
};

struct ReplyBody {
  int verifier = 0; // claimed i'
  int round = 0;    // claimed j'
  BitString bits;   // r, n-m bits (clockless) or n bits (clocked)
};

struct ConfirmBody {
  int verifier = 0;
  int round = 0;
  int s = 0; // 1 accept, 0 reject
  FailReason reason = FailReason::none;
  std::optional<Ball> ball;        // distance ball, present when measurable
  double reply_arrival = 0.0;      // verifier-local seconds, diagnostic
};

struct ScheduleBody {
  std::vector<double> times; // T_j, seconds, strictly increasing
  bool encrypted = false;
};

using MessageBody = std::variant<QueryBody, ReplyBody, ConfirmBody, ScheduleBody>;

struct Message {
  MessageBody body;
  picoseconds emit_time = 0; // emitter-local
  AgentId source;
  AgentId destination;
};

// --- Wire forms (log encoding, one message per line) ---

namespace detail {
inline std::string sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
} // namespace detail

inline std::string wire_line(const Message& m) {
  if (const auto* q = std::get_if<QueryBody>(&m.body))
    return "QUERY " + std::to_string(q->verifier) + " " + std::to_string(q->round) + " " +
           q->bits.to_string();
  if (const auto* r = std::get_if<ReplyBody>(&m.body))
    return "REPLY " + std::to_string(r->verifier) + " " + std::to_string(r->round) + " " +
           r->bits.to_string();
  if (const auto* c = std::get_if<ConfirmBody>(&m.body))
    return "CONFIRM " + std::to_string(c->verifier) + " " + std::to_string(c->round) + " " +
           std::to_string(c->s);
  const auto& s = std::get<ScheduleBody>(m.body);
  std::string line = "SCHEDULE " + std::to_string(s.times.size());
  for (double t : s.times) line += " " + detail::sig12(t);
  return line;
}

// --- Prover ---

struct ProverState {
  std::vector<KeyBlock> keys; // element i-1 serves verifier i
  double gamma = 0.0;
  Scheme scheme = Scheme::clockless;
  DelayProfile delays; // delta1 processing, delta2 transmission
  bool broadcast = true;
  bool locked_out = false;
  ScheduleBody schedule; // clocked scheme only
  std::vector<std::vector<bool>> reply_used; // [verifier-1][round-1]
};

inline ProverState make_prover_state(std::vector<KeyBlock> keys, double gamma, Scheme scheme,
                                     DelayProfile delays, bool broadcast) {
  ProverState p;
  p.keys = std::move(keys);
  p.gamma = gamma;
  p.scheme = scheme;
  p.delays = delays;
  p.broadcast = broadcast;
  p.reply_used.resize(p.keys.size());
  for (std::size_t i = 0; i < p.keys.size(); ++i)
    p.reply_used[i].assign(static_cast<std::size_t>(p.keys[i].round_count()), false);
  return p;
}

// Authenticate a claimed (i', j') query against the key table. Success
// consumes the reply string and sends it back after delta1 + delta2. Any
// failed authentication locks the prover out for good; a replayed query for
// an already-answered round is ignored without lockout (it authenticated,
// but the one-time reply is spent).
inline std::optional<Message> prover_handle_query(ProverState& state, const QueryBody& q,
                                                  picoseconds arrival) {
  if (state.scheme != Scheme::clockless)
    throw ProtocolError("prover_handle_query: reducer is for the clockless scheme");
  if (state.locked_out) return std::nullopt;

  const bool known_round =
      q.verifier >= 1 && q.verifier <= static_cast<int>(state.keys.size()) && q.round >= 1 &&
      q.round <= state.keys[static_cast<std::size_t>(q.verifier - 1)].round_count();
  if (!known_round) {
    state.locked_out = true;
    return std::nullopt;
  }
  const RoundKey& key = state.keys[static_cast<std::size_t>(q.verifier - 1)].round(q.round);
  if (q.bits.size() != key.query.size() || !within_tolerance(q.bits, key.query, state.gamma)) {
    state.locked_out = true;
    return std::nullopt;
  }
  auto used = state.reply_used[static_cast<std::size_t>(q.verifier - 1)].begin() + (q.round - 1);
  if (*used) return std::nullopt;
  *used = true;

  Message out;
  out.body = ReplyBody{q.verifier, q.round, key.reply};
  out.emit_time = arrival + to_ticks(state.delays.delta1 + state.delays.delta2);
  out.source = kProver;
  out.destination = state.broadcast ? kAllVerifiers : verifier_id(q.verifier);
  return out;
}

// Clocked scheme: one reply per verifier, transmission completing at the
// scheduled T_j on the prover's own clock. Completion jitter (the Delta_2
// spread) is a transport property and is applied by the engine.
inline std::vector<Message> prover_scheduled_reply(ProverState& state, const ScheduleBody& schedule,
                                                   int j) {
  if (state.scheme != Scheme::clocked)
    throw ProtocolError("prover_scheduled_reply: reducer is for the clocked scheme");
  if (j < 1 || j > static_cast<int>(schedule.times.size()))
    throw ProtocolError("prover_scheduled_reply: round outside the schedule");
  std::vector<Message> out;
  if (state.locked_out) return out;
  for (std::size_t v = 0; v < state.keys.size(); ++v) {
    if (j > state.keys[v].round_count())
      throw ProtocolError("prover_scheduled_reply: key block exhausted");
    auto used = state.reply_used[v].begin() + (j - 1);
    if (*used) continue;
    *used = true;
    Message m;
    m.body = ReplyBody{static_cast<int>(v) + 1, j, state.keys[v].round(j).reply};
    m.emit_time = to_ticks(schedule.times[static_cast<std::size_t>(j - 1)]);
    m.source = kProver;
    m.destination = verifier_id(static_cast<int>(v) + 1);
    out.push_back(std::move(m));
  }
  return out;
}

inline Message distribute_schedule(const std::vector<double>& times, bool encrypted) {
  if (times.empty()) throw ConfigError("distribute_schedule: empty schedule");
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    if (!(times[k] < times[k + 1]))
      throw ConfigError("distribute_schedule: times must be strictly increasing");
  Message m;
  m.body = ScheduleBody{times, encrypted};
  m.emit_time = 0;
  m.source = kMaster;
  m.destination = kProver;
  return m;
}

// --- Verifier ---

struct VerifierState {
  int index = 1;
  Position site;
  KeyBlock keys;
  double gamma = 0.0;
  double tolerance = 0.0; // eps_t, seconds
  DelayProfile delays;
  Scheme scheme = Scheme::clockless;
  double signal_speed = kSignalSpeed;
  double expected_distance = 0.0; // d_i = |A_i - L|, metres
  // Clocked scheme acceptance allowances.
  double delta_d_bound = 0.0;
  double delta2_uncertainty = 0.0;

  int current_round = 1;
  std::vector<picoseconds> query_emit; // local emit tick per round, clockless
};

// Reported balls carry the latency ambiguity explicitly: processing time is
// indistinguishable from flight time, so half the round-trip latency budget
// (clockless) or the full completion allowance (clocked) is added to the
// measured radius. With exact delays and M opposing verifiers this makes the
// region diameter equal the latency-based uncertainty figure instead of
// collapsing to a point.
inline double ball_inflation(const VerifierState& st) {
  if (st.scheme == Scheme::clockless)
    return st.signal_speed * (st.delays.delta1 + st.delays.delta2) / 2.0;
  return st.signal_speed * (st.delta_d_bound + st.delta2_uncertainty);
}

inline Message verifier_emit_query(VerifierState& state, int j, picoseconds t_j,
                                   double distance_to_target) {
  if (state.scheme != Scheme::clockless)
    throw ProtocolError("verifier_emit_query: reducer is for the clockless scheme");
  if (j < 1 || j > state.keys.round_count())
    throw ProtocolError("verifier_emit_query: key block exhausted");
  if (state.query_emit.size() < static_cast<std::size_t>(state.keys.round_count()))
    state.query_emit.assign(static_cast<std::size_t>(state.keys.round_count()), -1);
  Message m;
  m.body = QueryBody{state.index, j, state.keys.round(j).query};
  m.emit_time = t_j - flight_ticks(distance_to_target, state.signal_speed);
  m.source = verifier_id(state.index);
  m.destination = kProver;
  state.query_emit[static_cast<std::size_t>(j - 1)] = m.emit_time;
  return m;
}

namespace detail {

inline std::optional<Ball> measured_ball(const VerifierState& st, int j, picoseconds arrival,
                                         picoseconds t_j) {
  if (st.scheme == Scheme::clockless) {
    const picoseconds emit = st.query_emit.empty() ? -1 : st.query_emit[static_cast<std::size_t>(j - 1)];
    if (emit < 0) return std::nullopt;
    auto ball = ball_from_timing(to_seconds(emit), to_seconds(arrival), st.delays.delta1,
                                 st.delays.delta2, st.site, st.signal_speed);
    if (!ball) return std::nullopt;
    return inflate(*ball, ball_inflation(st));
  }
  // Clocked: one-way distance from the scheduled completion time. The
  // prover's clock offset is unknown, so the allowance both absorbs a
  // negative raw estimate and inflates the reported radius.
  const double raw = st.signal_speed * to_seconds(arrival - t_j);
  const double radius = raw + ball_inflation(st);
  if (radius < 0.0) return std::nullopt;
  return Ball{st.site, radius};
}

} // namespace detail

// Accept window end: replies may arrive early (that only tightens the ball)
// but never after the expected arrival plus the latency budget and eps_t.
inline picoseconds verifier_deadline(const VerifierState& st, picoseconds t_j) {
  const picoseconds flight = flight_ticks(st.expected_distance, st.signal_speed);
  if (st.scheme == Scheme::clockless)
    return t_j + flight + to_ticks(st.delays.delta1 + st.delays.delta2 + st.tolerance);
  return t_j + flight + to_ticks(st.delta_d_bound + st.delta2_uncertainty + st.tolerance);
}

// Judge a reply claiming (i', j'). Replies claiming another verifier are
// dropped (someone else's broadcast copy); everything else yields exactly one
// confirm toward the master. Only the current round can earn s=1, and the
// verifier moves to the next round once it has judged the current one.
inline std::optional<Message> verifier_handle_reply(VerifierState& state, const ReplyBody& r,
                                                    picoseconds arrival, picoseconds t_j) {
  if (r.verifier != state.index) return std::nullopt;

  ConfirmBody c;
  c.verifier = state.index;
  c.round = r.round;
  c.reply_arrival = to_seconds(arrival);

  if (r.round != state.current_round) {
    c.s = 0;
    c.reason = FailReason::sequencing;
  } else {
    const BitString& expected = state.keys.round(r.round).reply;
    const bool content_ok =
        r.bits.size() == expected.size() && within_tolerance(r.bits, expected, state.gamma);
    const bool on_time = arrival <= verifier_deadline(state, t_j);
    const std::optional<Ball> ball = detail::measured_ball(state, r.round, arrival, t_j);
    if (!content_ok) {
      c.s = 0;
      c.reason = FailReason::mismatch;
    } else if (!on_time) {
      c.s = 0;
      c.reason = FailReason::late;
    } else if (!ball) {
      c.s = 0;
      c.reason = FailReason::non_causal;
    } else {
      c.s = 1;
      c.ball = ball;
    }
    state.current_round += 1;
  }

  Message out;
  out.body = c;
  out.emit_time = arrival + to_ticks(state.delays.delta3 + state.delays.delta4);
  out.source = verifier_id(state.index);
  out.destination = kMaster;
  return out;
}

// --- Master ---

struct RoundInbox {
  std::vector<std::optional<ConfirmBody>> confirm; // index i-1
  std::vector<picoseconds> arrival;                // master-local, -1 = absent
  bool reported = false;
};

struct MasterState {
  int verifier_count = 1;
  Position expected_position;
  DelayProfile delays; // delta5
  std::map<int, RoundInbox> inbox;
};

inline MasterState make_master_state(int verifiers, Position expected, DelayProfile delays) {
  if (verifiers < 1) throw ConfigError("MasterState: need at least one verifier");
  MasterState m;
  m.verifier_count = verifiers;
  m.expected_position = expected;
  m.delays = delays;
  return m;
}

inline RoundInbox& master_inbox(MasterState& state, int round) {
  RoundInbox& box = state.inbox[round];
  if (box.confirm.empty()) {
    box.confirm.assign(static_cast<std::size_t>(state.verifier_count), std::nullopt);
    box.arrival.assign(static_cast<std::size_t>(state.verifier_count), -1);
  }
  return box;
}

// First confirm per (i, j) wins; the verifier channel is unforgeable so a
// duplicate can only be a replay of the same content.
inline void master_receive_confirm(MasterState& state, const ConfirmBody& c, picoseconds arrival) {
  if (c.verifier < 1 || c.verifier > state.verifier_count) return;
  RoundInbox& box = master_inbox(state, c.round);
  auto slot = static_cast<std::size_t>(c.verifier - 1);
  if (box.confirm[slot]) return;
  box.confirm[slot] = c;
  box.arrival[slot] = arrival;
}

inline bool master_round_complete(MasterState& state, int round) {
  const RoundInbox& box = master_inbox(state, round);
  for (const auto& c : box.confirm)
    if (!c) return false;
  return true;
}

struct RoundVerdict {
  int round = 0;
  bool verified = false;
  FailReason reason = FailReason::none;
  std::vector<std::optional<ConfirmBody>> confirms; // index i-1
  std::vector<std::optional<Ball>> balls;           // accepted balls only
  picoseconds completion = -1; // T_A, master-local
};

// Verdict for one round, normally invoked when all confirms arrived or the
// round's timeout fired. Unanimous s=1 verifies; the first failure (by
// verifier index) names the reason, with absence reported as "missing".
inline RoundVerdict master_aggregate(MasterState& state, int round, picoseconds now) {
  RoundInbox& box = master_inbox(state, round);
  box.reported = true;

  RoundVerdict v;
  v.round = round;
  v.verified = true;
  v.confirms = box.confirm;
  v.balls.assign(static_cast<std::size_t>(state.verifier_count), std::nullopt);

  picoseconds last_arrival = -1;
  for (int i = 0; i < state.verifier_count; ++i) {
    const auto& c = box.confirm[static_cast<std::size_t>(i)];
    if (!c) {
      v.verified = false;
      if (v.reason == FailReason::none) v.reason = FailReason::missing;
      continue;
    }
    last_arrival = std::max(last_arrival, box.arrival[static_cast<std::size_t>(i)]);
    if (c->s != 1) {
      v.verified = false;
      if (v.reason == FailReason::none)
        v.reason = c->reason == FailReason::none ? FailReason::mismatch : c->reason;
    } else {
      v.balls[static_cast<std::size_t>(i)] = c->ball;
    }
  }
  const picoseconds base = (v.verified && last_arrival >= 0) ? last_arrival : now;
  v.completion = base + to_ticks(state.delays.delta5);
  return v;
}

// Latest instant the master keeps waiting for round j's confirms: expected
// reply arrival at the farthest verifier (the query leg is prepaid before
// T_j) plus the confirm latency chain, padded with ten tolerance widths so
// honest jitter never trips it.
inline picoseconds master_timeout(picoseconds t_j, double max_distance, const DelayProfile& d,
                                  Scheme scheme, double delta_d_bound, double delta2_uncertainty,
                                  double tolerance, double signal_speed = kSignalSpeed) {
  const double reply_latency = scheme == Scheme::clockless ? d.delta1 + d.delta2
                                                           : delta_d_bound + delta2_uncertainty;
  return t_j + flight_ticks(max_distance, signal_speed) +
         to_ticks(reply_latency + d.delta3 + d.delta4 + d.delta5 + 10.0 * tolerance);
}

} // namespace keytag
