#pragma once
// Attack surface: wire taps on individual channels and the strategy variants
// the simulator can stage. Taps only ever see Message values in flight; no
// code path here can reach into an agent's stored keys.

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "keytag/errors.hpp"
#include "keytag/protocol.hpp"
#include "keytag/rand.hpp"

namespace keytag {

enum class Channel {
  query,    // verifier -> prover
  reply,    // prover -> verifier
  confirm,  // verifier -> master
  schedule, // master -> prover
};

struct ChannelTap {
  Channel channel = Channel::reply;
  int verifier = 0; // restrict to one verifier's channel; 0 = every verifier
};

inline bool tap_matches(const ChannelTap& tap, const Message& m) {
  const auto on_verifier = [&](int idx) { return tap.verifier == 0 || tap.verifier == idx; };
  switch (tap.channel) {
    case Channel::query:
      return m.source.kind == AgentKind::verifier && m.destination.kind == AgentKind::prover &&
             on_verifier(m.source.index);
    case Channel::reply:
      return m.source.kind == AgentKind::prover && m.destination.kind == AgentKind::verifier &&
             (m.destination.index == 0 || on_verifier(m.destination.index));
    case Channel::confirm:
      return m.source.kind == AgentKind::verifier && m.destination.kind == AgentKind::master &&
             on_verifier(m.source.index);
    case Channel::schedule:
      return m.source.kind == AgentKind::master && m.destination.kind == AgentKind::prover;
  }
  return false;
}

// --- Strategy variants ---

struct Impersonate {
  std::vector<int> targets; // verifier indices; empty = all
};

struct Delay {
  ChannelTap tap;
  double seconds = 0.0;
};

struct Jam {
  ChannelTap tap;
};

struct DesyncAlice {
  int verifier = 1;
  ClockModel delta;
};

struct DesyncBob {
  ClockModel delta;
};

struct Relocate {
  double start_time = 0.0; // seconds
  Velocity velocity;
  double speed_cap = kSignalSpeed;
  double duration = 0.0; // seconds; 0 = keeps moving
};

struct ScheduleExploit {
  double max_speed = 0.0; // m/s the adversary can move the tag
};

using AttackStrategy =
    std::variant<Impersonate, Delay, Jam, DesyncAlice, DesyncBob, Relocate, ScheduleExploit>;

inline void validate(const Delay& d) {
  if (!(d.seconds >= 0.0)) throw ConfigError("delay attack: added time must be non-negative");
}

inline void validate(const Relocate& r) {
  if (!(r.speed_cap > 0.0)) throw ConfigError("relocate: speed cap must be positive");
  if (norm(r.velocity) > r.speed_cap * (1.0 + 1e-12))
    throw ConfigError("relocate: requested speed exceeds the physical cap");
  if (!(r.duration >= 0.0)) throw ConfigError("relocate: duration must be non-negative");
}

inline picoseconds delayed_delivery(picoseconds original, double added_seconds) {
  if (!(added_seconds >= 0.0)) throw UsageError("delayed_delivery: added time must be non-negative");
  return original + to_ticks(added_seconds);
}

// Splice the relocation into the tag's motion. Propagation afterwards always
// follows actual positions; there is no way to move without changing timing.
inline Trajectory apply_relocation(const Relocate& r, const Trajectory& motion) {
  validate(r);
  Trajectory out = motion;
  out.add_segment(to_ticks(r.start_time), r.velocity);
  if (r.duration > 0.0) {
    Velocity still;
    still.dim = r.velocity.dim;
    out.add_segment(to_ticks(r.start_time + r.duration), still);
  }
  return out;
}

// How far the tag can be carried between consecutive checks without ever
// being probed. Needs the plaintext schedule; an encrypted one leaks only
// its length, so no window can be computed.
inline std::optional<std::vector<double>> schedule_exploit_window(const ScheduleBody& schedule,
                                                                  double max_speed) {
  if (!(max_speed >= 0.0)) throw UsageError("schedule_exploit_window: speed must be non-negative");
  if (schedule.encrypted) return std::nullopt;
  std::vector<double> windows;
  for (std::size_t k = 0; k + 1 < schedule.times.size(); ++k)
    windows.push_back(movement_bound(schedule.times[k + 1] - schedule.times[k], max_speed));
  return windows;
}

// --- Impersonation trial ---

using GuessPolicy = std::function<BitString(int bits, std::mt19937_64& rng)>;

inline BitString uniform_guess(int bits, std::mt19937_64& rng) {
  return BitString::random(static_cast<std::size_t>(bits), rng);
}

// One two-phase spoof attempt against the real reducers, stripped of
// geometry: guess the query toward the tag; if the tag answers, forward its
// reply, otherwise submit a reply guess. True iff the verifier accepts.
// Everything arrives on time, so the outcome is decided by content alone,
// and the tag's lockout side effect is part of the trial.
inline bool run_impersonation_trial(int n, int m, double gamma, std::uint64_t seed,
                                    const GuessPolicy& policy = uniform_guess) {
  auto key_rng = derived_rng(seed, {0x696d7031u});
  auto guess_rng = derived_rng(seed, {0x696d7032u});

  if (n < 2 || m < 1 || m > n - 1) throw UsageError("run_impersonation_trial: bad split");
  KeyBlock block;
  block.verifier = 1;
  block.n = n;
  block.m = m;
  block.scheme = Scheme::clockless;
  block.rounds.push_back(RoundKey{BitString::random(static_cast<std::size_t>(m), key_rng),
                                  BitString::random(static_cast<std::size_t>(n - m), key_rng), 1});

  ProverState prover = make_prover_state({block}, gamma, Scheme::clockless, DelayProfile{}, false);
  VerifierState verifier;
  verifier.index = 1;
  verifier.site = make_position({0.0});
  verifier.keys = block;
  verifier.gamma = gamma;
  verifier.scheme = Scheme::clockless;
  verifier.expected_distance = 0.0;
  verifier.query_emit.assign(1, 0);

  const BitString query_guess = policy(m, guess_rng);
  const auto forwarded = prover_handle_query(prover, QueryBody{1, 1, query_guess}, 0);
  const BitString reply =
      forwarded ? std::get<ReplyBody>(forwarded->body).bits : policy(n - m, guess_rng);

  const auto confirm = verifier_handle_reply(verifier, ReplyBody{1, 1, reply}, 0, 0);
  return confirm && std::get<ConfirmBody>(confirm->body).s == 1;
}

} // namespace keytag
