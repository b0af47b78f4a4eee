#pragma once
// Discrete-event engine over true (frame) time. Agents act on their own
// clocks; the engine converts at the boundary, transports messages at the
// configured signal speed, applies staged attacks in flight, and collects
// per-round verdicts plus a wire trace.
//
// Times are 64-bit picosecond counts end to end; every flight time is
// rounded up, so a quantized delivery is never earlier than physics allows
// and honest runs pass with a zero timing tolerance.

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "keytag/adversary.hpp"
#include "keytag/geometry.hpp"
#include "keytag/protocol.hpp"
#include "keytag/rand.hpp"
#include "keytag/scenario.hpp"

namespace keytag {

struct RoundOutcome {
  int round = 0;
  double scheduled_time = 0.0; // T_j, seconds
  bool verified = false;
  FailReason reason = FailReason::none;
  std::vector<std::optional<ConfirmBody>> confirms; // index i-1
  std::vector<std::optional<Ball>> balls;           // accepted (inflated) balls
  std::optional<double> region_diameter;            // metres
  bool region_empty = false;
  double diameter_resolution = 0.0; // metres; 0 = exact (1D)
  Position true_position;           // ground truth at T_j
  std::optional<bool> contains_truth;
  double completion_seconds = 0.0; // T_A
};

struct DelaySummary {
  double delta_l = 0.0;                        // delta1 + delta2
  double delta_v = 0.0;                        // delta3 + delta4 + delta5
  std::optional<double> delta_r;               // min round gap
  std::optional<double> movement_bound_metres; // signal_speed * delta_r
};

struct SimulationResult {
  std::vector<RoundOutcome> rounds;
  bool all_verified = false;
  bool hull_ok = false;
  DelaySummary delays;
  // Latency-derived position uncertainty, metres.
  std::optional<double> uncertainty_timing_ball; // clockless: c*(d1+d2)
  std::optional<double> uncertainty_full_chain;  // clockless: c*(d1+d2+d3+d4)
  std::optional<double> uncertainty_completion;  // clocked: c*(dd+D2+d3)
  // Plaintext-schedule movement windows per gap, when a schedule exploit is staged.
  bool exploit_staged = false;
  std::optional<std::vector<double>> exploit_windows;
  std::vector<std::pair<picoseconds, std::string>> trace; // (true emit, wire line)
  std::vector<std::string> notes;
};

namespace detail {

// Grid cells per axis when bounding a 2D/3D region diameter in a report.
inline constexpr int kReportGridCells = 24;

struct Event {
  picoseconds time = 0;
  // Tie rank: deliveries first so in-flight messages land before anything
  // else scheduled at the same tick; timeouts last so a confirm arriving
  // exactly at the deadline still counts.
  enum Kind { deliver = 0, transmit = 1, query = 2, spoof = 3, resync = 4, timeout = 5 };
  int kind = deliver;
  int actor = 0;
  int round = 0;
  std::string key; // content key: total order independent of insertion order
  Message msg;
};

inline bool operator<(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.actor != b.actor) return a.actor < b.actor;
  if (a.round != b.round) return a.round < b.round;
  return a.key < b.key;
}

inline std::string message_key(const Message& m) {
  return wire_line(m) + "|" + std::to_string(m.emit_time) + "|" +
         std::to_string(static_cast<int>(m.source.kind)) + ":" + std::to_string(m.source.index) +
         ">" + std::to_string(static_cast<int>(m.destination.kind)) + ":" +
         std::to_string(m.destination.index);
}

class Engine {
public:
  explicit Engine(const ScenarioConfig& cfg) : cfg_(cfg) { setup(); }

  SimulationResult run() {
    while (!queue_.empty()) {
      Event ev = *queue_.begin();
      queue_.erase(queue_.begin());
      dispatch(ev);
    }
    finalize();
    return std::move(result_);
  }

private:
  const ScenarioConfig& cfg_;
  double speed_ = kSignalSpeed;
  Position expected_;
  Trajectory truth_;
  std::vector<VerifierState> vstates_;
  std::vector<ClockModel> vclocks_;
  ClockModel pclock_;
  ProverState prover_;
  MasterState master_;
  std::vector<picoseconds> t_j_;       // frame ticks of T_j
  std::vector<bool> prover_replied_;   // per round, impersonation bookkeeping
  bool impersonation_ = false;
  std::multiset<Event> queue_;
  std::vector<RoundOutcome> outcomes_; // indexed round-1
  SimulationResult result_;

  void note(std::string s) { result_.notes.push_back(std::move(s)); }

  picoseconds v_true(int i, picoseconds local) const {
    return clock_true_time_ticks(vclocks_[static_cast<std::size_t>(i - 1)], local);
  }
  picoseconds v_local(int i, picoseconds t) const {
    return clock_reading_ticks(vclocks_[static_cast<std::size_t>(i - 1)], t);
  }

  void setup() {
    speed_ = cfg_.signal_speed;
    expected_ = cfg_.expected();
    truth_ = cfg_.prover_trajectory();
    pclock_ = cfg_.prover.clock;

    // Staged physical attacks adjust ground truth and clocks before any event.
    for (const AttackStrategy& s : cfg_.adversary) {
      if (const auto* r = std::get_if<Relocate>(&s)) truth_ = apply_relocation(*r, truth_);
      if (const auto* db = std::get_if<DesyncBob>(&s)) {
        pclock_.offset += db->delta.offset;
        pclock_.drift += db->delta.drift;
      }
      if (std::holds_alternative<Impersonate>(s)) impersonation_ = true;
    }

    const int M = cfg_.verifier_count();
    std::vector<KeyBlock> prover_keys;
    for (int i = 1; i <= M; ++i) {
      KeyBlock block = generate_key_block(cfg_.seed, i, cfg_.round_count, cfg_.n, cfg_.m, cfg_.scheme);
      prover_keys.push_back(cfg_.prover.key_flip_probability > 0.0
                                ? with_bit_flips(block, cfg_.prover.key_flip_probability, cfg_.seed)
                                : block);
      VerifierState v;
      v.index = i;
      v.site = cfg_.verifiers[static_cast<std::size_t>(i - 1)].position;
      v.keys = std::move(block);
      v.gamma = cfg_.gamma;
      v.tolerance = cfg_.tolerance_seconds;
      v.delays = cfg_.verifiers[static_cast<std::size_t>(i - 1)].delays;
      v.delays.delta1 = cfg_.prover.delays.delta1; // nominal tag latency is public
      v.delays.delta2 = cfg_.prover.delays.delta2;
      v.scheme = cfg_.scheme;
      v.signal_speed = speed_;
      v.expected_distance = distance(v.site, expected_);
      v.delta_d_bound = cfg_.delta_d_bound_seconds;
      v.delta2_uncertainty = cfg_.prover.delays.delta2_uncertainty;
      vstates_.push_back(std::move(v));
      vclocks_.push_back(cfg_.verifiers[static_cast<std::size_t>(i - 1)].clock);
    }
    for (const AttackStrategy& s : cfg_.adversary)
      if (const auto* da = std::get_if<DesyncAlice>(&s)) {
        ClockModel& c = vclocks_[static_cast<std::size_t>(da->verifier - 1)];
        c.offset += da->delta.offset;
        c.drift += da->delta.drift;
      }

    DelayProfile master_delays;
    master_delays.delta5 = cfg_.master.delta5;
    master_ = make_master_state(M, expected_, master_delays);
    prover_ = make_prover_state(std::move(prover_keys), cfg_.gamma, cfg_.scheme,
                                cfg_.prover.delays, cfg_.prover.broadcast);

    t_j_.reserve(cfg_.round_times.size());
    for (double t : cfg_.round_times) t_j_.push_back(to_ticks(t));
    prover_replied_.assign(static_cast<std::size_t>(cfg_.round_count) + 1, false);
    outcomes_.resize(static_cast<std::size_t>(cfg_.round_count));

    double max_d = 0.0;
    double max_d34 = 0.0;
    for (const VerifierState& v : vstates_) {
      max_d = std::max(max_d, v.expected_distance);
      max_d34 = std::max(max_d34, v.delays.delta3 + v.delays.delta4);
    }

    for (int j = 1; j <= cfg_.round_count; ++j) {
      const picoseconds tj = t_j_[static_cast<std::size_t>(j - 1)];
      // Round timeout at the master (frame time; the master holds the reference clock).
      picoseconds deadline;
      if (cfg_.master.timeout_seconds) {
        deadline = tj + to_ticks(*cfg_.master.timeout_seconds);
      } else {
        DelayProfile chain = cfg_.prover.delays;
        chain.delta3 = max_d34;
        chain.delta4 = 0.0;
        chain.delta5 = cfg_.master.delta5;
        deadline = master_timeout(tj, max_d, chain, cfg_.scheme, cfg_.delta_d_bound_seconds,
                                  cfg_.prover.delays.delta2_uncertainty, cfg_.tolerance_seconds,
                                  speed_);
      }
      push_timer(Event::timeout, deadline, 0, j);

      if (cfg_.scheme == Scheme::clockless) {
        for (int i = 1; i <= cfg_.verifier_count(); ++i) {
          const picoseconds local_emit =
              tj - flight_ticks(vstates_[static_cast<std::size_t>(i - 1)].expected_distance, speed_);
          push_timer(Event::query, v_true(i, local_emit), i, j);
        }
        if (impersonation_) {
          // Guessed query lands just before the honest one; the decision
          // point to fall back to a reply guess sits at T_j.
          push_timer(Event::spoof, tj - 2000, 1, j);
          push_timer(Event::spoof, tj, 2, j);
        }
      }
    }

    if (cfg_.scheme == Scheme::clocked) {
      // Schedule goes out one millisecond before the first round (or at the
      // frame origin if rounds start later than that).
      Message sched = distribute_schedule(cfg_.round_times, cfg_.schedule_encrypted);
      sched.emit_time = std::min<picoseconds>(t_j_.front() - to_ticks(1e-3), 0);
      emit(sched, sched.emit_time);
    }

    if (cfg_.clock_resync_period_seconds) {
      const picoseconds period = to_ticks(*cfg_.clock_resync_period_seconds);
      const picoseconds horizon = t_j_.back() + to_ticks(1.0);
      for (picoseconds t = period; t <= horizon; t += period) push_timer(Event::resync, t, 0, 0);
    }
  }

  void push_timer(int kind, picoseconds t, int actor, int round) {
    Event ev;
    ev.time = t;
    ev.kind = kind;
    ev.actor = actor;
    ev.round = round;
    queue_.insert(std::move(ev));
  }

  void push_delivery(Message m, picoseconds t) {
    Event ev;
    ev.time = t;
    ev.kind = Event::deliver;
    ev.actor = m.destination.index;
    ev.key = message_key(m);
    ev.msg = std::move(m);
    queue_.insert(std::move(ev));
  }

  // Added delay (and drops) from every staged tap matching this message.
  std::optional<picoseconds> tap_adjustment(const Message& m) const {
    picoseconds added = 0;
    if (m.source.kind == AgentKind::adversary) return added;
    for (const AttackStrategy& s : cfg_.adversary) {
      if (const auto* d = std::get_if<Delay>(&s)) {
        if (tap_matches(d->tap, m)) added += to_ticks(d->seconds);
      } else if (const auto* j = std::get_if<Jam>(&s)) {
        if (tap_matches(j->tap, m)) return std::nullopt;
      }
    }
    return added;
  }

  std::optional<picoseconds> prover_arrival(const Position& from, picoseconds emit) const {
    picoseconds t = emit + flight_ticks(distance(from, truth_.at(emit)), speed_);
    for (int i = 0; i < 48; ++i) {
      const picoseconds next = emit + flight_ticks(distance(from, truth_.at(t)), speed_);
      if (std::llabs(next - t) <= 1) return next;
      t = next;
    }
    return std::nullopt;
  }

  // Route an emission: trace it, fan out per destination, apply taps.
  void emit(const Message& m, picoseconds true_emit) {
    result_.trace.emplace_back(true_emit, wire_line(m));
    Message routed = m;
    routed.emit_time = true_emit;

    if (m.destination.kind == AgentKind::prover) {
      const auto adj = tap_adjustment(routed);
      if (!adj) return;
      Position from = expected_; // adversary agents operate from L
      if (m.source.kind == AgentKind::verifier)
        from = vstates_[static_cast<std::size_t>(m.source.index - 1)].site;
      else if (m.source.kind == AgentKind::master)
        from = expected_; // ideal side channel; position immaterial, instant
      if (m.source.kind == AgentKind::master) {
        push_delivery(routed, true_emit + *adj);
        return;
      }
      const auto arrival = prover_arrival(from, true_emit);
      if (!arrival) {
        note("delivery toward the tag did not converge (receiver at signal speed); dropped");
        return;
      }
      push_delivery(routed, *arrival + *adj);
      return;
    }

    if (m.destination.kind == AgentKind::verifier) {
      const Position from =
          m.source.kind == AgentKind::prover ? truth_.at(true_emit) : expected_;
      const int lo = m.destination.index == 0 ? 1 : m.destination.index;
      const int hi = m.destination.index == 0 ? cfg_.verifier_count() : m.destination.index;
      for (int i = lo; i <= hi; ++i) {
        Message copy = routed;
        copy.destination = verifier_id(i);
        const auto adj = tap_adjustment(copy);
        if (!adj) continue;
        const double d = distance(from, vstates_[static_cast<std::size_t>(i - 1)].site);
        push_delivery(copy, true_emit + flight_ticks(d, speed_) + *adj);
      }
      return;
    }

    // Master: ideal authenticated link, instantaneous transport.
    const auto adj = tap_adjustment(routed);
    if (!adj) return;
    push_delivery(routed, true_emit + *adj);
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Event::deliver: on_deliver(ev); break;
      case Event::transmit: on_transmit(ev.round); break;
      case Event::query: on_query_timer(ev.actor, ev.round); break;
      case Event::spoof: on_spoof(ev.actor, ev.round); break;
      case Event::resync:
        for (ClockModel& c : vclocks_) c = ClockModel{};
        break;
      case Event::timeout: on_timeout(ev.round, ev.time); break;
      default: break;
    }
  }

  void on_query_timer(int i, int j) {
    VerifierState& v = vstates_[static_cast<std::size_t>(i - 1)];
    Message q = verifier_emit_query(v, j, to_ticks(cfg_.round_times[static_cast<std::size_t>(j - 1)]),
                                    v.expected_distance);
    emit(q, v_true(i, q.emit_time));
  }

  void on_transmit(int j) {
    if (!prover_.schedule.times.empty()) {
      auto replies = prover_scheduled_reply(prover_, prover_.schedule, j);
      const picoseconds base = clock_true_time_ticks(
          pclock_, to_ticks(prover_.schedule.times[static_cast<std::size_t>(j - 1)]));
      for (Message& r : replies) {
        const auto& body = std::get<ReplyBody>(r.body);
        picoseconds jitter = 0;
        if (cfg_.prover.delays.delta2_uncertainty > 0.0) {
          auto rng = derived_rng(cfg_.seed, {0x6a697474u, static_cast<std::uint32_t>(body.verifier),
                                             static_cast<std::uint32_t>(j)});
          const double u = uniform_unit(rng);
          jitter = to_ticks((2.0 * u - 1.0) * cfg_.prover.delays.delta2_uncertainty);
        }
        emit(r, base + jitter);
      }
    }
  }

  void on_spoof(int stage, int j) {
    const picoseconds tj = t_j_[static_cast<std::size_t>(j - 1)];
    if (stage == 1) {
      auto rng = derived_rng(cfg_.seed, {0x73706f66u, 1u, static_cast<std::uint32_t>(j)});
      Message m;
      m.body = QueryBody{1, j, BitString::random(static_cast<std::size_t>(cfg_.m), rng)};
      m.source = AgentId{AgentKind::adversary, 0};
      m.destination = kProver;
      m.emit_time = tj - 2000;
      result_.trace.emplace_back(m.emit_time, wire_line(m));
      push_delivery(m, tj - 2000); // injected at the tag's doorstep
      return;
    }
    // Decision point: B's broadcast is public, so the spoofing agents know by
    // now whether a genuine reply is on its way; if not, guess the reply and
    // time it to land just inside the window.
    if (prover_replied_[static_cast<std::size_t>(j)]) return;
    auto rng = derived_rng(cfg_.seed, {0x73707232u, 1u, static_cast<std::uint32_t>(j)});
    Message m;
    m.body = ReplyBody{1, j, BitString::random(static_cast<std::size_t>(cfg_.n - cfg_.m), rng)};
    m.source = AgentId{AgentKind::adversary, 0};
    m.destination = verifier_id(1);
    const VerifierState& v = vstates_[0];
    const picoseconds arrival = tj + flight_ticks(v.expected_distance, speed_) +
                                to_ticks(v.delays.delta1 + v.delays.delta2) - 1000;
    m.emit_time = arrival;
    result_.trace.emplace_back(m.emit_time, wire_line(m));
    push_delivery(m, arrival);
  }

  void on_deliver(const Event& ev) {
    const Message& m = ev.msg;
    if (m.destination.kind == AgentKind::prover) {
      if (const auto* q = std::get_if<QueryBody>(&m.body)) {
        if (cfg_.scheme != Scheme::clockless) {
          note("query delivered to a schedule-driven tag; ignored");
          return;
        }
        auto reply = prover_handle_query(prover_, *q, ev.time);
        if (reply) {
          if (q->round >= 1 && q->round <= cfg_.round_count)
            prover_replied_[static_cast<std::size_t>(q->round)] = true;
          emit(*reply, reply->emit_time); // tag is clockless: local == frame
        }
        return;
      }
      if (const auto* s = std::get_if<ScheduleBody>(&m.body)) {
        prover_.schedule = *s;
        for (int j = 1; j <= static_cast<int>(s->times.size()); ++j) {
          const picoseconds base = clock_true_time_ticks(pclock_, to_ticks(s->times[static_cast<std::size_t>(j - 1)]));
          const picoseconds earliest = base - to_ticks(cfg_.prover.delays.delta2_uncertainty);
          if (earliest < ev.time) {
            note("schedule arrived after round " + std::to_string(j) + "'s transmission time; skipped");
            continue;
          }
          push_timer(Event::transmit, earliest, 0, j);
        }
        return;
      }
      return;
    }

    if (m.destination.kind == AgentKind::verifier) {
      if (const auto* r = std::get_if<ReplyBody>(&m.body)) {
        VerifierState& v = vstates_[static_cast<std::size_t>(m.destination.index - 1)];
        const int round_for_window = std::min(v.current_round, cfg_.round_count);
        const picoseconds tj_local =
            to_ticks(cfg_.round_times[static_cast<std::size_t>(round_for_window - 1)]);
        auto confirm =
            verifier_handle_reply(v, *r, v_local(m.destination.index, ev.time), tj_local);
        if (confirm) emit(*confirm, v_true(m.destination.index, confirm->emit_time));
      }
      return;
    }

    if (const auto* c = std::get_if<ConfirmBody>(&m.body)) {
      master_receive_confirm(master_, *c, ev.time);
      if (c->round >= 1 && c->round <= cfg_.round_count &&
          !master_inbox(master_, c->round).reported && master_round_complete(master_, c->round))
        record_round(master_aggregate(master_, c->round, ev.time));
    }
  }

  void on_timeout(int j, picoseconds now) {
    if (!master_inbox(master_, j).reported) record_round(master_aggregate(master_, j, now));
  }

  void record_round(const RoundVerdict& verdict) {
    RoundOutcome& out = outcomes_[static_cast<std::size_t>(verdict.round - 1)];
    out.round = verdict.round;
    out.scheduled_time = cfg_.round_times[static_cast<std::size_t>(verdict.round - 1)];
    out.verified = verdict.verified;
    out.reason = verdict.reason;
    out.confirms = verdict.confirms;
    out.balls = verdict.balls;
    out.completion_seconds = to_seconds(verdict.completion);
    out.true_position = truth_.at(t_j_[static_cast<std::size_t>(verdict.round - 1)]);

    std::vector<Ball> present;
    for (const auto& b : verdict.balls)
      if (b) present.push_back(*b);
    if (present.empty()) return;

    if (cfg_.collinear_mode) {
      std::vector<Position> pts;
      for (const VerifierState& v : vstates_) pts.push_back(v.site);
      pts.push_back(expected_);
      const LineFrame frame = fit_line(pts);
      std::vector<Ball> projected;
      for (const Ball& b : present)
        projected.push_back(Ball{make_position({frame.coord(b.center)}), b.radius});
      const Region region = make_region(projected);
      const auto dia = region_diameter_bound(region, 1.0);
      out.region_empty = !dia;
      if (dia) out.region_diameter = *dia;
      out.contains_truth = region_contains(region, make_position({frame.coord(out.true_position)}));
      out.diameter_resolution = 0.0;
      return;
    }

    const Region region = make_region(present);
    double r_min = present.front().radius;
    for (const Ball& b : present) r_min = std::min(r_min, b.radius);
    const double res =
        cfg_.dimension == 1 ? 1.0 : std::max(1.0, 2.0 * r_min / kReportGridCells);
    const auto dia = region_diameter_bound(region, res);
    out.region_empty = !dia;
    if (dia) out.region_diameter = *dia;
    out.diameter_resolution = cfg_.dimension == 1 ? 0.0 : res;
    out.contains_truth = region_contains(region, out.true_position);
  }

  void finalize() {
    result_.rounds = std::move(outcomes_);
    result_.all_verified = true;
    for (const RoundOutcome& r : result_.rounds)
      if (!r.verified) result_.all_verified = false;

    std::vector<Position> sites;
    for (const VerifierState& v : vstates_) sites.push_back(v.site);
    result_.hull_ok = convex_hull_condition(sites, expected_);

    result_.delays.delta_l = cfg_.prover.delays.delta1 + cfg_.prover.delays.delta2;
    double max_d34 = 0.0, max_d3 = 0.0;
    for (const VerifierConfig& v : cfg_.verifiers) {
      max_d34 = std::max(max_d34, v.delays.delta3 + v.delays.delta4);
      max_d3 = std::max(max_d3, v.delays.delta3);
    }
    result_.delays.delta_v = max_d34 + cfg_.master.delta5;
    if (cfg_.round_count > 1) {
      double gap = cfg_.round_times[1] - cfg_.round_times[0];
      for (std::size_t k = 1; k + 1 < cfg_.round_times.size(); ++k)
        gap = std::min(gap, cfg_.round_times[k + 1] - cfg_.round_times[k]);
      result_.delays.delta_r = gap;
      result_.delays.movement_bound_metres = movement_bound(gap, speed_);
    }

    if (cfg_.scheme == Scheme::clockless) {
      DelayProfile p = cfg_.prover.delays;
      result_.uncertainty_timing_ball = timing_ball_uncertainty(p, speed_);
      p.delta3 = max_d34;
      p.delta4 = 0.0;
      result_.uncertainty_full_chain = scheme1_uncertainty(p, speed_);
    } else {
      result_.uncertainty_completion =
          scheme2_uncertainty(cfg_.delta_d_bound_seconds,
                              cfg_.prover.delays.delta2_uncertainty, max_d3, speed_);
    }

    for (const AttackStrategy& s : cfg_.adversary)
      if (const auto* e = std::get_if<ScheduleExploit>(&s)) {
        result_.exploit_staged = true;
        ScheduleBody sched{cfg_.round_times, cfg_.schedule_encrypted};
        result_.exploit_windows = schedule_exploit_window(sched, e->max_speed);
      }

    std::sort(result_.trace.begin(), result_.trace.end());
  }
};

} // namespace detail

// Execute every round of the configured deployment. Pure function of
// (config, seed): identical inputs give identical results, including the
// trace, regardless of platform.
inline SimulationResult run_scenario(const ScenarioConfig& cfg) {
  detail::Engine engine(cfg);
  return engine.run();
}

struct MonteCarloSummary {
  long long trials = 0;
  long long successes = 0;
  double mean = 0.0;
  double sigma = 0.0;     // binomial, from the empirical mean
  double band_low = 0.0;  // mean +/- 4 sigma
  double band_high = 0.0;
};

// Trial k runs with seed base+k. An impersonation config measures the
// spoofer's per-round success odds via the protocol-level trial; any other
// config repeats the full scenario and counts fully-verified runs.
inline MonteCarloSummary monte_carlo(const ScenarioConfig& cfg, long long trials) {
  if (trials < 1) throw ConfigError("monte_carlo: need at least one trial");
  bool impersonation = false;
  for (const AttackStrategy& s : cfg.adversary)
    if (std::holds_alternative<Impersonate>(s)) impersonation = true;

  MonteCarloSummary sum;
  sum.trials = trials;
  for (long long k = 0; k < trials; ++k) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
    bool success;
    if (impersonation) {
      success = run_impersonation_trial(cfg.n, cfg.m, cfg.gamma, seed);
    } else {
      ScenarioConfig trial = cfg;
      trial.seed = seed;
      success = run_scenario(trial).all_verified;
    }
    if (success) ++sum.successes;
  }
  sum.mean = static_cast<double>(sum.successes) / static_cast<double>(sum.trials);
  sum.sigma = std::sqrt(std::max(0.0, sum.mean * (1.0 - sum.mean) / static_cast<double>(sum.trials)));
  sum.band_low = sum.mean - 4.0 * sum.sigma;
  sum.band_high = sum.mean + 4.0 * sum.sigma;
  return sum;
}

// Latency triple of a completed configuration: the tag-side latency, the
// verifier-to-verdict latency, and the tightest gap between checks (absent
// for single-round runs), with the movement bound that gap implies.
inline DelaySummary delay_report(const ScenarioConfig& cfg) {
  DelaySummary d;
  d.delta_l = cfg.prover.delays.delta1 + cfg.prover.delays.delta2;
  double max_d34 = 0.0;
  for (const VerifierConfig& v : cfg.verifiers)
    max_d34 = std::max(max_d34, v.delays.delta3 + v.delays.delta4);
  d.delta_v = max_d34 + cfg.master.delta5;
  if (cfg.round_count > 1) {
    double gap = cfg.round_times[1] - cfg.round_times[0];
    for (std::size_t k = 1; k + 1 < cfg.round_times.size(); ++k)
      gap = std::min(gap, cfg.round_times[k + 1] - cfg.round_times[k]);
    d.delta_r = gap;
    d.movement_bound_metres = movement_bound(gap, cfg.signal_speed);
  }
  return d;
}

} // namespace keytag
