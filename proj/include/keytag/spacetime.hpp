#pragma once
// Shared spacetime frame: positions in 1-3 dimensions, signal propagation at a
// configurable speed, affine clock models, the delta1..delta5 delay budget, and
// the closed-form uncertainty / movement figures derived from it.
//
// The simulator keeps time as a 64-bit picosecond count; floating-point event
// ordering is a correctness hazard. Seconds appear only at the interfaces.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "keytag/errors.hpp"

namespace keytag {

inline constexpr double kSignalSpeed = 299'792'458.0; // m/s, vacuum light speed

using picoseconds = std::int64_t;

inline picoseconds to_ticks(double seconds) {
  return static_cast<picoseconds>(std::llround(seconds * 1e12));
}

inline double to_seconds(picoseconds t) {
  return static_cast<double>(t) * 1e-12;
}

struct Position {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int dim = 1;

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Position&, const Position&) = default;
};

using Velocity = Position; // same representation, metres/second components

inline Position make_position(const std::vector<double>& coords) {
  if (coords.empty() || coords.size() > 3) throw UsageError("Position: dimension must be 1..3");
  Position p;
  p.dim = static_cast<int>(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) throw UsageError("Position: coordinates must be finite");
    p.c[i] = coords[i];
  }
  return p;
}

inline void check_same_dim(const Position& a, const Position& b, const char* who) {
  if (a.dim != b.dim) throw UsageError(std::string(who) + ": dimension mismatch");
}

inline double distance(const Position& a, const Position& b) {
  check_same_dim(a, b, "distance");
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double norm(const Velocity& v) {
  double s = 0.0;
  for (int i = 0; i < v.dim; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

inline Position offset_by(const Position& p, const Velocity& v, double dt_seconds) {
  check_same_dim(p, v, "offset_by");
  Position out = p;
  for (int i = 0; i < p.dim; ++i) out[i] += v[i] * dt_seconds;
  return out;
}

inline double propagation_time(const Position& a, const Position& b, double speed = kSignalSpeed) {
  if (!(speed > 0.0)) throw UsageError("propagation_time: speed must be positive");
  check_same_dim(a, b, "propagation_time");
  return distance(a, b) / speed;
}

// Flight time in ticks, always rounded UP: a quantized arrival never precedes
// the true one, so timing windows stay honest-complete and measured distance
// balls never under-estimate range.
inline picoseconds flight_ticks(double metres, double speed) {
  if (!(speed > 0.0)) throw UsageError("flight_ticks: speed must be positive");
  const long double t = static_cast<long double>(metres) / static_cast<long double>(speed) * 1e12L;
  return static_cast<picoseconds>(std::ceil(t));
}

// reading(t) = t + offset + drift * (t - reference_epoch)
struct ClockModel {
  double offset = 0.0;          // seconds
  double drift = 0.0;           // seconds of error per second of true time
  double reference_epoch = 0.0; // seconds

  bool ideal() const { return offset == 0.0 && drift == 0.0; }
};

inline double clock_reading(const ClockModel& m, double true_time) {
  return true_time + m.offset + m.drift * (true_time - m.reference_epoch);
}

inline double clock_true_time(const ClockModel& m, double reading) {
  return (reading - m.offset + m.drift * m.reference_epoch) / (1.0 + m.drift);
}

inline picoseconds clock_reading_ticks(const ClockModel& m, picoseconds t) {
  if (m.ideal()) return t;
  const long double r = static_cast<long double>(t) + static_cast<long double>(m.offset) * 1e12L +
                        static_cast<long double>(m.drift) *
                            (static_cast<long double>(t) - static_cast<long double>(m.reference_epoch) * 1e12L);
  return static_cast<picoseconds>(std::llround(r));
}

inline picoseconds clock_true_time_ticks(const ClockModel& m, picoseconds reading) {
  if (m.ideal()) return reading;
  const long double t = (static_cast<long double>(reading) - static_cast<long double>(m.offset) * 1e12L +
                         static_cast<long double>(m.drift) * static_cast<long double>(m.reference_epoch) * 1e12L) /
                        (1.0L + static_cast<long double>(m.drift));
  return static_cast<picoseconds>(std::llround(t));
}

// delta1: prover processing, delta2: prover transmission, delta3: verifier
// authentication, delta4: confirm generation, delta5: master aggregation.
// delta2_uncertainty is the transmission jitter half-width (Delta_2).
struct DelayProfile {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;
  double delta5 = 0.0;
  double delta2_uncertainty = 0.0;
};

inline void validate(const DelayProfile& p, const char* who) {
  const double all[] = {p.delta1, p.delta2, p.delta3, p.delta4, p.delta5, p.delta2_uncertainty};
  for (double v : all)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(who) + ": delays must be finite and non-negative");
}

// Position uncertainty from the prover-side latency alone (Delta_L = delta1+delta2).
inline double timing_ball_uncertainty(const DelayProfile& p, double speed = kSignalSpeed) {
  return speed * (p.delta1 + p.delta2);
}

// End-to-end figure including verifier-side latencies: c * (d1 + d2 + d3 + d4).
inline double scheme1_uncertainty(const DelayProfile& p, double speed = kSignalSpeed) {
  return speed * (p.delta1 + p.delta2 + p.delta3 + p.delta4);
}

// Scheduled-transmission variant: c * (delta_d bound + Delta_2 + delta3).
inline double scheme2_uncertainty(double delta_d_bound, double delta2_uncertainty, double delta3,
                                  double speed = kSignalSpeed) {
  if (!(delta_d_bound >= 0.0 && delta2_uncertainty >= 0.0 && delta3 >= 0.0))
    throw UsageError("scheme2_uncertainty: inputs must be non-negative");
  return speed * (delta_d_bound + delta2_uncertainty + delta3);
}

// Maximum distance the prover can cover between consecutive checks.
inline double movement_bound(double round_period, double max_speed) {
  if (!(round_period >= 0.0) || !(max_speed >= 0.0))
    throw UsageError("movement_bound: period and speed must be non-negative");
  return max_speed * round_period;
}

// Piecewise-linear prover motion. Position is the base point until the first
// segment starts; each segment moves from wherever the previous one ended.
class Trajectory {
public:
  Trajectory() = default;
  explicit Trajectory(Position base) : base_(base) {}

  const Position& base() const { return base_; }
  bool stationary() const { return segments_.empty(); }

  // Segments must be appended in non-decreasing start order.
  void add_segment(picoseconds start, Velocity v) {
    check_same_dim(base_, v, "Trajectory::add_segment");
    if (!segments_.empty() && start < segments_.back().start)
      throw UsageError("Trajectory: segments must be time-ordered");
    segments_.push_back({start, v});
  }

  Position at(picoseconds t) const {
    Position p = base_;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      if (t <= segments_[k].start) break;
      const picoseconds seg_end =
          (k + 1 < segments_.size()) ? std::min(segments_[k + 1].start, t) : t;
      const double dt = to_seconds(seg_end - segments_[k].start);
      p = offset_by(p, segments_[k].velocity, dt);
    }
    return p;
  }

  double max_speed() const {
    double s = 0.0;
    for (const auto& seg : segments_) s = std::max(s, norm(seg.velocity));
    return s;
  }

private:
  struct Segment {
    picoseconds start = 0;
    Velocity velocity;
  };

  Position base_;
  std::vector<Segment> segments_;
};

} // namespace keytag
