#pragma once
// Closed-form guessing probabilities for the two-phase key protocol, the
// optimal query/reply split, and key-consumption arithmetic.
//
// Everything is computed in exact rational arithmetic; doubles only appear at
// the presentation boundary. The tail terms (2^-n for n in the hundreds)
// underflow naive double math long before the rationals feel any pain.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "keytag/bitkeys.hpp"
#include "keytag/errors.hpp"

namespace keytag {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

inline bigint pow2(int e) {
  if (e < 0) throw UsageError("pow2: negative exponent");
  return bigint(1) << e;
}

inline bigint binomial(int l, int k) {
  if (l < 0 || k < 0) throw UsageError("binomial: negative argument");
  if (k > l) return 0;
  k = std::min(k, l - k);
  bigint r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= (l - k + i);
    r /= i;
  }
  return r;
}

// Number of length-l strings within Hamming distance t of a fixed string.
inline bigint hamming_ball_volume(int l, int t) {
  if (l < 0) throw UsageError("hamming_ball_volume: negative length");
  bigint v = 0;
  for (int k = 0; k <= std::min(t, l); ++k) v += binomial(l, k);
  return v;
}

inline void check_split(int n, int m, const char* who) {
  if (n < 2 || m < 1 || m > n - 1)
    throw UsageError(std::string(who) + ": need 1 <= m <= n-1 and n >= 2");
}

inline double to_double(const bigrat& q) {
  using f100 = boost::multiprecision::cpp_bin_float_100;
  const f100 num(boost::multiprecision::numerator(q));
  const f100 den(boost::multiprecision::denominator(q));
  return static_cast<double>(num / den);
}

inline std::string rational_string(const bigrat& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

// Success odds of a blind guesser against an m-bit query phase and an
// (n-m)-bit reply phase with exact matching: guess the query right, or get
// it wrong yet still luck into the right reply.
//   P = 2^-m + (1 - 2^-m) * 2^-(n-m) = (2^(n-m) + 2^m - 1) / 2^n
inline bigrat p_eve_exact(int n, int m) {
  check_split(n, m, "p_eve");
  return bigrat(pow2(n - m) + pow2(m) - 1, pow2(n));
}

inline double p_eve(int n, int m) { return to_double(p_eve_exact(n, m)); }

// Balanced split, the minimum over m for fixed even n: 2^(1-n/2) - 2^-n.
inline bigrat p_s_optimal_exact(int n) {
  if (n < 2 || n % 2 != 0) throw UsageError("p_s_optimal: n must be even and >= 2");
  return bigrat(pow2(n / 2 + 1) - 1, pow2(n));
}

inline double p_s_optimal(int n) { return to_double(p_s_optimal_exact(n)); }

// Error-tolerant exact form: each phase's hit probability becomes the
// Hamming-ball volume over the phase length, combined the same way.
inline bigrat p_s_error_tolerant_exact_rational(int n, int m, double gamma) {
  check_split(n, m, "p_s_error_tolerant_exact");
  const int tq = error_budget(gamma, m);
  const int tr = error_budget(gamma, n - m);
  const bigrat pq(hamming_ball_volume(m, tq), pow2(m));
  const bigrat pr(hamming_ball_volume(n - m, tr), pow2(n - m));
  return pq + (1 - pq) * pr;
}

inline double p_s_error_tolerant_exact(int n, int m, double gamma) {
  return to_double(p_s_error_tolerant_exact_rational(n, m, gamma));
}

// Small-gamma approximation 2^(1-n/2) * C(n/2, t), t = floor(gamma*n/2).
// Valid only while t stays small; `within_guard` is false once t > n/4 and
// the value should then be treated as indicative, not quantitative.
struct ApproxProbability {
  double value = 0.0;
  int t = 0;
  bool within_guard = true;
};

inline bigrat p_s_error_tolerant_approx_exact(int n, double gamma) {
  if (n < 2 || n % 2 != 0)
    throw UsageError("p_s_error_tolerant_approx: n must be even and >= 2");
  const int t = error_budget(gamma, n / 2);
  return bigrat(2 * binomial(n / 2, t), pow2(n / 2));
}

inline ApproxProbability p_s_error_tolerant_approx(int n, double gamma) {
  ApproxProbability out;
  out.t = error_budget(gamma, n / 2);
  out.value = to_double(p_s_error_tolerant_approx_exact(n, gamma));
  out.within_guard = 4 * out.t <= n;
  return out;
}

// Smallest m minimizing p_eve(n, m). The two-phase form is symmetric in
// m <-> n-m, so for even n the unique interior minimum sits at n/2.
inline int optimal_split(int n) {
  if (n < 2) throw UsageError("optimal_split: n must be >= 2");
  int best_m = 1;
  bigrat best = p_eve_exact(n, 1);
  for (int m = 2; m <= n - 1; ++m) {
    const bigrat p = p_eve_exact(n, m);
    if (p < best) {
      best = p;
      best_m = m;
    }
  }
  return best_m;
}

// Aggregate secret-key burn rate: every verifier consumes bits_per_round
// fresh bits each round.
inline double key_consumption(int verifiers, double bits_per_round, double round_rate) {
  if (verifiers < 1 || !(bits_per_round > 0.0) || !(round_rate > 0.0))
    throw UsageError("key_consumption: inputs must be positive");
  return static_cast<double>(verifiers) * bits_per_round * round_rate;
}

struct SecurityParams {
  int n = 2;
  int m = 1;
  double gamma = 0.0;
  int t = 0; // floor(gamma * n / 2)
};

inline SecurityParams make_security_params(int n, int m, double gamma) {
  check_split(n, m, "SecurityParams");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("SecurityParams: need 0 <= gamma < 1");
  return SecurityParams{n, m, gamma, error_budget(gamma, n / 2)};
}

} // namespace keytag
