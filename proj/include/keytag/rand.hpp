#pragma once
// Deterministic randomness helpers. Engines are seeded through std::seed_seq
// (output fully specified by the standard) and all variates are derived from
// raw engine words by hand: std::uniform_* and friends are not guaranteed to
// produce identical streams across standard library implementations, and
// replay-identical runs are a hard requirement.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace keytag {

// Name recorded in every report; the standard pins this engine's output exactly.
inline constexpr const char* kPrngName = "mt19937_64";

// Independent stream keyed by (seed, salts...). Streams with different keys are
// uncorrelated for simulation purposes, and a given key always replays the same
// sequence regardless of what other streams were drawn in between.
inline std::mt19937_64 derived_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> salts) {
  std::vector<std::uint32_t> material;
  material.reserve(2 + salts.size());
  material.push_back(static_cast<std::uint32_t>(seed));
  material.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto s : salts) material.push_back(s);
  std::seed_seq seq(material.begin(), material.end());
  return std::mt19937_64(seq);
}

// Uniform double in [0, 1) from the top 53 bits of one engine word.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi] inclusive. Modulo bias is below 2^-50 for the
// ranges used here (never security-relevant; keys use raw engine words).
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng()); // full 64-bit range
  return lo + static_cast<std::int64_t>(rng() % span);
}

inline bool chance(std::mt19937_64& rng, double p) {
  return uniform_unit(rng) < p;
}

} // namespace keytag
