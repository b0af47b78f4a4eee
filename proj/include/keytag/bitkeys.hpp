#pragma once
// One-time key material: fixed-length bit strings, per-round (query, reply)
// splits, and the seeded block generator both sides replay.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keytag/errors.hpp"
#include "keytag/rand.hpp"

namespace keytag {

enum class Scheme { clockless = 1, clocked = 2 }; // clocked = prover owns a trusted clock

// Fixed-length bit sequence. Bit 0 is the first bit on the wire, i.e. the
// leftmost character of the ASCII form.
class BitString {
public:
  BitString() = default;
  explicit BitString(std::size_t length) : size_(length), words_(word_count(length), 0) {}

  static BitString from_string(std::string_view ascii) {
    BitString out(ascii.size());
    for (std::size_t i = 0; i < ascii.size(); ++i) {
      const char c = ascii[i];
      if (c != '0' && c != '1') throw UsageError("BitString: character is not '0' or '1'");
      if (c == '1') out.set_bit(i, true);
    }
    return out;
  }

  static BitString random(std::size_t length, std::mt19937_64& rng) {
    BitString out(length);
    for (auto& w : out.words_) w = rng();
    out.mask_tail();
    return out;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool bit(std::size_t i) const {
    check_index(i);
    return (words_[i / 64] >> (i % 64)) & 1u;
  }

  void set_bit(std::size_t i, bool v) {
    check_index(i);
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v) words_[i / 64] |= mask; else words_[i / 64] &= ~mask;
  }

  void flip_bit(std::size_t i) {
    check_index(i);
    words_[i / 64] ^= std::uint64_t{1} << (i % 64);
  }

  // Bits [first, first+count), preserving order.
  BitString slice(std::size_t first, std::size_t count) const {
    if (first + count > size_) throw UsageError("BitString::slice: range out of bounds");
    BitString out(count);
    for (std::size_t i = 0; i < count; ++i) out.set_bit(i, bit(first + i));
    return out;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if (bit(i)) s[i] = '1';
    return s;
  }

  friend bool operator==(const BitString&, const BitString&) = default;

  friend std::size_t hamming_distance(const BitString& a, const BitString& b) {
    if (a.size_ != b.size_) throw UsageError("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      d += static_cast<std::size_t>(std::popcount(a.words_[w] ^ b.words_[w]));
    return d;
  }

private:
  static std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

  void check_index(std::size_t i) const {
    if (i >= size_) throw UsageError("BitString: index out of range");
  }

  // Unused high bits stay zero so word-wise equality and popcount are exact.
  void mask_tail() {
    const std::size_t rem = size_ % 64;
    if (rem != 0 && !words_.empty()) words_.back() &= (~std::uint64_t{0}) >> (64 - rem);
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Maximum accepted Hamming distance for a string of the given length.
// floor(gamma * L), exact integer compare thereafter.
inline int error_budget(double gamma, std::size_t length) {
  if (!(gamma >= 0.0) || !(gamma < 1.0)) throw UsageError("error_budget: gamma must be in [0, 1)");
  return static_cast<int>(std::floor(gamma * static_cast<double>(length)));
}

inline bool within_tolerance(const BitString& received, const BitString& expected, double gamma) {
  const std::size_t d = hamming_distance(received, expected);
  return static_cast<int>(d) <= error_budget(gamma, expected.size());
}

struct RoundKey {
  BitString query; // empty under Scheme::clocked
  BitString reply;
  int round = 0;   // 1-based
};

struct KeyBlock {
  int verifier = 0; // 1-based index i
  int n = 0;
  int m = 0;        // 0 under Scheme::clocked
  Scheme scheme = Scheme::clockless;
  std::vector<RoundKey> rounds;

  int round_count() const { return static_cast<int>(rounds.size()); }

  const RoundKey& round(int j) const {
    if (j < 1 || j > round_count()) throw ProtocolError("KeyBlock: round index beyond key block");
    return rounds[static_cast<std::size_t>(j - 1)];
  }
};

// Deterministic in all arguments: the verifier and the prover regenerate the
// same block from the shared seed instead of shipping key files around.
inline KeyBlock generate_key_block(std::uint64_t seed, int verifier, int rounds, int n, int m,
                                   Scheme scheme) {
  if (rounds < 1) throw ConfigError("generate_key_block: need at least one round");
  if (n < 1) throw ConfigError("generate_key_block: n must be positive");
  if (scheme == Scheme::clockless && (m < 1 || m > n - 1))
    throw ConfigError("generate_key_block: need 1 <= m <= n-1 for the query/reply split");

  KeyBlock block;
  block.verifier = verifier;
  block.n = n;
  block.m = (scheme == Scheme::clockless) ? m : 0;
  block.scheme = scheme;
  block.rounds.reserve(static_cast<std::size_t>(rounds));

  auto rng = derived_rng(seed, {0x6b657973u /* key stream */, static_cast<std::uint32_t>(verifier)});
  for (int j = 1; j <= rounds; ++j) {
    BitString whole = BitString::random(static_cast<std::size_t>(n), rng);
    RoundKey rk;
    rk.round = j;
    if (scheme == Scheme::clockless) {
      rk.query = whole.slice(0, static_cast<std::size_t>(m));
      rk.reply = whole.slice(static_cast<std::size_t>(m), static_cast<std::size_t>(n - m));
    } else {
      rk.reply = whole;
    }
    block.rounds.push_back(std::move(rk));
  }
  return block;
}

// Key-reconciliation error model: the prover's copy of a block with each bit
// independently flipped with probability p. p = 0 returns the block unchanged.
inline KeyBlock with_bit_flips(KeyBlock block, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("with_bit_flips: p must be in [0, 1)");
  if (p == 0.0) return block;
  auto rng = derived_rng(seed, {0x666c6970u /* flip stream */, static_cast<std::uint32_t>(block.verifier)});
  for (auto& rk : block.rounds) {
    for (std::size_t i = 0; i < rk.query.size(); ++i)
      if (chance(rng, p)) rk.query.flip_bit(i);
    for (std::size_t i = 0; i < rk.reply.size(); ++i)
      if (chance(rng, p)) rk.reply.flip_bit(i);
  }
  return block;
}

} // namespace keytag
