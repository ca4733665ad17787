#ifndef COVCP_RNG_HPP
#define COVCP_RNG_HPP

// Counter-based random streams.
//
// Every Monte Carlo quantity in the library draws from a Philox4x32-10 stream
// addressed by (seed, domain, indices...). Two streams with different
// addresses are statistically independent, and a stream's output depends only
// on its address, never on which thread consumes it or in what order.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace covcp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a byte string; used for domain tags and provenance hashes.
inline constexpr std::uint64_t fnv1a(std::string_view bytes,
                                     std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Folds a sequence of indices into one 64-bit stream id.
inline constexpr std::uint64_t combine_indices(std::uint64_t h,
                                               std::initializer_list<std::uint64_t> indices) {
  for (std::uint64_t i : indices) h = splitmix64(h ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return h;
}

/// Philox4x32 with 10 rounds, exposed as a 64-bit UniformRandomBitGenerator.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t key, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(stream),
                 static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 2) refill();
    return out_[used_++];
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53U;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

  void refill() {
    std::uint32_t c0 = counter_[0], c1 = counter_[1], c2 = counter_[2], c3 = counter_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    out_[0] = static_cast<std::uint64_t>(c0) | (static_cast<std::uint64_t>(c1) << 32);
    out_[1] = static_cast<std::uint64_t>(c2) | (static_cast<std::uint64_t>(c3) << 32);
    used_ = 0;
    // 64-bit block counter in the low two words
    if (++counter_[0] == 0) ++counter_[1];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint64_t, 2> out_{};
  int used_ = 2;
};

/// Opens the stream addressed by (seed, domain, indices...).
inline Philox make_stream(std::uint64_t seed, std::string_view domain,
                          std::initializer_list<std::uint64_t> indices) {
  const std::uint64_t key = splitmix64(seed ^ fnv1a(domain));
  const std::uint64_t stream = combine_indices(fnv1a(domain, seed), indices);
  return Philox(key, stream);
}

/// Derives a child seed; distinct (domain, indices) give unrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view domain,
                                 std::initializer_list<std::uint64_t> indices) {
  return splitmix64(combine_indices(splitmix64(seed ^ fnv1a(domain)), indices));
}

}  // namespace covcp

#endif  // COVCP_RNG_HPP
