#ifndef BAYESRVM_RNG_HPP
#define BAYESRVM_RNG_HPP

#include <cstdint>
#include <random>

namespace bayesrvm {

namespace detail {
// SplitMix64 finalizer, used only to spread (seed, stream_id) over the
// mt19937_64 seed space so that nearby ids give unrelated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Seeded random source. A stream is identified by (seed, stream_id);
// the same pair always reproduces the same draw sequence, and distinct
// stream_ids give independent sequences. Everything downstream
// (samplers, trainers, the repeat protocol) draws through one of these.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    const std::uint64_t a = detail::splitmix64(seed);
    const std::uint64_t b = detail::splitmix64(a ^ detail::splitmix64(stream_id));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Derived stream for a sub-task (e.g. repeat index). Children of the
  // same parent with distinct ids are independent of each other and of
  // the parent's own continued use.
  RngStream child(std::uint64_t sub_id) const {
    return RngStream(seed_, detail::splitmix64(stream_id_ + 0x51ED2701) ^ sub_id);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased uniform integer on [0, n), n >= 1.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t rem = (0ULL - n) % n;  // 2^64 mod n
    std::uint64_t r;
    do {
      r = engine_();
    } while (r < rem);
    return r % n;
  }

  // Uniform draw on the open interval (0,1); safe to pass to log().
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace bayesrvm

#endif  // BAYESRVM_RNG_HPP
