#pragma once

#include <cstdint>

namespace fishnet
{
//! SplitMix64 finalizer: a bijective 64-bit mixing function.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * Stateless counter-based generator.
 *
 * The value at position \c counter depends only on (key, counter), so any
 * element of a stream can be produced by any thread in any order. Substreams
 * are keyed by hashing a parent key with a stream index.
 */
class CounterRng
{
  public:
    constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept
    {
        return splitmix64(key_ ^ splitmix64(counter ^ 0x632be59bd9b4e019ULL));
    }

    //! Uniform variate strictly inside (0, 1), 53 bits of resolution.
    [[nodiscard]] constexpr double uniform(std::uint64_t counter) const noexcept
    {
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * scale;
    }

    [[nodiscard]] constexpr CounterRng substream(std::uint64_t index) const noexcept
    {
        return CounterRng{splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (index + 1))};
    }

  private:
    std::uint64_t key_;
};

//! Seed of replica \c index in a campaign keyed by \c master_seed.
[[nodiscard]] constexpr std::uint64_t replica_seed(std::uint64_t master_seed,
                                                   std::uint64_t index) noexcept
{
    return CounterRng{master_seed}.substream(index).key();
}
}  // namespace fishnet
