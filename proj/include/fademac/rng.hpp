#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fademac {

/// Seeded random stream owned by one simulation run or sampler.
///
/// Not thread-safe; give every concurrent run its own instance.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed)
        : m_engine(seed)
    {
    }

    double standard_normal() { return m_normal(m_engine); }

    /// Uniform double in [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(m_engine); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], both inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(m_engine);
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 m_engine;
    std::normal_distribution<double> m_normal{0.0, 1.0};
};

/// SplitMix64 finalizer.
constexpr std::uint64_t
mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based per-run seed: a pure function of (base seed, stream tag,
/// grid point key, replication index). Adding replications or grid points
/// never changes the seeds of existing runs.
constexpr std::uint64_t
derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t point_key, std::uint64_t replication)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag)
    {
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    }
    std::uint64_t s = mix64(base ^ mix64(h));
    s = mix64(s ^ mix64(point_key + 0x51ed270b27a3c3a5ULL));
    return mix64(s ^ mix64(replication + 0x2545f4914f6cdd1dULL));
}

} // namespace fademac
