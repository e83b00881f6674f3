#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dirkde {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Counter-based child seed: folds each key into the parent through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> keys)
{
  std::uint64_t s = splitmix64(parent);
  for (auto k : keys)
    s = splitmix64(s ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return s;
}

inline double uniform01(Rng& rng)
{
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng)
{
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

} // namespace dirkde
