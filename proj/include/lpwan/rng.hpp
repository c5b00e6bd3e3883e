#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lpwan {

/// Purpose tags keep each entity's draws in its own stream.
enum class StreamTag : std::uint64_t { Traffic = 1, Geometry = 2, Channel = 3 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (master seed, entity, purpose).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t entity, StreamTag tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ entity);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  return std::mt19937_64(h);
}

/// Uniform in [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& g, double mean) {
  return -mean * std::log1p(-uniform01(g));
}

} // namespace lpwan
