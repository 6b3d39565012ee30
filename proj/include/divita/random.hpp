#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace divita {

// The standard distributions are implementation-defined, so everything that
// feeds an artifact draws through these helpers instead.
using Rng = std::mt19937_64;

// Child seed for a named component: splitmix64(root ^ fnv1a64(tag)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);

// Uniform integer in [0, n), n >= 1, by rejection (no modulo bias).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);
// Standard normal via Box-Muller; consumes two uniforms per call.
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace divita
