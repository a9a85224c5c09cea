#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ebm {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
   x += 0x9E3779B97F4A7C15ULL;
   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
   x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
   return x ^ (x >> 31);
}

/// Seedable, splittable 64-bit generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; bounded draws are done here rather than with
/// std::uniform_int_distribution so results do not depend on the standard library vendor.
class Rng {
public:
   explicit Rng(std::uint64_t seed) noexcept;

   std::uint64_t next() noexcept { return m_engine(); }

   /// Uniform integer in [0, bound), unbiased. bound must be > 0.
   std::uint64_t below(std::uint64_t bound) noexcept;

   /// Uniform real in [0, 1) with 53 random bits.
   double uniform() noexcept;

   /// Independent child stream keyed by `stream`; does not advance this generator.
   Rng split(std::uint64_t stream) const noexcept;

   template<typename T>
   void shuffle(std::vector<T> & items) noexcept {
      for(std::size_t i = items.size(); i > 1; --i) {
         const std::size_t j = static_cast<std::size_t>(below(i));
         std::swap(items[i - 1], items[j]);
      }
   }

private:
   std::uint64_t m_seed;
   std::mt19937_64 m_engine;
};

/// n draws with replacement from 0..n-1.
std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng & rng);

} // namespace ebm
