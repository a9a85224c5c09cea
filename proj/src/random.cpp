#include "ebm/random.hpp"

namespace ebm {

__extension__ typedef unsigned __int128 Wide;

Rng::Rng(std::uint64_t seed) noexcept : m_seed(seed), m_engine(mix64(seed)) {}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
   // Lemire's multiply-shift with rejection.
   Wide product = static_cast<Wide>(next()) * bound;
   std::uint64_t low = static_cast<std::uint64_t>(product);
   if(low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while(low < threshold) {
         product = static_cast<Wide>(next()) * bound;
         low = static_cast<std::uint64_t>(product);
      }
   }
   return static_cast<std::uint64_t>(product >> 64);
}

double Rng::uniform() noexcept {
   return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Rng Rng::split(std::uint64_t stream) const noexcept {
   return Rng(mix64(m_seed ^ mix64(stream + 0x632BE59BD9B4E019ULL)));
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng & rng) {
   std::vector<std::size_t> out(n);
   for(std::size_t & index : out) {
      index = static_cast<std::size_t>(rng.below(n));
   }
   return out;
}

} // namespace ebm
