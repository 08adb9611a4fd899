#include "annealab/random.hpp"

namespace annealab {

namespace {

std::mt19937_64 seeded_engine(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  return std::mt19937_64(seq);
}

constexpr std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
constexpr std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : engine_(seeded_engine({lo(seed), hi(seed)})) {}

// The trailing tag keeps chain streams disjoint from plain single-seed streams.
RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t chain)
    : engine_(seeded_engine({lo(master_seed), hi(master_seed), lo(chain), hi(chain), 0x5eedc4a1u})) {}

}  // namespace annealab
