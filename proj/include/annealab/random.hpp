#pragma once

#include <cstdint>
#include <random>

namespace annealab {

/// Seeded source of uniform and standard-normal variates. One stream per
/// chain; streams are never shared between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream for chain `chain` of an ensemble driven by `master_seed`.
  RandomStream(std::uint64_t master_seed, std::uint64_t chain);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace annealab
