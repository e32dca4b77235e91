#pragma once

#include <cstdint>
#include <random>

namespace uptheriver {

/// Source of the Gaussian increments and uniforms consumed by a step.
/// Tests substitute scripted sources to force particular paths.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual double normal() = 0;
  /// Uniform on [0,1).
  virtual double uniform() = 0;
};

/// Seeded 64-bit Mersenne Twister. Streams are reproducible for a given seed
/// and standard library.
class Rng final : public NoiseSource {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  double normal() override { return normal_(engine_); }
  double uniform() override { return uniform_(engine_); }
  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace uptheriver
