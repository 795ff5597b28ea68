#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace hidalgo {

/// Seeded random generator. All samplers are built on the raw mt19937_64
/// stream (never on std::*_distribution, whose output is implementation
/// defined), so a given seed yields the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1)
  double normal();       // standard normal, Marsaglia polar method
  double gamma(double shape, double rate);  // Marsaglia-Tsang
  double beta(double a, double b);
  Eigen::VectorXd dirichlet(const Eigen::VectorXd& concentration);
  int uniform_int(int n);  // {0, ..., n-1}, unbiased

  // Stream k of a master seed, via k+1 splitmix64 steps. Used to derive
  // per-chain seeds from a single --seed.
  static std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t k);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hidalgo
