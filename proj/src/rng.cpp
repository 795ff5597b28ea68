#include "hidalgo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace hidalgo {

namespace {

std::uint64_t splitmix64_step(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double Rng::uniform() {
  // 53 random bits into [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  have_spare_ = true;
  return u * m;
}

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0)
    throw std::invalid_argument("gamma draw needs positive shape and rate");
  if (shape < 1.0) {
    // Boost a shape+1 draw down with a uniform power.
    const double u = uniform_pos();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  for (;;) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    if (x + y > 0.0) return x / (x + y);
  }
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& concentration) {
  Eigen::VectorXd draw(concentration.size());
  for (;;) {
    for (Eigen::Index k = 0; k < concentration.size(); ++k)
      draw[k] = gamma(concentration[k], 1.0);
    const double total = draw.sum();
    if (total > 0.0) return draw / total;
  }
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int needs n > 0");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

std::uint64_t Rng::derive_stream(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t state = seed;
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= k; ++i) out = splitmix64_step(state);
  return out;
}

}  // namespace hidalgo
