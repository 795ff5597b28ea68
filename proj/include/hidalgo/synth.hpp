#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hidalgo/types.hpp"

namespace hidalgo {

enum class ManifoldKind { Hypercube, Gaussian, Line, Circle };

ManifoldKind manifold_kind_from_string(const std::string& name);
std::string to_string(ManifoldKind kind);

struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Hypercube;
  int n = 0;
  int d_true = 1;
  int D = 1;
  Vector offset;       // length D; empty means zero
  double scale = 1.0;
  bool rotate = false;
  std::uint64_t seed = 0;
};

void validate(const ManifoldSpec& spec);

ManifoldSpec manifold_spec_from_json(const std::string& json_text);
std::string manifold_spec_to_json(const ManifoldSpec& spec, int indent = 2);
std::vector<ManifoldSpec> manifold_specs_from_json(const std::string& json_text);

/// Seeded sample on a d_true-manifold, zero-padded to D, optionally rotated
/// by a random orthogonal matrix, then translated by offset. Labels are all
/// zero (the manifold index).
std::pair<Dataset, IntVector> generate(const ManifoldSpec& spec);

/// Concatenation of several manifolds with the inter-manifold separation
/// check (minimum gap >= 5x the largest scale) enforced.
std::pair<Dataset, IntVector> multi_manifold(const std::vector<ManifoldSpec>& specs);

/// Classical TWO-NN maximum-likelihood ID: N / sum log mu. Exact ties
/// (mu = 1) are excluded with a count when below 1% of N, otherwise an error.
double twonn_mle(const Vector& mu, int* ties_excluded = nullptr);

/// Linearized least-squares ID: regress -log(1 - F_emp) on log mu through
/// the origin after discarding the top quantile; F_emp(mu_(i)) = i/(N+1).
double twonn_linear_fit(const Vector& mu, double discard_fraction = 0.1);

}  // namespace hidalgo
