#pragma once

#include <cstdint>
#include <vector>

#include "hidalgo/model.hpp"
#include "hidalgo/rng.hpp"
#include "hidalgo/types.hpp"

namespace hidalgo {

struct ChainState {
  IntVector z;   // N labels in {0..K-1}
  Vector d;      // K component IDs
  Vector p;      // K-simplex
  double zeta = 0.8;
  std::vector<bool> at_cap;  // spike bookkeeping, size K
  int sweep = 0;

  int K() const { return static_cast<int>(d.size()); }
};

struct SamplerConfig {
  int K = 1;
  int sweeps = 2000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  PriorSpec prior;
  bool adjacency_on = true;
  int q = 3;
  bool randomized_scan = false;  // diagnostics only; default is ascending index
};

void validate(const SamplerConfig& config);

/// Retained sweeps of (z, d, p, zeta) plus the log posterior per sweep.
struct PosteriorTrace {
  IntMatrix z;           // R x N
  Matrix d;              // R x K
  Matrix p;              // R x K
  Vector zeta;           // R
  Vector log_posterior;  // R
  std::vector<int> sweep_index;
  SamplerConfig config;
  std::uint64_t data_checksum = 0;

  Index retained() const { return d.rows(); }
  Index n_obs() const { return z.cols(); }
};

/// Concatenates retained sweeps of chains run on the same data and K.
PosteriorTrace concat_traces(const std::vector<PosteriorTrace>& traces);

/// Dirichlet(c_1 + N_1, ..., c_K + N_K) draw.
Vector update_weights(const IntVector& z, const Vector& c, int K, Rng& rng);

/// Per-component update of d given the assignments; conjugate for the plain
/// and truncated variants, spike indicator from closed-form marginal odds,
/// Metropolis-Hastings with the conjugate proposal for the repulsive prior.
/// Empty clusters draw from the prior.
Vector update_d(const Vector& mu, const IntVector& z, const PriorSpec& spec,
                const Vector& current_d, std::vector<bool>& at_cap, Rng& rng);

/// Full conditional of z_i over clusters, given the rest of the state.
Vector assignment_full_conditional(int i, const Vector& mu, const AdjacencyMatrix& adj,
                                   const ChainState& state, bool adjacency_on);

/// Sequential single-site Gibbs scan over all observations; counts are
/// updated incrementally after each site.
void update_assignments(const Vector& mu, const AdjacencyMatrix& adj, ChainState& state,
                        const SamplerConfig& config, Rng& rng);

/// Random-walk Metropolis on logit-rescaled zeta over (0.5, 1); no-op in
/// Fixed mode.
double update_zeta(const AdjacencyMatrix& adj, const IntVector& z, const PriorSpec& spec,
                   double current, Rng& rng);

/// Mixture log likelihood conditional on z (Pareto terms plus log p_{z_i}),
/// the adjacency term when on, and all prior log densities. All
/// normalization constants are included except the repulsive prior's, which
/// is constant for fixed K and hyperparameters.
double log_posterior(const ChainState& state, const Vector& mu, const AdjacencyMatrix& adj,
                     const SamplerConfig& config);

/// Metropolis-within-Gibbs chain; update order per sweep is p, d, z, zeta.
/// Deterministic given config.seed.
PosteriorTrace run_chain(const Vector& mu, const AdjacencyMatrix& adj,
                         const SamplerConfig& config);

}  // namespace hidalgo
