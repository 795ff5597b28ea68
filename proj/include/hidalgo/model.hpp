#pragma once

#include <string>
#include <vector>

#include "hidalgo/neighbors.hpp"
#include "hidalgo/types.hpp"

namespace hidalgo {

enum class PriorVariant { PlainGamma, TruncatedGamma, TruncatedGammaWithSpike, Repulsive };

PriorVariant prior_variant_from_string(const std::string& name);
std::string to_string(PriorVariant v);

struct ZetaMode {
  bool sampled = false;
  double value = 0.8;  // fixed zeta in (0.5, 1) when !sampled
  double f1 = 2.0;     // Beta(f1, f0) prior on (zeta - 0.5) / 0.5 when sampled
  double f0 = 2.0;
};

/// Hyperparameters of the prior over component IDs, mixture weights and the
/// neighbourhood-homogeneity parameter.
struct PriorSpec {
  PriorVariant variant = PriorVariant::PlainGamma;
  double a = 1.0;        // Gamma shape
  double b = 1.0;        // Gamma rate
  double rho_hat = 0.5;  // slab weight, spike variant only
  double tau = 1.0;      // repulsion location
  double nu = 0.1;       // repulsion softness
  Vector c;              // K Dirichlet concentrations
  ZetaMode zeta_mode;
  double D_cap = 0.0;    // ambient dimension used for truncation

  bool truncated() const {
    return variant == PriorVariant::TruncatedGamma ||
           variant == PriorVariant::TruncatedGammaWithSpike;
  }
};

void validate(const PriorSpec& spec);

PriorSpec default_prior(int K, PriorVariant variant = PriorVariant::PlainGamma,
                        double D_cap = 0.0);

// JSON round trip; field names follow the struct members.
PriorSpec prior_spec_from_json(const std::string& json_text);
std::string prior_spec_to_json(const PriorSpec& spec, int indent = 2);

struct MixtureParams {
  Vector d;  // K component IDs, positive
  Vector p;  // K-simplex weights
};

/// log f(x) for a Pareto with scale a and shape d; -inf below the support.
double pareto_log_density(double x, double scale_a, double shape_d);

/// sum_i log sum_k p_k d_k mu_i^-(d_k+1).
double mixture_log_likelihood(const Vector& mu, const MixtureParams& params);

/// log Z(zeta, N_k): normalizes one adjacency row over the C(N-1, q) ways to
/// pick which q of the other points are neighbours, with cluster sizes fixed.
double log_adjacency_normalizer(double zeta, int cluster_size, int n_total, int q);

/// sum_i [ n_i_in log zeta + (q - n_i_in) log(1-zeta) - log Z(zeta, N_{z_i}) ],
/// rows independent. Labels z_i are 0-based.
double adjacency_log_likelihood(const AdjacencyMatrix& adj, const IntVector& z,
                                double zeta);

double sigmoid_g(double delta, double tau, double nu);
double log_sigmoid_g(double delta, double tau, double nu);

/// log h(d) = min over component pairs of log g(|d_s - d_j|); 0 when K = 1.
double log_repulsion(const Vector& d, double tau, double nu);

/// Joint log prior density of d under the spec (repulsive variant up to its
/// normalizing constant). The overload with at_cap evaluates the spike
/// variant against the mixed measure: flagged components sit on the atom at
/// D_cap and contribute log(1 - rho_hat).
double prior_log_density(const Vector& d, const PriorSpec& spec);
double prior_log_density(const Vector& d, const std::vector<bool>& at_cap,
                         const PriorSpec& spec);

}  // namespace hidalgo
