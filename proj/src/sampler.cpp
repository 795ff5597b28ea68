#include "hidalgo/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hidalgo/io.hpp"
#include "hidalgo/special.hpp"

namespace hidalgo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> cluster_counts(const IntVector& z, int K) {
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (Index i = 0; i < z.size(); ++i) ++counts[static_cast<std::size_t>(z[i])];
  return counts;
}

struct ClusterStats {
  std::vector<int> n;
  std::vector<double> s;  // sum of log mu per cluster
};

ClusterStats cluster_stats(const Vector& mu, const IntVector& z, int K) {
  ClusterStats stats;
  stats.n.assign(static_cast<std::size_t>(K), 0);
  stats.s.assign(static_cast<std::size_t>(K), 0.0);
  for (Index i = 0; i < mu.size(); ++i) {
    const auto k = static_cast<std::size_t>(z[i]);
    ++stats.n[k];
    stats.s[k] += std::log(mu[i]);
  }
  return stats;
}

double dirichlet_log_pdf(const Vector& p, const Vector& c) {
  double lp = std::lgamma(c.sum());
  for (Index k = 0; k < c.size(); ++k)
    lp += (c[k] - 1.0) * std::log(p[k]) - std::lgamma(c[k]);
  return lp;
}

double truncated_gamma_draw(double shape, double rate, double cap, Rng& rng) {
  return truncated_gamma_quantile(shape, rate, cap, rng.uniform_pos());
}

// log of the slab marginal likelihood, the truncated-Gamma prior integrated
// against the Pareto likelihood of one cluster.
double log_slab_marginal(int n_k, double s_k, const PriorSpec& spec) {
  const double a_post = spec.a + n_k;
  const double b_post = spec.b + s_k;
  return -s_k + spec.a * std::log(spec.b) - std::lgamma(spec.a) -
         log_gamma_cdf_regularized(spec.a, spec.b * spec.D_cap) + std::lgamma(a_post) -
         a_post * std::log(b_post) +
         log_gamma_cdf_regularized(a_post, b_post * spec.D_cap);
}

double log_spike_marginal(int n_k, double s_k, const PriorSpec& spec) {
  return n_k * std::log(spec.D_cap) - (spec.D_cap + 1.0) * s_k;
}

// Memoized log Z(zeta, n) for one fixed zeta.
class NormalizerCache {
 public:
  NormalizerCache(double zeta, int n_total, int q)
      : zeta_(zeta), n_total_(n_total), q_(q),
        values_(static_cast<std::size_t>(n_total) + 1, kNaN) {}

  double operator()(int cluster_size) {
    auto& v = values_[static_cast<std::size_t>(cluster_size)];
    if (std::isnan(v)) v = log_adjacency_normalizer(zeta_, cluster_size, n_total_, q_);
    return v;
  }

 private:
  double zeta_;
  int n_total_;
  int q_;
  std::vector<double> values_;
};

std::vector<std::vector<int>> reverse_neighbors(const AdjacencyMatrix& adj) {
  std::vector<std::vector<int>> reverse(static_cast<std::size_t>(adj.size()));
  for (Index i = 0; i < adj.size(); ++i)
    for (int j = 0; j < adj.q; ++j)
      reverse[static_cast<std::size_t>(adj.rows(i, j))].push_back(static_cast<int>(i));
  return reverse;
}

// Log full-conditional weights (up to a constant) of z_i over the K
// clusters. `counts` excludes observation i.
void site_log_weights(int i, const Vector& mu, const IntVector& z,
                      const std::vector<int>& counts, const Vector& d, const Vector& p,
                      const AdjacencyMatrix& adj,
                      const std::vector<std::vector<int>>& reverse, double zeta,
                      bool adjacency_on, NormalizerCache* cache, Vector& out) {
  const int K = static_cast<int>(d.size());
  const double log_mu = std::log(mu[i]);
  for (int k = 0; k < K; ++k)
    out[k] = std::log(p[k]) + std::log(d[k]) - (d[k] + 1.0) * log_mu;
  if (!adjacency_on) return;

  const double log_odds = std::log(zeta) - std::log1p(-zeta);
  // Neighbour agreement terms that move with z_i: row i's own count plus the
  // rows that list i as a neighbour.
  std::vector<int> agree(static_cast<std::size_t>(K), 0);
  for (int j = 0; j < adj.q; ++j) ++agree[static_cast<std::size_t>(z[adj.rows(i, j)])];
  for (int j : reverse[static_cast<std::size_t>(i)])
    if (j != i) ++agree[static_cast<std::size_t>(z[j])];

  // Every row's normalizer depends on the cluster cardinalities, so the sum
  // over clusters of size * log Z moves with z_i as well.
  double base = 0.0;  // sum over clusters not containing i
  for (int l = 0; l < K; ++l) {
    const int size = counts[static_cast<std::size_t>(l)];
    if (size > 0) base -= size * (*cache)(size);
  }
  for (int k = 0; k < K; ++k) {
    const int size_k = counts[static_cast<std::size_t>(k)] + 1;
    double norm_sum = base;
    if (size_k - 1 > 0) norm_sum += (size_k - 1) * (*cache)(size_k - 1);
    norm_sum -= size_k * (*cache)(size_k);
    out[k] += agree[static_cast<std::size_t>(k)] * log_odds + norm_sum;
  }
}

int sample_from_log_weights(const Vector& log_w, Rng& rng) {
  const double m = log_w.maxCoeff();
  double total = 0.0;
  for (Index k = 0; k < log_w.size(); ++k) total += std::exp(log_w[k] - m);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (Index k = 0; k < log_w.size(); ++k) {
    acc += std::exp(log_w[k] - m);
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(log_w.size()) - 1;
}

}  // namespace

void validate(const SamplerConfig& config) {
  if (config.K < 1) throw std::invalid_argument("K must be at least 1");
  if (config.burn_in < 0 || config.sweeps <= config.burn_in)
    throw std::invalid_argument("need sweeps > burn_in >= 0");
  if (config.thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (config.q < 1) throw std::invalid_argument("q must be at least 1");
  validate(config.prior);
  if (config.prior.c.size() != config.K)
    throw std::invalid_argument("prior has " + std::to_string(config.prior.c.size()) +
                                " concentrations but K = " + std::to_string(config.K));
}

Vector update_weights(const IntVector& z, const Vector& c, int K, Rng& rng) {
  const auto counts = cluster_counts(z, K);
  Vector concentration(K);
  for (int k = 0; k < K; ++k)
    concentration[k] = c[k] + counts[static_cast<std::size_t>(k)];
  return rng.dirichlet(concentration);
}

Vector update_d(const Vector& mu, const IntVector& z, const PriorSpec& spec,
                const Vector& current_d, std::vector<bool>& at_cap, Rng& rng) {
  const int K = static_cast<int>(current_d.size());
  const auto stats = cluster_stats(mu, z, K);
  Vector next = current_d;
  if (at_cap.size() != static_cast<std::size_t>(K))
    at_cap.assign(static_cast<std::size_t>(K), false);

  for (int k = 0; k < K; ++k) {
    const int n_k = stats.n[static_cast<std::size_t>(k)];
    const double s_k = stats.s[static_cast<std::size_t>(k)];
    const double a_post = spec.a + n_k;
    const double b_post = spec.b + s_k;
    switch (spec.variant) {
      case PriorVariant::PlainGamma:
        next[k] = rng.gamma(a_post, b_post);
        break;
      case PriorVariant::TruncatedGamma:
        next[k] = truncated_gamma_draw(a_post, b_post, spec.D_cap, rng);
        break;
      case PriorVariant::TruncatedGammaWithSpike: {
        const double lw_spike =
            std::log1p(-spec.rho_hat) + log_spike_marginal(n_k, s_k, spec);
        const double lw_slab = std::log(spec.rho_hat) + log_slab_marginal(n_k, s_k, spec);
        const double p_spike = std::exp(lw_spike - log_sum_exp(lw_spike, lw_slab));
        if (rng.uniform() < p_spike) {
          next[k] = spec.D_cap;
          at_cap[static_cast<std::size_t>(k)] = true;
        } else {
          next[k] = truncated_gamma_draw(a_post, b_post, spec.D_cap, rng);
          at_cap[static_cast<std::size_t>(k)] = false;
        }
        break;
      }
      case PriorVariant::Repulsive: {
        // Conjugate proposal; g_0 and the data terms cancel, leaving the
        // repulsion ratio.
        const double proposal = rng.gamma(a_post, b_post);
        const double log_h_cur = log_repulsion(next, spec.tau, spec.nu);
        const double saved = next[k];
        next[k] = proposal;
        const double log_h_new = log_repulsion(next, spec.tau, spec.nu);
        if (!(std::log(rng.uniform_pos()) < log_h_new - log_h_cur)) next[k] = saved;
        break;
      }
    }
  }
  return next;
}

Vector assignment_full_conditional(int i, const Vector& mu, const AdjacencyMatrix& adj,
                                   const ChainState& state, bool adjacency_on) {
  const int K = state.K();
  auto counts = cluster_counts(state.z, K);
  --counts[static_cast<std::size_t>(state.z[i])];
  const auto reverse = reverse_neighbors(adj);
  NormalizerCache cache(state.zeta, static_cast<int>(mu.size()), adj.q);
  Vector log_w(K);
  site_log_weights(i, mu, state.z, counts, state.d, state.p, adj, reverse, state.zeta,
                   adjacency_on, &cache, log_w);
  const double norm = log_sum_exp(log_w);
  return (log_w.array() - norm).exp();
}

void update_assignments(const Vector& mu, const AdjacencyMatrix& adj, ChainState& state,
                        const SamplerConfig& config, Rng& rng) {
  const int K = state.K();
  if (K == 1) return;
  const Index n = mu.size();
  auto counts = cluster_counts(state.z, K);
  const auto reverse = reverse_neighbors(adj);
  NormalizerCache cache(state.zeta, static_cast<int>(n), adj.q);
  Vector log_w(K);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (config.randomized_scan) {
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i) + 1))]);
  }

  for (const int i : order) {
    --counts[static_cast<std::size_t>(state.z[i])];
    site_log_weights(i, mu, state.z, counts, state.d, state.p, adj, reverse, state.zeta,
                     config.adjacency_on, &cache, log_w);
    const int k = sample_from_log_weights(log_w, rng);
    state.z[i] = k;
    ++counts[static_cast<std::size_t>(k)];
  }
}

double update_zeta(const AdjacencyMatrix& adj, const IntVector& z, const PriorSpec& spec,
                   double current, Rng& rng) {
  if (!spec.zeta_mode.sampled) return current;
  const double f1 = spec.zeta_mode.f1, f0 = spec.zeta_mode.f0;

  const double v = (current - 0.5) / 0.5;
  const double u = std::log(v) - std::log1p(-v);
  const double u_prop = u + 0.8 * rng.normal();
  const double v_prop = 1.0 / (1.0 + std::exp(-u_prop));
  const double zeta_prop = 0.5 + 0.5 * v_prop;
  if (!(zeta_prop > 0.5 && zeta_prop < 1.0)) return current;  // saturated proposal

  // Random walk on the logit scale; the Jacobian contributes v(1 - v).
  const double log_target_cur = adjacency_log_likelihood(adj, z, current) +
                                beta_log_pdf(v, f1, f0) + std::log(v) + std::log1p(-v);
  const double log_target_prop = adjacency_log_likelihood(adj, z, zeta_prop) +
                                 beta_log_pdf(v_prop, f1, f0) + std::log(v_prop) +
                                 std::log1p(-v_prop);
  if (std::log(rng.uniform_pos()) < log_target_prop - log_target_cur) return zeta_prop;
  return current;
}

double log_posterior(const ChainState& state, const Vector& mu, const AdjacencyMatrix& adj,
                     const SamplerConfig& config) {
  double lp = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const int k = state.z[i];
    lp += pareto_log_density(mu[i], 1.0, state.d[k]) + std::log(state.p[k]);
  }
  if (config.adjacency_on) lp += adjacency_log_likelihood(adj, state.z, state.zeta);
  lp += prior_log_density(state.d, state.at_cap, config.prior);
  lp += dirichlet_log_pdf(state.p, config.prior.c);
  if (config.adjacency_on && config.prior.zeta_mode.sampled) {
    const double v = (state.zeta - 0.5) / 0.5;
    lp += beta_log_pdf(v, config.prior.zeta_mode.f1, config.prior.zeta_mode.f0) +
          std::log(2.0);
  }
  return lp;
}

namespace {

ChainState initial_state(const Vector& mu, const SamplerConfig& config, Rng& rng) {
  const Index n = mu.size();
  const int K = config.K;
  ChainState state;

  // Deterministic data-driven start: bucket points by mu quantile, small mu
  // (high ID) in bucket 0.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return mu[a] < mu[b] || (mu[a] == mu[b] && a < b);
  });
  state.z.resize(n);
  for (Index r = 0; r < n; ++r)
    state.z[order[static_cast<std::size_t>(r)]] =
        static_cast<int>(r * K / n);

  state.p = Vector::Constant(K, 1.0 / K);
  state.d.resize(K);
  state.at_cap.assign(static_cast<std::size_t>(K), false);
  const PriorSpec& prior = config.prior;
  for (int k = 0; k < K; ++k) {
    switch (prior.variant) {
      case PriorVariant::PlainGamma:
      case PriorVariant::Repulsive:
        state.d[k] = rng.gamma(prior.a, prior.b);
        break;
      case PriorVariant::TruncatedGamma:
        state.d[k] = truncated_gamma_draw(prior.a, prior.b, prior.D_cap, rng);
        break;
      case PriorVariant::TruncatedGammaWithSpike:
        if (rng.uniform() < 1.0 - prior.rho_hat) {
          state.d[k] = prior.D_cap;
          state.at_cap[static_cast<std::size_t>(k)] = true;
        } else {
          state.d[k] = truncated_gamma_draw(prior.a, prior.b, prior.D_cap, rng);
        }
        break;
    }
  }
  state.zeta = prior.zeta_mode.sampled
                   ? 0.5 + 0.5 * prior.zeta_mode.f1 /
                             (prior.zeta_mode.f1 + prior.zeta_mode.f0)
                   : prior.zeta_mode.value;
  return state;
}

std::uint64_t data_checksum(const Vector& mu, const AdjacencyMatrix& adj) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const std::int64_t n = mu.size();
  h = fnv1a(&n, sizeof n, h);
  h = fnv1a(mu.data(), sizeof(double) * static_cast<std::size_t>(mu.size()), h);
  h = fnv1a(&adj.q, sizeof adj.q, h);
  h = fnv1a(adj.rows.data(), sizeof(int) * static_cast<std::size_t>(adj.rows.size()), h);
  return h;
}

}  // namespace

PosteriorTrace run_chain(const Vector& mu, const AdjacencyMatrix& adj,
                         const SamplerConfig& config) {
  validate(config);
  if (mu.size() != adj.size()) throw std::invalid_argument("mu and adjacency sizes differ");
  if (adj.q != config.q)
    throw std::invalid_argument("adjacency was built with q = " + std::to_string(adj.q) +
                                " but config.q = " + std::to_string(config.q));
  for (Index i = 0; i < mu.size(); ++i)
    if (mu[i] < 1.0) throw std::domain_error("mu must be >= 1");

  const Index n = mu.size();
  const int K = config.K;
  Rng rng(config.seed);
  ChainState state = initial_state(mu, config, rng);

  const int retained = (config.sweeps - config.burn_in) / config.thin;
  PosteriorTrace trace;
  trace.config = config;
  trace.data_checksum = data_checksum(mu, adj);
  trace.z.resize(retained, n);
  trace.d.resize(retained, K);
  trace.p.resize(retained, K);
  trace.zeta.resize(retained);
  trace.log_posterior.resize(retained);
  trace.sweep_index.reserve(static_cast<std::size_t>(retained));

  int row = 0;
  for (int t = 1; t <= config.sweeps; ++t) {
    state.p = update_weights(state.z, config.prior.c, K, rng);
    state.d = update_d(mu, state.z, config.prior, state.d, state.at_cap, rng);
    update_assignments(mu, adj, state, config, rng);
    if (config.adjacency_on)
      state.zeta = update_zeta(adj, state.z, config.prior, state.zeta, rng);
    state.sweep = t;

    const int past_burn = t - config.burn_in;
    if (past_burn >= 1 && past_burn % config.thin == 0 && row < retained) {
      const double lp = log_posterior(state, mu, adj, config);
      if (!std::isfinite(lp))
        throw std::runtime_error("non-finite log posterior at sweep " + std::to_string(t));
      trace.z.row(row) = state.z.transpose();
      trace.d.row(row) = state.d.transpose();
      trace.p.row(row) = state.p.transpose();
      trace.zeta[row] = state.zeta;
      trace.log_posterior[row] = lp;
      trace.sweep_index.push_back(t);
      ++row;
    }
  }
  return trace;
}

PosteriorTrace concat_traces(const std::vector<PosteriorTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("no traces to concatenate");
  const auto& first = traces.front();
  Index total = 0;
  for (const auto& t : traces) {
    if (t.data_checksum != first.data_checksum)
      throw std::invalid_argument("traces come from different data (checksum mismatch)");
    if (t.d.cols() != first.d.cols() || t.z.cols() != first.z.cols())
      throw std::invalid_argument("traces have mismatched shapes");
    total += t.retained();
  }
  PosteriorTrace out;
  out.config = first.config;
  out.data_checksum = first.data_checksum;
  out.z.resize(total, first.z.cols());
  out.d.resize(total, first.d.cols());
  out.p.resize(total, first.p.cols());
  out.zeta.resize(total);
  out.log_posterior.resize(total);
  Index row = 0;
  for (const auto& t : traces) {
    out.z.middleRows(row, t.retained()) = t.z;
    out.d.middleRows(row, t.retained()) = t.d;
    out.p.middleRows(row, t.retained()) = t.p;
    out.zeta.segment(row, t.retained()) = t.zeta;
    out.log_posterior.segment(row, t.retained()) = t.log_posterior;
    out.sweep_index.insert(out.sweep_index.end(), t.sweep_index.begin(),
                           t.sweep_index.end());
    row += t.retained();
  }
  return out;
}

}  // namespace hidalgo
