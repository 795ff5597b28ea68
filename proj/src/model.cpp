#include "hidalgo/model.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "hidalgo/special.hpp"

namespace hidalgo {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PriorVariant prior_variant_from_string(const std::string& name) {
  if (name == "plain" || name == "gamma" || name == "PlainGamma") return PriorVariant::PlainGamma;
  if (name == "truncated" || name == "TruncatedGamma") return PriorVariant::TruncatedGamma;
  if (name == "spike" || name == "TruncatedGammaWithSpike")
    return PriorVariant::TruncatedGammaWithSpike;
  if (name == "repulsive" || name == "Repulsive") return PriorVariant::Repulsive;
  throw std::invalid_argument("unknown prior variant: " + name);
}

std::string to_string(PriorVariant v) {
  switch (v) {
    case PriorVariant::PlainGamma: return "plain";
    case PriorVariant::TruncatedGamma: return "truncated";
    case PriorVariant::TruncatedGammaWithSpike: return "spike";
    case PriorVariant::Repulsive: return "repulsive";
  }
  return "?";
}

void validate(const PriorSpec& spec) {
  if (spec.a <= 0.0 || spec.b <= 0.0)
    throw std::invalid_argument("prior needs a, b > 0");
  if (spec.c.size() == 0 || (spec.c.array() <= 0.0).any())
    throw std::invalid_argument("every Dirichlet concentration must be positive");
  if (spec.variant == PriorVariant::TruncatedGammaWithSpike &&
      !(spec.rho_hat > 0.0 && spec.rho_hat < 1.0))
    throw std::invalid_argument("rho_hat must lie in (0, 1)");
  if (spec.variant == PriorVariant::Repulsive && (spec.tau <= 0.0 || spec.nu <= 0.0))
    throw std::invalid_argument("repulsive prior needs tau, nu > 0");
  if (spec.truncated() && spec.D_cap <= 0.0)
    throw std::invalid_argument("truncated priors need D_cap > 0");
  if (!spec.zeta_mode.sampled) {
    if (!(spec.zeta_mode.value > 0.5 && spec.zeta_mode.value < 1.0))
      throw std::invalid_argument("fixed zeta must lie in (0.5, 1)");
  } else if (spec.zeta_mode.f1 <= 0.0 || spec.zeta_mode.f0 <= 0.0) {
    throw std::invalid_argument("zeta Beta parameters must be positive");
  }
}

PriorSpec default_prior(int K, PriorVariant variant, double D_cap) {
  PriorSpec spec;
  spec.variant = variant;
  spec.c = Vector::Ones(K);
  spec.D_cap = D_cap;
  return spec;
}

PriorSpec prior_spec_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  PriorSpec spec;
  spec.variant = prior_variant_from_string(j.value("variant", std::string("plain")));
  spec.a = j.value("a", 1.0);
  spec.b = j.value("b", 1.0);
  spec.rho_hat = j.value("rho_hat", 0.5);
  spec.tau = j.value("tau", 1.0);
  spec.nu = j.value("nu", 0.1);
  spec.D_cap = j.value("D_cap", 0.0);
  if (j.contains("c")) {
    const auto& c = j["c"];
    spec.c.resize(static_cast<Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k)
      spec.c[static_cast<Index>(k)] = c[k].get<double>();
  }
  if (j.contains("zeta_mode")) {
    const auto& zm = j["zeta_mode"];
    const auto mode = zm.value("mode", std::string("fixed"));
    if (mode == "fixed") {
      spec.zeta_mode.sampled = false;
      spec.zeta_mode.value = zm.value("value", 0.8);
    } else if (mode == "sampled") {
      spec.zeta_mode.sampled = true;
      spec.zeta_mode.f1 = zm.value("f1", 2.0);
      spec.zeta_mode.f0 = zm.value("f0", 2.0);
    } else {
      throw std::invalid_argument("zeta_mode.mode must be 'fixed' or 'sampled'");
    }
  }
  return spec;
}

std::string prior_spec_to_json(const PriorSpec& spec, int indent) {
  nlohmann::json j;
  j["variant"] = to_string(spec.variant);
  j["a"] = spec.a;
  j["b"] = spec.b;
  if (spec.variant == PriorVariant::TruncatedGammaWithSpike) j["rho_hat"] = spec.rho_hat;
  if (spec.variant == PriorVariant::Repulsive) {
    j["tau"] = spec.tau;
    j["nu"] = spec.nu;
  }
  j["c"] = std::vector<double>(spec.c.data(), spec.c.data() + spec.c.size());
  if (spec.zeta_mode.sampled)
    j["zeta_mode"] = {{"mode", "sampled"}, {"f1", spec.zeta_mode.f1}, {"f0", spec.zeta_mode.f0}};
  else
    j["zeta_mode"] = {{"mode", "fixed"}, {"value", spec.zeta_mode.value}};
  if (spec.truncated()) j["D_cap"] = spec.D_cap;
  return j.dump(indent);
}

double pareto_log_density(double x, double scale_a, double shape_d) {
  if (scale_a <= 0.0 || shape_d <= 0.0)
    throw std::domain_error("pareto density needs positive scale and shape");
  if (x < scale_a) return -kInf;
  return std::log(shape_d) + shape_d * std::log(scale_a) - (shape_d + 1.0) * std::log(x);
}

double mixture_log_likelihood(const Vector& mu, const MixtureParams& params) {
  const Index K = params.d.size();
  if (K == 0 || params.p.size() != K)
    throw std::invalid_argument("mixture needs matching d and p");
  Vector log_pd(K);
  for (Index k = 0; k < K; ++k) {
    if (params.d[k] <= 0.0) throw std::domain_error("component IDs must be positive");
    log_pd[k] = std::log(params.p[k]) + std::log(params.d[k]);
  }
  double total = 0.0;
  Vector terms(K);
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu[i] < 1.0)
      throw std::domain_error("mu must be >= 1 (got " + std::to_string(mu[i]) + ")");
    const double log_mu = std::log(mu[i]);
    for (Index k = 0; k < K; ++k) terms[k] = log_pd[k] - (params.d[k] + 1.0) * log_mu;
    total += log_sum_exp(terms);
  }
  return total;
}

double log_adjacency_normalizer(double zeta, int cluster_size, int n_total, int q) {
  // Sum over m = #in-cluster neighbours of C(N_k-1, m) C(N-N_k, q-m)
  // zeta^m (1-zeta)^(q-m).
  const int m_min = std::max(0, q - (n_total - cluster_size));
  const int m_max = std::min(q, cluster_size - 1);
  if (m_max < m_min)
    throw std::invalid_argument("adjacency normalizer is empty: N too small for q");
  const double log_zeta = std::log(zeta);
  const double log_comp = std::log1p(-zeta);
  Vector terms(m_max - m_min + 1);
  for (int m = m_min; m <= m_max; ++m) {
    terms[m - m_min] = log_choose(cluster_size - 1, m) +
                       log_choose(n_total - cluster_size, q - m) + m * log_zeta +
                       (q - m) * log_comp;
  }
  return log_sum_exp(terms);
}

double adjacency_log_likelihood(const AdjacencyMatrix& adj, const IntVector& z,
                                double zeta) {
  if (!(zeta > 0.5 && zeta < 1.0))
    throw std::domain_error("zeta must lie in (0.5, 1)");
  const Index n = adj.size();
  if (z.size() != n) throw std::invalid_argument("assignment length mismatch");
  const int K = z.maxCoeff() + 1;
  if (z.minCoeff() < 0) throw std::invalid_argument("labels must be >= 0");
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (Index i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(z[i])];

  const double log_zeta = std::log(zeta);
  const double log_comp = std::log1p(-zeta);
  std::vector<double> log_norm(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k)
    if (counts[static_cast<std::size_t>(k)] > 0)
      log_norm[static_cast<std::size_t>(k)] = log_adjacency_normalizer(
          zeta, counts[static_cast<std::size_t>(k)], static_cast<int>(n), adj.q);

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    int n_in = 0;
    for (int j = 0; j < adj.q; ++j)
      if (z[adj.rows(i, j)] == z[i]) ++n_in;
    total += n_in * log_zeta + (adj.q - n_in) * log_comp -
             log_norm[static_cast<std::size_t>(z[i])];
  }
  return total;
}

double sigmoid_g(double delta, double tau, double nu) {
  if (tau <= 0.0 || nu <= 0.0) throw std::domain_error("sigmoid needs tau, nu > 0");
  return 1.0 / (1.0 + std::exp(-(delta - tau) / nu));
}

double log_sigmoid_g(double delta, double tau, double nu) {
  if (tau <= 0.0 || nu <= 0.0) throw std::domain_error("sigmoid needs tau, nu > 0");
  return -softplus(-(delta - tau) / nu);
}

double log_repulsion(const Vector& d, double tau, double nu) {
  double worst = 0.0;  // empty pair set: h = 1
  for (Index s = 1; s < d.size(); ++s)
    for (Index j = 0; j < s; ++j)
      worst = std::min(worst, log_sigmoid_g(std::fabs(d[s] - d[j]), tau, nu));
  return worst;
}

namespace {

double truncated_gamma_log_pdf(double x, double a, double b, double cap) {
  if (x <= 0.0 || x >= cap) return -kInf;
  return gamma_log_pdf(x, a, b) - log_gamma_cdf_regularized(a, b * cap);
}

}  // namespace

double prior_log_density(const Vector& d, const PriorSpec& spec) {
  std::vector<bool> at_cap;
  if (spec.variant == PriorVariant::TruncatedGammaWithSpike) {
    at_cap.resize(static_cast<std::size_t>(d.size()));
    for (Index k = 0; k < d.size(); ++k)
      at_cap[static_cast<std::size_t>(k)] = (d[k] == spec.D_cap);
  }
  return prior_log_density(d, at_cap, spec);
}

double prior_log_density(const Vector& d, const std::vector<bool>& at_cap,
                         const PriorSpec& spec) {
  validate(spec);
  double total = 0.0;
  switch (spec.variant) {
    case PriorVariant::PlainGamma:
      for (Index k = 0; k < d.size(); ++k) total += gamma_log_pdf(d[k], spec.a, spec.b);
      return total;
    case PriorVariant::TruncatedGamma:
      for (Index k = 0; k < d.size(); ++k)
        total += truncated_gamma_log_pdf(d[k], spec.a, spec.b, spec.D_cap);
      return total;
    case PriorVariant::TruncatedGammaWithSpike: {
      if (at_cap.size() != static_cast<std::size_t>(d.size()))
        throw std::invalid_argument("spike prior needs one at-cap flag per component");
      // Density against the mixed measure: atoms weigh 1 - rho_hat, the slab
      // is the truncated Gamma scaled by rho_hat.
      for (Index k = 0; k < d.size(); ++k) {
        if (at_cap[static_cast<std::size_t>(k)])
          total += std::log1p(-spec.rho_hat);
        else
          total += std::log(spec.rho_hat) +
                   truncated_gamma_log_pdf(d[k], spec.a, spec.b, spec.D_cap);
      }
      return total;
    }
    case PriorVariant::Repulsive:
      for (Index k = 0; k < d.size(); ++k) total += gamma_log_pdf(d[k], spec.a, spec.b);
      return total + log_repulsion(d, spec.tau, spec.nu);
  }
  return total;
}

}  // namespace hidalgo
