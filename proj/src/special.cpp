#include "hidalgo/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hidalgo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

// Series for the lower incomplete gamma, valid for x < shape + 1.
// Returns log of the regularized P.
double log_gamma_p_series(double shape, double x) {
  double term = 1.0 / shape;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (shape + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return std::log(sum) + shape * std::log(x) - x - std::lgamma(shape);
}

// Modified Lentz continued fraction for the regularized Q, valid for
// x >= shape + 1.
double gamma_q_cf(double shape, double x) {
  double b = x + 1.0 - shape;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - shape);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + shape * std::log(x) - std::lgamma(shape)) * h;
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& logs) {
  if (logs.size() == 0) return -kInf;
  const double m = logs.maxCoeff();
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logs.size(); ++i) sum += std::exp(logs[i] - m);
  return m + std::log(sum);
}

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double softplus(double x) {
  if (x > 36.0) return x;           // log1p(e^-x) below double resolution
  if (x < -745.0) return 0.0;       // e^x underflows
  return std::log1p(std::exp(x));
}

double log_choose(double n, double k) {
  if (k < 0.0 || k > n) return -kInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double gamma_cdf_regularized(double shape, double x) {
  if (shape <= 0.0) throw std::domain_error("gamma cdf needs shape > 0");
  if (x <= 0.0) return 0.0;
  if (x < shape + 1.0) return std::exp(log_gamma_p_series(shape, x));
  return 1.0 - gamma_q_cf(shape, x);
}

double log_gamma_cdf_regularized(double shape, double x) {
  if (shape <= 0.0) throw std::domain_error("gamma cdf needs shape > 0");
  if (x <= 0.0) return -kInf;
  if (x < shape + 1.0) return log_gamma_p_series(shape, x);
  return std::log1p(-gamma_q_cf(shape, x));
}

double truncated_gamma_quantile(double shape, double rate, double cap, double u) {
  if (shape <= 0.0 || rate <= 0.0 || cap <= 0.0)
    throw std::domain_error("truncated gamma quantile needs positive parameters");
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return cap;
  const double log_fcap = log_gamma_cdf_regularized(shape, rate * cap);
  const double log_target = std::log(u) + log_fcap;
  double lo = 0.0, hi = cap;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_gamma_cdf_regularized(shape, rate * mid) < log_target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0)
    throw std::domain_error("gamma pdf needs positive shape and rate");
  if (x <= 0.0) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double beta_log_pdf(double x, double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("beta pdf needs positive parameters");
  if (x <= 0.0 || x >= 1.0) return -kInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + std::lgamma(a + b) -
         std::lgamma(a) - std::lgamma(b);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace hidalgo
