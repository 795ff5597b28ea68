#pragma once

#include <Eigen/Core>

namespace hidalgo {

double log_sum_exp(const Eigen::VectorXd& logs);
double log_sum_exp(double a, double b);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// log C(n, k); -inf outside 0 <= k <= n.
double log_choose(double n, double k);

/// Regularized lower incomplete gamma P(shape, x).
double gamma_cdf_regularized(double shape, double x);

/// log P(shape, x), stable far into the lower tail.
double log_gamma_cdf_regularized(double shape, double x);

/// Quantile of a Gamma(shape, rate) restricted to (0, cap): the x with
/// P(shape, rate*x) = u * P(shape, rate*cap).
double truncated_gamma_quantile(double shape, double rate, double cap, double u);

double gamma_log_pdf(double x, double shape, double rate);
double beta_log_pdf(double x, double a, double b);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace hidalgo
