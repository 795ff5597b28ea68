#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "hidalgo/special.hpp"

using namespace hidalgo;

namespace {

// Composite Simpson quadrature, used as the independent oracle throughout.
double simpson(double lo, double hi, int intervals, const std::function<double(double)>& f) {
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double gamma_pdf(double x, double shape, double rate) {
  return std::exp(gamma_log_pdf(x, shape, rate));
}

}  // namespace

TEST_CASE("log_sum_exp basics") {
  Eigen::VectorXd v(3);
  v << std::log(1.0), std::log(2.0), std::log(3.0);
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(log_sum_exp(std::log(0.25), std::log(0.75)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(log_sum_exp(-1e9, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("softplus is stable at the extremes") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(-800.0) == 0.0);
  CHECK(softplus(3.0) == doctest::Approx(std::log1p(std::exp(3.0))));
}

TEST_CASE("log_choose") {
  CHECK(log_choose(5, 2) == doctest::Approx(std::log(10.0)).epsilon(1e-13));
  CHECK(log_choose(10, 0) == doctest::Approx(0.0));
  CHECK(log_choose(4, 7) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("regularized gamma CDF against closed forms and quadrature") {
  // shape 1: P(1, x) = 1 - exp(-x)
  for (double x : {0.1, 1.0, 3.5, 10.0})
    CHECK(gamma_cdf_regularized(1.0, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-12));

  // quadrature oracle across the series and continued-fraction branches
  for (double shape : {0.5, 2.5, 8.0}) {
    for (double x : {0.2, 1.0, 4.0, 12.0, 30.0}) {
      const double oracle = simpson(1e-12, x, 40001, [&](double t) {
        return gamma_pdf(t, shape, 1.0);
      });
      CHECK(gamma_cdf_regularized(shape, x) == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
}

TEST_CASE("log gamma CDF matches the plain one and survives the deep tail") {
  CHECK(log_gamma_cdf_regularized(2.0, 1.5) ==
        doctest::Approx(std::log(gamma_cdf_regularized(2.0, 1.5))).epsilon(1e-12));
  // Deep lower tail: P(100, 1) underflows but its log must stay finite.
  const double lp = log_gamma_cdf_regularized(100.0, 1.0);
  CHECK(std::isfinite(lp));
  CHECK(lp < -300.0);
}

TEST_CASE("truncated gamma quantile round trip") {
  const double shape = 3.0, rate = 2.0, cap = 1.5;
  const double fcap = gamma_cdf_regularized(shape, rate * cap);
  for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) {
    const double x = truncated_gamma_quantile(shape, rate, cap, u);
    CHECK(x > 0.0);
    CHECK(x < cap);
    CHECK(gamma_cdf_regularized(shape, rate * x) == doctest::Approx(u * fcap).epsilon(1e-10));
  }
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(normal_cdf(-8.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("beta log pdf integrates to one") {
  const double oracle = simpson(1e-9, 1.0 - 1e-9, 20001, [](double x) {
    return std::exp(beta_log_pdf(x, 2.5, 1.5));
  });
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-6));
}
