#include "hidalgo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include <Eigen/QR>

#include "hidalgo/rng.hpp"

namespace hidalgo {

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "hypercube") return ManifoldKind::Hypercube;
  if (name == "gaussian") return ManifoldKind::Gaussian;
  if (name == "line") return ManifoldKind::Line;
  if (name == "circle") return ManifoldKind::Circle;
  throw std::invalid_argument("unknown manifold kind: " + name);
}

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Hypercube: return "hypercube";
    case ManifoldKind::Gaussian: return "gaussian";
    case ManifoldKind::Line: return "line";
    case ManifoldKind::Circle: return "circle";
  }
  return "?";
}

void validate(const ManifoldSpec& spec) {
  if (spec.n < 3) throw std::invalid_argument("manifold needs n >= 3");
  if (spec.scale <= 0.0) throw std::invalid_argument("scale must be positive");
  if (spec.d_true < 1 || spec.d_true > spec.D)
    throw std::invalid_argument("need 1 <= d_true <= D (d_true = " +
                                std::to_string(spec.d_true) + ", D = " +
                                std::to_string(spec.D) + ")");
  if ((spec.kind == ManifoldKind::Line || spec.kind == ManifoldKind::Circle) &&
      spec.d_true != 1)
    throw std::invalid_argument("line and circle manifolds have d_true = 1");
  if (spec.kind == ManifoldKind::Circle && spec.D < 2)
    throw std::invalid_argument("circle needs D >= 2");
  if (spec.offset.size() != 0 && spec.offset.size() != spec.D)
    throw std::invalid_argument("offset length must equal D");
}

ManifoldSpec manifold_spec_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  ManifoldSpec spec;
  spec.kind = manifold_kind_from_string(j.value("kind", std::string("hypercube")));
  spec.n = j.value("n", 0);
  spec.d_true = j.value("d_true", 1);
  spec.D = j.value("D", spec.d_true);
  spec.scale = j.value("scale", 1.0);
  spec.rotate = j.value("rotate", false);
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("offset")) {
    const auto& off = j["offset"];
    spec.offset.resize(static_cast<Index>(off.size()));
    for (std::size_t k = 0; k < off.size(); ++k)
      spec.offset[static_cast<Index>(k)] = off[k].get<double>();
  }
  return spec;
}

std::string manifold_spec_to_json(const ManifoldSpec& spec, int indent) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  j["n"] = spec.n;
  j["d_true"] = spec.d_true;
  j["D"] = spec.D;
  j["scale"] = spec.scale;
  j["rotate"] = spec.rotate;
  j["seed"] = spec.seed;
  if (spec.offset.size() > 0)
    j["offset"] = std::vector<double>(spec.offset.data(), spec.offset.data() + spec.offset.size());
  return j.dump(indent);
}

std::vector<ManifoldSpec> manifold_specs_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  if (j.is_object() && j.contains("manifolds")) j = j["manifolds"];
  if (j.is_object()) return {manifold_spec_from_json(j.dump())};
  std::vector<ManifoldSpec> specs;
  for (const auto& item : j) specs.push_back(manifold_spec_from_json(item.dump()));
  return specs;
}

namespace {

// Seeded random orthogonal matrix: QR of a Gaussian matrix with the sign
// convention diag(R) > 0.
Matrix random_orthogonal(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

std::pair<Dataset, IntVector> generate(const ManifoldSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Matrix points = Matrix::Zero(spec.n, spec.D);
  switch (spec.kind) {
    case ManifoldKind::Hypercube:
      for (Index i = 0; i < spec.n; ++i)
        for (Index j = 0; j < spec.d_true; ++j)
          points(i, j) = spec.scale * rng.uniform();
      break;
    case ManifoldKind::Gaussian:
      for (Index i = 0; i < spec.n; ++i)
        for (Index j = 0; j < spec.d_true; ++j)
          points(i, j) = spec.scale * rng.normal();
      break;
    case ManifoldKind::Line:
      for (Index i = 0; i < spec.n; ++i) points(i, 0) = spec.scale * rng.uniform();
      break;
    case ManifoldKind::Circle:
      for (Index i = 0; i < spec.n; ++i) {
        const double theta = 2.0 * M_PI * rng.uniform();
        points(i, 0) = spec.scale * std::cos(theta);
        points(i, 1) = spec.scale * std::sin(theta);
      }
      break;
  }
  if (spec.rotate) points = points * random_orthogonal(spec.D, rng).transpose();
  if (spec.offset.size() > 0) points.rowwise() += spec.offset.transpose();

  auto data = make_dataset(std::move(points));
  return {std::move(data), IntVector::Zero(spec.n)};
}

std::pair<Dataset, IntVector> multi_manifold(const std::vector<ManifoldSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("no manifold specs given");
  const int D = specs.front().D;
  double max_scale = 0.0;
  Index total = 0;
  for (const auto& spec : specs) {
    validate(spec);
    if (spec.D != D) throw std::invalid_argument("all manifolds must share one ambient D");
    max_scale = std::max(max_scale, spec.scale);
    total += spec.n;
  }

  Matrix points(total, D);
  IntVector labels(total);
  std::vector<std::pair<Index, Index>> ranges;  // [begin, end)
  Index row = 0;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    auto [data, part_labels] = generate(specs[m]);
    points.middleRows(row, specs[m].n) = data.points;
    labels.segment(row, specs[m].n).setConstant(static_cast<int>(m));
    ranges.emplace_back(row, row + specs[m].n);
    row += specs[m].n;
  }

  if (specs.size() > 1) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a + 1 < ranges.size(); ++a)
      for (std::size_t b = a + 1; b < ranges.size(); ++b)
        for (Index i = ranges[a].first; i < ranges[a].second; ++i)
          for (Index j = ranges[b].first; j < ranges[b].second; ++j)
            min_gap = std::min(min_gap, (points.row(i) - points.row(j)).norm());
    if (min_gap < 5.0 * max_scale)
      throw std::invalid_argument(
          "manifolds are not separated: measured gap " + std::to_string(min_gap) +
          " < 5 x max scale " + std::to_string(5.0 * max_scale));
  }

  auto data = make_dataset(std::move(points));
  return {std::move(data), std::move(labels)};
}

double twonn_mle(const Vector& mu, int* ties_excluded) {
  const Index n = mu.size();
  if (n == 0) throw std::invalid_argument("empty mu vector");
  double sum_log = 0.0;
  int ties = 0;
  for (Index i = 0; i < n; ++i) {
    if (mu[i] < 1.0) throw std::domain_error("mu must be >= 1");
    if (mu[i] == 1.0) {
      ++ties;
      continue;
    }
    sum_log += std::log(mu[i]);
  }
  if (ties > 0.01 * static_cast<double>(n))
    throw std::invalid_argument(std::to_string(ties) +
                                " exact ties (mu = 1) exceed 1% of the sample");
  if (ties_excluded) *ties_excluded = ties;
  const Index kept = n - ties;
  if (kept == 0 || sum_log <= 0.0)
    throw std::invalid_argument("sum of log mu is zero; MLE undefined");
  return static_cast<double>(kept) / sum_log;
}

double twonn_linear_fit(const Vector& mu, double discard_fraction) {
  if (!(discard_fraction >= 0.0 && discard_fraction < 0.5))
    throw std::invalid_argument("discard_fraction must lie in [0, 0.5)");
  const Index n = mu.size();
  std::vector<double> sorted(mu.data(), mu.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto kept = static_cast<Index>(std::floor((1.0 - discard_fraction) * n));
  if (kept < 10) throw std::invalid_argument("fewer than 10 retained points");

  // Regression through the origin of -log(1 - F_emp) on log mu with the
  // plotting position F_emp(mu_(i)) = i / (N + 1).
  double sxy = 0.0, sxx = 0.0;
  for (Index i = 1; i <= kept; ++i) {
    const double x = std::log(sorted[static_cast<std::size_t>(i - 1)]);
    const double f = static_cast<double>(i) / static_cast<double>(n + 1);
    const double y = -std::log1p(-f);
    sxy += x * y;
    sxx += x * x;
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate mu sample (all ones)");
  return sxy / sxx;
}

}  // namespace hidalgo
