#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "hidalgo/neighbors.hpp"
#include "hidalgo/posterior.hpp"
#include "hidalgo/rng.hpp"
#include "hidalgo/synth.hpp"

using namespace hidalgo;

namespace {

PosteriorTrace make_trace(const std::vector<std::vector<int>>& z_rows,
                          const std::vector<std::vector<double>>& d_rows) {
  PosteriorTrace trace;
  const Index r = static_cast<Index>(z_rows.size());
  const Index n = static_cast<Index>(z_rows.front().size());
  const Index k = static_cast<Index>(d_rows.front().size());
  trace.z.resize(r, n);
  trace.d.resize(r, k);
  trace.p = Matrix::Constant(r, k, 1.0 / static_cast<double>(k));
  trace.zeta = Vector::Constant(r, 0.8);
  trace.log_posterior = Vector::Zero(r);
  for (Index t = 0; t < r; ++t) {
    for (Index i = 0; i < n; ++i) trace.z(t, i) = z_rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
    for (Index j = 0; j < k; ++j) trace.d(t, j) = d_rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
    trace.sweep_index.push_back(static_cast<int>(t) + 1);
  }
  return trace;
}

// Direct double-loop Binder loss.
double binder_oracle(const IntVector& cand, const Matrix& psm) {
  double loss = 0.0;
  for (Index i = 0; i < psm.rows(); ++i)
    for (Index j = i + 1; j < psm.rows(); ++j)
      loss += cand[i] == cand[j] ? 1.0 - psm(i, j) : psm(i, j);
  return loss;
}

// VI from first principles (entropies over the label cross table).
double vi_oracle(const IntVector& a, const IntVector& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (Index i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  double ha = 0.0, hb = 0.0, info = 0.0;
  for (const auto& [_, c] : ca) ha -= c / n * std::log(c / n);
  for (const auto& [_, c] : cb) hb -= c / n * std::log(c / n);
  for (const auto& [key, c] : joint)
    info += c / n * std::log(n * c / (ca[key.first] * cb[key.second]));
  return ha + hb - 2.0 * info;
}

// UPGMA by definition: average pairwise distance between member sets,
// merging the global minimum each step.
std::vector<double> upgma_heights(const Matrix& dist) {
  const Index n = dist.rows();
  std::vector<std::vector<int>> clusters;
  for (Index i = 0; i < n; ++i) clusters.push_back({static_cast<int>(i)});
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double sum = 0.0;
        for (int a : clusters[i])
          for (int b : clusters[j]) sum += dist(a, b);
        const double avg = sum / (clusters[i].size() * clusters[j].size());
        if (avg < best) {
          best = avg;
          bi = i;
          bj = j;
        }
      }
    heights.push_back(best);
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::sort(heights.begin(), heights.end());
  return heights;
}

}  // namespace

TEST_CASE("per-observation id summaries") {
  SUBCASE("constant trace") {
    const auto trace = make_trace({{0, 0}, {0, 0}, {0, 0}}, {{7.0}, {7.0}, {7.0}});
    const auto est = per_observation_id(trace);
    for (Index i = 0; i < 2; ++i) {
      CHECK(est.mean_id[i] == 7.0);
      CHECK(est.median_id[i] == 7.0);
      CHECK(est.lower[i] == 7.0);
      CHECK(est.upper[i] == 7.0);
    }
  }

  SUBCASE("alternating 2, 4") {
    const auto trace = make_trace({{0}, {1}}, {{2.0, 4.0}, {4.0, 2.0}});
    const auto est = per_observation_id(trace);
    CHECK(est.mean_id[0] == 3.0);
    CHECK(est.median_id[0] == 3.0);  // midpoint convention
  }

  SUBCASE("independent recomputation on a random fixture") {
    Rng rng(5);
    std::vector<std::vector<int>> z_rows(40, std::vector<int>(7));
    std::vector<std::vector<double>> d_rows(40, std::vector<double>(3));
    for (auto& row : z_rows)
      for (auto& v : row) v = rng.uniform_int(3);
    for (auto& row : d_rows)
      for (auto& v : row) v = 0.5 + 5.0 * rng.uniform();
    const auto trace = make_trace(z_rows, d_rows);
    const auto est = per_observation_id(trace);

    for (int i = 0; i < 7; ++i) {
      std::vector<double> chain;
      for (int t = 0; t < 40; ++t)
        chain.push_back(d_rows[static_cast<std::size_t>(t)]
                              [static_cast<std::size_t>(z_rows[static_cast<std::size_t>(t)]
                                                              [static_cast<std::size_t>(i)])]);
      const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / 40.0;
      std::sort(chain.begin(), chain.end());
      const double median = 0.5 * (chain[19] + chain[20]);
      CHECK(est.mean_id[i] == doctest::Approx(mean).epsilon(1e-12));
      CHECK(est.median_id[i] == doctest::Approx(median).epsilon(1e-12));
      CHECK(est.lower[i] <= est.median_id[i]);
      CHECK(est.median_id[i] <= est.upper[i]);
    }
  }

  SUBCASE("relabeling sweeps changes nothing") {
    Rng rng(9);
    std::vector<std::vector<int>> z_rows(30, std::vector<int>(5));
    std::vector<std::vector<double>> d_rows(30, std::vector<double>(2));
    for (std::size_t t = 0; t < 30; ++t) {
      for (auto& v : z_rows[t]) v = rng.uniform_int(2);
      d_rows[t] = {1.0 + static_cast<double>(t), 50.0 + static_cast<double>(t)};
    }
    auto flipped_z = z_rows;
    auto flipped_d = d_rows;
    for (std::size_t t = 0; t < 30; t += 2) {  // permute labels on even sweeps
      for (auto& v : flipped_z[t]) v = 1 - v;
      std::swap(flipped_d[t][0], flipped_d[t][1]);
    }
    const auto est_a = per_observation_id(make_trace(z_rows, d_rows));
    const auto est_b = per_observation_id(make_trace(flipped_z, flipped_d));
    CHECK(est_a.mean_id == est_b.mean_id);
    CHECK(est_a.median_id == est_b.median_id);
  }

  SUBCASE("empty trace errors") {
    PosteriorTrace empty;
    empty.z.resize(0, 3);
    empty.d.resize(0, 1);
    CHECK_THROWS_AS(per_observation_id(empty), std::invalid_argument);
  }
}

TEST_CASE("coclustering matrix") {
  const auto trace =
      make_trace({{0, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 0, 1}}, {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  const Matrix psm = coclustering_matrix(trace);
  CHECK(psm(0, 0) == 1.0);
  CHECK(psm(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(psm(0, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(psm(0, 3) == doctest::Approx(1.0 / 3.0));
  CHECK(psm(1, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(psm(1, 3) == 0.0);
  CHECK(psm(2, 3) == doctest::Approx(1.0 / 3.0));
  CHECK(psm == psm.transpose().eval());
  CHECK(psm.minCoeff() >= 0.0);
  CHECK(psm.maxCoeff() <= 1.0);

  // A single repeated partition reproduces itself in 0/1 entries.
  const auto degenerate = make_trace({{0, 0, 1}, {0, 0, 1}}, {{1.0, 2.0}, {1.0, 2.0}});
  const Matrix dpsm = coclustering_matrix(degenerate);
  CHECK(dpsm(0, 1) == 1.0);
  CHECK(dpsm(0, 2) == 0.0);
}

TEST_CASE("point partition minimizes the expected loss over the candidates") {
  SUBCASE("degenerate trace returns its partition under both losses") {
    const auto trace = make_trace({{0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}},
                                  {{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
    const Matrix psm = coclustering_matrix(trace);
    IntVector expected(5);
    expected << 0, 0, 1, 1, 2;
    CHECK(point_partition(psm, trace, PartitionLoss::Binder) == expected);
    CHECK(point_partition(psm, trace, PartitionLoss::VI) == expected);
  }

  SUBCASE("matches exhaustive expected-loss minimization") {
    const std::vector<std::vector<int>> z_rows = {
        {0, 0, 1, 1, 1, 0}, {0, 0, 1, 1, 1, 0}, {0, 0, 0, 1, 1, 1}, {0, 1, 1, 1, 0, 0}};
    std::vector<std::vector<double>> d_rows(4, {1.0, 5.0});
    const auto trace = make_trace(z_rows, d_rows);
    const Matrix psm = coclustering_matrix(trace);

    // Candidate set mirrored by hand: distinct sampled partitions plus the
    // average-linkage cuts at 1..min(10, n).
    std::vector<IntVector> candidates;
    for (const auto& row : z_rows) {
      IntVector z(6);
      for (int i = 0; i < 6; ++i) z[i] = row[static_cast<std::size_t>(i)];
      candidates.push_back(z);
    }
    const Linkage tree = average_linkage(Matrix::Ones(6, 6) - psm);
    for (int k = 1; k <= 6; ++k) candidates.push_back(cut_linkage(tree, k));

    const auto exhaustive = [&](PartitionLoss loss) {
      double best = std::numeric_limits<double>::infinity();
      IntVector arg;
      for (const auto& cand : candidates) {
        double value;
        if (loss == PartitionLoss::Binder) {
          value = binder_oracle(cand, psm);
        } else {
          value = 0.0;
          for (Index t = 0; t < trace.retained(); ++t)
            value += vi_oracle(cand, trace.z.row(t).transpose());
          value /= static_cast<double>(trace.retained());
        }
        if (value < best - 1e-12) {
          best = value;
          arg = cand;
        }
      }
      return arg;
    };

    const IntVector binder = point_partition(psm, trace, PartitionLoss::Binder);
    const IntVector vi = point_partition(psm, trace, PartitionLoss::VI);
    CHECK(binder_expected_loss(binder, psm) ==
          doctest::Approx(binder_oracle(exhaustive(PartitionLoss::Binder), psm))
              .epsilon(1e-12));
    double vi_best = 0.0;
    const IntVector vi_arg = exhaustive(PartitionLoss::VI);
    for (Index t = 0; t < trace.retained(); ++t)
      vi_best += vi_oracle(vi_arg, trace.z.row(t).transpose());
    vi_best /= static_cast<double>(trace.retained());
    CHECK(vi_expected_loss(vi, trace) == doctest::Approx(vi_best).epsilon(1e-12));
  }

  SUBCASE("per-sweep relabeling leaves the result unchanged") {
    const std::vector<std::vector<int>> z_rows = {
        {0, 0, 1, 1, 1, 0}, {0, 0, 1, 1, 1, 0}, {0, 0, 0, 1, 1, 1}};
    auto relabeled = z_rows;
    for (auto& v : relabeled[1]) v = 1 - v;
    std::vector<std::vector<double>> d_rows(3, {1.0, 5.0});
    const auto a = make_trace(z_rows, d_rows);
    const auto b = make_trace(relabeled, d_rows);
    for (const auto loss : {PartitionLoss::Binder, PartitionLoss::VI})
      CHECK(point_partition(coclustering_matrix(a), a, loss) ==
            point_partition(coclustering_matrix(b), b, loss));
  }
}

TEST_CASE("losses are label invariant") {
  Rng rng(31);
  std::vector<std::vector<int>> z_rows(10, std::vector<int>(8));
  for (auto& row : z_rows)
    for (auto& v : row) v = rng.uniform_int(3);
  const auto trace = make_trace(z_rows, std::vector<std::vector<double>>(10, {1.0, 2.0, 3.0}));
  const Matrix psm = coclustering_matrix(trace);

  IntVector cand(8);
  cand << 0, 1, 1, 2, 0, 2, 1, 0;
  IntVector permuted(8);
  for (Index i = 0; i < 8; ++i) permuted[i] = (cand[i] + 1) % 3;
  CHECK(binder_expected_loss(cand, psm) ==
        doctest::Approx(binder_expected_loss(permuted, psm)).epsilon(1e-13));
  CHECK(vi_expected_loss(cand, trace) ==
        doctest::Approx(vi_expected_loss(permuted, trace)).epsilon(1e-13));
  CHECK(vi_distance(cand, permuted) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("k-means on median ids") {
  Vector values(4);
  values << 1.0, 1.1, 9.0, 9.1;
  const auto result = kmeans_id_clusters(values, {2, 3});
  CHECK(result.chosen_g == 2);
  CHECK(result.labels[0] == result.labels[1]);
  CHECK(result.labels[2] == result.labels[3]);
  CHECK(result.labels[0] != result.labels[2]);
  CHECK(result.labels[0] == 0);  // smallest center first

  // Silhouette against the direct formula.
  const double a_low = 0.1, b_low = 0.5 * (8.0 + 8.1);
  const double s_low = (b_low - a_low) / b_low;
  const double a_high = 0.1 32, b_high = 0.5 * (8.0 + 7.9);
  (void)a_high;
  const double s_high = (b_high_placeholder);
  CHECK(true);
}

TEST_CASE("select_K") {
  const auto base = make_trace({{0, 0, 1}}, {{1.0, 2.0}});
  PosteriorTrace t1 = base, t2 = base, t3 = base;
  t1.log_posterior = Vector::Constant(1, -10.0);
  t2.log_posterior = Vector::Constant(1, -8.0);
  t3.log_posterior = Vector::Constant(1, -8.0);
  t1.data_checksum = t2.data_checksum = t3.data_checksum = 99;

  SUBCASE("single candidate") {
    std::map<int, const PosteriorTrace*> traces{{4, &t1}};
    CHECK(select_K(traces).k_star == 4);
  }
  SUBCASE("argmax with ties toward smaller K") {
    std::map<int, const PosteriorTrace*> traces{{1, &t1}, {2, &t2}, {3, &t3}};
    const auto sel = select_K(traces);
    CHECK(sel.k_star == 2);
    CHECK(sel.table.size() == 3);
  }
  SUBCASE("mismatched data checksums error") {
    PosteriorTrace other = base;
    other.data_checksum = 7;
    std::map<int, const PosteriorTrace*> traces{{1, &t1}, {2, &other}};
    CHECK_THROWS_AS(select_K(traces), std::invalid_argument);
  }
}
