#include "hidalgo/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "hidalgo/special.hpp"

namespace hidalgo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Type-7 quantile (linear interpolation) on sorted values; the even-count
// median falls out as the midpoint of the central order statistics.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Relabels to first-appearance order 0,1,2,...
IntVector canonical_labels(const IntVector& z) {
  IntVector out(z.size());
  std::map<int, int> remap;
  for (Index i = 0; i < z.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(z[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

int n_clusters(const IntVector& canonical) {
  return canonical.size() == 0 ? 0 : canonical.maxCoeff() + 1;
}

struct DistinctPartitions {
  std::vector<IntVector> labels;   // canonical
  std::vector<int> multiplicity;
};

DistinctPartitions distinct_partitions(const IntMatrix& z_rows) {
  DistinctPartitions out;
  std::map<std::vector<int>, int> index;
  for (Index t = 0; t < z_rows.rows(); ++t) {
    IntVector canon = canonical_labels(z_rows.row(t).transpose());
    std::vector<int> key(canon.data(), canon.data() + canon.size());
    auto [it, inserted] = index.try_emplace(std::move(key), static_cast<int>(out.labels.size()));
    if (inserted) {
      out.labels.push_back(std::move(canon));
      out.multiplicity.push_back(1);
    } else {
      ++out.multiplicity[static_cast<std::size_t>(it->second)];
    }
  }
  return out;
}

double entropy(const IntVector& canonical) {
  const int K = n_clusters(canonical);
  std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
  for (Index i = 0; i < canonical.size(); ++i) counts[static_cast<std::size_t>(canonical[i])] += 1.0;
  const double n = static_cast<double>(canonical.size());
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  return h;
}

double mutual_information(const IntVector& a, const IntVector& b) {
  const int ka = n_clusters(a), kb = n_clusters(b);
  const double n = static_cast<double>(a.size());
  std::vector<double> joint(static_cast<std::size_t>(ka) * kb, 0.0);
  std::vector<double> ca(static_cast<std::size_t>(ka), 0.0), cb(static_cast<std::size_t>(kb), 0.0);
  for (Index i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i]) * kb + b[i]] += 1.0;
    ca[static_cast<std::size_t>(a[i])] += 1.0;
    cb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  double info = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double nij = joint[static_cast<std::size_t>(i) * kb + j];
      if (nij > 0.0)
        info += (nij / n) * std::log(n * nij / (ca[static_cast<std::size_t>(i)] *
                                                cb[static_cast<std::size_t>(j)]));
    }
  return info;
}

}  // namespace

IdEstimates per_observation_id(const PosteriorTrace& trace) {
  const Index r = trace.retained();
  if (r == 0) throw std::invalid_argument("trace has no retained sweeps");
  const Index n = trace.n_obs();
  IdEstimates est;
  est.mean_id.resize(n);
  est.median_id.resize(n);
  est.lower.resize(n);
  est.upper.resize(n);
  std::vector<double> chain(static_cast<std::size_t>(r));
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index t = 0; t < r; ++t) {
      const double v = trace.d(t, trace.z(t, i));
      chain[static_cast<std::size_t>(t)] = v;
      sum += v;
    }
    std::sort(chain.begin(), chain.end());
    est.mean_id[i] = sum / static_cast<double>(r);
    est.median_id[i] = quantile_sorted(chain, 0.5);
    est.lower[i] = quantile_sorted(chain, 0.025);
    est.upper[i] = quantile_sorted(chain, 0.975);
  }
  return est;
}

Matrix coclustering_matrix(const PosteriorTrace& trace) {
  const Index r = trace.retained();
  if (r == 0) throw std::invalid_argument("trace has no retained sweeps");
  const Index n = trace.n_obs();
  Matrix psm = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const int matches =
          static_cast<int>((trace.z.col(i).array() == trace.z.col(j).array()).count());
      const double f = static_cast<double>(matches) / static_cast<double>(r);
      psm(i, j) = f;
      psm(j, i) = f;
    }
  }
  return psm;
}

double binder_expected_loss(const IntVector& candidate, const Matrix& psm) {
  const Index n = psm.rows();
  double loss = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      loss += candidate[i] == candidate[j] ? 1.0 - psm(i, j) : psm(i, j);
  return loss;
}

double vi_distance(const IntVector& a, const IntVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("partition sizes differ");
  const IntVector ca = canonical_labels(a), cb = canonical_labels(b);
  return entropy(ca) + entropy(cb) - 2.0 * mutual_information(ca, cb);
}

double vi_expected_loss(const IntVector& candidate, const PosteriorTrace& trace) {
  const Index r = trace.retained();
  if (r == 0) throw std::invalid_argument("trace has no retained sweeps");
  double total = 0.0;
  for (Index t = 0; t < r; ++t)
    total += vi_distance(candidate, trace.z.row(t).transpose());
  return total / static_cast<double>(r);
}

double normalized_mutual_information(const IntVector& a, const IntVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("partition sizes differ");
  const IntVector ca = canonical_labels(a), cb = canonical_labels(b);
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  return 2.0 * mutual_information(ca, cb) / (ha + hb);
}

IntVector point_partition(const Matrix& psm, const PosteriorTrace& trace,
                          PartitionLoss loss) {
  const Index n = trace.n_obs();
  if (psm.rows() != n || psm.cols() != n)
    throw std::invalid_argument("psm does not match the trace");

  // Candidates: all distinct sampled partitions plus average-linkage cuts.
  const DistinctPartitions sampled = distinct_partitions(trace.z);
  std::vector<IntVector> candidates = sampled.labels;
  if (n >= 2) {
    const Linkage tree = average_linkage(Matrix::Ones(n, n) - psm);
    const int max_cut = std::min<Index>(10, n);
    for (int k = 1; k <= max_cut; ++k)
      candidates.push_back(cut_linkage(tree, k));
  }

  // Precompute per-distinct-sweep entropies for the VI loss.
  std::vector<double> sweep_entropy;
  if (loss == PartitionLoss::VI) {
    sweep_entropy.reserve(sampled.labels.size());
    for (const auto& s : sampled.labels) sweep_entropy.push_back(entropy(s));
  }
  const double r = static_cast<double>(trace.retained());

  double best = kInf;
  Index best_idx = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const IntVector cand = canonical_labels(candidates[c]);
    double value;
    if (loss == PartitionLoss::Binder) {
      value = binder_expected_loss(cand, psm);
    } else {
      const double h_cand = entropy(cand);
      value = 0.0;
      for (std::size_t s = 0; s < sampled.labels.size(); ++s) {
        const double vi = h_cand + sweep_entropy[s] -
                          2.0 * mutual_information(cand, sampled.labels[s]);
        value += vi * sampled.multiplicity[s];
      }
      value /= r;
    }
    if (value < best) {
      best = value;
      best_idx = static_cast<Index>(c);
    }
  }
  return canonical_labels(candidates[static_cast<std::size_t>(best_idx)]);
}

KmeansResult kmeans_id_clusters(const Vector& median_id, const std::vector<int>& g_range) {
  const Index n = median_id.size();
  if (g_range.empty()) throw std::invalid_argument("empty g range");
  const int g_max = *std::max_element(g_range.begin(), g_range.end());
  const int g_min = *std::min_element(g_range.begin(), g_range.end());
  if (g_min < 2) throw std::invalid_argument("g must be at least 2");
  if (n <= g_max) throw std::invalid_argument("need more observations than clusters");
  if ((median_id.array() == median_id[0]).all())
    throw std::invalid_argument("all values identical: clustering is degenerate");

  std::vector<double> sorted(median_id.data(), median_id.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double grand_mean = median_id.mean();

  KmeansResult result;
  double best_sil = -kInf;
  std::vector<int> gs = g_range;
  std::sort(gs.begin(), gs.end());

  for (const int g : gs) {
    // Quantile initialization, then Lloyd iterations.
    Vector centers(g);
    for (int j = 0; j < g; ++j)
      centers[j] = quantile_sorted(sorted, (2.0 * j + 1.0) / (2.0 * g));
    IntVector labels = IntVector::Zero(n);
    double prev_wcss = kInf;
    for (int iter = 0; iter < 200; ++iter) {
      bool changed = false;
      for (Index i = 0; i < n; ++i) {
        int arg = 0;
        double bestd = std::fabs(median_id[i] - centers[0]);
        for (int j = 1; j < g; ++j) {
          const double dd = std::fabs(median_id[i] - centers[j]);
          if (dd < bestd) {
            bestd = dd;
            arg = j;
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      Vector sums = Vector::Zero(g);
      Vector counts = Vector::Zero(g);
      for (Index i = 0; i < n; ++i) {
        sums[labels[i]] += median_id[i];
        counts[labels[i]] += 1.0;
      }
      for (int j = 0; j < g; ++j)
        if (counts[j] > 0.0) centers[j] = sums[j] / counts[j];
      double wcss = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double diff = median_id[i] - centers[labels[i]];
        wcss += diff * diff;
      }
      if (!changed || wcss >= prev_wcss) {
        prev_wcss = std::min(prev_wcss, wcss);
        break;
      }
      prev_wcss = wcss;
    }

    // Silhouette, with singleton clusters scored 0.
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(g));
    for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    double sil_sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto& own = members[static_cast<std::size_t>(labels[i])];
      if (own.size() <= 1) continue;
      double a = 0.0;
      for (Index j : own)
        if (j != i) a += std::fabs(median_id[i] - median_id[j]);
      a /= static_cast<double>(own.size() - 1);
      double b = kInf;
      for (int cl = 0; cl < g; ++cl) {
        if (cl == labels[i] || members[static_cast<std::size_t>(cl)].empty()) continue;
        double m = 0.0;
        for (Index j : members[static_cast<std::size_t>(cl)])
          m += std::fabs(median_id[i] - median_id[j]);
        m /= static_cast<double>(members[static_cast<std::size_t>(cl)].size());
        b = std::min(b, m);
      }
      if (std::isfinite(b)) sil_sum += (b - a) / std::max(a, b);
    }
    const double silhouette = sil_sum / static_cast<double>(n);

    double between = 0.0;
    for (int j = 0; j < g; ++j) {
      const auto sz = static_cast<double>(members[static_cast<std::size_t>(j)].size());
      if (sz > 0.0) {
        const double diff = centers[j] - grand_mean;
        between += sz * diff * diff;
      }
    }
    const double ch = (between / std::max(1, g - 1)) /
                      (prev_wcss / static_cast<double>(n - g));

    result.table.push_back({g, silhouette, ch, prev_wcss});
    if (silhouette > best_sil) {
      best_sil = silhouette;
      result.chosen_g = g;
      // Relabel so cluster 0 has the smallest center.
      std::vector<int> idx(static_cast<std::size_t>(g));
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int x, int y) { return centers[x] < centers[y]; });
      std::vector<int> rank(static_cast<std::size_t>(g));
      for (int pos = 0; pos < g; ++pos) rank[static_cast<std::size_t>(idx[pos])] = pos;
      result.labels.resize(n);
      for (Index i = 0; i < n; ++i)
        result.labels[i] = rank[static_cast<std::size_t>(labels[i])];
    }
  }
  return result;
}

KSelection select_K(const std::map<int, const PosteriorTrace*>& traces) {
  if (traces.empty()) throw std::invalid_argument("no traces to select from");
  KSelection sel;
  const std::uint64_t checksum = traces.begin()->second->data_checksum;
  double best = -kInf;
  for (const auto& [K, trace] : traces) {
    if (trace->data_checksum != checksum)
      throw std::invalid_argument("traces come from different data (checksum mismatch)");
    if (trace->retained() == 0) throw std::invalid_argument("trace has no retained sweeps");
    const double mean_lp = trace->log_posterior.mean();
    sel.table.push_back({K, mean_lp});
    if (mean_lp > best) {  // strict: ties resolve toward the smaller K
      best = mean_lp;
      sel.k_star = K;
    }
  }
  return sel;
}

namespace {

// Count of rank configurations with statistic u under the tie-free null:
// c(m, n, u) = c(m-1, n, u-n) + c(m, n-1, u), splitting on whether the
// largest pooled value is an X.
std::vector<double> mann_whitney_counts(int n1, int n2) {
  const int max_u = n1 * n2;
  std::vector<std::vector<std::vector<double>>> dp(
      static_cast<std::size_t>(n1) + 1,
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(n2) + 1,
          std::vector<double>(static_cast<std::size_t>(max_u) + 1, 0.0)));
  for (int n = 0; n <= n2; ++n) dp[0][static_cast<std::size_t>(n)][0] = 1.0;
  for (int m = 1; m <= n1; ++m) {
    dp[static_cast<std::size_t>(m)][0][0] = 1.0;
    for (int n = 1; n <= n2; ++n)
      for (int u = 0; u <= m * n; ++u) {
        double v = dp[static_cast<std::size_t>(m)][static_cast<std::size_t>(n) - 1]
                     [static_cast<std::size_t>(u)];
        if (u >= n)
          v += dp[static_cast<std::size_t>(m) - 1][static_cast<std::size_t>(n)]
                 [static_cast<std::size_t>(u - n)];
        dp[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]
          [static_cast<std::size_t>(u)] = v;
      }
  }
  return dp[static_cast<std::size_t>(n1)][static_cast<std::size_t>(n2)];
}

}  // namespace

MannWhitneyResult mann_whitney(const Vector& xs, const Vector& ys, Alternative alt) {
  const int n1 = static_cast<int>(xs.size());
  const int n2 = static_cast<int>(ys.size());
  if (n1 == 0 || n2 == 0) throw std::invalid_argument("both samples must be nonempty");

  struct Tagged {
    double value;
    int sample;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(static_cast<std::size_t>(n1 + n2));
  for (Index i = 0; i < xs.size(); ++i) pooled.push_back({xs[i], 0});
  for (Index i = 0; i < ys.size(); ++i) pooled.push_back({ys[i], 1});
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

  // Midranks and tie blocks.
  const int n = n1 + n2;
  double r1 = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie blocks
  bool has_ties = false;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && pooled[static_cast<std::size_t>(j)].value ==
                        pooled[static_cast<std::size_t>(i)].value)
      ++j;
    const int t = j - i;
    if (t > 1) {
      has_ties = true;
      tie_term += static_cast<double>(t) * t * t - t;
    }
    const double midrank = 0.5 * (i + 1 + j);  // average of ranks i+1..j
    for (int k = i; k < j; ++k)
      if (pooled[static_cast<std::size_t>(k)].sample == 0) r1 += midrank;
    i = j;
  }
  const double u = r1 - 0.5 * n1 * (n1 + 1);
  const double mean_u = 0.5 * n1 * n2;

  MannWhitneyResult result;
  result.u = u;
  result.exact = !has_ties && n <= 16;

  if (result.exact) {
    const auto counts = mann_whitney_counts(n1, n2);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u_obs = static_cast<int>(std::llround(u));
    double p = 0.0;
    switch (alt) {
      case Alternative::Greater:
        for (int v = u_obs; v <= n1 * n2; ++v) p += counts[static_cast<std::size_t>(v)];
        break;
      case Alternative::Less:
        for (int v = 0; v <= u_obs; ++v) p += counts[static_cast<std::size_t>(v)];
        break;
      case Alternative::TwoSided: {
        const double dev = std::fabs(u_obs - mean_u);
        for (int v = 0; v <= n1 * n2; ++v)
          if (std::fabs(v - mean_u) >= dev - 1e-12) p += counts[static_cast<std::size_t>(v)];
        break;
      }
    }
    result.p = p / total;
    return result;
  }

  // Normal approximation with tie and continuity corrections.
  const double var_u = (static_cast<double>(n1) * n2 / 12.0) *
                       (n + 1.0 - tie_term / (static_cast<double>(n) * (n - 1)));
  if (var_u <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double sd = std::sqrt(var_u);
  switch (alt) {
    case Alternative::Greater:
      result.p = 1.0 - normal_cdf((u - mean_u - 0.5) / sd);
      break;
    case Alternative::Less:
      result.p = normal_cdf((u - mean_u + 0.5) / sd);
      break;
    case Alternative::TwoSided:
      result.p = std::min(1.0, 2.0 * (1.0 - normal_cdf((std::fabs(u - mean_u) - 0.5) / sd)));
      break;
  }
  return result;
}

Linkage average_linkage(const Matrix& dist) {
  const Index n = dist.rows();
  if (dist.cols() != n || n < 1) throw std::invalid_argument("distance matrix must be square");
  Linkage linkage;
  linkage.n = static_cast<int>(n);
  if (n == 1) return linkage;

  Matrix d = dist;
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<double> size(static_cast<std::size_t>(n), 1.0);
  std::vector<int> node_id(static_cast<std::size_t>(n));
  std::iota(node_id.begin(), node_id.end(), 0);

  struct RawMerge {
    int left, right;
    double height;
    int size;
  };
  std::vector<RawMerge> raw;
  raw.reserve(static_cast<std::size_t>(n) - 1);

  std::vector<int> chain;
  chain.reserve(static_cast<std::size_t>(n));
  int next_id = static_cast<int>(n);
  int remaining = static_cast<int>(n);

  auto nearest = [&](int a) {
    int best = -1;
    double best_d = kInf;
    for (Index c = 0; c < n; ++c) {
      if (!active[static_cast<std::size_t>(c)] || static_cast<int>(c) == a) continue;
      if (d(a, c) < best_d) {
        best_d = d(a, c);
        best = static_cast<int>(c);
      }
    }
    return best;
  };

  while (remaining > 1) {
    if (chain.empty()) {
      for (Index i = 0; i < n; ++i)
        if (active[static_cast<std::size_t>(i)]) {
          chain.push_back(static_cast<int>(i));
          break;
        }
    }
    for (;;) {
      const int a = chain.back();
      const int b = nearest(a);
      if (chain.size() >= 2 && b == chain[chain.size() - 2]) {
        // Reciprocal nearest neighbours: merge a and b.
        chain.pop_back();
        chain.pop_back();
        const int lo = std::min(a, b), hi = std::max(a, b);
        const double height = d(a, b);
        const double sz = size[static_cast<std::size_t>(lo)] + size[static_cast<std::size_t>(hi)];
        const int left_node = std::min(node_id[static_cast<std::size_t>(lo)],
                                       node_id[static_cast<std::size_t>(hi)]);
        const int right_node = std::max(node_id[static_cast<std::size_t>(lo)],
                                        node_id[static_cast<std::size_t>(hi)]);
        raw.push_back({left_node, right_node, height, static_cast<int>(sz)});
        // Lance-Williams average-linkage update into slot `lo`.
        for (Index c = 0; c < n; ++c) {
          if (!active[static_cast<std::size_t>(c)] || static_cast<int>(c) == lo ||
              static_cast<int>(c) == hi)
            continue;
          const double mixed = (size[static_cast<std::size_t>(lo)] * d(lo, c) +
                                size[static_cast<std::size_t>(hi)] * d(hi, c)) /
                               sz;
          d(lo, c) = mixed;
          d(c, lo) = mixed;
        }
        active[static_cast<std::size_t>(hi)] = false;
        size[static_cast<std::size_t>(lo)] = sz;
        node_id[static_cast<std::size_t>(lo)] = next_id++;
        --remaining;
        break;
      }
      chain.push_back(b);
    }
  }

  // Sort merges by height (stable on creation order) and remap node ids to
  // the sorted positions.
  std::vector<int> perm(raw.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    return raw[static_cast<std::size_t>(a)].height < raw[static_cast<std::size_t>(b)].height;
  });
  std::vector<int> position(raw.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos)
    position[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos);

  auto remap = [&](int id) {
    return id < static_cast<int>(n)
               ? id
               : static_cast<int>(n) + position[static_cast<std::size_t>(id - n)];
  };
  linkage.merges.reserve(raw.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    const RawMerge& m = raw[static_cast<std::size_t>(perm[pos])];
    const int l = remap(m.left), r = remap(m.right);
    linkage.merges.push_back({std::min(l, r), std::max(l, r), m.height, m.size});
  }
  return linkage;
}

IntVector cut_linkage(const Linkage& linkage, int k) {
  const int n = linkage.n;
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  // Each merge node maps to a representative leaf.
  std::vector<int> rep(static_cast<std::size_t>(n) + linkage.merges.size());
  std::iota(rep.begin(), rep.begin() + n, 0);
  const int n_merges = std::max(0, n - k);
  for (int t = 0; t < static_cast<int>(linkage.merges.size()); ++t) {
    const auto& m = linkage.merges[static_cast<std::size_t>(t)];
    const int a = rep[static_cast<std::size_t>(m.left)];
    const int b = rep[static_cast<std::size_t>(m.right)];
    if (t < n_merges) parent[static_cast<std::size_t>(find(a))] = find(b);
    rep[static_cast<std::size_t>(n + t)] = find(a);
  }
  IntVector labels(n);
  for (int i = 0; i < n; ++i) labels[i] = find(i);
  return canonical_labels(labels);
}

std::vector<int> linkage_leaf_order(const Linkage& linkage) {
  const int n = linkage.n;
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  if (linkage.merges.empty()) {
    for (int i = 0; i < n; ++i) order.push_back(i);
    return order;
  }
  std::vector<int> stack{n + static_cast<int>(linkage.merges.size()) - 1};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (node < n) {
      order.push_back(node);
    } else {
      const auto& m = linkage.merges[static_cast<std::size_t>(node - n)];
      stack.push_back(m.right);  // left child is visited first
      stack.push_back(m.left);
    }
  }
  return order;
}

std::vector<int> heatmap_order(const Matrix& psm) {
  const Index n = psm.rows();
  if (psm.cols() != n) throw std::invalid_argument("psm must be square");
  return linkage_leaf_order(average_linkage(Matrix::Ones(n, n) - psm));
}

}  // namespace hidalgo
