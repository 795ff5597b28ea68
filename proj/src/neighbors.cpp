#include "hidalgo/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hidalgo/rng.hpp"

namespace hidalgo {

Metric metric_from_string(const std::string& name) {
  if (name == "euclidean" || name == "l2") return Metric::Euclidean;
  if (name == "manhattan" || name == "l1") return Metric::Manhattan;
  throw std::invalid_argument("unknown metric: " + name);
}

namespace {

// Shared scalar kernel so the brute-force and kd-tree paths accumulate in
// the same order and agree bit for bit. Euclidean distances are compared in
// squared form and rooted once at the end.
double pair_key(const Matrix& x, Index i, Index j, Metric metric) {
  const Index d = x.cols();
  double acc = 0.0;
  if (metric == Metric::Euclidean) {
    for (Index k = 0; k < d; ++k) {
      const double diff = x(i, k) - x(j, k);
      acc += diff * diff;
    }
  } else {
    for (Index k = 0; k < d; ++k) acc += std::fabs(x(i, k) - x(j, k));
  }
  return acc;
}

double key_to_distance(double key, Metric metric) {
  return metric == Metric::Euclidean ? std::sqrt(key) : key;
}

struct Candidate {
  double key;
  int index;

  bool operator<(const Candidate& other) const {
    return key < other.key || (key == other.key && index < other.index);
  }
};

NeighborGraph finalize(const Matrix& x, std::vector<std::vector<Candidate>>& best,
                       int q_max, Metric metric) {
  const Index n = x.rows();
  NeighborGraph graph;
  graph.q_max = q_max;
  graph.nn_index.resize(n, q_max);
  graph.nn_dist.resize(n, q_max);
  for (Index i = 0; i < n; ++i) {
    auto& row = best[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end());
    if (row[0].key == 0.0)
      throw DuplicatePoints("observations " + std::to_string(i) + " and " +
                            std::to_string(row[0].index) +
                            " coincide; the TWO-NN ratio is undefined");
    for (int j = 0; j < q_max; ++j) {
      graph.nn_index(i, j) = row[static_cast<std::size_t>(j)].index;
      graph.nn_dist(i, j) = key_to_distance(row[static_cast<std::size_t>(j)].key, metric);
    }
  }
  return graph;
}

void check_preconditions(const Dataset& data, int q_max) {
  validate(data);
  if (q_max < 2) throw std::invalid_argument("q_max must be at least 2");
  if (data.rows() <= q_max)
    throw std::invalid_argument("need more than q_max observations");
}

// Bounded best-q list ordered by (key, index).
class BestList {
 public:
  BestList(int capacity) : capacity_(capacity) { entries_.reserve(capacity + 1); }

  double worst_key() const {
    return full() ? entries_.back().key : std::numeric_limits<double>::infinity();
  }
  bool full() const { return static_cast<int>(entries_.size()) == capacity_; }

  void offer(Candidate c) {
    if (full() && !(c < entries_.back())) return;
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), c);
    entries_.insert(pos, c);
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_back();
  }

  std::vector<Candidate> take() { return std::move(entries_); }

 private:
  int capacity_;
  std::vector<Candidate> entries_;  // kept sorted
};

struct KdNode {
  int left = -1;
  int right = -1;
  int split_dim = -1;
  double split_value = 0.0;
  int begin = 0;  // leaf range into the permutation array
  int end = 0;
};

class KdTree {
 public:
  KdTree(const Matrix& points, Metric metric) : x_(points), metric_(metric) {
    perm_.resize(static_cast<std::size_t>(x_.rows()));
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(2 * perm_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(perm_.size()));
  }

  std::vector<Candidate> query(Index i, int q) const {
    BestList best(q);
    Vector box_lo = Vector::Constant(x_.cols(), -std::numeric_limits<double>::infinity());
    Vector box_hi = Vector::Constant(x_.cols(), std::numeric_limits<double>::infinity());
    search(root_, i, best, box_lo, box_hi, 0.0);
    return best.take();
  }

 private:
  static constexpr int kLeafSize = 16;

  int build(int begin, int end) {
    KdNode node;
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    // Split the widest dimension at the median, ties on coordinate broken by
    // index so the permutation is deterministic.
    int dim = 0;
    double width = -1.0;
    for (Index k = 0; k < x_.cols(); ++k) {
      double lo = x_(perm_[static_cast<std::size_t>(begin)], k);
      double hi = lo;
      for (int t = begin + 1; t < end; ++t) {
        const double v = x_(perm_[static_cast<std::size_t>(t)], k);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > width) {
        width = hi - lo;
        dim = static_cast<int>(k);
      }
    }
    const int mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](int a, int b) {
                       const double va = x_(a, dim), vb = x_(b, dim);
                       return va < vb || (va == vb && a < b);
                     });
    nodes_[static_cast<std::size_t>(id)].split_dim = dim;
    nodes_[static_cast<std::size_t>(id)].split_value = x_(perm_[static_cast<std::size_t>(mid)], dim);
    nodes_[static_cast<std::size_t>(id)].left = build(begin, mid);
    nodes_[static_cast<std::size_t>(id)].right = build(mid, end);
    return id;
  }

  // Distance key from the query point to an axis-aligned box.
  double box_key(Index i, const Vector& lo, const Vector& hi) const {
    double acc = 0.0;
    for (Index k = 0; k < x_.cols(); ++k) {
      double gap = 0.0;
      if (x_(i, k) < lo[k])
        gap = lo[k] - x_(i, k);
      else if (x_(i, k) > hi[k])
        gap = x_(i, k) - hi[k];
      if (metric_ == Metric::Euclidean)
        acc += gap * gap;
      else
        acc += gap;
    }
    return acc;
  }

  void search(int id, Index i, BestList& best, Vector& box_lo, Vector& box_hi,
              double box_dist) const {
    // Prune only on strictly worse boxes: equal keys must still be visited
    // so index tie-breaks match the brute-force scan.
    if (best.full() && box_dist > best.worst_key()) return;
    const KdNode& node = nodes_[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      for (int t = node.begin; t < node.end; ++t) {
        const int j = perm_[static_cast<std::size_t>(t)];
        if (j == static_cast<int>(i)) continue;
        best.offer({pair_key(x_, i, j, metric_), j});
      }
      return;
    }
    const int dim = node.split_dim;
    const double split = node.split_value;
    const bool left_first = x_(i, dim) < split;
    for (int pass = 0; pass < 2; ++pass) {
      const bool go_left = (pass == 0) == left_first;
      if (go_left) {
        const double saved = box_hi[dim];
        box_hi[dim] = std::min(saved, split);
        search(node.left, i, best, box_lo, box_hi, box_key(i, box_lo, box_hi));
        box_hi[dim] = saved;
      } else {
        const double saved = box_lo[dim];
        box_lo[dim] = std::max(saved, split);
        search(node.right, i, best, box_lo, box_hi, box_key(i, box_lo, box_hi));
        box_lo[dim] = saved;
      }
    }
  }

  const Matrix& x_;
  Metric metric_;
  std::vector<int> perm_;
  std::vector<KdNode> nodes_;
  int root_ = 0;
};

}  // namespace

NeighborGraph build_knn_graph(const Dataset& data, int q_max, Metric metric) {
  check_preconditions(data, q_max);
  const Matrix& x = data.points;
  const Index n = x.rows();
  std::vector<std::vector<Candidate>> best(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    BestList list(q_max);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      list.offer({pair_key(x, i, j, metric), static_cast<int>(j)});
    }
    best[static_cast<std::size_t>(i)] = list.take();
  }
  return finalize(x, best, q_max, metric);
}

NeighborGraph build_knn_graph_kdtree(const Dataset& data, int q_max, Metric metric) {
  check_preconditions(data, q_max);
  const Matrix& x = data.points;
  const Index n = x.rows();
  KdTree tree(x, metric);
  std::vector<std::vector<Candidate>> best(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) best[static_cast<std::size_t>(i)] = tree.query(i, q_max);
  return finalize(x, best, q_max, metric);
}

Vector compute_mu(const NeighborGraph& graph) {
  if (graph.q_max < 2) throw std::invalid_argument("graph needs q_max >= 2");
  const Index n = graph.size();
  Vector mu(n);
  for (Index i = 0; i < n; ++i) {
    const double r1 = graph.nn_dist(i, 0);
    const double r2 = graph.nn_dist(i, 1);
    if (r1 <= 0.0)
      throw DuplicatePoints("observation " + std::to_string(i) +
                            " has a zero first-NN distance");
    mu[i] = r2 / r1;
  }
  return mu;
}

AdjacencyMatrix build_adjacency(const NeighborGraph& graph, int q) {
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  if (q > graph.q_max)
    throw std::invalid_argument("q = " + std::to_string(q) + " exceeds q_max = " +
                                std::to_string(graph.q_max));
  AdjacencyMatrix adj;
  adj.q = q;
  adj.rows = graph.nn_index.leftCols(q);
  return adj;
}

Dataset jittered(const Dataset& data, std::uint64_t seed) {
  Dataset out = data;
  const double lo = data.points.minCoeff();
  const double hi = data.points.maxCoeff();
  double scale = hi - lo;
  if (scale <= 0.0) scale = std::max(std::fabs(hi), 1.0);
  const double magnitude = 1e-8 * scale;
  Rng rng(seed);
  for (Index i = 0; i < out.points.rows(); ++i)
    for (Index j = 0; j < out.points.cols(); ++j)
      out.points(i, j) += magnitude * (2.0 * rng.uniform() - 1.0);
  return out;
}

}  // namespace hidalgo
