#pragma once

#include <map>
#include <vector>

#include "hidalgo/sampler.hpp"
#include "hidalgo/types.hpp"

namespace hidalgo {

/// Per-observation ID summaries over the chain of d values routed through
/// z_i^t; label switching cannot affect them by construction.
struct IdEstimates {
  Vector mean_id;
  Vector median_id;
  Vector lower;  // 2.5% quantile
  Vector upper;  // 97.5% quantile
};

IdEstimates per_observation_id(const PosteriorTrace& trace);

/// Posterior similarity: entry (i,j) is the fraction of retained sweeps with
/// z_i = z_j. Symmetric, unit diagonal.
Matrix coclustering_matrix(const PosteriorTrace& trace);

enum class PartitionLoss { Binder, VI };

/// Minimizes the posterior expected loss over all distinct sampled
/// partitions plus average-linkage cuts of 1 - psm at K' in {1..10}.
/// Returned labels are 0-based and canonical (first appearance order).
IntVector point_partition(const Matrix& psm, const PosteriorTrace& trace,
                          PartitionLoss loss);

double binder_expected_loss(const IntVector& candidate, const Matrix& psm);
double vi_expected_loss(const IntVector& candidate, const PosteriorTrace& trace);

/// Variation of information between two partitions, natural log.
double vi_distance(const IntVector& a, const IntVector& b);

/// Mutual information normalized by the arithmetic mean of the entropies;
/// 1 when both partitions are identical up to relabeling.
double normalized_mutual_information(const IntVector& a, const IntVector& b);

struct KmeansQualityRow {
  int g;
  double silhouette;
  double calinski_harabasz;
  double wcss;
};

struct KmeansResult {
  IntVector labels;
  int chosen_g = 0;
  std::vector<KmeansQualityRow> table;
};

/// 1-D k-means over per-observation median IDs with deterministic quantile
/// initialization; G picked by maximum Silhouette.
KmeansResult kmeans_id_clusters(const Vector& median_id, const std::vector<int>& g_range);

struct KSelectionRow {
  int K;
  double mean_log_posterior;
};

struct KSelection {
  int k_star = 0;
  std::vector<KSelectionRow> table;
};

/// argmax over K of the mean retained log posterior; ties toward smaller K.
/// Traces must carry identical data checksums.
KSelection select_K(const std::map<int, const PosteriorTrace*>& traces);

enum class Alternative { TwoSided, Greater, Less };

struct MannWhitneyResult {
  double u;      // rank-sum U of the first sample, midranks for ties
  double p;
  bool exact;    // enumeration (n1+n2 <= 16, tie-free) vs normal approximation
};

MannWhitneyResult mann_whitney(const Vector& xs, const Vector& ys, Alternative alt);

/// Average-linkage dendrogram with merges sorted by height.
struct Linkage {
  struct Merge {
    int left;       // node ids: 0..n-1 leaves, then n+t for merge t
    int right;
    double height;
    int size;
  };
  int n = 0;
  std::vector<Merge> merges;  // n-1 entries
};

Linkage average_linkage(const Matrix& dist);
IntVector cut_linkage(const Linkage& linkage, int k);
std::vector<int> linkage_leaf_order(const Linkage& linkage);

/// Leaf order of average-linkage clustering on 1 - psm, for heatmap export.
std::vector<int> heatmap_order(const Matrix& psm);

}  // namespace hidalgo
