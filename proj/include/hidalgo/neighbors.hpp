#pragma once

#include <cstdint>
#include <string>

#include "hidalgo/types.hpp"

namespace hidalgo {

enum class Metric { Euclidean, Manhattan };

Metric metric_from_string(const std::string& name);

/// Ordered nearest-neighbour structure: row i holds the q_max nearest
/// neighbours of observation i, closest first.
struct NeighborGraph {
  IntMatrix nn_index;  // N x q_max, never contains the row itself
  Matrix nn_dist;      // N x q_max, nondecreasing along each row
  int q_max = 0;

  Index size() const { return nn_index.rows(); }
};

/// First-q-NN adjacency: row i lists the q nearest neighbours of i.
/// Binary N x N semantics; every row has exactly q entries and the
/// matrix is in general not symmetric.
struct AdjacencyMatrix {
  IntMatrix rows;  // N x q
  int q = 0;

  Index size() const { return rows.rows(); }
};

/// Exact k-nearest neighbours with ties broken by ascending row index.
/// Throws DuplicatePoints if any first-NN distance is zero.
NeighborGraph build_knn_graph(const Dataset& data, int q_max,
                              Metric metric = Metric::Euclidean);

/// Same contract through a kd-tree; agrees with build_knn_graph bit for bit,
/// tie-breaks included.
NeighborGraph build_knn_graph_kdtree(const Dataset& data, int q_max,
                                     Metric metric = Metric::Euclidean);

/// TWO-NN ratios mu_i = r_i2 / r_i1 >= 1.
Vector compute_mu(const NeighborGraph& graph);

AdjacencyMatrix build_adjacency(const NeighborGraph& graph, int q);

/// Copy of the data with uniform noise of magnitude 1e-8 x data scale added
/// to every coordinate, for callers that want to break exact duplicates.
Dataset jittered(const Dataset& data, std::uint64_t seed);

}  // namespace hidalgo
