#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "newsbias/embedding.h"

namespace newsbias {

struct KMeansOptions {
  int k = 3;
  uint64_t seed = 42;
  int max_iterations = 100;
  // Stop once no centroid moves farther than this (Euclidean).
  double tolerance = 1e-9;
};

struct KMeansResult {
  // Cluster index per point, in [0, k).
  std::vector<int> assignment;
  std::vector<Vector> centroids;
  int iterations = 0;
  bool converged = false;
  // Number of clusters actually seeded: min(k, points, distinct points).
  int effective_k = 0;
};

// Lloyd's algorithm with k-means++ seeding from a fixed-seed mt19937_64.
// Fewer distinct points than k yields that many non-empty clusters and leaves
// the remaining clusters empty (centroids are zero vectors). A cluster that
// empties during iteration is refilled with the point farthest from its
// assigned centroid. Centroids are the means of the returned assignment.
// Deterministic for equal input and seed.
KMeansResult kmeans(std::span<const Vector> points, const KMeansOptions &options = {});

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace newsbias
