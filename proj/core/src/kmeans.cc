#include "newsbias/kmeans.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "newsbias/error.h"

namespace newsbias {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

// k-means++: first center uniform, then proportional to squared distance to
// the nearest chosen center. Stops early when all remaining mass is zero.
std::vector<Vector> seed_centers(std::span<const Vector> points, int k, std::mt19937_64 &rng) {
  std::vector<Vector> centers;
  std::uniform_int_distribution<size_t> first(0, points.size() - 1);
  centers.push_back(points[first(rng)]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vector &c : centers) best = std::min(best, squared_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> pick(0.0, total);
    double r = pick(rng);
    size_t chosen = points.size() - 1;
    double acc = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      acc += d2[i];
      if (d2[i] > 0.0 && r < acc) {
        chosen = i;
        break;
      }
    }
    while (d2[chosen] == 0.0) --chosen;  // the last positive-mass point
    centers.push_back(points[chosen]);
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(std::span<const Vector> points, const KMeansOptions &options) {
  if (options.k <= 0) throw Error("k-means requires k > 0");
  KMeansResult result;
  const int k = options.k;
  if (points.empty()) {
    result.converged = true;
    return result;
  }
  const size_t dim = points.front().size();
  for (const Vector &p : points) {
    if (p.size() != dim) throw Error("k-means points must share one dimension");
  }

  std::mt19937_64 rng(options.seed);
  std::vector<Vector> centers = seed_centers(points, std::min<int>(k, points.size()), rng);
  const int active = static_cast<int>(centers.size());
  result.effective_k = active;
  std::vector<int> assign(points.size(), 0);

  auto nearest = [&](const Vector &p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < active; ++c) {
      double d = squared_distance(p, centers[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best;
  };

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    for (size_t i = 0; i < points.size(); ++i) assign[i] = nearest(points[i]);

    // Refill clusters that lost all members.
    std::vector<int> counts(active, 0);
    for (int a : assign) ++counts[a];
    for (int c = 0; c < active; ++c) {
      if (counts[c] > 0) continue;
      size_t far = 0;
      double far_d = -1.0;
      for (size_t i = 0; i < points.size(); ++i) {
        if (counts[assign[i]] <= 1) continue;
        double d = squared_distance(points[i], centers[assign[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d <= 0.0) continue;
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
    }

    std::vector<Vector> next(active, Vector(dim, 0.0));
    for (size_t i = 0; i < points.size(); ++i) {
      for (size_t d = 0; d < dim; ++d) next[assign[i]][d] += points[i][d];
    }
    double max_shift = 0.0;
    for (int c = 0; c < active; ++c) {
      if (counts[c] == 0) {
        next[c] = centers[c];
        continue;
      }
      for (double &x : next[c]) x /= counts[c];
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next[c], centers[c])));
    }
    centers = std::move(next);
    if (max_shift < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.assignment = std::move(assign);
  result.centroids = std::move(centers);
  result.centroids.resize(k, Vector(dim, 0.0));
  return result;
}

}  // namespace newsbias
