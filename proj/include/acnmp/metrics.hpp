#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "acnmp/trajectory.hpp"

namespace acnmp {

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

/// Dynamic time warping distance between two point sequences with Euclidean
/// local cost: the accumulated cost of the cheapest monotone alignment.
inline double dtw_distance(const std::vector<std::vector<double>>& a,
                           const std::vector<std::vector<double>>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw_distance: empty sequence");
  if (a.front().size() != b.front().size())
    throw std::invalid_argument("dtw_distance: dimension mismatch");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = euclidean(a[i - 1], b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline double dtw_distance(const Trajectory& a, const Trajectory& b) {
  return dtw_distance(a.values, b.values);
}

/// Smallest DTW distance from traj to any member of the set.
inline double dtw_to_nearest(const Trajectory& traj, const DemonstrationSet& demos) {
  double best = std::numeric_limits<double>::infinity();
  for (const Trajectory& d : demos.trajectories) best = std::min(best, dtw_distance(traj, d));
  return best;
}

/// Mean silhouette score of the labelled points: s_i = (b_i - a_i) / max(a_i, b_i),
/// a_i the mean intra-cluster distance, b_i the smallest mean distance to
/// another cluster. Positive means points sit closer to their own cluster.
inline double silhouette_score(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& labels) {
  if (points.size() != labels.size() || points.empty())
    throw std::invalid_argument("silhouette_score: bad input");
  const std::size_t n = points.size();
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<int> cluster_size(k, 0);
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("silhouette_score: negative label");
    cluster_size[l] += 1;
  }

  double total = 0.0;
  std::size_t counted = 0;
  std::vector<double> mean_dist(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (cluster_size[labels[i]] < 2) continue;  // silhouette undefined for singletons
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist[labels[j]] += euclidean(points[i], points[j]);
    }
    double a = mean_dist[labels[i]] / (cluster_size[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == labels[i] || cluster_size[c] == 0) continue;
      b = std::min(b, mean_dist[c] / cluster_size[c]);
    }
    if (!std::isfinite(b)) continue;  // single populated cluster
    total += (b - a) / std::max(a, b);
    counted += 1;
  }
  if (counted == 0) throw std::invalid_argument("silhouette_score: needs >= 2 clusters");
  return total / static_cast<double>(counted);
}

/// Mean silhouette restricted to the points of one cluster.
inline double cluster_silhouette(const std::vector<std::vector<double>>& points,
                                 const std::vector<int>& labels, int cluster) {
  const std::size_t n = points.size();
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<int> cluster_size(k, 0);
  for (int l : labels) cluster_size[l] += 1;
  if (cluster < 0 || cluster >= k || cluster_size[cluster] < 2)
    throw std::invalid_argument("cluster_silhouette: cluster needs >= 2 points");

  double total = 0.0;
  int counted = 0;
  std::vector<double> mean_dist(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != cluster) continue;
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist[labels[j]] += euclidean(points[i], points[j]);
    }
    const double a = mean_dist[cluster] / (cluster_size[cluster] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == cluster || cluster_size[c] == 0) continue;
      b = std::min(b, mean_dist[c] / cluster_size[c]);
    }
    total += (b - a) / std::max(a, b);
    counted += 1;
  }
  return total / counted;
}

}  // namespace acnmp
