#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stagnn/dataset.hpp"

namespace stagnn {

using OpVector = std::array<double, kOpSettings>;

struct KMeansResult {
  std::vector<OpVector> centroids;
  std::vector<int> assignment;        // per input point
  std::vector<double> inertia_trace;  // sum of squared distances after each iteration
  int iterations = 0;
  double inertia() const { return inertia_trace.empty() ? 0.0 : inertia_trace.back(); }
};

// Lloyd iterations from k-means++ seeding. Deterministic for a fixed seed:
// ties assign to the lowest cluster index and empty clusters are re-seeded
// from the point farthest from its current centroid. Throws ClusteringError
// when there are fewer distinct points than clusters.
KMeansResult fit_kmeans(const std::vector<OpVector>& points, int k, std::uint64_t seed,
                        int max_iters = 100, double tol = 1e-12);

// nearest centroid, ties resolved to the lowest index
int assign_cluster(const std::vector<OpVector>& centroids, const OpVector& p);

enum class NormMode { kUnified, kClustered };

// Per-cluster, per-channel min-max ranges fitted on training data only.
// Unified scaling is the K = 1 special case and runs through the identical
// code path, so the two agree bitwise for K = 1.
struct NormStats {
  NormMode mode = NormMode::kUnified;
  int k = 1;
  std::uint64_t seed = 0;
  std::vector<OpVector> centroids;                     // k entries
  std::vector<std::array<double, kChannels>> ch_min;   // per cluster
  std::vector<std::array<double, kChannels>> ch_max;
};

NormStats fit_norm(const std::vector<Trajectory>& train, NormMode mode, int k,
                   std::uint64_t seed);

// x -> (x - min) / (max - min) with the row's cluster ranges; channels with
// max == min map to 0. Values outside the training range are not clipped.
std::vector<Trajectory> apply_norm(const NormStats& stats, const std::vector<Trajectory>& trajs);

// exact round-trip text serialization
std::string norm_stats_to_json(const NormStats& stats);
NormStats norm_stats_from_json(const std::string& text);
void save_norm_stats(const std::filesystem::path& file, const NormStats& stats);
NormStats load_norm_stats(const std::filesystem::path& file);

}  // namespace stagnn
