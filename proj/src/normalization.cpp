#include "stagnn/normalization.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "stagnn/errors.hpp"
#include "stagnn/rng.hpp"

namespace stagnn {
namespace {

double dist2(const OpVector& a, const OpVector& b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

std::vector<OpVector> kmeanspp_seeds(const std::vector<OpVector>& points, int k,
                                     std::mt19937_64& rng) {
  std::vector<OpVector> seeds;
  seeds.reserve(static_cast<std::size_t>(k));
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  seeds.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const OpVector& s : seeds) best = std::min(best, dist2(points[i], s));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      throw ClusteringError("k-means++ ran out of distinct points while seeding");
    }
    // D^2 weighted pick over points that are not already seeds
    const double r = unit(rng) * total;
    double acc = 0.0;
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      acc += d2[i];
      if (acc >= r) break;
    }
    seeds.push_back(points[pick]);
  }
  return seeds;
}

}  // namespace

int assign_cluster(const std::vector<OpVector>& centroids, const OpVector& p) {
  int best = 0;
  double best_d = dist2(centroids[0], p);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = dist2(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult fit_kmeans(const std::vector<OpVector>& points, int k, std::uint64_t seed,
                        int max_iters, double tol) {
  if (k < 1) throw ParameterError("cluster count must be >= 1");
  if (points.empty()) throw ClusteringError("no points to cluster");
  {
    std::set<OpVector> distinct(points.begin(), points.end());
    if (static_cast<int>(distinct.size()) < k) {
      throw ClusteringError("requested " + std::to_string(k) + " clusters but only " +
                            std::to_string(distinct.size()) + " distinct points exist");
    }
  }

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = kmeanspp_seeds(points, k, rng);
  res.assignment.assign(points.size(), 0);

  for (int iter = 0; iter < max_iters; ++iter) {
    // assignment step
    bool changed = iter == 0;
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int a = assign_cluster(res.centroids, points[i]);
      if (a != res.assignment[i]) changed = true;
      res.assignment[i] = a;
      inertia += dist2(res.centroids[static_cast<std::size_t>(a)], points[i]);
    }
    res.inertia_trace.push_back(inertia);
    res.iterations = iter + 1;
    if (!changed && iter > 0) break;

    // update step
    std::vector<OpVector> next(static_cast<std::size_t>(k), OpVector{});
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& c = next[static_cast<std::size_t>(res.assignment[i])];
      for (std::size_t d = 0; d < c.size(); ++d) c[d] += points[i][d];
      ++counts[static_cast<std::size_t>(res.assignment[i])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        for (std::size_t d = 0; d < 3; ++d) {
          next[static_cast<std::size_t>(c)][d] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
      } else {
        // re-seed an empty cluster from the point farthest from its centroid
        double worst = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d = dist2(res.centroids[static_cast<std::size_t>(res.assignment[i])], points[i]);
          if (d > worst) {
            worst = d;
            pick = i;
          }
        }
        next[static_cast<std::size_t>(c)] = points[pick];
      }
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      shift = std::max(shift, dist2(res.centroids[static_cast<std::size_t>(c)],
                                    next[static_cast<std::size_t>(c)]));
    }
    res.centroids = std::move(next);
    if (shift < tol) {
      // one final assignment pass so assignment matches the centroids
      double final_inertia = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        res.assignment[i] = assign_cluster(res.centroids, points[i]);
        final_inertia += dist2(res.centroids[static_cast<std::size_t>(res.assignment[i])], points[i]);
      }
      res.inertia_trace.push_back(final_inertia);
      ++res.iterations;
      break;
    }
  }
  return res;
}

NormStats fit_norm(const std::vector<Trajectory>& train, NormMode mode, int k,
                   std::uint64_t seed) {
  if (train.empty()) throw ParameterError("cannot fit normalization on an empty training set");
  if (mode == NormMode::kUnified) {
    k = 1;  // unified scaling is the single-cluster special case
  }
  if (k < 1) throw ParameterError("cluster count must be >= 1");

  std::vector<OpVector> ops;
  for (const Trajectory& tr : train) {
    for (const auto& row : tr.rows) {
      ops.push_back({row[0], row[1], row[2]});
    }
  }

  const KMeansResult km = fit_kmeans(ops, k, seed);

  NormStats stats;
  stats.mode = mode;
  stats.k = k;
  stats.seed = seed;
  stats.centroids = km.centroids;
  stats.ch_min.assign(static_cast<std::size_t>(k),
                      [] { std::array<double, kChannels> a{}; a.fill(std::numeric_limits<double>::infinity()); return a; }());
  stats.ch_max.assign(static_cast<std::size_t>(k),
                      [] { std::array<double, kChannels> a{}; a.fill(-std::numeric_limits<double>::infinity()); return a; }());

  std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
  std::size_t cycle = 0;
  for (const Trajectory& tr : train) {
    for (const auto& row : tr.rows) {
      const std::size_t c = static_cast<std::size_t>(km.assignment[cycle++]);
      ++counts[c];
      for (int ch = 0; ch < kChannels; ++ch) {
        stats.ch_min[c][static_cast<std::size_t>(ch)] =
            std::min(stats.ch_min[c][static_cast<std::size_t>(ch)], row[static_cast<std::size_t>(ch)]);
        stats.ch_max[c][static_cast<std::size_t>(ch)] =
            std::max(stats.ch_max[c][static_cast<std::size_t>(ch)], row[static_cast<std::size_t>(ch)]);
      }
    }
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw ClusteringError("cluster " + std::to_string(c) + " has no training cycles");
    }
  }
  return stats;
}

std::vector<Trajectory> apply_norm(const NormStats& stats, const std::vector<Trajectory>& trajs) {
  std::vector<Trajectory> out;
  out.reserve(trajs.size());
  for (const Trajectory& tr : trajs) {
    Trajectory norm;
    norm.unit_id = tr.unit_id;
    norm.rows.reserve(tr.rows.size());
    for (const auto& row : tr.rows) {
      const std::size_t c =
          static_cast<std::size_t>(assign_cluster(stats.centroids, {row[0], row[1], row[2]}));
      std::array<double, kChannels> scaled{};
      for (int ch = 0; ch < kChannels; ++ch) {
        const double lo = stats.ch_min[c][static_cast<std::size_t>(ch)];
        const double hi = stats.ch_max[c][static_cast<std::size_t>(ch)];
        const double range = hi - lo;
        scaled[static_cast<std::size_t>(ch)] =
            range == 0.0 ? 0.0 : (row[static_cast<std::size_t>(ch)] - lo) / range;
      }
      norm.rows.push_back(scaled);
    }
    out.push_back(std::move(norm));
  }
  return out;
}

namespace {

constexpr const char* kFormatTag = "norm_stats/1";

nlohmann::json array_of(const std::vector<OpVector>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : v) a.push_back(std::vector<double>(e.begin(), e.end()));
  return a;
}

nlohmann::json array_of(const std::vector<std::array<double, kChannels>>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : v) a.push_back(std::vector<double>(e.begin(), e.end()));
  return a;
}

template <std::size_t N>
std::vector<std::array<double, N>> arrays_from(const nlohmann::json& a, const char* what) {
  std::vector<std::array<double, N>> out;
  if (!a.is_array()) throw FormatError(std::string("norm stats: ") + what + " must be an array");
  for (const auto& row : a) {
    if (!row.is_array() || row.size() != N) {
      throw FormatError(std::string("norm stats: each ") + what + " row needs " +
                        std::to_string(N) + " values");
    }
    std::array<double, N> e{};
    for (std::size_t i = 0; i < N; ++i) e[i] = row[i].get<double>();
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::string norm_stats_to_json(const NormStats& stats) {
  nlohmann::json j;
  j["format"] = kFormatTag;
  j["mode"] = stats.mode == NormMode::kUnified ? "unified" : "clustered";
  j["k"] = stats.k;
  j["seed"] = stats.seed;
  j["centroids"] = array_of(stats.centroids);
  j["channel_min"] = array_of(stats.ch_min);
  j["channel_max"] = array_of(stats.ch_max);
  return j.dump(2) + "\n";
}

NormStats norm_stats_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("norm stats: invalid json: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != kFormatTag) {
    throw FormatError("norm stats: missing or unknown format tag");
  }
  NormStats stats;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "unified") {
    stats.mode = NormMode::kUnified;
  } else if (mode == "clustered") {
    stats.mode = NormMode::kClustered;
  } else {
    throw FormatError("norm stats: unknown mode '" + mode + "'");
  }
  stats.k = j.at("k").get<int>();
  stats.seed = j.at("seed").get<std::uint64_t>();
  stats.centroids = arrays_from<3>(j.at("centroids"), "centroid");
  stats.ch_min = arrays_from<kChannels>(j.at("channel_min"), "channel_min");
  stats.ch_max = arrays_from<kChannels>(j.at("channel_max"), "channel_max");
  if (static_cast<int>(stats.centroids.size()) != stats.k ||
      static_cast<int>(stats.ch_min.size()) != stats.k ||
      static_cast<int>(stats.ch_max.size()) != stats.k) {
    throw FormatError("norm stats: cluster count does not match k");
  }
  return stats;
}

void save_norm_stats(const std::filesystem::path& file, const NormStats& stats) {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot create " + file.string());
  out << norm_stats_to_json(stats);
}

NormStats load_norm_stats(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return norm_stats_from_json(text);
}

}  // namespace stagnn
