#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "stagnn/errors.hpp"
#include "stagnn/normalization.hpp"
#include "support/synthetic_cmapss.hpp"

using namespace stagnn;
namespace fs = std::filesystem;

namespace {

OpVector pt(double a, double b, double c) { return {a, b, c}; }

double dist2(const OpVector& a, const OpVector& b) {
  double acc = 0;
  for (int i = 0; i < 3; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// optimal 2-partition by exhaustive search; both sides non-empty
double brute_force_two_cluster_sse(const std::vector<OpVector>& pts, std::vector<int>* labels) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t m = 1; m + 1 < (1u << n); ++m) {
    OpVector c0{}, c1{};
    int n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m & (1u << i)) {
        for (int d = 0; d < 3; ++d) c1[d] += pts[i][d];
        ++n1;
      } else {
        for (int d = 0; d < 3; ++d) c0[d] += pts[i][d];
        ++n0;
      }
    }
    for (int d = 0; d < 3; ++d) {
      c0[d] /= n0;
      c1[d] /= n1;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += dist2(pts[i], (m & (1u << i)) ? c1 : c0);
    }
    if (sse < best) {
      best = sse;
      if (labels) {
        labels->assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) (*labels)[i] = (m & (1u << i)) ? 1 : 0;
      }
    }
  }
  return best;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  // two-cluster labelings are equal up to a label swap
  bool direct = true, swapped = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) direct = false;
    if (a[i] != 1 - b[i]) swapped = false;
  }
  return direct || swapped;
}

Trajectory make_traj(int unit, const std::vector<std::array<double, kChannels>>& rows) {
  Trajectory t;
  t.unit_id = unit;
  t.rows = rows;
  return t;
}

std::array<double, kChannels> row_with(double op1, double sensor0) {
  std::array<double, kChannels> r{};
  r[0] = op1;
  r[1] = 0.5;
  r[2] = 100.0;
  for (int i = 3; i < kChannels; ++i) r[static_cast<std::size_t>(i)] = sensor0 + i;
  return r;
}

}  // namespace

TEST_CASE("single cluster centroid is the mean") {
  std::vector<OpVector> pts = {pt(1, 2, 3), pt(3, 4, 5), pt(5, 6, 10)};
  const auto res = fit_kmeans(pts, 1, 99);
  CHECK(res.centroids.size() == 1);
  CHECK(res.centroids[0][0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(res.centroids[0][1] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(res.centroids[0][2] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(std::all_of(res.assignment.begin(), res.assignment.end(), [](int a) { return a == 0; }));
}

TEST_CASE("two planted clusters match the exhaustive optimum") {
  std::vector<OpVector> pts = {pt(0, 0, 0),    pt(0.1, 0, 0),  pt(0, 0.1, 0),  pt(0.05, 0.05, 0),
                               pt(10, 10, 10), pt(10.1, 10, 10), pt(10, 10.1, 10), pt(9.95, 10, 10)};
  std::vector<int> best_labels;
  const double best_sse = brute_force_two_cluster_sse(pts, &best_labels);

  const auto res = fit_kmeans(pts, 2, 7);
  CHECK(res.inertia() == doctest::Approx(best_sse).epsilon(1e-9));
  CHECK(same_partition(res.assignment, best_labels));
}

TEST_CASE("kmeans is deterministic per seed and assigns ties to the lowest index") {
  std::vector<OpVector> pts;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 40; ++i) pts.push_back(pt(d(rng), d(rng), d(rng)));

  const auto a = fit_kmeans(pts, 3, 123);
  const auto b = fit_kmeans(pts, 3, 123);
  CHECK(a.assignment == b.assignment);
  CHECK(std::memcmp(a.centroids.data(), b.centroids.data(), 3 * sizeof(OpVector)) == 0);

  // equidistant point goes to the lower cluster index
  std::vector<OpVector> cents = {pt(0, 0, 0), pt(2, 0, 0)};
  CHECK(assign_cluster(cents, pt(1, 0, 0)) == 0);
}

TEST_CASE("kmeans objective never increases and clusters stay populated") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(0, 50);
  std::vector<OpVector> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(pt(d(rng), d(rng), d(rng)));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto res = fit_kmeans(pts, 4, seed);
    for (std::size_t i = 1; i < res.inertia_trace.size(); ++i) {
      CHECK(res.inertia_trace[i] <= res.inertia_trace[i - 1] + 1e-9);
    }
    std::vector<int> counts(4, 0);
    for (int a : res.assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c : counts) CHECK(c > 0);
    // assignment is consistent with the returned centroids
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(res.assignment[i] == assign_cluster(res.centroids, pts[i]));
    }
  }
}

TEST_CASE("kmeans rejects degenerate inputs") {
  std::vector<OpVector> dup = {pt(1, 1, 1), pt(1, 1, 1), pt(1, 1, 1)};
  CHECK_THROWS_AS(fit_kmeans(dup, 2, 0), ClusteringError);
  CHECK_THROWS_AS(fit_kmeans(dup, 0, 0), ParameterError);
  CHECK_THROWS_AS(fit_kmeans({}, 1, 0), ClusteringError);
}

TEST_CASE("min-max scaling maps the training range onto [0, 1]") {
  std::vector<std::array<double, kChannels>> rows = {row_with(0.0, 2.0), row_with(0.0, 4.0),
                                                     row_with(0.0, 6.0)};
  const auto stats = fit_norm({make_traj(1, rows)}, NormMode::kUnified, 1, 5);
  const auto norm = apply_norm(stats, {make_traj(1, rows)});
  // sensor channel 3 held {5, 7, 9}
  CHECK(norm[0].rows[0][3] == 0.0);
  CHECK(norm[0].rows[1][3] == 0.5);
  CHECK(norm[0].rows[2][3] == 1.0);
  // op settings were constant, max == min maps to zero
  CHECK(norm[0].rows[0][0] == 0.0);
  CHECK(norm[0].rows[2][0] == 0.0);

  // values outside the training range are not clipped
  auto probe = rows;
  probe[0] = row_with(0.0, 10.0);  // sensor 3 becomes 13, above the max of 9
  const auto out = apply_norm(stats, {make_traj(2, probe)});
  CHECK(out[0].rows[0][3] == doctest::Approx(2.0));
}

TEST_CASE("unified equals single-cluster scaling bitwise") {
  const fs::path dir = fs::temp_directory_path() / "stagnn_norm_k1";
  fs::remove_all(dir);
  testsupport::SyntheticOptions opt;
  opt.n_train = 6;
  opt.n_test = 3;
  opt.regimes = 1;
  testsupport::write_corpus(dir, "U", opt);
  const auto trajs = parse_trajectories(dir / "train_U.txt");

  const auto unified = fit_norm(trajs, NormMode::kUnified, 1, 42);
  const auto clustered = fit_norm(trajs, NormMode::kClustered, 1, 42);
  CHECK(std::memcmp(unified.centroids.data(), clustered.centroids.data(), sizeof(OpVector)) == 0);
  CHECK(std::memcmp(unified.ch_min.data(), clustered.ch_min.data(), sizeof(double) * kChannels) == 0);
  CHECK(std::memcmp(unified.ch_max.data(), clustered.ch_max.data(), sizeof(double) * kChannels) == 0);

  const auto nu = apply_norm(unified, trajs);
  const auto nc = apply_norm(clustered, trajs);
  for (std::size_t u = 0; u < nu.size(); ++u) {
    for (std::size_t t = 0; t < nu[u].rows.size(); ++t) {
      CHECK(std::memcmp(nu[u].rows[t].data(), nc[u].rows[t].data(), sizeof(double) * kChannels) == 0);
    }
  }
}

TEST_CASE("clustered scaling keeps all training values in [0, 1] across regimes") {
  const fs::path dir = fs::temp_directory_path() / "stagnn_norm_regimes";
  fs::remove_all(dir);
  testsupport::SyntheticOptions opt;
  opt.n_train = 10;
  opt.n_test = 4;
  opt.regimes = 6;
  testsupport::write_corpus(dir, "R", opt);
  const auto trajs = parse_trajectories(dir / "train_R.txt");

  const auto stats = fit_norm(trajs, NormMode::kClustered, 6, 11);
  REQUIRE(stats.centroids.size() == 6);
  const auto norm = apply_norm(stats, trajs);
  for (const auto& tr : norm) {
    for (const auto& row : tr.rows) {
      for (double v : row) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }

  // every cycle sits essentially on its regime centroid
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < stats.centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < stats.centroids.size(); ++b) {
      min_sep = std::min(min_sep, std::sqrt(dist2(stats.centroids[a], stats.centroids[b])));
    }
  }
  for (const auto& tr : trajs) {
    for (const auto& row : tr.rows) {
      const OpVector p = {row[0], row[1], row[2]};
      const int c = assign_cluster(stats.centroids, p);
      const double d = std::sqrt(dist2(stats.centroids[static_cast<std::size_t>(c)], p));
      CHECK(d < 0.01 * min_sep);
    }
  }
}

TEST_CASE("norm stats serialize and parse back exactly") {
  NormStats stats;
  stats.mode = NormMode::kClustered;
  stats.k = 2;
  stats.seed = 0xdeadbeefcafeull;
  stats.centroids = {pt(1.0 / 3.0, 0.1, -0.0), pt(42.0, 0.84, 100.0)};
  std::array<double, kChannels> lo{}, hi{};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < kChannels; ++i) {
    lo[static_cast<std::size_t>(i)] = d(rng);
    hi[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + std::abs(d(rng));
  }
  stats.ch_min = {lo, hi};
  stats.ch_max = {hi, hi};

  const std::string text = norm_stats_to_json(stats);
  const NormStats back = norm_stats_from_json(text);
  CHECK(back.mode == stats.mode);
  CHECK(back.k == stats.k);
  CHECK(back.seed == stats.seed);
  CHECK(std::memcmp(back.centroids.data(), stats.centroids.data(), 2 * sizeof(OpVector)) == 0);
  CHECK(std::memcmp(back.ch_min.data(), stats.ch_min.data(), 2 * sizeof(double) * kChannels) == 0);
  CHECK(std::memcmp(back.ch_max.data(), stats.ch_max.data(), 2 * sizeof(double) * kChannels) == 0);

  CHECK_THROWS_AS(norm_stats_from_json("{}"), FormatError);
  CHECK_THROWS_AS(norm_stats_from_json("not json"), FormatError);
}
