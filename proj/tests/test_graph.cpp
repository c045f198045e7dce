#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <vector>

#include "stagnn/errors.hpp"
#include "stagnn/graph.hpp"
#include "stagnn/rng.hpp"

using namespace stagnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("stagnn_graph_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// trajectory where every channel is 0 except the ones listed
Trajectory traj_from_channels(const std::map<int, std::vector<double>>& channels, int cycles,
                              int unit = 1) {
  Trajectory tr;
  tr.unit_id = unit;
  tr.rows.resize(static_cast<std::size_t>(cycles));
  for (auto& row : tr.rows) row.fill(0.0);
  for (const auto& [ch, series] : channels) {
    REQUIRE(series.size() == static_cast<std::size_t>(cycles));
    for (int t = 0; t < cycles; ++t) {
      tr.rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(ch)] = series[static_cast<std::size_t>(t)];
    }
  }
  return tr;
}

std::vector<Trajectory> random_trajectories(int units, int cycles, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Trajectory> out;
  for (int u = 0; u < units; ++u) {
    Trajectory tr;
    tr.unit_id = u + 1;
    tr.rows.resize(static_cast<std::size_t>(cycles));
    for (auto& row : tr.rows) {
      // a shared latent plus channel noise so some pairs end up correlated
      const double latent = gauss(rng);
      for (int c = 0; c < kChannels; ++c) {
        const double w = (c % 3 == 0) ? 1.0 : ((c % 3 == 1) ? -0.6 : 0.1);
        row[static_cast<std::size_t>(c)] = w * latent + 0.8 * gauss(rng);
      }
    }
    out.push_back(std::move(tr));
  }
  return out;
}

double max_abs_eigenvalue(const std::vector<double>& m, int n) {
  std::vector<double> v(static_cast<std::size_t>(n), 1.0);
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  double norm = 0.0;
  for (int iter = 0; iter < 800; ++iter) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += m[static_cast<std::size_t>(i * n + j)] * v[static_cast<std::size_t>(j)];
      w[static_cast<std::size_t>(i)] = s;
    }
    norm = 0.0;
    for (double x : w) norm = std::max(norm, std::abs(x));
    if (norm == 0.0) return 0.0;
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / norm;
  }
  return norm;
}

double adj(const SensorGraph& g, int i, int j) {
  return g.adjacency[static_cast<std::size_t>(i * g.nodes + j)];
}

double prop(const SensorGraph& g, int i, int j) {
  return g.propagation[static_cast<std::size_t>(i * g.nodes + j)];
}

}  // namespace

TEST_CASE("perfectly correlated channels are linked, flat channels are not") {
  // split across two units so the statistics pool over the whole fleet
  std::map<int, std::vector<double>> a{{2, {1.0, -1.0}}, {5, {5.0, 1.0}}};
  std::map<int, std::vector<double>> b{{2, {-1.0, 1.0}}, {5, {1.0, 5.0}}};
  std::vector<Trajectory> trajs{traj_from_channels(a, 2, 1), traj_from_channels(b, 2, 2)};

  SensorGraph g = build_graph(trajs, 0.9);
  CHECK(g.nodes == kChannels);
  CHECK(adj(g, 2, 5) == 1.0);
  CHECK(adj(g, 5, 2) == 1.0);
  for (int i = 0; i < g.nodes; ++i) {
    CHECK(adj(g, i, i) == 0.0);
    for (int j = 0; j < g.nodes; ++j) {
      if ((i == 2 && j == 5) || (i == 5 && j == 2)) continue;
      CHECK(adj(g, i, j) == 0.0);
    }
  }

  SUBCASE("threshold comparison is strict") {
    SensorGraph tight = build_graph(trajs, 1.0);
    CHECK(std::count(tight.adjacency.begin(), tight.adjacency.end(), 1.0) == 0);
  }
}

TEST_CASE("hand-computed three channel pattern") {
  // ch0 and ch1 move together, ch2 is orthogonal to both by construction
  std::map<int, std::vector<double>> chans{
      {0, {1.0, -1.0, -1.0, 1.0}},
      {1, {5.0, 1.0, 1.0, 5.0}},      // 2*ch0 + 3
      {2, {1.0, 1.0, -1.0, -1.0}}};
  std::vector<Trajectory> trajs{traj_from_channels(chans, 4)};

  SensorGraph g = build_graph(trajs, 0.5);
  CHECK(adj(g, 0, 1) == 1.0);
  CHECK(adj(g, 1, 0) == 1.0);
  CHECK(adj(g, 0, 2) == 0.0);
  CHECK(adj(g, 1, 2) == 0.0);
  CHECK(adj(g, 2, 0) == 0.0);

  SUBCASE("propagation weights come out exact for integer degrees") {
    // ch0 and ch1 have degree 2 with the self loop, everything else degree 1
    CHECK(prop(g, 0, 1) == 0.5);
    CHECK(prop(g, 1, 0) == 0.5);
    CHECK(prop(g, 0, 0) == 0.5);
    CHECK(prop(g, 1, 1) == 0.5);
    CHECK(prop(g, 2, 2) == 1.0);
    CHECK(prop(g, 0, 2) == 0.0);
    for (int i = 3; i < g.nodes; ++i) CHECK(prop(g, i, i) == 1.0);
  }
}

TEST_CASE("anti-correlated channels link through the absolute value") {
  std::map<int, std::vector<double>> chans{{4, {2.0, 4.0, 6.0}}, {9, {-2.0, -4.0, -6.0}}};
  std::vector<Trajectory> trajs{traj_from_channels(chans, 3)};
  SensorGraph g = build_graph(trajs, 0.9);
  CHECK(adj(g, 4, 9) == 1.0);
  CHECK(adj(g, 9, 4) == 1.0);
}

TEST_CASE("edgeless graph propagates as the identity") {
  std::vector<double> a(6 * 6, 0.0);
  std::vector<double> p = propagation_matrix(a, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      CHECK(p[static_cast<std::size_t>(i * 6 + j)] == (i == j ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("two node complete graph gives exact halves") {
  std::vector<double> a{0.0, 1.0, 1.0, 0.0};
  std::vector<double> p = propagation_matrix(a, 2);
  for (double v : p) CHECK(v == 0.5);
}

TEST_CASE("propagation rejects mismatched sizes") {
  std::vector<double> a(5, 0.0);
  CHECK_THROWS_AS(propagation_matrix(a, 3), DimensionError);
}

TEST_CASE("adjacency is symmetric with an empty diagonal on noisy fleets") {
  std::vector<Trajectory> trajs = random_trajectories(4, 50, 2024);
  SensorGraph g = build_graph(trajs, 0.3);
  int edges = 0;
  for (int i = 0; i < g.nodes; ++i) {
    CHECK(adj(g, i, i) == 0.0);
    for (int j = 0; j < g.nodes; ++j) {
      CHECK(adj(g, i, j) == adj(g, j, i));
      if (adj(g, i, j) == 1.0) ++edges;
    }
  }
  CHECK(edges > 0);

  SUBCASE("propagation spectrum stays inside the unit disc") {
    CHECK(max_abs_eigenvalue(g.propagation, g.nodes) <= 1.0 + 1e-9);
  }

  SUBCASE("relabeling channels relabels the graph") {
    std::vector<int> perm(kChannels);
    for (int i = 0; i < kChannels; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(99);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<Trajectory> permuted = trajs;
    for (auto& tr : permuted) {
      for (auto& row : tr.rows) {
        auto original = row;
        for (int c = 0; c < kChannels; ++c) {
          row[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])] = original[static_cast<std::size_t>(c)];
        }
      }
    }
    SensorGraph gp = build_graph(permuted, 0.3);
    for (int i = 0; i < kChannels; ++i) {
      for (int j = 0; j < kChannels; ++j) {
        CHECK(adj(gp, perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) == adj(g, i, j));
      }
    }
  }
}

TEST_CASE("correlation ignores per-channel scale and offset") {
  std::map<int, std::vector<double>> chans{
      {0, {1.0, -1.0, -1.0, 1.0}},
      {1, {5.0, 1.0, 1.0, 5.0}},
      {2, {1.0, 1.0, -1.0, -1.0}},
      {7, {3.0, 0.0, -3.0, 0.0}}};
  std::vector<Trajectory> base{traj_from_channels(chans, 4)};

  // power-of-two scales and integer shifts keep the arithmetic exact, so the
  // adjacency must match bit for bit at any threshold
  std::map<int, std::vector<double>> scaled;
  const std::map<int, std::pair<double, double>> affine{
      {0, {-4.0, 7.0}}, {1, {0.25, -2.0}}, {2, {8.0, 1.0}}, {7, {-0.5, 3.0}}};
  for (const auto& [ch, series] : chans) {
    std::vector<double> s;
    for (double v : series) s.push_back(affine.at(ch).first * v + affine.at(ch).second);
    scaled[ch] = s;
  }
  std::vector<Trajectory> moved{traj_from_channels(scaled, 4)};

  for (double lambda : {0.0, 0.3, 0.5, 0.9, 0.999}) {
    SensorGraph g0 = build_graph(base, lambda);
    SensorGraph g1 = build_graph(moved, lambda);
    CHECK(g0.adjacency == g1.adjacency);
    CHECK(g0.propagation == g1.propagation);
  }
}

TEST_CASE("covariance mode keys on magnitude instead of shape") {
  // perfectly correlated but tiny swings: correlation sees them, covariance does not
  std::map<int, std::vector<double>> chans{{3, {1e-3, -1e-3}}, {8, {2e-3, -2e-3}}};
  std::vector<Trajectory> trajs{traj_from_channels(chans, 2)};

  SensorGraph by_corr = build_graph(trajs, 0.5, EdgeMeasure::kCorrelation);
  CHECK(by_corr.measure == EdgeMeasure::kCorrelation);
  CHECK(adj(by_corr, 3, 8) == 1.0);

  SensorGraph by_cov = build_graph(trajs, 0.5, EdgeMeasure::kCovariance);
  CHECK(by_cov.measure == EdgeMeasure::kCovariance);
  CHECK(adj(by_cov, 3, 8) == 0.0);
}

TEST_CASE("graph construction validates its inputs") {
  std::map<int, std::vector<double>> chans{{0, {1.0, 2.0}}};
  std::vector<Trajectory> trajs{traj_from_channels(chans, 2)};
  CHECK_THROWS_AS(build_graph(trajs, -0.1), ParameterError);
  CHECK_THROWS_AS(build_graph(trajs, 1.5), ParameterError);

  std::vector<Trajectory> one_cycle{traj_from_channels({{0, {1.0}}}, 1)};
  CHECK_THROWS_AS(build_graph(one_cycle, 0.5), ParameterError);
  CHECK_THROWS_AS(build_graph({}, 0.5), ParameterError);
}

TEST_CASE("matrix csv files round-trip bitwise") {
  const fs::path dir = temp_dir("csv");
  const std::vector<double> m{1.0 / 3.0, 1e-300,  -2.5,
                              0.0,       6.02e23, -1.0 / 7.0};
  write_matrix_csv(dir / "m.csv", m, 3, 2);

  int rows = 0;
  int cols = 0;
  std::vector<double> back = read_matrix_csv(dir / "m.csv", rows, cols);
  CHECK(rows == 3);
  CHECK(cols == 2);
  REQUIRE(back.size() == m.size());
  CHECK(std::memcmp(back.data(), m.data(), m.size() * sizeof(double)) == 0);

  SUBCASE("size mismatch is rejected on write") {
    CHECK_THROWS_AS(write_matrix_csv(dir / "bad.csv", m, 2, 2), DimensionError);
  }

  SUBCASE("ragged and malformed files are rejected on read") {
    std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
    CHECK_THROWS_AS(read_matrix_csv(dir / "ragged.csv", rows, cols), FormatError);

    std::ofstream(dir / "words.csv") << "1,banana\n";
    CHECK_THROWS_AS(read_matrix_csv(dir / "words.csv", rows, cols), FormatError);

    std::ofstream(dir / "empty.csv") << "";
    CHECK_THROWS_AS(read_matrix_csv(dir / "empty.csv", rows, cols), FormatError);

    CHECK_THROWS_AS(read_matrix_csv(dir / "missing.csv", rows, cols), FormatError);
  }
  fs::remove_all(dir);
}
