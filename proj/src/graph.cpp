#include "stagnn/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stagnn/errors.hpp"
#include "stagnn/textio.hpp"

namespace stagnn {

SensorGraph build_graph(const std::vector<Trajectory>& trajs, double lambda,
                        EdgeMeasure measure) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ParameterError("edge threshold must be in [0, 1], got " + std::to_string(lambda));
  }
  std::int64_t n = 0;
  for (const Trajectory& tr : trajs) n += tr.cycles();
  if (n < 2) throw ParameterError("graph construction needs at least two cycles");

  const int S = kChannels;
  std::vector<double> mean(S, 0.0);
  for (const Trajectory& tr : trajs) {
    for (const auto& row : tr.rows) {
      for (int i = 0; i < S; ++i) mean[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)];
    }
  }
  for (double& m : mean) m /= static_cast<double>(n);

  // population covariance over all cycles
  std::vector<double> cov(static_cast<std::size_t>(S) * S, 0.0);
  for (const Trajectory& tr : trajs) {
    for (const auto& row : tr.rows) {
      for (int i = 0; i < S; ++i) {
        const double di = row[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
        for (int j = i; j < S; ++j) {
          const double dj = row[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)];
          cov[static_cast<std::size_t>(i * S + j)] += di * dj;
        }
      }
    }
  }
  for (int i = 0; i < S; ++i) {
    for (int j = i; j < S; ++j) {
      const double c = cov[static_cast<std::size_t>(i * S + j)] / static_cast<double>(n);
      cov[static_cast<std::size_t>(i * S + j)] = c;
      cov[static_cast<std::size_t>(j * S + i)] = c;
    }
  }

  SensorGraph g;
  g.nodes = S;
  g.lambda = lambda;
  g.measure = measure;
  g.adjacency.assign(static_cast<std::size_t>(S) * S, 0.0);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      if (i == j) continue;
      double score;
      if (measure == EdgeMeasure::kCovariance) {
        score = cov[static_cast<std::size_t>(i * S + j)];
      } else {
        const double vi = cov[static_cast<std::size_t>(i * S + i)];
        const double vj = cov[static_cast<std::size_t>(j * S + j)];
        // flat channels correlate with nothing
        score = (vi == 0.0 || vj == 0.0)
                    ? 0.0
                    : cov[static_cast<std::size_t>(i * S + j)] / std::sqrt(vi * vj);
      }
      if (std::abs(score) > lambda) g.adjacency[static_cast<std::size_t>(i * S + j)] = 1.0;
    }
  }
  g.propagation = propagation_matrix(g.adjacency, S);
  return g;
}

std::vector<double> propagation_matrix(const std::vector<double>& adjacency, int nodes) {
  if (adjacency.size() != static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes)) {
    throw DimensionError("adjacency size does not match node count");
  }
  std::vector<double> degree(static_cast<std::size_t>(nodes), 0.0);
  for (int i = 0; i < nodes; ++i) {
    double d = 1.0;  // self loop
    for (int j = 0; j < nodes; ++j) {
      if (i != j) d += adjacency[static_cast<std::size_t>(i * nodes + j)];
    }
    degree[static_cast<std::size_t>(i)] = d;
  }
  std::vector<double> out(adjacency.size(), 0.0);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const double aij = (i == j) ? 1.0 : adjacency[static_cast<std::size_t>(i * nodes + j)];
      if (aij != 0.0) {
        out[static_cast<std::size_t>(i * nodes + j)] =
            aij / std::sqrt(degree[static_cast<std::size_t>(i)] * degree[static_cast<std::size_t>(j)]);
      }
    }
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& file, const std::vector<double>& m,
                      int rows, int cols) {
  if (m.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("matrix size does not match rows x cols");
  }
  std::ofstream out(file);
  if (!out) throw FormatError("cannot create " + file.string());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (j > 0) out << ',';
      out << format_double(m[static_cast<std::size_t>(i * cols + j)]);
    }
    out << '\n';
  }
}

std::vector<double> read_matrix_csv(const std::filesystem::path& file, int& rows, int& cols) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<double> values;
  std::string line;
  rows = 0;
  cols = -1;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int c = 0;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw FormatError(file.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      values.push_back(v);
      ++c;
    }
    if (cols == -1) {
      cols = c;
    } else if (c != cols) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(file.string() + ": empty matrix");
  return values;
}

}  // namespace stagnn
