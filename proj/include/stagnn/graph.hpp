#pragma once

#include <filesystem>
#include <vector>

#include "stagnn/dataset.hpp"

namespace stagnn {

enum class EdgeMeasure {
  kCorrelation,  // |pearson rho| > lambda (default; scale free)
  kCovariance,   // |population covariance| > lambda
};

struct SensorGraph {
  int nodes = 0;
  double lambda = 0.0;
  EdgeMeasure measure = EdgeMeasure::kCorrelation;
  std::vector<double> adjacency;    // nodes x nodes, 0/1 with a zero diagonal
  std::vector<double> propagation;  // D^-1/2 (A + I) D^-1/2
};

// Channel dependency graph over all cycles of the given (normalized)
// trajectories. Channels with zero variance correlate with nothing.
// Requires lambda in [0, 1] and at least two cycles in total.
SensorGraph build_graph(const std::vector<Trajectory>& trajs, double lambda,
                        EdgeMeasure measure = EdgeMeasure::kCorrelation);

// Symmetric propagation normalization with self loops. Entries are
// (A + I)_ij / sqrt(d_i * d_j) where d is the self-loop-inclusive degree.
std::vector<double> propagation_matrix(const std::vector<double>& adjacency, int nodes);

// square grid io used for artifact export and reload
void write_matrix_csv(const std::filesystem::path& file, const std::vector<double>& m,
                      int rows, int cols);
std::vector<double> read_matrix_csv(const std::filesystem::path& file, int& rows, int& cols);

}  // namespace stagnn
