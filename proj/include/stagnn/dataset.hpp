#pragma once

#include <array>
#include <filesystem>
#include <vector>

namespace stagnn {

// Turbofan recordings in the C-MAPSS layout: 26 whitespace separated columns
// per row (unit id, cycle, 3 operating settings, 21 sensors). Training units
// run to failure; test units stop early and carry their remaining life in a
// separate single-column file.

inline constexpr int kOpSettings = 3;
inline constexpr int kSensorChannels = 21;
inline constexpr int kChannels = kOpSettings + kSensorChannels;

struct Trajectory {
  int unit_id = 0;
  // one row per cycle, operating settings first, then sensors (file order)
  std::vector<std::array<double, kChannels>> rows;
  int cycles() const { return static_cast<int>(rows.size()); }
};

struct CmapssData {
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
  std::vector<double> test_rul;  // same order as test
};

// throws FormatError on malformed rows, non-consecutive cycles or a RUL line
// count that does not match the number of test units
std::vector<Trajectory> parse_trajectories(const std::filesystem::path& file);
std::vector<double> parse_rul_file(const std::filesystem::path& file);
CmapssData parse_cmapss(const std::filesystem::path& train_file,
                        const std::filesystem::path& test_file,
                        const std::filesystem::path& rul_file);

// round-trip writer (doubles are emitted with shortest exact formatting)
void write_trajectories(const std::filesystem::path& file, const std::vector<Trajectory>& trajs);

// Labels for all windows of one trajectory: window m (1-based) ends at cycle
// w + (m-1)*k and its label is min(T - w - (m-1)*k + final_rul, r_max).
// Empty when the trajectory is shorter than the window.
std::vector<double> window_labels(int total_cycles, int w, int k, double r_max, double final_rul);

struct WindowSample {
  int unit_id = 0;
  int window_index = 0;  // 1-based
  double label = 0.0;
  std::vector<double> features;  // w x kChannels, cycle-major
};

enum class WindowMode {
  kTrain,  // every window, stride k; units shorter than w are skipped
  kTest,   // only the final window; short units are left-padded by
           // repeating their first row
};

struct WindowSet {
  std::vector<WindowSample> samples;
  int skipped_short_units = 0;
};

// final_ruls must be non-null in test mode (one entry per trajectory) and is
// ignored in training mode, where every unit ends at failure (RUL 0)
WindowSet make_windows(const std::vector<Trajectory>& trajs,
                       const std::vector<double>* final_ruls, int w, int k, double r_max,
                       WindowMode mode);

}  // namespace stagnn
