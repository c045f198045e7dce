#include "stagnn/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "stagnn/errors.hpp"
#include "stagnn/textio.hpp"

namespace stagnn {
namespace {

std::string loc(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

bool parse_full_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && !tok.empty();
}

}  // namespace

std::vector<Trajectory> parse_trajectories(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());

  std::vector<Trajectory> trajs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (row >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;  // blank line
    if (tokens.size() != 2 + kChannels) {
      throw FormatError(loc(file, lineno) + ": expected " + std::to_string(2 + kChannels) +
                        " columns, got " + std::to_string(tokens.size()));
    }
    double unit_d = 0.0, cycle_d = 0.0;
    if (!parse_full_double(tokens[0], unit_d) || !parse_full_double(tokens[1], cycle_d)) {
      throw FormatError(loc(file, lineno) + ": unit and cycle must be numeric");
    }
    const int unit = static_cast<int>(unit_d);
    const int cycle = static_cast<int>(cycle_d);
    if (unit <= 0 || cycle <= 0) {
      throw FormatError(loc(file, lineno) + ": unit and cycle must be positive");
    }

    if (cycle == 1) {
      trajs.emplace_back();
      trajs.back().unit_id = unit;
    } else if (trajs.empty() || trajs.back().unit_id != unit ||
               cycle != trajs.back().cycles() + 1) {
      throw FormatError(loc(file, lineno) + ": cycles must be consecutive per unit starting at 1");
    }

    std::array<double, kChannels> vals{};
    for (int c = 0; c < kChannels; ++c) {
      if (!parse_full_double(tokens[static_cast<std::size_t>(2 + c)], vals[static_cast<std::size_t>(c)])) {
        throw FormatError(loc(file, lineno) + ": column " + std::to_string(3 + c) +
                          " is not numeric");
      }
    }
    trajs.back().rows.push_back(vals);
  }
  if (trajs.empty()) throw FormatError(file.string() + ": no data rows");
  return trajs;
}

std::vector<double> parse_rul_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<double> ruls;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string tok;
    if (!(row >> tok)) continue;
    double v = 0.0;
    if (!parse_full_double(tok, v) || v < 0.0) {
      throw FormatError(loc(file, lineno) + ": remaining life must be a non-negative number");
    }
    std::string extra;
    if (row >> extra) {
      throw FormatError(loc(file, lineno) + ": expected a single column");
    }
    ruls.push_back(v);
  }
  return ruls;
}

CmapssData parse_cmapss(const std::filesystem::path& train_file,
                        const std::filesystem::path& test_file,
                        const std::filesystem::path& rul_file) {
  CmapssData data;
  data.train = parse_trajectories(train_file);
  data.test = parse_trajectories(test_file);
  data.test_rul = parse_rul_file(rul_file);
  if (data.test_rul.size() != data.test.size()) {
    throw FormatError(rul_file.string() + ": " + std::to_string(data.test_rul.size()) +
                      " RUL lines for " + std::to_string(data.test.size()) + " test units");
  }
  return data;
}

void write_trajectories(const std::filesystem::path& file, const std::vector<Trajectory>& trajs) {
  std::ofstream out(file);
  if (!out) throw FormatError("cannot create " + file.string());
  for (const Trajectory& tr : trajs) {
    for (int t = 0; t < tr.cycles(); ++t) {
      out << tr.unit_id << ' ' << (t + 1);
      for (double v : tr.rows[static_cast<std::size_t>(t)]) {
        out << ' ' << format_double(v);
      }
      out << '\n';
    }
  }
}

std::vector<double> window_labels(int total_cycles, int w, int k, double r_max, double final_rul) {
  if (w < 1 || k < 1) throw ParameterError("window length and stride must be >= 1");
  if (r_max <= 0.0) throw ParameterError("RUL cap must be positive");
  std::vector<double> labels;
  if (total_cycles < w) return labels;
  const int count = (total_cycles - w) / k + 1;
  labels.reserve(static_cast<std::size_t>(count));
  for (int m = 1; m <= count; ++m) {
    const double raw = static_cast<double>(total_cycles - w - (m - 1) * k) + final_rul;
    labels.push_back(std::min(raw, r_max));
  }
  return labels;
}

WindowSet make_windows(const std::vector<Trajectory>& trajs,
                       const std::vector<double>* final_ruls, int w, int k, double r_max,
                       WindowMode mode) {
  if (w < 1 || k < 1) throw ParameterError("window length and stride must be >= 1");
  if (mode == WindowMode::kTest) {
    if (final_ruls == nullptr || final_ruls->size() != trajs.size()) {
      throw UsageError("test windows need one final RUL per unit");
    }
  }

  WindowSet set;
  for (std::size_t u = 0; u < trajs.size(); ++u) {
    const Trajectory& tr = trajs[u];
    const int T = tr.cycles();

    if (mode == WindowMode::kTrain) {
      const auto labels = window_labels(T, w, k, r_max, 0.0);
      if (labels.empty()) {
        ++set.skipped_short_units;
        continue;
      }
      for (std::size_t m = 0; m < labels.size(); ++m) {
        WindowSample s;
        s.unit_id = tr.unit_id;
        s.window_index = static_cast<int>(m) + 1;
        s.label = labels[m];
        s.features.reserve(static_cast<std::size_t>(w) * kChannels);
        const int start = static_cast<int>(m) * k;
        for (int t = start; t < start + w; ++t) {
          const auto& row = tr.rows[static_cast<std::size_t>(t)];
          s.features.insert(s.features.end(), row.begin(), row.end());
        }
        set.samples.push_back(std::move(s));
      }
    } else {
      WindowSample s;
      s.unit_id = tr.unit_id;
      s.window_index = std::max(1, T - w + 1);  // starting cycle of the final window
      s.label = std::min((*final_ruls)[u], r_max);
      s.features.reserve(static_cast<std::size_t>(w) * kChannels);
      const int pad = std::max(0, w - T);
      for (int i = 0; i < pad; ++i) {
        const auto& row = tr.rows.front();
        s.features.insert(s.features.end(), row.begin(), row.end());
      }
      for (int t = std::max(0, T - w); t < T; ++t) {
        const auto& row = tr.rows[static_cast<std::size_t>(t)];
        s.features.insert(s.features.end(), row.begin(), row.end());
      }
      set.samples.push_back(std::move(s));
    }
  }
  return set;
}

}  // namespace stagnn
