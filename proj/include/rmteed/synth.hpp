#pragma once

#include "rmteed/ingest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rmteed {

enum class SegmentKind { Flat, Step, Ramp, Collapse };

std::string to_string(SegmentKind kind);

/// One time range of a scenario. On `nodes` the deviation from baseline noise is
///   signal(j) = level + slope * (j - start)            (flat/step: slope = 0)
///   extra noise (collapse only): noise * (exp(rate * (j - start)) - 1)
/// and coupling * deviation / sqrt(n) is added to every node.
struct Segment {
  Eigen::Index start = 0;  // inclusive
  Eigen::Index end = 0;    // exclusive
  SegmentKind kind = SegmentKind::Flat;
  double level = 0.0;      // flat level, step target, ramp/collapse starting level
  double slope = 0.0;      // ramp and collapse
  double rate = 0.0;       // collapse: log noise-std growth per sample
  std::vector<Eigen::Index> nodes;
  double coupling = 0.0;   // in [0, 1]
};

struct Scenario {
  Eigen::Index n = 0;
  Eigen::Index t = 0;
  double noise_std = 1.0;
  std::vector<Segment> segments;
  std::string node_prefix = "bus-";

  /// Segments must tile [0, t) in order; nodes in range; coupling in [0, 1].
  void validate() const;
};

DataSource generate(const Scenario& sc, std::uint64_t seed);

/// n x t standard normal entries.
DataSource sample_gaussian_matrix(Eigen::Index n, Eigen::Index t, std::uint64_t seed);

/// Three-phase schedule of the bus-52 demand case: 0 until sample 600 (0-based), 300 until 1200,
/// then rising by 1 per sample, with a collapse phase (exponential noise growth) from 1306.
/// Demand units are converted to noise units with `units_per_noise` (300 units -> 300/units_per_noise).
struct Table3Options {
  Eigen::Index n = 118;
  Eigen::Index t = 1500;
  Eigen::Index event_node = 51;  // bus-52
  double units_per_noise = 3.0;
  double coupling = 0.5;
  double collapse_rate = 0.02;
  double noise_std = 1.0;
};

Scenario table3_scenario(const Table3Options& opts = {});

/// Stage boundaries of the preset by window END (0-based): flat, step occupancy, flat at the new
/// level, ramp, collapse.
struct Stage {
  std::string name;
  Eigen::Index first_end;
  Eigen::Index last_end;  // inclusive
};
std::vector<Stage> table3_stages(Eigen::Index T = 240);

/// Illustrative six-region partition of the synthetic 118-node grid with invented planar
/// coordinates; not the real network geometry. Region "A3" holds the event node.
RegionPartition illustrative_partition(Eigen::Index n = 118, const std::string& prefix = "bus-",
                                       std::uint64_t seed = 7);

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace rmteed
