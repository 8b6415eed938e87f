#pragma once

#include "rmteed/detect.hpp"
#include "rmteed/ingest.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rmteed {

struct Bounds {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
};

struct MapFrame {
  Eigen::Index t = 0;
  Eigen::MatrixXd grid;  // G x G; row = y index, column = x index
  Bounds bounds;
  std::string quantity = "eta";
};

/// Bounding box of the layout; a degenerate axis is widened by 1 on each side.
Bounds layout_bounds(const std::map<std::string, Point2>& layout);

/// Coordinate of grid index i of G along [lo, hi], endpoints included.
double grid_coordinate(double lo, double hi, Eigen::Index i, Eigen::Index G);

/// Inverse-distance weighting on a G x G grid over `bounds`: sum w v / sum w with
/// w = d^-p; a cell within 1e-9 of a node takes that node's value.
MapFrame frame(const std::map<std::string, double>& values, const std::map<std::string, Point2>& layout,
               Eigen::Index G, double power = 2.0, const Bounds* bounds = nullptr);

struct RenderOptions {
  Eigen::Index grid = 64;
  Eigen::Index stride = 10;
  double power = 2.0;
  std::string function;           // empty: the first function in the series
  std::string quantity = "eta";   // "eta" or "tau"
};

/// Node values at one series index: each region's value goes to its members; when the series
/// holds only "ALL" every layout node receives it.
std::map<std::string, double> node_values(const IndicatorSeries& series, const RegionPartition& partition,
                                          const std::string& function, std::size_t index, const std::string& quantity);

std::string frame_json(const MapFrame& f);

/// Writes frame_<t>.json for every stride-th series index plus manifest.json (written last);
/// returns the frame paths in order.
std::vector<std::filesystem::path> render_run(const IndicatorSeries& series, const RegionPartition& partition,
                                              const RenderOptions& opts, const std::filesystem::path& out_dir);

}  // namespace rmteed
