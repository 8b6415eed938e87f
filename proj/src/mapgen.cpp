#include "rmteed/mapgen.hpp"

#include "rmteed/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace rmteed {

namespace {

const char* kModule = "mapgen";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

constexpr double kExactRadius = 1e-9;

nlohmann::json bounds_json(const Bounds& b) {
  return {{"xmin", b.xmin}, {"xmax", b.xmax}, {"ymin", b.ymin}, {"ymax", b.ymax}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

Bounds layout_bounds(const std::map<std::string, Point2>& layout) {
  if (layout.empty()) fail(ErrorKind::Configuration, "empty layout");
  Bounds b{layout.begin()->second.x, layout.begin()->second.x, layout.begin()->second.y, layout.begin()->second.y};
  for (const auto& [id, p] : layout) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  if (b.xmax == b.xmin) {
    b.xmin -= 1.0;
    b.xmax += 1.0;
  }
  if (b.ymax == b.ymin) {
    b.ymin -= 1.0;
    b.ymax += 1.0;
  }
  return b;
}

double grid_coordinate(double lo, double hi, Eigen::Index i, Eigen::Index G) {
  if (G == 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(G - 1);
}

MapFrame frame(const std::map<std::string, double>& values, const std::map<std::string, Point2>& layout,
               Eigen::Index G, double power, const Bounds* bounds) {
  if (values.empty()) fail(ErrorKind::Contract, "no node values to interpolate");
  if (G < 1) fail(ErrorKind::Contract, "grid size must be >= 1");
  if (!(power > 0.0)) fail(ErrorKind::Contract, "IDW power must be positive");

  std::vector<Point2> pts;
  std::vector<double> vals;
  for (const auto& [id, v] : values) {
    auto it = layout.find(id);
    if (it == layout.end()) fail(ErrorKind::Contract, "node '" + id + "' has no layout position");
    pts.push_back(it->second);
    vals.push_back(v);
  }

  MapFrame f;
  f.bounds = bounds ? *bounds : layout_bounds(layout);
  f.grid.resize(G, G);
  for (Eigen::Index r = 0; r < G; ++r) {
    const double y = grid_coordinate(f.bounds.ymin, f.bounds.ymax, r, G);
    for (Eigen::Index c = 0; c < G; ++c) {
      const double x = grid_coordinate(f.bounds.xmin, f.bounds.xmax, c, G);
      double num = 0.0;
      double den = 0.0;
      bool exact = false;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = std::hypot(x - pts[i].x, y - pts[i].y);
        if (d < kExactRadius) {
          f.grid(r, c) = vals[i];
          exact = true;
          break;
        }
        const double w = std::pow(d, -power);
        num += w * vals[i];
        den += w;
      }
      if (!exact) f.grid(r, c) = num / den;
    }
  }
  return f;
}

std::map<std::string, double> node_values(const IndicatorSeries& series, const RegionPartition& partition,
                                          const std::string& function, std::size_t index, const std::string& quantity) {
  auto pick = [&](const IndicatorPoint& p) { return quantity == "tau" ? p.tau : p.eta; };
  std::map<std::string, double> out;
  const Series* all = nullptr;
  bool regional = false;
  for (const auto& s : series.series) {
    if (s.function != function) continue;
    if (index >= s.points.size()) fail(ErrorKind::Contract, "series index out of range");
    if (s.region == "ALL") {
      all = &s;
      continue;
    }
    auto it = partition.regions.find(s.region);
    if (it == partition.regions.end()) continue;
    regional = true;
    const double v = pick(s.points[index]);
    if (!std::isfinite(v)) continue;
    for (const auto& id : it->second) {
      if (partition.layout.count(id)) out[id] = v;
    }
  }
  if (!regional && all) {
    const double v = pick(all->points[index]);
    if (std::isfinite(v)) {
      for (const auto& [id, p] : partition.layout) out[id] = v;
    }
  }
  return out;
}

std::string frame_json(const MapFrame& f) {
  nlohmann::json grid = nlohmann::json::array();
  for (Eigen::Index r = 0; r < f.grid.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < f.grid.cols(); ++c) row.push_back(f.grid(r, c));
    grid.push_back(std::move(row));
  }
  nlohmann::json doc = {{"t", f.t}, {"quantity", f.quantity}, {"bounds", bounds_json(f.bounds)}, {"grid", std::move(grid)}};
  return doc.dump();
}

std::vector<std::filesystem::path> render_run(const IndicatorSeries& series, const RegionPartition& partition,
                                              const RenderOptions& opts, const std::filesystem::path& out_dir) {
  if (!partition.has_layout()) fail(ErrorKind::Configuration, "map frames need a layout with node coordinates");
  if (opts.stride < 1) fail(ErrorKind::Configuration, "frame stride must be >= 1");
  if (opts.quantity != "eta" && opts.quantity != "tau") fail(ErrorKind::Configuration, "quantity must be eta or tau");
  if (series.series.empty()) fail(ErrorKind::Contract, "empty indicator series");

  const std::string function = opts.function.empty() ? series.series.front().function : opts.function;
  const Series* ref = nullptr;
  for (const auto& s : series.series) {
    if (s.function == function) {
      ref = &s;
      break;
    }
  }
  if (!ref) fail(ErrorKind::Configuration, "function '" + function + "' is not in the series");

  std::filesystem::create_directories(out_dir);
  const Bounds bounds = layout_bounds(partition.layout);
  std::vector<std::filesystem::path> paths;
  nlohmann::json manifest_frames = nlohmann::json::array();
  for (std::size_t i = 0; i < ref->points.size(); i += static_cast<std::size_t>(opts.stride)) {
    const auto values = node_values(series, partition, function, i, opts.quantity);
    auto f = frame(values, partition.layout, opts.grid, opts.power, &bounds);
    f.t = ref->points[i].t;
    f.quantity = opts.quantity;
    const auto name = "frame_" + std::to_string(f.t) + ".json";
    write_text(out_dir / name, frame_json(f));
    paths.push_back(out_dir / name);
    manifest_frames.push_back({{"t", f.t}, {"file", name}});
  }
  nlohmann::json manifest = {{"function", function},      {"quantity", opts.quantity}, {"grid", opts.grid},
                             {"power", opts.power},        {"stride", opts.stride},     {"bounds", bounds_json(bounds)},
                             {"frames", std::move(manifest_frames)}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return paths;
}

}  // namespace rmteed
