#include "rmteed/synth.hpp"

#include "rmteed/error.hpp"
#include "rmteed/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rmteed {

namespace {

const char* kModule = "synth";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

SegmentKind parse_kind(const std::string& s) {
  if (s == "flat") return SegmentKind::Flat;
  if (s == "step") return SegmentKind::Step;
  if (s == "ramp") return SegmentKind::Ramp;
  if (s == "collapse") return SegmentKind::Collapse;
  fail(ErrorKind::Configuration, "unknown segment kind '" + s + "'");
}

std::vector<std::string> make_ids(Eigen::Index n, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i + 1));
  return ids;
}

std::vector<std::int64_t> make_timestamps(Eigen::Index t) {
  std::vector<std::int64_t> ts(static_cast<std::size_t>(t));
  for (Eigen::Index j = 0; j < t; ++j) ts[static_cast<std::size_t>(j)] = j;
  return ts;
}

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index t, double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd m(n, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = scale * n01(rng);
  }
  return m;
}

}  // namespace

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Flat: return "flat";
    case SegmentKind::Step: return "step";
    case SegmentKind::Ramp: return "ramp";
    case SegmentKind::Collapse: return "collapse";
  }
  return "unknown";
}

void Scenario::validate() const {
  if (n < 2 || t < 2) fail(ErrorKind::Configuration, "scenario needs n >= 2 and t >= 2");
  if (!(noise_std > 0.0)) fail(ErrorKind::Configuration, "noise_std must be positive");
  Eigen::Index cursor = 0;
  for (const auto& s : segments) {
    if (s.start != cursor || s.end <= s.start) {
      fail(ErrorKind::Configuration, "segments must tile [0, t) in order; gap or overlap at " + std::to_string(cursor));
    }
    if (s.coupling < 0.0 || s.coupling > 1.0) fail(ErrorKind::Configuration, "coupling must lie in [0, 1]");
    for (auto i : s.nodes) {
      if (i < 0 || i >= n) fail(ErrorKind::Configuration, "segment node index " + std::to_string(i) + " out of range");
    }
    cursor = s.end;
  }
  if (!segments.empty() && cursor != t) {
    fail(ErrorKind::Configuration, "segments cover [0, " + std::to_string(cursor) + ") but t = " + std::to_string(t));
  }
}

DataSource generate(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  DataSource src;
  src.node_ids = make_ids(sc.n, sc.node_prefix);
  src.timestamps = make_timestamps(sc.t);
  const Eigen::MatrixXd noise = gaussian(sc.n, sc.t, sc.noise_std, seed);
  src.values = noise;

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(sc.n));
  for (const auto& seg : sc.segments) {
    for (Eigen::Index j = seg.start; j < seg.end; ++j) {
      const double k = static_cast<double>(j - seg.start);
      const double signal = seg.level + seg.slope * k;
      const double growth = seg.kind == SegmentKind::Collapse ? std::exp(seg.rate * k) - 1.0 : 0.0;
      double common = 0.0;
      for (auto i : seg.nodes) {
        const double dev = signal + growth * noise(i, j);
        src.values(i, j) += dev;
        common += seg.coupling * dev * inv_sqrt_n;
      }
      if (common != 0.0) src.values.col(j).array() += common;
    }
  }
  return src;
}

DataSource sample_gaussian_matrix(Eigen::Index n, Eigen::Index t, std::uint64_t seed) {
  if (n < 1 || t < 1) fail(ErrorKind::Parameter, "gaussian matrix needs positive dimensions");
  DataSource src;
  src.node_ids = make_ids(n, "node-");
  src.timestamps = make_timestamps(t);
  src.values = gaussian(n, t, 1.0, seed);
  return src;
}

Scenario table3_scenario(const Table3Options& o) {
  if (o.event_node < 0 || o.event_node >= o.n) fail(ErrorKind::Configuration, "event node outside [0, n)");
  if (!(o.units_per_noise > 0.0)) fail(ErrorKind::Configuration, "units_per_noise must be positive");
  Scenario sc;
  sc.n = o.n;
  sc.t = o.t;
  sc.noise_std = o.noise_std;
  const double u = o.noise_std / o.units_per_noise;

  struct Phase {
    Eigen::Index start;
    SegmentKind kind;
    double level;
    double slope;
    double rate;
  };
  // Demand schedule (1-based samples): 0 on 1..600, 300 on 601..1200, t - 900 from 1201.
  const Phase phases[] = {
      {0, SegmentKind::Flat, 0.0, 0.0, 0.0},
      {600, SegmentKind::Step, 300.0 * u, 0.0, 0.0},
      {1200, SegmentKind::Ramp, 301.0 * u, u, 0.0},
      {1306, SegmentKind::Collapse, 407.0 * u, u, o.collapse_rate},
  };
  for (std::size_t p = 0; p < std::size(phases); ++p) {
    const Eigen::Index start = phases[p].start;
    if (start >= o.t) break;
    const Eigen::Index end = p + 1 < std::size(phases) ? std::min(phases[p + 1].start, o.t) : o.t;
    Segment seg;
    seg.start = start;
    seg.end = end;
    seg.kind = phases[p].kind;
    seg.level = phases[p].level;
    seg.slope = phases[p].slope;
    seg.rate = phases[p].rate;
    seg.nodes = {o.event_node};
    seg.coupling = o.coupling;
    sc.segments.push_back(seg);
  }
  return sc;
}

std::vector<Stage> table3_stages(Eigen::Index T) {
  return {
      {"S1", T - 1, 599},
      {"S2", 600, 839},
      {"S3", 840, 1199},
      {"S4", 1200, 1305},
      {"S5", 1306, 1499},
  };
}

RegionPartition illustrative_partition(Eigen::Index n, const std::string& prefix, std::uint64_t seed) {
  if (n < 6) fail(ErrorKind::Configuration, "illustrative partition needs at least 6 nodes");
  RegionPartition part;
  const Eigen::Index block = (n + 5) / 6;
  // Region centres on a 3 x 2 grid, spacing 10.
  const Point2 centres[6] = {{0, 10}, {10, 10}, {20, 10}, {20, 0}, {10, 0}, {0, 0}};
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(std::min<Eigen::Index>(i / block, 5));
    const std::string id = prefix + std::to_string(i + 1);
    part.regions["A" + std::to_string(r + 1)].push_back(id);
    const double radius = 3.5 * std::sqrt(unit(rng));
    const double angle = 2.0 * M_PI * unit(rng);
    part.layout[id] = {centres[r].x + radius * std::cos(angle), centres[r].y + radius * std::sin(angle)};
  }
  return part;
}

Scenario parse_scenario(const std::string& json_text) {
  Scenario sc;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    sc.n = doc.at("n").get<Eigen::Index>();
    sc.t = doc.at("t").get<Eigen::Index>();
    sc.noise_std = doc.value("noise_std", 1.0);
    sc.node_prefix = doc.value("node_prefix", std::string("bus-"));
    for (const auto& s : doc.value("segments", nlohmann::json::array())) {
      Segment seg;
      seg.start = s.at("start").get<Eigen::Index>();
      seg.end = s.at("end").get<Eigen::Index>();
      seg.kind = parse_kind(s.at("kind").get<std::string>());
      seg.level = s.value("level", s.value("to_level", 0.0));
      seg.slope = s.value("slope", 0.0);
      seg.rate = s.value("rate", 0.0);
      seg.nodes = s.value("nodes", std::vector<Eigen::Index>{});
      seg.coupling = s.value("coupling", 0.0);
      sc.segments.push_back(std::move(seg));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedInput, std::string("bad scenario file: ") + e.what());
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace rmteed
