#include "cli.hpp"

#include "rmteed/detect.hpp"
#include "rmteed/error.hpp"
#include "rmteed/ingest.hpp"
#include "rmteed/les.hpp"
#include "rmteed/mapgen.hpp"
#include "rmteed/pca.hpp"
#include "rmteed/report_io.hpp"
#include "rmteed/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace rmteed::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kSubcommands = {"simulate", "analyze", "theory", "pca-baseline", "mapframes"};

struct Range {
  Eigen::Index first = 0;
  Eigen::Index last = 0;
};

Range parse_range(const std::string& text, const std::string& what) {
  const auto colon = text.find(':');
  auto to_index = [&](const std::string& s) {
    Eigen::Index v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::Configuration, "cli", what + " must read START:END, got '" + text + "'");
    }
    return v;
  };
  if (colon == std::string::npos) throw Error(ErrorKind::Configuration, "cli", what + " must read START:END, got '" + text + "'");
  Range r{to_index(text.substr(0, colon)), to_index(text.substr(colon + 1))};
  if (r.first > r.last) throw Error(ErrorKind::Configuration, "cli", what + " has START after END");
  return r;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RMT_EED_SEED")) {
    std::uint64_t v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::Configuration, "cli", "RMT_EED_SEED is not an unsigned integer: '" + s + "'");
    }
    return v;
  }
  return 0;
}

std::string config_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  auto logger = std::make_shared<spdlog::logger>("rmteed", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::from_str(level));
  return logger;
}

// ---------------------------------------------------------------------------------------------

struct SimulateArgs {
  std::string preset = "table3";
  std::string scenario;
  Eigen::Index n = 118;
  Eigen::Index t = 1500;
  Eigen::Index event_bus = 52;
  double coupling = 0.5;
  double units_per_noise = 3.0;
  double collapse_rate = 0.02;
  double noise_std = 1.0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string partition_out;
};

struct AnalyzeArgs {
  std::string input;
  std::string partition;
  Eigen::Index T = 240;
  Eigen::Index stride = 1;
  int L = 1;
  std::string functions = "MSR";
  double k = 3.0;
  std::string reference = "theoretical";
  int mc_draws = 200;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string missing = "error";
  bool jitter = false;
  bool clamp = false;
  int jobs = 1;
  std::vector<std::string> drop_regions;
  std::string dump_spectra;
  Eigen::Index gap = 2;
  Eigen::Index min_duration = 3;
};

struct TheoryArgs {
  Eigen::Index N = 118;
  Eigen::Index T = 240;
  double kappa4 = 0.0;
  int L = 1;
  int mc_draws = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct PcaArgs {
  std::string input;
  std::string train;
  std::string judge_range;
  Eigen::Index m_prime = 3;
  std::optional<Eigen::Index> m;
  double variance = 0.95;
  double k = 3.0;
  Eigen::Index window = 1;
  std::string missing = "error";
  std::string out;
  Eigen::Index gap = 2;
  Eigen::Index min_duration = 3;
};

struct MapArgs {
  std::string report;
  std::string layout;
  Eigen::Index grid = 64;
  Eigen::Index stride = 10;
  double power = 2.0;
  std::string function;
  std::string quantity = "eta";
  std::string out;
};

int do_simulate(const SimulateArgs& a, std::ostream& out, spdlog::logger& log) {
  const std::uint64_t seed = resolve_seed(a.seed);
  Scenario sc;
  json params;
  if (!a.scenario.empty()) {
    sc = load_scenario(a.scenario);
    params = {{"scenario", a.scenario}};
  } else {
    if (a.preset != "table3") throw Error(ErrorKind::Configuration, "cli", "unknown preset '" + a.preset + "' (table3)");
    Table3Options o;
    o.n = a.n;
    o.t = a.t;
    o.event_node = a.event_bus - 1;
    o.coupling = a.coupling;
    o.units_per_noise = a.units_per_noise;
    o.collapse_rate = a.collapse_rate;
    o.noise_std = a.noise_std;
    sc = table3_scenario(o);
    params = {{"preset", a.preset},       {"n", a.n},
              {"t", a.t},                 {"event_bus", a.event_bus},
              {"coupling", a.coupling},   {"units_per_noise", a.units_per_noise},
              {"collapse_rate", a.collapse_rate}, {"noise_std", a.noise_std}};
  }
  params["out"] = a.out;
  const auto data = generate(sc, seed);
  const std::filesystem::path path(a.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_csv(data, path);
  if (!a.partition_out.empty()) {
    write_partition(illustrative_partition(sc.n, sc.node_prefix), a.partition_out);
    params["partition_out"] = a.partition_out;
  }
  auto record = path;
  record.replace_extension(".run.json");
  write_json(run_record("simulate", seed, params), record);
  log.info("wrote {} x {} matrix to {}", sc.n, sc.t, a.out);
  out << a.out << '\n';
  return 0;
}

int do_analyze(const AnalyzeArgs& a, std::ostream& out, spdlog::logger& log) {
  const std::uint64_t seed = resolve_seed(a.seed);
  DataSource data = load_csv(a.input, parse_missing_policy(a.missing));

  DetectorConfig cfg;
  cfg.window.length = a.T;
  cfg.window.stride = a.stride;
  cfg.window.depth = a.L;
  cfg.functions = split_list(a.functions);
  cfg.threshold_k = a.k;
  cfg.reference = parse_reference(a.reference);
  cfg.seed = seed;
  cfg.mc_draws = a.mc_draws;
  cfg.jobs = a.jobs;
  cfg.degenerate = a.jitter ? DegeneratePolicy::Jitter : DegeneratePolicy::Error;
  cfg.les.clamp = a.clamp;
  cfg.gap_tolerance = a.gap;
  cfg.min_duration = a.min_duration;
  for (const auto& t : split_list(a.dump_spectra)) cfg.capture_ends.push_back(parse_range(t + ":" + t, "spectrum index").first);

  if (!a.partition.empty()) {
    RegionPartition part = load_partition(a.partition);
    for (const auto& r : a.drop_regions) {
      auto it = part.regions.find(r);
      if (it == part.regions.end()) throw Error(ErrorKind::Configuration, "cli", "no region '" + r + "' to drop");
      data = drop_nodes(data, it->second);
      part.regions.erase(it);
      log.info("dropped region {}", r);
    }
    cfg.regions = std::move(part);
  } else if (!a.drop_regions.empty()) {
    throw Error(ErrorKind::Configuration, "cli", "--drop-region needs --partition");
  }

  const auto series = cfg.regions ? regional_series(data, cfg) : sweep(data, cfg);
  for (const auto& w : series.warnings) log.warn("{}", w);
  const auto report = extract_events(series, cfg);

  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  write_indicators_csv(series, dir / "indicators.csv");
  write_json(report_json(report, series), dir / "report.json");
  if (!series.spectra.empty()) {
    std::filesystem::create_directories(dir / "spectra");
    for (const auto& c : series.spectra) {
      const auto name = c.region + "_" + std::to_string(c.t) + "_" + to_string(c.spectrum.kind) + ".csv";
      write_spectrum_dump(c.spectrum, dir / "spectra" / name);
    }
  }
  json params = {{"input", a.input},         {"partition", a.partition},  {"T", a.T},
                 {"stride", a.stride},       {"L", a.L},                  {"functions", cfg.functions},
                 {"k", a.k},                 {"reference", a.reference},  {"mc_draws", a.mc_draws},
                 {"missing", a.missing},     {"jitter", a.jitter},        {"clamp", a.clamp},
                 {"drop_region", a.drop_regions}, {"dump_spectra", a.dump_spectra}, {"gap", a.gap},
                 {"min_duration", a.min_duration}, {"out", a.out}};
  write_json(run_record("analyze", seed, params), dir / "run.json");

  log.info("{} series, {} events", series.series.size(), report.events.size());
  for (const auto& e : report.events) {
    out << e.region << ' ' << e.function << " start=" << e.start_t << " end=" << e.end_t
        << " peak_sigma=" << e.peak_sigma << '\n';
  }
  return 0;
}

int do_theory(const TheoryArgs& a, std::ostream& out, spdlog::logger& log) {
  const std::uint64_t seed = resolve_seed(a.seed);
  auto rows = theory_table(a.N, a.T, a.kappa4, a.L);
  const double c = static_cast<double>(a.N) / static_cast<double>(a.T);
  const auto msr_quad = msr_moments_quadrature(c, a.L);

  if (a.mc_draws > 0) {
    std::vector<TestFunction> fns;
    for (const auto& r : rows) {
      if (r.function != "MSR") fns.push_back(TestFunction::by_name(r.function));
    }
    const auto mc = monte_carlo_les(fns, a.N, a.T, a.mc_draws, seed);
    std::size_t j = 0;
    for (auto& r : rows) {
      if (r.function != "MSR") r.mc_variance = mc[j++].variance;
    }
    log.info("Monte Carlo over {} Gaussian {}x{} matrices", a.mc_draws, a.N, a.T);
  }

  char line[256];
  std::snprintf(line, sizeof line, "N=%ld T=%ld c=%.6f kappa4=%g L=%d\n", static_cast<long>(a.N), static_cast<long>(a.T), c,
                a.kappa4, a.L);
  out << line;
  std::snprintf(line, sizeof line, "%-5s %14s %14s %12s%s\n", "f", "E", "D", "c_v", a.mc_draws > 0 ? "           D_mc" : "");
  out << line;
  json table = json::array();
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-5s %14.6g %14.6g %12.6g", r.function.c_str(), r.expectation, r.variance, r.cv);
    out << line;
    if (r.mc_variance) {
      std::snprintf(line, sizeof line, " %14.6g", *r.mc_variance);
      out << line;
    }
    out << '\n';
    json row = {{"function", r.function}, {"E", r.expectation}, {"D", r.variance}, {"cv", r.cv}};
    if (r.mc_variance) row["D_mc"] = *r.mc_variance;
    table.push_back(row);
  }
  std::snprintf(line, sizeof line, "MSR by quadrature: E=%.10g D=%.10g\n", msr_quad.expectation, msr_quad.variance);
  out << line;

  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);
    write_json({{"rows", table}, {"msr_quadrature", {{"E", msr_quad.expectation}, {"D", msr_quad.variance}}}},
               dir / "theory.json");
    write_json(run_record("theory", seed,
                          {{"N", a.N}, {"T", a.T}, {"kappa4", a.kappa4}, {"L", a.L}, {"mc_draws", a.mc_draws}, {"out", a.out}}),
               dir / "run.json");
  }
  return 0;
}

int do_pca(const PcaArgs& a, std::ostream& out, spdlog::logger& log) {
  const DataSource data = load_csv(a.input, parse_missing_policy(a.missing));
  const auto train_range = parse_range(a.train, "--train");
  PcaConfig cfg;
  cfg.train_first = train_range.first;
  cfg.train_last = train_range.last;
  cfg.m = a.m;
  cfg.variance_fraction = a.variance;
  cfg.m_prime = a.m_prime;
  cfg.k = a.k;
  cfg.window = a.window;
  const auto model = train(data, cfg);
  log.info("m={} pilots={} condition={:.3g}", model.m, fmt::join(model.pilot_ids(), ","), model.condition);

  Range judge_range{a.window - 1, data.samples() - 1};
  if (!a.judge_range.empty()) judge_range = parse_range(a.judge_range, "--judge");
  const auto series = judge_series(model, data, judge_range.first, judge_range.last, a.window, a.k);

  DetectorConfig ev;
  ev.gap_tolerance = a.gap;
  ev.min_duration = a.min_duration;
  auto report = extract_events(series, ev);
  report.L = 0;

  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  write_indicators_csv(series, dir / "indicators.csv");
  write_json(report_json(report, series), dir / "report.json");
  json coeffs = json::object();
  const auto targets = model.target_ids();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::vector<double> v(static_cast<std::size_t>(model.coefficients.rows()));
    for (Eigen::Index r = 0; r < model.coefficients.rows(); ++r) v[static_cast<std::size_t>(r)] = model.coefficients(r, static_cast<Eigen::Index>(i));
    coeffs[targets[i]] = {{"v", v}, {"residual_rms", model.residual_rms(static_cast<Eigen::Index>(i))}};
  }
  write_json({{"pilots", model.pilot_ids()},
              {"m", model.m},
              {"condition", model.condition},
              {"train", {model.train_first, model.train_last}},
              {"targets", coeffs}},
             dir / "model.json");
  json params = {{"input", a.input},   {"train", a.train}, {"judge", a.judge_range}, {"m_prime", a.m_prime},
                 {"variance", a.variance}, {"k", a.k},     {"window", a.window},     {"missing", a.missing},
                 {"gap", a.gap},       {"min_duration", a.min_duration}, {"out", a.out}};
  params["m"] = a.m ? json(*a.m) : json(nullptr);
  write_json(run_record("pca-baseline", 0, params), dir / "run.json");

  for (const auto& e : report.events) {
    out << e.region << ' ' << e.function << " start=" << e.start_t << " end=" << e.end_t
        << " peak_sigma=" << e.peak_sigma << '\n';
  }
  return 0;
}

int do_mapframes(const MapArgs& a, std::ostream& out, spdlog::logger& log) {
  const auto series = read_report_dir(a.report);
  const auto partition = load_partition(a.layout);
  RenderOptions opts;
  opts.grid = a.grid;
  opts.stride = a.stride;
  opts.power = a.power;
  opts.function = a.function;
  opts.quantity = a.quantity;
  const auto frames = render_run(series, partition, opts, a.out);
  write_json(run_record("mapframes", 0,
                        {{"report", a.report}, {"layout", a.layout}, {"grid", a.grid}, {"stride", a.stride},
                         {"power", a.power}, {"function", a.function}, {"quantity", a.quantity}, {"out", a.out}}),
             std::filesystem::path(a.out) / "run.json");
  log.info("wrote {} frames to {}", frames.size(), a.out);
  out << frames.size() << " frames\n";
  return 0;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorKind::Configuration, "cli", "--config needs a file path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;

  std::ifstream in(config_path);
  if (!in) throw Error(ErrorKind::MalformedInput, "cli", "cannot open config file '" + config_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedInput, "cli", "config file '" + config_path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "cli", "config file must hold a JSON object");

  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& s) { return kSubcommands.count(s) > 0; });
  if (sub == rest.end()) {
    if (!doc.contains("subcommand")) throw Error(ErrorKind::Configuration, "cli", "no subcommand on the command line or in the config");
    rest.push_back(doc["subcommand"].get<std::string>());
    sub = rest.end() - 1;
  }
  auto given = [&](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& s) { return s == flag || s.rfind(flag + "=", 0) == 0; });
  };

  std::vector<std::string> extra;
  for (const auto& [key, value] : doc.items()) {
    if (key == "subcommand") continue;
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + config_scalar(v);
      extra.push_back(flag);
      extra.push_back(joined);
    } else if (!value.is_null()) {
      extra.push_back(flag);
      extra.push_back(config_scalar(value));
    }
  }
  rest.insert(sub + 1, extra.begin(), extra.end());
  return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-matrix early event detection", "rmteed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_option("--config", "JSON file whose keys mirror the subcommand flags");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic scenario as a CSV matrix");
  s->add_option("--preset", sim.preset, "Built-in scenario")->capture_default_str();
  s->add_option("--scenario", sim.scenario, "Scenario JSON file (overrides --preset)")->check(CLI::ExistingFile);
  s->add_option("--n", sim.n, "Nodes")->capture_default_str();
  s->add_option("--t", sim.t, "Samples")->capture_default_str();
  s->add_option("--event-bus", sim.event_bus, "1-based node carrying the event")->capture_default_str();
  s->add_option("--coupling", sim.coupling, "Share of the deviation spread to all nodes")->capture_default_str();
  s->add_option("--units-per-noise", sim.units_per_noise, "Demand units per noise standard deviation")->capture_default_str();
  s->add_option("--collapse-rate", sim.collapse_rate, "Log noise growth per sample in the collapse phase")->capture_default_str();
  s->add_option("--noise-std", sim.noise_std, "Baseline noise standard deviation")->capture_default_str();
  s->add_option("--seed", sim.seed, "Base seed (fallback: RMT_EED_SEED, then 0)");
  s->add_option("--out", sim.out, "Output CSV")->required();
  s->add_option("--partition-out", sim.partition_out, "Also write the illustrative region partition with layout");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Moving-window spectral analysis and event extraction");
  a->add_option("--input", an.input, "Data CSV (nodes x samples)")->required();
  a->add_option("--partition", an.partition, "Region partition JSON");
  a->add_option("--T", an.T, "Window length")->capture_default_str();
  a->add_option("--stride", an.stride, "Window stride")->capture_default_str();
  a->add_option("--L", an.L, "Ring product depth")->capture_default_str();
  a->add_option("--functions", an.functions, "Comma list of MSR, T2, T3, T4, DET, LRF")->capture_default_str();
  a->add_option("--k", an.k, "Flag threshold in standard deviations")->capture_default_str();
  a->add_option("--reference", an.reference, "theoretical or calib:START:END")->capture_default_str();
  a->add_option("--mc-draws", an.mc_draws, "Gaussian draws for the theoretical reference spread")->capture_default_str();
  a->add_option("--seed", an.seed, "Base seed (fallback: RMT_EED_SEED, then 0)");
  a->add_option("--out", an.out, "Output directory")->required();
  a->add_option("--missing", an.missing, "error, forward-fill or row-mean")->capture_default_str();
  a->add_flag("--jitter", an.jitter, "Jitter zero-variance rows instead of failing");
  a->add_flag("--clamp", an.clamp, "Clamp non-positive eigenvalues for DET and LRF");
  a->add_option("--jobs", an.jobs, "Worker threads (0: all cores)")->capture_default_str();
  a->add_option("--drop-region", an.drop_regions, "Remove a region's nodes before analysis")->delimiter(',');
  a->add_option("--dump-spectra", an.dump_spectra, "Comma list of window ends whose spectra are written");
  a->add_option("--gap", an.gap, "Unflagged points bridged inside an event")->capture_default_str();
  a->add_option("--min-duration", an.min_duration, "Shortest kept event in points")->capture_default_str();

  TheoryArgs th;
  auto* t = app.add_subcommand("theory", "Limiting expectation and variance of every named statistic");
  t->add_option("--N", th.N, "Rows")->capture_default_str();
  t->add_option("--T", th.T, "Columns")->capture_default_str();
  t->add_option("--kappa4", th.kappa4, "Fourth cumulant of the entries")->capture_default_str();
  t->add_option("--L", th.L, "Ring product depth for MSR")->capture_default_str();
  t->add_option("--mc-draws", th.mc_draws, "Add a Monte Carlo variance column")->capture_default_str();
  t->add_option("--seed", th.seed, "Base seed (fallback: RMT_EED_SEED, then 0)");
  t->add_option("--out", th.out, "Also write theory.json and run.json here");

  PcaArgs pc;
  auto* p = app.add_subcommand("pca-baseline", "Pilot-sensor regression baseline");
  p->add_option("--input", pc.input, "Data CSV (nodes x samples)")->required();
  p->add_option("--train", pc.train, "Training samples START:END")->required();
  p->add_option("--judge", pc.judge_range, "Judged samples START:END (default: all)");
  p->add_option("--m-prime", pc.m_prime, "Pilot count")->capture_default_str();
  p->add_option("--m", pc.m, "Principal subspace dimension (default: variance threshold)");
  p->add_option("--variance", pc.variance, "Variance share defining m")->capture_default_str();
  p->add_option("--k", pc.k, "Flag threshold in training residual RMS")->capture_default_str();
  p->add_option("--window", pc.window, "Samples per residual norm")->capture_default_str();
  p->add_option("--missing", pc.missing, "error, forward-fill or row-mean")->capture_default_str();
  p->add_option("--gap", pc.gap, "Unflagged points bridged inside an event")->capture_default_str();
  p->add_option("--min-duration", pc.min_duration, "Shortest kept event in points")->capture_default_str();
  p->add_option("--out", pc.out, "Output directory")->required();

  MapArgs mp;
  auto* m = app.add_subcommand("mapframes", "Interpolated map frames from an analyze report");
  m->add_option("--report", mp.report, "analyze output directory")->required();
  m->add_option("--layout", mp.layout, "Partition JSON with a layout")->required();
  m->add_option("--grid", mp.grid, "Grid cells per side")->capture_default_str();
  m->add_option("--stride", mp.stride, "Series points between frames")->capture_default_str();
  m->add_option("--power", mp.power, "IDW exponent")->capture_default_str();
  m->add_option("--function", mp.function, "Statistic to map (default: first in the report)");
  m->add_option("--quantity", mp.quantity, "eta or tau")->capture_default_str();
  m->add_option("--out", mp.out, "Output directory")->required();

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const Error& e) {
    err << "error [" << e.module() << "/" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 1;
  }

  auto logger = make_logger(err, log_level);
  try {
    if (s->parsed()) return do_simulate(sim, out, *logger);
    if (a->parsed()) return do_analyze(an, out, *logger);
    if (t->parsed()) return do_theory(th, out, *logger);
    if (p->parsed()) return do_pca(pc, out, *logger);
    if (m->parsed()) return do_mapframes(mp, out, *logger);
  } catch (const Error& e) {
    err << "error [" << e.module() << "/" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [cli/io]: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 1;
}

}  // namespace rmteed::cli
