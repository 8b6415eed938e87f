#include "rmteed/report_io.hpp"

#include "rmteed/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace rmteed {

namespace {

const char* kModule = "report_io";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << text;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorKind::MalformedInput, "bad number '" + s + "' on line " + std::to_string(line) + " of indicators CSV");
  }
  return v;
}

}  // namespace

const char* version() { return RMTEED_VERSION; }

std::string indicators_csv(const IndicatorSeries& series) {
  std::string out = "t,region,function,tau,eta,flag\n";
  for (const auto& s : series.series) {
    for (const auto& p : s.points) {
      out += std::to_string(p.t);
      out += ',';
      out += s.region;
      out += ',';
      out += s.function;
      out += ',';
      out += num(p.tau);
      out += ',';
      if (std::isfinite(p.eta)) out += num(p.eta);
      out += ',';
      out += p.flag ? "anomalous" : "normal";
      out += '\n';
    }
  }
  return out;
}

void write_indicators_csv(const IndicatorSeries& series, const std::filesystem::path& path) {
  write_text(path, indicators_csv(series));
}

IndicatorSeries parse_indicators_csv(const std::string& text) {
  IndicatorSeries out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "t,region,function,tau,eta,flag") fail(ErrorKind::MalformedInput, "unexpected indicators CSV header");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) fail(ErrorKind::MalformedInput, "expected 6 columns on line " + std::to_string(lineno));

    const auto key = std::make_pair(cells[1], cells[2]);
    auto it = index.find(key);
    if (it == index.end()) {
      Series s;
      s.region = cells[1];
      s.function = cells[2];
      out.series.push_back(std::move(s));
      it = index.emplace(key, out.series.size() - 1).first;
    }
    IndicatorPoint p;
    p.t = parse_number<Eigen::Index>(cells[0], lineno);
    p.tau = parse_number<double>(cells[3], lineno);
    p.eta = cells[4].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_number<double>(cells[4], lineno);
    if (cells[5] == "anomalous") {
      p.flag = true;
    } else if (cells[5] != "normal") {
      fail(ErrorKind::MalformedInput, "flag must be normal or anomalous on line " + std::to_string(lineno));
    }
    out.series[it->second].points.push_back(p);
  }
  return out;
}

IndicatorSeries read_indicators_csv(const std::filesystem::path& path) { return parse_indicators_csv(slurp(path)); }

nlohmann::json report_json(const EventReport& report, const IndicatorSeries& series) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : report.events) {
    events.push_back({{"region", e.region},
                      {"function", e.function},
                      {"start_t", e.start_t},
                      {"end_t", e.end_t},
                      {"flagged", e.flagged},
                      {"peak_sigma", finite_or_null(e.peak_sigma)},
                      {"direction", e.direction > 0 ? "up" : (e.direction < 0 ? "down" : "none")}});
  }
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& s : series.series) {
    nlohmann::json ref = {{"mean", finite_or_null(s.reference.mean)},
                          {"stddev", finite_or_null(s.reference.stddev)},
                          {"source", s.reference.source}};
    ref["expectation"] = s.reference.expectation ? finite_or_null(*s.reference.expectation) : nlohmann::json(nullptr);
    meta.push_back({{"region", s.region},
                    {"function", s.function},
                    {"nodes", s.nodes},
                    {"convention", s.convention},
                    {"points", s.points.size()},
                    {"reference", std::move(ref)}});
  }
  return {{"window",
           {{"T", report.T},
            {"L", report.L},
            {"k", report.threshold_k},
            {"gap_tolerance", report.gap_tolerance},
            {"min_duration", report.min_duration}}},
          {"events", std::move(events)},
          {"series", std::move(meta)},
          {"warnings", series.warnings}};
}

IndicatorSeries read_report_dir(const std::filesystem::path& dir) {
  const auto csv = dir / "indicators.csv";
  if (!std::filesystem::exists(csv)) fail(ErrorKind::MalformedInput, "no indicators.csv in '" + dir.string() + "'");
  auto series = read_indicators_csv(csv);
  const auto report_path = dir / "report.json";
  if (!std::filesystem::exists(report_path)) return series;
  try {
    const auto doc = nlohmann::json::parse(slurp(report_path));
    const auto& w = doc.at("window");
    series.T = w.at("T").get<Eigen::Index>();
    series.L = w.at("L").get<int>();
    series.threshold_k = w.at("k").get<double>();
    for (const auto& m : doc.at("series")) {
      for (auto& s : series.series) {
        if (s.region != m.at("region").get<std::string>() || s.function != m.at("function").get<std::string>()) continue;
        s.nodes = m.at("nodes").get<Eigen::Index>();
        s.convention = m.at("convention").get<std::string>();
        const auto& r = m.at("reference");
        if (!r.at("expectation").is_null()) s.reference.expectation = r.at("expectation").get<double>();
        if (!r.at("mean").is_null()) s.reference.mean = r.at("mean").get<double>();
        if (!r.at("stddev").is_null()) s.reference.stddev = r.at("stddev").get<double>();
        s.reference.source = r.at("source").get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedInput, "bad report.json in '" + dir.string() + "': " + e.what());
  }
  return series;
}

nlohmann::json run_record(const std::string& subcommand, std::uint64_t seed, const nlohmann::json& parameters) {
  return {{"tool", "rmteed"}, {"version", version()}, {"subcommand", subcommand}, {"seed", seed}, {"parameters", parameters}};
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) { write_text(path, doc.dump(2) + "\n"); }

void write_spectrum_dump(const SpectrumSet& s, const std::filesystem::path& csv_path) {
  write_spectrum_csv(s, csv_path);
  std::vector<double> xs;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    xs.push_back(s.kind == SpectrumKind::Ring ? std::abs(s.eigenvalues(i)) : s.eigenvalues(i).real());
  }
  const auto h = histogram_fd(xs);
  nlohmann::json meta = {{"kind", to_string(s.kind)},
                         {"N", s.N},
                         {"T", s.T},
                         {"L", s.L},
                         {"variable", s.kind == SpectrumKind::Ring ? "modulus" : "real"},
                         {"rule", h.rule},
                         {"bin_width", h.bin_width},
                         {"edges", h.edges},
                         {"counts", h.counts}};
  auto meta_path = csv_path;
  meta_path.replace_extension(".json");
  write_json(meta, meta_path);
}

}  // namespace rmteed
