#include "rmteed/ingest.hpp"

#include "rmteed/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rmteed {

namespace {

const char* kModule = "ingest";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(',', pos);
    if (next == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

std::string location(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

bool is_missing_literal(std::string_view cell) {
  if (cell.empty()) return true;
  std::string lower(cell);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return lower == "nan" || lower == "na" || lower == "inf" || lower == "-inf" || lower == "+inf";
}

// Returns NaN for missing/non-finite cells; throws on text that is not a number.
double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  if (is_missing_literal(cell)) return std::nan("");
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    fail(ErrorKind::MalformedInput, "cannot parse '" + std::string(cell) + "' as a number at " + location(row, col));
  }
  if (!std::isfinite(v)) return std::nan("");
  return v;
}

void resolve_missing(Eigen::MatrixXd& values, const std::vector<std::string>& ids, MissingPolicy policy) {
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    auto row = values.row(i);
    Eigen::Index finite = 0;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (std::isfinite(row(j))) {
        ++finite;
        sum += row(j);
      }
    }
    if (finite == 0) {
      fail(ErrorKind::UnrecoverableRow, "node '" + ids[static_cast<std::size_t>(i)] + "' has no finite values");
    }
    if (finite == row.size()) continue;
    switch (policy) {
      case MissingPolicy::Error:
        for (Eigen::Index j = 0; j < row.size(); ++j) {
          if (!std::isfinite(row(j))) {
            // +2: header line and node-id column, 1-based.
            fail(ErrorKind::MalformedInput,
                 "missing value for node '" + ids[static_cast<std::size_t>(i)] + "' at " +
                     location(static_cast<std::size_t>(i) + 2, static_cast<std::size_t>(j) + 2));
          }
        }
        break;
      case MissingPolicy::ForwardFill: {
        // Leading gaps have no left neighbour; they take the first finite value.
        Eigen::Index first = 0;
        while (!std::isfinite(row(first))) ++first;
        for (Eigen::Index j = 0; j < first; ++j) row(j) = row(first);
        for (Eigen::Index j = first + 1; j < row.size(); ++j) {
          if (!std::isfinite(row(j))) row(j) = row(j - 1);
        }
        break;
      }
      case MissingPolicy::RowMean: {
        const double mean = sum / static_cast<double>(finite);
        for (Eigen::Index j = 0; j < row.size(); ++j) {
          if (!std::isfinite(row(j))) row(j) = mean;
        }
        break;
      }
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

MissingPolicy parse_missing_policy(const std::string& name) {
  if (name == "error") return MissingPolicy::Error;
  if (name == "forward-fill") return MissingPolicy::ForwardFill;
  if (name == "row-mean") return MissingPolicy::RowMean;
  fail(ErrorKind::Configuration, "unknown missing-data policy '" + name + "' (error | forward-fill | row-mean)");
}

std::optional<Eigen::Index> DataSource::index_of(const std::string& node_id) const {
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    if (node_ids[i] == node_id) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

void DataSource::validate() const {
  if (values.rows() < 2 || values.cols() < 2) {
    fail(ErrorKind::MalformedInput, "data source needs at least 2 nodes and 2 samples, got " +
                                        std::to_string(values.rows()) + "x" + std::to_string(values.cols()));
  }
  if (static_cast<Eigen::Index>(node_ids.size()) != values.rows() ||
      static_cast<Eigen::Index>(timestamps.size()) != values.cols()) {
    fail(ErrorKind::Shape, "node/timestamp labels do not match the value matrix");
  }
  std::set<std::string> seen;
  for (const auto& id : node_ids) {
    if (id.empty()) fail(ErrorKind::MalformedInput, "empty node id");
    if (!seen.insert(id).second) fail(ErrorKind::MalformedInput, "duplicate node id '" + id + "'");
  }
  if (!values.allFinite()) fail(ErrorKind::MalformedInput, "data source contains non-finite values");
}

void RegionPartition::validate() const {
  std::map<std::string, std::string> owner;
  for (const auto& [name, nodes] : regions) {
    if (nodes.empty()) fail(ErrorKind::Configuration, "region '" + name + "' is empty");
    for (const auto& id : nodes) {
      auto [it, inserted] = owner.emplace(id, name);
      if (!inserted) {
        fail(ErrorKind::Configuration, "node '" + id + "' belongs to both '" + it->second + "' and '" + name + "'");
      }
      if (has_layout() && !layout.count(id)) {
        fail(ErrorKind::Configuration, "layout has no coordinates for node '" + id + "'");
      }
    }
  }
}

DataSource parse_csv(const std::string& text, MissingPolicy policy) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  DataSource src;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (header) {
      if (cells.size() < 2) fail(ErrorKind::MalformedInput, "header needs a label column and timestamps");
      for (std::size_t c = 1; c < cells.size(); ++c) {
        std::int64_t ts = 0;
        auto cell = cells[c];
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), ts);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
          fail(ErrorKind::MalformedInput, "timestamp '" + std::string(cell) + "' is not an integer at " +
                                              location(line_no, c + 1));
        }
        src.timestamps.push_back(ts);
      }
      header = false;
      continue;
    }
    if (cells.size() != src.timestamps.size() + 1) {
      fail(ErrorKind::MalformedInput, "expected " + std::to_string(src.timestamps.size() + 1) + " cells, found " +
                                          std::to_string(cells.size()) + " at row " + std::to_string(line_no));
    }
    if (cells[0].empty()) fail(ErrorKind::MalformedInput, "empty node id at " + location(line_no, 1));
    src.node_ids.emplace_back(cells[0]);
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_cell(cells[c], line_no, c + 1));
    rows.push_back(std::move(row));
  }
  if (header) fail(ErrorKind::MalformedInput, "empty CSV");

  src.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(src.timestamps.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      src.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  resolve_missing(src.values, src.node_ids, policy);
  src.validate();
  return src;
}

DataSource load_csv(const std::filesystem::path& path, MissingPolicy policy) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), policy);
}

void write_csv(const DataSource& src, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << "node_id";
  for (auto ts : src.timestamps) out << ',' << ts;
  out << '\n';
  for (Eigen::Index i = 0; i < src.nodes(); ++i) {
    out << src.node_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < src.samples(); ++j) out << ',' << format_double(src.values(i, j));
    out << '\n';
  }
}

RegionPartition parse_partition(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedInput, std::string("partition file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::MalformedInput, "partition file must be a JSON object");

  RegionPartition part;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "layout") {
        for (const auto& [id, xy] : value.items()) {
          if (!xy.is_array() || xy.size() != 2) fail(ErrorKind::MalformedInput, "layout entry for '" + id + "' must be [x, y]");
          part.layout[id] = Point2{xy[0].get<double>(), xy[1].get<double>()};
        }
        continue;
      }
      if (!value.is_array()) fail(ErrorKind::MalformedInput, "region '" + key + "' must map to a list of node ids");
      part.regions[key] = value.get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedInput, std::string("bad partition file: ") + e.what());
  }
  part.validate();
  return part;
}

RegionPartition load_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_partition(buf.str());
}

void write_partition(const RegionPartition& partition, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  for (const auto& [name, nodes] : partition.regions) doc[name] = nodes;
  if (partition.has_layout()) {
    nlohmann::ordered_json layout = nlohmann::ordered_json::object();
    for (const auto& [id, p] : partition.layout) layout[id] = {p.x, p.y};
    doc["layout"] = layout;
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

RawWindow window_at(const DataSource& src, const WindowSpec& spec, Eigen::Index end_index) {
  const Eigen::Index T = spec.length;
  if (T < 1 || spec.stride < 1 || spec.depth < 1) {
    fail(ErrorKind::Parameter, "window length, stride and depth must be >= 1");
  }
  if (end_index < T - 1) {
    fail(ErrorKind::InsufficientHistory, "window ending at " + std::to_string(end_index) + " needs " +
                                             std::to_string(T) + " samples of history");
  }
  if (end_index >= src.samples()) {
    fail(ErrorKind::Contract, "window end " + std::to_string(end_index) + " is past the last sample " +
                                  std::to_string(src.samples() - 1));
  }

  std::vector<Eigen::Index> rows;
  RawWindow w;
  if (spec.node_subset) {
    for (const auto& id : *spec.node_subset) {
      auto idx = src.index_of(id);
      if (!idx) fail(ErrorKind::Contract, "node '" + id + "' is not in the data source");
      rows.push_back(*idx);
      w.node_ids.push_back(id);
    }
  } else {
    for (Eigen::Index i = 0; i < src.nodes(); ++i) rows.push_back(i);
    w.node_ids = src.node_ids;
  }
  const auto N = static_cast<Eigen::Index>(rows.size());
  if (N < 1) fail(ErrorKind::Contract, "empty node subset");
  if (N > T) {
    fail(ErrorKind::AspectRatio, "N=" + std::to_string(N) + " exceeds T=" + std::to_string(T) + " (c must be <= 1)");
  }

  w.start_index = end_index - T + 1;
  w.end_index = end_index;
  w.values = src.values(rows, Eigen::seq(w.start_index, end_index));
  return w;
}

DataSource drop_nodes(const DataSource& src, const std::vector<std::string>& node_ids) {
  std::set<std::string> drop(node_ids.begin(), node_ids.end());
  std::vector<Eigen::Index> keep;
  DataSource out;
  out.timestamps = src.timestamps;
  for (Eigen::Index i = 0; i < src.nodes(); ++i) {
    const auto& id = src.node_ids[static_cast<std::size_t>(i)];
    if (drop.count(id)) continue;
    keep.push_back(i);
    out.node_ids.push_back(id);
  }
  out.values = src.values(keep, Eigen::all);
  return out;
}

}  // namespace rmteed
