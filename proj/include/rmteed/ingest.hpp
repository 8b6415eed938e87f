#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rmteed {

/// Measurements as n nodes (rows) by t samples (columns). Immutable after load.
struct DataSource {
  Eigen::MatrixXd values;
  std::vector<std::string> node_ids;
  std::vector<std::int64_t> timestamps;

  Eigen::Index nodes() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }

  /// Row index of a node id, or nullopt.
  std::optional<Eigen::Index> index_of(const std::string& node_id) const;

  /// Throws on n < 2, t < 2, label/shape mismatch, duplicate ids or non-finite cells.
  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct RegionPartition {
  std::map<std::string, std::vector<std::string>> regions;
  std::map<std::string, Point2> layout;

  bool has_layout() const { return !layout.empty(); }
  void validate() const;
};

struct WindowSpec {
  Eigen::Index length = 240;  // T
  Eigen::Index stride = 1;
  std::optional<std::vector<std::string>> node_subset;
  int depth = 1;  // L
};

struct RawWindow {
  Eigen::MatrixXd values;  // N x T
  std::vector<std::string> node_ids;
  Eigen::Index end_index = 0;
  Eigen::Index start_index = 0;
};

enum class MissingPolicy { Error, ForwardFill, RowMean };

MissingPolicy parse_missing_policy(const std::string& name);

DataSource load_csv(const std::filesystem::path& path, MissingPolicy policy = MissingPolicy::Error);
DataSource parse_csv(const std::string& text, MissingPolicy policy = MissingPolicy::Error);
void write_csv(const DataSource& src, const std::filesystem::path& path);

RegionPartition load_partition(const std::filesystem::path& path);
RegionPartition parse_partition(const std::string& json_text);
void write_partition(const RegionPartition& partition, const std::filesystem::path& path);

/// Columns [end_index - T + 1, end_index] of the selected rows.
RawWindow window_at(const DataSource& src, const WindowSpec& spec, Eigen::Index end_index);

/// Copy of the source without the given nodes.
DataSource drop_nodes(const DataSource& src, const std::vector<std::string>& node_ids);

}  // namespace rmteed
