#pragma once

#include "rmteed/detect.hpp"
#include "rmteed/ingest.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace rmteed {

struct PcaConfig {
  Eigen::Index train_first = 0;  // sample indices, inclusive
  Eigen::Index train_last = 0;
  std::optional<Eigen::Index> m;     // principal subspace dimension; default: 95% of variance
  double variance_fraction = 0.95;
  Eigen::Index m_prime = 3;          // pilot count
  double k = 3.0;
  Eigen::Index window = 1;           // samples per residual norm when judging
  double max_condition = 1e10;       // of Y_B^T Y_B

  void validate() const;
};

/// Pilot nodes plus the least-squares map from pilots to every other node.
struct PilotModel {
  std::vector<std::string> node_ids;     // all nodes seen in training, source order
  std::vector<Eigen::Index> pilot_rows;  // selection order
  std::vector<Eigen::Index> target_rows; // non-pilots, source order
  Eigen::MatrixXd coefficients;          // m' x targets; column i is v for target i
  Eigen::VectorXd residual_rms;          // per target, over the training range
  Eigen::VectorXd eigenvalues;           // of Y^T Y, descending
  Eigen::Index m = 0;
  double condition = 0.0;
  Eigen::Index train_first = 0;
  Eigen::Index train_last = 0;

  std::vector<std::string> pilot_ids() const;
  std::vector<std::string> target_ids() const;
};

/// Y = samples x nodes over the training range (no centring). Pilots: the node with the largest
/// principal loading sqrt(lambda) V first, then greedily the node minimizing the largest |cos|
/// to the loadings already chosen (ties to the earlier node). v = (Y_B^T Y_B)^{-1} Y_B^T y.
PilotModel train(const DataSource& src, const PcaConfig& cfg);

struct Judgement {
  Eigen::Index t = 0;
  Eigen::VectorXd residual;  // RMS of y - Y_B v over [t - window + 1, t], per target
  std::vector<bool> flags;   // residual > k * training residual RMS
};

Judgement judge(const PilotModel& model, const DataSource& src, Eigen::Index t, Eigen::Index window = 1,
                double k = 3.0);

/// judge() at every t in [first, last] as one series per target node, function "PCA":
/// tau = residual, eta = residual / training RMS, reference mean 0 and spread = training RMS.
IndicatorSeries judge_series(const PilotModel& model, const DataSource& src, Eigen::Index first, Eigen::Index last,
                             Eigen::Index window = 1, double k = 3.0);

}  // namespace rmteed
