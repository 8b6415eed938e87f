#include "rmteed/pca.hpp"

#include "rmteed/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmteed {

namespace {

const char* kModule = "pca_baseline";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

// Residuals below this fraction of the signal RMS count as exact fits.
constexpr double kExactFloor = 1e-9;

std::vector<Eigen::Index> rows_in(const PilotModel& model, const DataSource& src) {
  std::vector<Eigen::Index> rows;
  rows.reserve(model.node_ids.size());
  for (const auto& id : model.node_ids) {
    auto r = src.index_of(id);
    if (!r) fail(ErrorKind::Contract, "node '" + id + "' of the trained model is missing from the data");
    rows.push_back(*r);
  }
  return rows;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& cols) {
  return y(Eigen::all, cols);
}

}  // namespace

void PcaConfig::validate() const {
  if (train_first < 0 || train_last < train_first) fail(ErrorKind::Configuration, "training range must satisfy 0 <= START <= END");
  if (m_prime < 1) fail(ErrorKind::Configuration, "pilot count m' must be >= 1");
  if (m && *m < m_prime) fail(ErrorKind::Configuration, "pilot count m' must not exceed the subspace dimension m");
  if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) fail(ErrorKind::Configuration, "variance fraction must lie in (0, 1]");
  if (!(k > 0.0)) fail(ErrorKind::Configuration, "k must be positive");
  if (window < 1) fail(ErrorKind::Configuration, "judging window must be >= 1 sample");
}

std::vector<std::string> PilotModel::pilot_ids() const {
  std::vector<std::string> ids;
  for (auto r : pilot_rows) ids.push_back(node_ids[static_cast<std::size_t>(r)]);
  return ids;
}

std::vector<std::string> PilotModel::target_ids() const {
  std::vector<std::string> ids;
  for (auto r : target_rows) ids.push_back(node_ids[static_cast<std::size_t>(r)]);
  return ids;
}

PilotModel train(const DataSource& src, const PcaConfig& cfg) {
  cfg.validate();
  const Eigen::Index N = src.nodes();
  if (cfg.train_last >= src.samples()) {
    fail(ErrorKind::Contract, "training range ends at " + std::to_string(cfg.train_last) + " but the data has " +
                                  std::to_string(src.samples()) + " samples");
  }
  const Eigen::Index len = cfg.train_last - cfg.train_first + 1;
  if (len < cfg.m_prime) {
    fail(ErrorKind::InsufficientHistory, "training range of " + std::to_string(len) + " samples is shorter than m'=" +
                                             std::to_string(cfg.m_prime));
  }
  if (cfg.m_prime >= N) fail(ErrorKind::Configuration, "pilot count m' must be smaller than the node count");

  const Eigen::MatrixXd y = src.values.middleCols(cfg.train_first, len).transpose();  // samples x nodes

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(y.transpose() * y);
  if (eig.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "eigendecomposition of Y^T Y failed");
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

  PilotModel model;
  model.node_ids = src.node_ids;
  model.eigenvalues = lambda;
  model.train_first = cfg.train_first;
  model.train_last = cfg.train_last;

  if (cfg.m) {
    if (*cfg.m > N) fail(ErrorKind::Configuration, "subspace dimension m exceeds the node count");
    model.m = *cfg.m;
  } else {
    const double total = lambda.sum();
    double acc = 0.0;
    model.m = N;
    for (Eigen::Index i = 0; i < N; ++i) {
      acc += lambda(i);
      if (total > 0.0 && acc >= cfg.variance_fraction * total) {
        model.m = i + 1;
        break;
      }
    }
    model.m = std::max(model.m, cfg.m_prime);
  }

  const Eigen::MatrixXd loadings = vecs.leftCols(model.m) * lambda.head(model.m).cwiseSqrt().asDiagonal();
  const Eigen::VectorXd norms = loadings.rowwise().norm();

  Eigen::Index first = 0;
  for (Eigen::Index i = 1; i < N; ++i) {
    if (norms(i) > norms(first)) first = i;
  }
  model.pilot_rows.push_back(first);
  std::vector<bool> chosen(static_cast<std::size_t>(N), false);
  chosen[static_cast<std::size_t>(first)] = true;

  auto abs_cos = [&](Eigen::Index i, Eigen::Index j) {
    const double d = norms(i) * norms(j);
    return d > 0.0 ? std::abs(loadings.row(i).dot(loadings.row(j))) / d : 1.0;
  };
  while (static_cast<Eigen::Index>(model.pilot_rows.size()) < cfg.m_prime) {
    Eigen::Index best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < N; ++i) {
      if (chosen[static_cast<std::size_t>(i)]) continue;
      double worst = 0.0;
      for (auto p : model.pilot_rows) worst = std::max(worst, abs_cos(i, p));
      if (worst < best_score) {
        best_score = worst;
        best = i;
      }
    }
    model.pilot_rows.push_back(best);
    chosen[static_cast<std::size_t>(best)] = true;
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!chosen[static_cast<std::size_t>(i)]) model.target_rows.push_back(i);
  }

  const Eigen::MatrixXd yb = columns(y, model.pilot_rows);
  const Eigen::MatrixXd gram = yb.transpose() * yb;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> geig(gram, Eigen::EigenvaluesOnly);
  const double gmax = geig.eigenvalues().maxCoeff();
  const double gmin = geig.eigenvalues().minCoeff();
  model.condition = gmin > 0.0 ? gmax / gmin : std::numeric_limits<double>::infinity();
  if (!(model.condition <= cfg.max_condition)) {
    fail(ErrorKind::IllConditioned, "pilot basis is ill-conditioned (condition number " + std::to_string(model.condition) + ")");
  }

  const Eigen::MatrixXd yt = columns(y, model.target_rows);
  model.coefficients = gram.ldlt().solve(yb.transpose() * yt);
  const Eigen::MatrixXd res = yt - yb * model.coefficients;
  const double n = static_cast<double>(len);
  model.residual_rms = (res.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  const Eigen::VectorXd signal_rms = (yt.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  for (Eigen::Index i = 0; i < model.residual_rms.size(); ++i) {
    model.residual_rms(i) = std::max(model.residual_rms(i), kExactFloor * std::max(1.0, signal_rms(i)));
  }
  return model;
}

Judgement judge(const PilotModel& model, const DataSource& src, Eigen::Index t, Eigen::Index window, double k) {
  if (window < 1) fail(ErrorKind::Contract, "judging window must be >= 1 sample");
  if (t < window - 1 || t >= src.samples()) {
    fail(ErrorKind::Contract, "judging window ending at " + std::to_string(t) + " is outside the data");
  }
  const auto rows = rows_in(model, src);
  std::vector<Eigen::Index> prow;
  std::vector<Eigen::Index> trow;
  for (auto r : model.pilot_rows) prow.push_back(rows[static_cast<std::size_t>(r)]);
  for (auto r : model.target_rows) trow.push_back(rows[static_cast<std::size_t>(r)]);

  const Eigen::Index first = t - window + 1;
  const Eigen::MatrixXd yb = src.values(prow, Eigen::seqN(first, window)).transpose();
  const Eigen::MatrixXd yt = src.values(trow, Eigen::seqN(first, window)).transpose();
  const Eigen::MatrixXd res = yt - yb * model.coefficients;

  Judgement j;
  j.t = t;
  j.residual = (res.colwise().squaredNorm() / static_cast<double>(window)).cwiseSqrt().transpose();
  j.flags.resize(static_cast<std::size_t>(j.residual.size()));
  for (Eigen::Index i = 0; i < j.residual.size(); ++i) {
    j.flags[static_cast<std::size_t>(i)] = j.residual(i) > k * model.residual_rms(i);
  }
  return j;
}

IndicatorSeries judge_series(const PilotModel& model, const DataSource& src, Eigen::Index first, Eigen::Index last,
                             Eigen::Index window, double k) {
  if (first > last) fail(ErrorKind::Contract, "empty judging range");
  IndicatorSeries out;
  out.T = window;
  out.threshold_k = k;
  const auto targets = model.target_ids();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Series s;
    s.region = targets[i];
    s.function = "PCA";
    s.nodes = 1;
    s.reference.expectation = model.residual_rms(static_cast<Eigen::Index>(i));
    s.reference.mean = 0.0;
    s.reference.stddev = model.residual_rms(static_cast<Eigen::Index>(i));
    s.reference.source = "training:" + std::to_string(model.train_first) + ":" + std::to_string(model.train_last);
    s.convention = "residual RMS over " + std::to_string(window) + " samples";
    out.series.push_back(std::move(s));
  }
  for (Eigen::Index t = first; t <= last; ++t) {
    const auto j = judge(model, src, t, window, k);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double r = j.residual(static_cast<Eigen::Index>(i));
      out.series[i].points.push_back({t, r, r / model.residual_rms(static_cast<Eigen::Index>(i)), j.flags[i]});
    }
  }
  return out;
}

}  // namespace rmteed
