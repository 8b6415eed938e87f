#pragma once

#include "rmteed/ingest.hpp"
#include "rmteed/les.hpp"
#include "rmteed/rmm.hpp"
#include "rmteed/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rmteed {

/// Where the centre and spread used for flagging come from.
///
/// Theoretical: mean and standard deviation of tau over seeded Gaussian windows of the same
/// (N, T, L), pushed through the same pipeline. Calibration: mean and standard deviation of the
/// observed tau over windows whose END lies in [calib_first, calib_last]; those windows are not
/// scored. In both modes eta = tau / E_ref uses the limiting expectation.
struct ReferenceSpec {
  enum class Mode { Theoretical, Calibration };

  Mode mode = Mode::Theoretical;
  Eigen::Index calib_first = 0;
  Eigen::Index calib_last = 0;

  std::string describe() const;
};

/// "theoretical" or "calib:START:END" (window end indices, inclusive).
ReferenceSpec parse_reference(const std::string& text);

struct DetectorConfig {
  WindowSpec window;
  std::vector<std::string> functions{"MSR"};
  double threshold_k = 3.0;
  ReferenceSpec reference;
  std::optional<RegionPartition> regions;
  bool include_all = true;  // regional_series: also sweep the whole system as "ALL"

  std::uint64_t seed = 0;
  int mc_draws = 200;
  int jobs = 1;  // 0: one worker per hardware thread
  DegeneratePolicy degenerate = DegeneratePolicy::Error;
  LesOptions les;

  Eigen::Index gap_tolerance = 2;  // unflagged points bridged inside one event
  Eigen::Index min_duration = 3;   // points spanned by a kept event

  /// Window ends at which spectra are retained (for --dump-spectra).
  std::vector<Eigen::Index> capture_ends;

  void validate() const;
};

struct ReferenceMoments {
  std::optional<double> expectation;  // E_ref, limiting value; empty when undefined or zero
  double mean = 0.0;                  // flag centre
  double stddev = 0.0;                // flag spread
  std::string source;                 // "monte-carlo:<draws>" or "calibration:<first>:<last>"
};

struct IndicatorPoint {
  Eigen::Index t = 0;  // window end
  double tau = 0.0;
  double eta = 0.0;  // NaN when E_ref is undefined
  bool flag = false;
};

struct Series {
  std::string region;
  std::string function;
  Eigen::Index nodes = 0;
  ReferenceMoments reference;
  std::string convention;  // "ring L=<L>" or "M=XX^H/N"
  std::vector<IndicatorPoint> points;

  double sigma_units(const IndicatorPoint& p) const;
};

struct CapturedSpectrum {
  std::string region;
  Eigen::Index t = 0;
  SpectrumSet spectrum;
};

struct IndicatorSeries {
  std::vector<Series> series;
  Eigen::Index T = 0;
  int L = 1;
  double threshold_k = 3.0;
  std::vector<std::string> warnings;
  std::vector<CapturedSpectrum> spectra;

  const Series* find(const std::string& region, const std::string& function) const;
};

struct Event {
  std::string region;
  std::string function;
  Eigen::Index start_t = 0;
  Eigen::Index end_t = 0;
  Eigen::Index flagged = 0;  // flagged points inside the run
  double peak_sigma = 0.0;   // signed (tau - mean) / stddev of largest magnitude
  int direction = 0;         // +1 above the reference, -1 below
};

struct EventReport {
  std::vector<Event> events;
  Eigen::Index T = 0;
  int L = 1;
  double threshold_k = 3.0;
  Eigen::Index gap_tolerance = 2;
  Eigen::Index min_duration = 3;
};

struct PipelineOptions {
  DegeneratePolicy degenerate = DegeneratePolicy::Error;
  LesOptions les;
  std::vector<std::string> row_labels;
};

struct WindowSpectra {
  std::optional<SpectrumSet> ring;
  std::optional<SpectrumSet> covariance;
};

/// tau of each function for one raw N x T window: standardize, then the ring product of depth L
/// (the same window with L independent Haar factors) for MSR and M = XX^H/N for the rest.
std::vector<double> window_statistics(const Eigen::MatrixXd& raw, const std::vector<TestFunction>& fns, int L,
                                      std::uint64_t seed, const PipelineOptions& opts = {},
                                      WindowSpectra* spectra = nullptr);

/// Limiting E[tau] at (N, T, L); empty when the integral diverges or vanishes.
std::optional<double> limiting_expectation(const TestFunction& f, Eigen::Index N, Eigen::Index T, int L);

/// Mean and sample standard deviation of tau over `draws` Gaussian N x T windows.
std::vector<ReferenceMoments> monte_carlo_reference(const std::vector<TestFunction>& fns, Eigen::Index N,
                                                    Eigen::Index T, int L, int draws, std::uint64_t seed,
                                                    const LesOptions& les = {});

/// Whole-system sweep (rows limited to window.node_subset when set), reported as region "ALL".
IndicatorSeries sweep(const DataSource& src, const DetectorConfig& cfg);

/// "ALL" (unless include_all is off) plus one independent sweep per region of cfg.regions.
/// Region members absent from the data are ignored; regions left with fewer than 2 nodes are
/// skipped with a warning.
IndicatorSeries regional_series(const DataSource& src, const DetectorConfig& cfg);

/// Flagged runs per series, merged across gaps of at most gap_tolerance unflagged points and
/// dropped when spanning fewer than min_duration points.
EventReport extract_events(const IndicatorSeries& series, const DetectorConfig& cfg);

std::vector<Event> extract_runs(const Series& s, Eigen::Index gap_tolerance, Eigen::Index min_duration);

}  // namespace rmteed
