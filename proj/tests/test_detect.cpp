#include "rmteed/detect.hpp"
#include "rmteed/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rmteed;

namespace {

DataSource noise(Eigen::Index n, Eigen::Index t, std::uint64_t seed) { return sample_gaussian_matrix(n, t, seed); }

DetectorConfig small_config(std::vector<std::string> fns = {"MSR"}) {
  DetectorConfig cfg;
  cfg.window.length = 60;
  cfg.functions = std::move(fns);
  cfg.seed = 42;
  cfg.mc_draws = 60;
  return cfg;
}

Series series_of(const std::vector<int>& flags) {
  Series s;
  s.region = "R";
  s.function = "F";
  s.reference.mean = 0.0;
  s.reference.stddev = 1.0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    IndicatorPoint p;
    p.t = 100 + static_cast<Eigen::Index>(i);
    p.flag = flags[i] != 0;
    p.tau = p.flag ? -5.0 - static_cast<double>(i) : 0.1;
    s.points.push_back(p);
  }
  return s;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no rmteed::Error thrown";
  return ErrorKind::Contract;
}

}  // namespace

TEST(Reference, Parse) {
  EXPECT_EQ(parse_reference("theoretical").mode, ReferenceSpec::Mode::Theoretical);
  const auto r = parse_reference("calib:239:599");
  EXPECT_EQ(r.mode, ReferenceSpec::Mode::Calibration);
  EXPECT_EQ(r.calib_first, 239);
  EXPECT_EQ(r.calib_last, 599);
  EXPECT_EQ(r.describe(), "calib:239:599");
  EXPECT_EQ(kind_of([] { parse_reference("calib:5"); }), ErrorKind::Configuration);
  EXPECT_EQ(kind_of([] { parse_reference("calib:9:3"); }), ErrorKind::Configuration);
  EXPECT_EQ(kind_of([] { parse_reference("calib:a:3"); }), ErrorKind::Configuration);
  EXPECT_EQ(kind_of([] { parse_reference("empirical"); }), ErrorKind::Configuration);
}

TEST(Config, Validation) {
  auto cfg = small_config();
  cfg.threshold_k = 0.0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Configuration);
  cfg = small_config();
  cfg.window.stride = 0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Configuration);
  cfg = small_config();
  cfg.mc_draws = 1;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Configuration);
  cfg = small_config({});
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Configuration);
  cfg = small_config({"XYZ"});
  EXPECT_EQ(kind_of([&] { sweep(noise(4, 80, 1), cfg); }), ErrorKind::Configuration);
}

TEST(Sweep, TooFewSamples) {
  EXPECT_EQ(kind_of([] { sweep(noise(4, 30, 1), small_config()); }), ErrorKind::InsufficientHistory);
}

TEST(Sweep, WindowEndsAndEta) {
  auto cfg = small_config({"MSR", "LRF"});
  cfg.window.stride = 7;
  const auto out = sweep(noise(12, 120, 3), cfg);
  ASSERT_EQ(out.series.size(), 2u);
  const auto& msr = out.series[0];
  EXPECT_EQ(msr.region, "ALL");
  EXPECT_EQ(msr.nodes, 12);
  EXPECT_EQ(msr.points.front().t, 59);
  EXPECT_EQ(msr.points[1].t, 66);
  EXPECT_EQ(msr.points.size(), 9u);
  EXPECT_EQ(msr.convention, "ring L=1");
  EXPECT_EQ(out.series[1].convention, "M=XX^H/N");
  for (const auto& s : out.series) {
    ASSERT_TRUE(s.reference.expectation.has_value());
    EXPECT_EQ(s.reference.source, "monte-carlo:60");
    for (const auto& p : s.points) {
      EXPECT_DOUBLE_EQ(p.eta, p.tau / *s.reference.expectation);
      EXPECT_EQ(p.flag, std::abs(p.tau - s.reference.mean) > 3.0 * s.reference.stddev);
    }
  }
  EXPECT_NEAR(*msr.reference.expectation, msr_moments(0.2).expectation, 1e-9);
}

TEST(Sweep, DeterministicForFixedSeed) {
  const auto src = noise(10, 100, 7);
  const auto a = sweep(src, small_config({"MSR", "T2"}));
  const auto b = sweep(src, small_config({"MSR", "T2"}));
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    for (std::size_t i = 0; i < a.series[s].points.size(); ++i) {
      EXPECT_EQ(a.series[s].points[i].tau, b.series[s].points[i].tau);
    }
    EXPECT_EQ(a.series[s].reference.stddev, b.series[s].reference.stddev);
  }
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  const auto src = noise(10, 100, 7);
  auto cfg = small_config({"MSR", "LRF"});
  const auto a = sweep(src, cfg);
  cfg.jobs = 3;
  const auto b = sweep(src, cfg);
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    for (std::size_t i = 0; i < a.series[s].points.size(); ++i) {
      EXPECT_EQ(a.series[s].points[i].tau, b.series[s].points[i].tau);
    }
  }
}

TEST(Sweep, PositiveAffineRescalingOfRowsIsInvisible) {
  const auto src = noise(10, 90, 8);
  DataSource moved = src;
  for (Eigen::Index i = 0; i < moved.nodes(); ++i) {
    moved.values.row(i) = moved.values.row(i) * (0.01 + 3.0 * i) + Eigen::RowVectorXd::Constant(90, -50.0 + 7.0 * i);
  }
  const auto cfg = small_config({"MSR", "DET", "T3"});
  const auto a = sweep(src, cfg);
  const auto b = sweep(moved, cfg);
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    for (std::size_t i = 0; i < a.series[s].points.size(); ++i) {
      const auto& p = a.series[s].points[i];
      const auto& q = b.series[s].points[i];
      EXPECT_NEAR(p.tau, q.tau, 1e-8 * std::max(1.0, std::abs(p.tau)));
      EXPECT_EQ(p.flag, q.flag);
    }
  }
}

TEST(Sweep, CommonPulseFlagsExactlyTheWindowsThatContainIt) {
  auto src = noise(20, 260, 5);
  const Eigen::Index t0 = 150;
  src.values.col(t0).array() += 8.0;
  auto cfg = small_config({"MSR"});
  const auto out = sweep(src, cfg);
  const auto& s = out.series[0];
  for (const auto& p : s.points) {
    const bool contains = p.t >= t0 && p.t < t0 + 60;
    EXPECT_EQ(p.flag, contains) << "t=" << p.t << " sigma=" << s.sigma_units(p);
    if (contains) {
      EXPECT_LT(p.tau, s.reference.mean);
    }
  }
}

TEST(Sweep, CapturesRequestedSpectra) {
  auto cfg = small_config({"MSR", "T2"});
  cfg.capture_ends = {61, 70};
  const auto out = sweep(noise(6, 80, 2), cfg);
  ASSERT_EQ(out.spectra.size(), 4u);
  EXPECT_EQ(out.spectra[0].t, 61);
  EXPECT_EQ(out.spectra[0].spectrum.kind, SpectrumKind::Ring);
  EXPECT_EQ(out.spectra[1].spectrum.kind, SpectrumKind::Covariance);
  EXPECT_EQ(out.spectra[0].spectrum.eigenvalues.size(), 6);
}

TEST(Calibration, WindowsExcludedAndMomentsEmpirical) {
  auto cfg = small_config({"T2"});
  cfg.reference = parse_reference("calib:59:99");
  const auto src = noise(8, 150, 4);
  const auto out = sweep(src, cfg);
  const auto& s = out.series[0];
  EXPECT_EQ(s.points.front().t, 100);
  EXPECT_EQ(s.points.size(), 50u);
  EXPECT_EQ(s.reference.source, "calibration:59:99");

  auto theo = small_config({"T2"});
  const auto all = sweep(src, theo);
  std::vector<double> calib;
  for (const auto& p : all.series[0].points) {
    if (p.t <= 99) calib.push_back(p.tau);
  }
  double mean = 0.0;
  for (double v : calib) mean += v;
  mean /= static_cast<double>(calib.size());
  EXPECT_NEAR(s.reference.mean, mean, 1e-9 * std::abs(mean));
}

TEST(Calibration, TooShortRangeRejected) {
  auto cfg = small_config({"T2"});
  cfg.reference = parse_reference("calib:0:59");
  EXPECT_EQ(kind_of([&] { sweep(noise(8, 100, 4), cfg); }), ErrorKind::Configuration);
}

TEST(WindowStatistics, CovarianceLesMatchesDirectComputation) {
  const Eigen::MatrixXd raw = noise(5, 30, 6).values;
  const auto v = window_statistics(raw, {TestFunction::t2(), TestFunction::msr()}, 1, 9);
  const auto x = standardize(raw);
  const Eigen::MatrixXd m = x.data * x.data.transpose() / 5.0;
  // sum (2 lambda^2 - 1) = 2 tr(M^2) - N
  EXPECT_NEAR(v[0], 2.0 * (m * m).trace() - 5.0, 1e-9);
  EXPECT_GT(v[1], 0.0);
  EXPECT_LE(v[1], 1.0 + 1e-12);
}

TEST(WindowStatistics, DepthChangesRingNotCovariance) {
  const Eigen::MatrixXd raw = noise(6, 30, 6).values;
  const auto a = window_statistics(raw, {TestFunction::msr(), TestFunction::lrf()}, 1, 9);
  const auto b = window_statistics(raw, {TestFunction::msr(), TestFunction::lrf()}, 3, 9);
  EXPECT_NE(a[0], b[0]);
  EXPECT_EQ(a[1], b[1]);
}

TEST(Limiting, UndefinedExpectationIsEmpty) {
  EXPECT_FALSE(limiting_expectation(TestFunction::det(), 50, 50, 1).has_value());
  // Limiting E of T3 is positive; custom x -> x - 1/c integrates to zero.
  EXPECT_TRUE(limiting_expectation(TestFunction::t3(), 50, 100, 1).has_value());
  const auto centred = TestFunction::custom("centred", [](double x) { return x - 2.0; });
  const auto e = limiting_expectation(centred, 50, 100, 1);
  EXPECT_TRUE(!e.has_value() || std::abs(*e) < 1e-6);
}

TEST(Regional, SingleRegionWithEveryNodeMatchesWholeSystem) {
  const auto src = noise(8, 100, 12);
  auto cfg = small_config({"MSR", "LRF"});
  RegionPartition part;
  part.regions["ONE"] = src.node_ids;
  cfg.regions = part;
  const auto out = regional_series(src, cfg);
  for (const char* fn : {"MSR", "LRF"}) {
    const auto* all = out.find("ALL", fn);
    const auto* one = out.find("ONE", fn);
    ASSERT_TRUE(all && one);
    ASSERT_EQ(all->points.size(), one->points.size());
    for (std::size_t i = 0; i < all->points.size(); ++i) EXPECT_EQ(all->points[i].tau, one->points[i].tau);
  }
}

TEST(Regional, DisjointRegionsAreIndependent) {
  auto src = noise(12, 100, 13);
  auto cfg = small_config({"MSR", "T2"});
  cfg.include_all = false;
  RegionPartition part;
  part.regions["A"] = {src.node_ids.begin(), src.node_ids.begin() + 6};
  part.regions["B"] = {src.node_ids.begin() + 6, src.node_ids.end()};
  cfg.regions = part;
  const auto before = regional_series(src, cfg);
  EXPECT_EQ(before.find("ALL", "MSR"), nullptr);
  src.values.bottomRows(6) = noise(6, 100, 99).values * 4.0;
  src.values(11, 70) += 30.0;
  const auto after = regional_series(src, cfg);
  for (const char* fn : {"MSR", "T2"}) {
    const auto* a = before.find("A", fn);
    const auto* b = after.find("A", fn);
    for (std::size_t i = 0; i < a->points.size(); ++i) EXPECT_EQ(a->points[i].tau, b->points[i].tau);
  }
}

TEST(Regional, OversizedRegionNamedInError) {
  const auto src = noise(70, 100, 1);
  auto cfg = small_config();
  RegionPartition part;
  part.regions["BIG"] = src.node_ids;
  cfg.regions = part;
  cfg.include_all = false;
  try {
    regional_series(src, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AspectRatio);
    EXPECT_NE(std::string(e.what()).find("BIG"), std::string::npos);
  }
}

TEST(Regional, SmallAndAbsentRegionsWarn) {
  const auto src = noise(6, 80, 1);
  auto cfg = small_config();
  cfg.include_all = false;
  RegionPartition part;
  part.regions["A"] = {"node-1", "node-2", "node-3", "ghost"};
  part.regions["B"] = {"node-4", "phantom"};
  cfg.regions = part;
  const auto out = regional_series(src, cfg);
  EXPECT_NE(out.find("A", "MSR"), nullptr);
  EXPECT_EQ(out.find("B", "MSR"), nullptr);
  ASSERT_EQ(out.warnings.size(), 3u);
  EXPECT_NE(out.warnings[2].find("'B' skipped"), std::string::npos);
}

TEST(Events, MergesGapsAndDropsShortRuns) {
  // flags:             0 1 1 0 0 1 0 0 0 1 1 1 1 0 1
  const auto s = series_of({0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1});
  const auto ev = extract_runs(s, 2, 3);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].start_t, 101);
  EXPECT_EQ(ev[0].end_t, 105);
  EXPECT_EQ(ev[0].flagged, 3);
  EXPECT_EQ(ev[1].start_t, 109);
  EXPECT_EQ(ev[1].end_t, 114);
  EXPECT_EQ(ev[1].flagged, 5);
  EXPECT_EQ(ev[1].direction, -1);
  EXPECT_DOUBLE_EQ(ev[1].peak_sigma, -19.0);
}

TEST(Events, NoGapToleranceSplitsRuns) {
  const auto s = series_of({1, 1, 0, 1, 1, 1});
  const auto ev = extract_runs(s, 0, 1);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].end_t, 101);
  EXPECT_EQ(ev[1].start_t, 103);
  EXPECT_TRUE(extract_runs(s, 0, 4).empty());
}

TEST(Events, ReportCollectsEverySeries) {
  IndicatorSeries in;
  in.series = {series_of({1, 1, 1}), series_of({0, 0, 0}), series_of({0, 1, 1, 1})};
  in.T = 60;
  auto cfg = small_config();
  const auto rep = extract_events(in, cfg);
  EXPECT_EQ(rep.events.size(), 2u);
  EXPECT_EQ(rep.T, 60);
  EXPECT_EQ(rep.gap_tolerance, 2);
}
