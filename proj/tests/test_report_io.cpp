#include "rmteed/report_io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace rmteed;

namespace {

IndicatorSeries sample_series() {
  IndicatorSeries out;
  out.T = 240;
  out.L = 2;
  out.threshold_k = 2.5;
  out.warnings = {"region 'A9' skipped: fewer than 2 nodes"};
  Series a;
  a.region = "ALL";
  a.function = "MSR";
  a.nodes = 118;
  a.convention = "ring L=2";
  a.reference.expectation = 0.8645031157;
  a.reference.mean = 0.865;
  a.reference.stddev = 0.0021;
  a.reference.source = "monte-carlo:200";
  a.points = {{239, 0.1 + 0.2, 0.3 / 0.8645031157, false}, {240, 0.35, 0.35 / 0.8645031157, true}};
  Series b;
  b.region = "A3";
  b.function = "DET";
  b.nodes = 20;
  b.convention = "M=XX^H/N";
  b.reference.mean = -3.0;
  b.reference.stddev = 1.0;
  b.reference.source = "calibration:239:599";
  b.points = {{239, -2.75, std::numeric_limits<double>::quiet_NaN(), false}};
  out.series = {a, b};
  return out;
}

}  // namespace

TEST(IndicatorsCsv, FormatAndRoundTrip) {
  const auto s = sample_series();
  const auto text = indicators_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,region,function,tau,eta,flag");
  EXPECT_NE(text.find("240,ALL,MSR,0.35,"), std::string::npos);
  EXPECT_NE(text.find("239,A3,DET,-2.75,,normal\n"), std::string::npos);
  const auto back = parse_indicators_csv(text);
  ASSERT_EQ(back.series.size(), 2u);
  EXPECT_EQ(back.series[0].points[0].tau, 0.1 + 0.2);
  EXPECT_EQ(back.series[0].points[1].eta, s.series[0].points[1].eta);
  EXPECT_TRUE(back.series[0].points[1].flag);
  EXPECT_TRUE(std::isnan(back.series[1].points[0].eta));
  EXPECT_EQ(indicators_csv(back), text);
}

TEST(IndicatorsCsv, MalformedInput) {
  for (const char* bad : {"t,region\n", "t,region,function,tau,eta,flag\n1,A,F,x,1,normal\n",
                          "t,region,function,tau,eta,flag\n1,A,F,1,1,maybe\n",
                          "t,region,function,tau,eta,flag\n1,A,F,1\n"}) {
    try {
      parse_indicators_csv(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::MalformedInput) << bad;
    }
  }
}

TEST(ReportJson, CarriesWindowEventsAndReferences) {
  const auto s = sample_series();
  EventReport rep;
  rep.T = 240;
  rep.L = 2;
  rep.threshold_k = 2.5;
  rep.events = {{"ALL", "MSR", 240, 260, 15, -9.5, -1}};
  const auto doc = report_json(rep, s);
  EXPECT_EQ(doc["window"]["T"], 240);
  EXPECT_EQ(doc["window"]["L"], 2);
  EXPECT_EQ(doc["window"]["k"], 2.5);
  EXPECT_EQ(doc["events"][0]["direction"], "down");
  EXPECT_EQ(doc["events"][0]["start_t"], 240);
  EXPECT_EQ(doc["series"][0]["reference"]["source"], "monte-carlo:200");
  EXPECT_TRUE(doc["series"][1]["reference"]["expectation"].is_null());
  EXPECT_EQ(doc["warnings"].size(), 1u);
}

TEST(ReportDir, RestoresMetadata) {
  testing_support::TempDir dir("report");
  const auto s = sample_series();
  EventReport rep;
  rep.T = s.T;
  rep.L = s.L;
  rep.threshold_k = s.threshold_k;
  write_indicators_csv(s, dir / "indicators.csv");
  write_json(report_json(rep, s), dir / "report.json");
  const auto back = read_report_dir(dir.path());
  EXPECT_EQ(back.T, 240);
  EXPECT_EQ(back.L, 2);
  EXPECT_DOUBLE_EQ(back.threshold_k, 2.5);
  const auto* msr = back.find("ALL", "MSR");
  ASSERT_NE(msr, nullptr);
  EXPECT_EQ(msr->nodes, 118);
  EXPECT_DOUBLE_EQ(*msr->reference.expectation, 0.8645031157);
  EXPECT_DOUBLE_EQ(msr->reference.stddev, 0.0021);
  EXPECT_FALSE(back.find("A3", "DET")->reference.expectation.has_value());
}

TEST(ReportDir, CsvAloneIsEnoughAndMissingDirFails) {
  testing_support::TempDir dir("report2");
  write_indicators_csv(sample_series(), dir / "indicators.csv");
  EXPECT_EQ(read_report_dir(dir.path()).series.size(), 2u);
  try {
    read_report_dir(dir / "nothing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedInput);
  }
}

TEST(RunRecord, StableAcrossCalls) {
  const nlohmann::json params = {{"T", 240}, {"functions", {"MSR"}}};
  const auto a = run_record("analyze", 7, params);
  EXPECT_EQ(a, run_record("analyze", 7, params));
  EXPECT_EQ(a["tool"], "rmteed");
  EXPECT_EQ(a["seed"], 7u);
  EXPECT_EQ(a["version"], version());
  EXPECT_FALSE(a.contains("timestamp"));
}

TEST(SpectrumDump, CsvAndHistogramSidecar) {
  testing_support::TempDir dir("dump");
  SpectrumSet s;
  s.eigenvalues = Eigen::VectorXd::LinSpaced(50, 0.1, 5.0).cast<std::complex<double>>();
  s.kind = SpectrumKind::Covariance;
  s.N = 50;
  s.T = 100;
  write_spectrum_dump(s, dir / "w.csv");
  const auto meta = nlohmann::json::parse(testing_support::read_file(dir / "w.json"));
  EXPECT_EQ(meta["rule"], "freedman-diaconis");
  EXPECT_EQ(meta["variable"], "real");
  std::size_t total = 0;
  for (const auto& c : meta["counts"]) total += c.get<std::size_t>();
  EXPECT_EQ(total, 50u);
  EXPECT_EQ(testing_support::read_file(dir / "w.csv").substr(0, 6), "re,im\n");
}
