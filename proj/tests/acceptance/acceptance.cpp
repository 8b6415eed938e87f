// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.
//
//   acceptance            all criteria
//   acceptance 3 5 8      a subset

#include "cli.hpp"
#include "rmteed/detect.hpp"
#include "rmteed/les.hpp"
#include "rmteed/pca.hpp"
#include "rmteed/rmm.hpp"
#include "rmteed/spectral.hpp"
#include "rmteed/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rmteed;

namespace {

constexpr Eigen::Index kN = 118;
constexpr Eigen::Index kT = 240;
constexpr double kC = 118.0 / 240.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double variance_of(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// The preset sweep is shared by AC6 and AC11.
const IndicatorSeries& preset_sweep() {
  static std::optional<IndicatorSeries> cached;
  if (!cached) {
    const auto src = generate(table3_scenario(), 1);
    DetectorConfig cfg;
    cfg.window.length = kT;
    cfg.functions = {"MSR", "LRF", "T2"};
    cfg.seed = 1;
    cfg.mc_draws = 200;
    cached = sweep(src, cfg);
  }
  return *cached;
}

Outcome ac1() {
  const auto closed = msr_moments(kC);
  const auto quad = msr_moments_quadrature(kC);
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"theory", "--N", "118", "--T", "240"}, out, err);
  const bool printed = code == 0 && out.str().find("0.8645") != std::string::npos;
  const bool pass = std::abs(closed.expectation - 0.8645) <= 1e-3 && std::abs(closed.variance - 0.0068) <= 2e-4 &&
                    std::abs(quad.expectation - closed.expectation) <= 1e-6 &&
                    std::abs(quad.variance - closed.variance) <= 1e-6 && printed;
  return {pass, format("E=%.6f D=%.6f; quadrature |dE|=%.1e |dD|=%.1e; theory exit %d", closed.expectation,
                       closed.variance, std::abs(quad.expectation - closed.expectation),
                       std::abs(quad.variance - closed.variance), code)};
}

Outcome ac2() {
  const auto ref = monte_carlo_reference({TestFunction::msr()}, kN, kT, 1, 200, 2)[0];
  return {std::abs(ref.mean - 0.8645) <= 0.010,
          format("mean MSR over 200 windows %.5f (sd %.5f), band 0.8645 +- 0.010", ref.mean, ref.stddev)};
}

Outcome ac3() {
  const auto d = ReferenceDensity::mp2(0.4917);
  const double t2 = lln_expectation(TestFunction::t2(), d, kN);
  const double det = lln_expectation(TestFunction::det(), d, kN);
  const double lrf = lln_expectation(TestFunction::lrf(), d, kN);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const bool pass = rel(t2, 1.34e3) <= 0.02 && rel(det, 48.3) <= 0.02 && rel(lrf, 73.68) <= 0.02;
  return {pass, format("T2=%.2f (%.2f%%) DET=%.3f (%.2f%%) LRF=%.3f (%.2f%%)", t2, 100 * rel(t2, 1.34e3), det,
                       100 * rel(det, 48.3), lrf, 100 * rel(lrf, 73.68))};
}

Outcome ac4() {
  // Oracle: sum (2 lambda^2 - 1) over the eigenvalues of M = XX^T/N equals 2 tr(M^2) - N,
  // evaluated without any eigensolver on raw i.i.d. N(0,1) entries.
  std::mt19937_64 rng(20240404);
  std::normal_distribution<double> n01;
  std::vector<double> taus;
  Eigen::MatrixXd x(kN, kT);
  for (int trial = 0; trial < 500; ++trial) {
    for (Eigen::Index j = 0; j < kT; ++j) {
      for (Eigen::Index i = 0; i < kN; ++i) x(i, j) = n01(rng);
    }
    const Eigen::MatrixXd m = x * x.transpose() / static_cast<double>(kN);
    taus.push_back(2.0 * m.squaredNorm() - static_cast<double>(kN));
  }
  const double oracle = variance_of(taus);
  const double clt = clt_variance(TestFunction::t2(), kC);
  const double ratio = clt / oracle;
  return {std::abs(ratio - 1.0) <= 0.25,
          format("oracle Var=%.1f clt=%.1f ratio=%.3f; printed 1080 is %.2fx the oracle", oracle, clt, ratio,
                 1080.0 / oracle)};
}

Outcome ac5() {
  const auto x = standardize(sample_gaussian_matrix(400, 800, 51).values);
  const double d_mp = esd_distance(eigen_hermitian(covariance(x, CovarianceConvention::M)), ReferenceDensity::mp2(0.5));
  const double d_sc = esd_distance(eigen_symmetric(sample_goe(500, 1.0, 52)), ReferenceDensity::semicircle(1.0));

  const auto w = standardize(sample_gaussian_matrix(kN, kT, 53).values);
  const auto ring = eigen_general(ring_product({w}, 54).z);
  const double inner = std::sqrt(1.0 - kC) - 0.05;
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < ring.eigenvalues.size(); ++i) {
    const double r = std::abs(ring.eigenvalues(i));
    if (r >= inner && r <= 1.05) ++inside;
  }
  const double share = static_cast<double>(inside) / static_cast<double>(ring.eigenvalues.size());
  return {d_mp <= 0.05 && d_sc <= 0.05 && share >= 0.95,
          format("KS mp2=%.4f semicircle=%.4f; ring annulus share %.3f", d_mp, d_sc, share)};
}

Outcome ac6() {
  const auto& series = preset_sweep();
  const auto* msr = series.find("ALL", "MSR");
  DetectorConfig cfg;
  const auto runs = extract_runs(*msr, cfg.gap_tolerance, cfg.min_duration);
  if (runs.empty()) return {false, "no MSR event"};
  const auto& first = runs.front();
  const Eigen::Index length = first.end_t - first.start_t + 1;
  const bool pass = std::abs(first.start_t - 600) <= 1 && length >= kT - 10 && length <= kT + 10;
  double lowest = 1.0;
  for (const auto& p : msr->points) {
    if (p.t >= first.start_t && p.t <= first.end_t) lowest = std::min(lowest, p.tau);
  }
  return {pass, format("first event %ld..%ld (length %ld, %zu events total), min MSR %.4f", static_cast<long>(first.start_t),
                       static_cast<long>(first.end_t), static_cast<long>(length), runs.size(), lowest)};
}

Outcome ac7() {
  const auto full = generate(table3_scenario(), 1);
  auto part = illustrative_partition();
  const auto core = part.regions.at("A3");
  const auto src = drop_nodes(full, core);
  part.regions.erase("A3");
  DetectorConfig cfg;
  cfg.window.length = kT;
  cfg.regions = part;
  cfg.include_all = false;
  cfg.seed = 1;
  const auto series = regional_series(src, cfg);
  std::vector<std::string> hits;
  for (const auto& s : series.series) {
    for (const auto& e : extract_runs(s, cfg.gap_tolerance, cfg.min_duration)) {
      if (e.start_t <= 839 && e.end_t >= 600) {
        hits.push_back(s.region);
        break;
      }
    }
  }
  std::string names;
  for (const auto& h : hits) names += (names.empty() ? "" : ",") + h;
  return {!hits.empty(), format("dropped %zu nodes of A3; regions flagging 600..839: %s", core.size(),
                                names.empty() ? "none" : names.c_str())};
}

Outcome ac8() {
  const auto src = sample_gaussian_matrix(20, 200, 81);
  DataSource moved = src;
  std::mt19937_64 rng(82);
  std::uniform_real_distribution<double> scale(0.001, 1000.0);
  std::uniform_real_distribution<double> shift(-1e4, 1e4);
  for (Eigen::Index i = 0; i < moved.nodes(); ++i) moved.values.row(i) = moved.values.row(i) * scale(rng) + Eigen::RowVectorXd::Constant(200, shift(rng));
  DetectorConfig cfg;
  cfg.window.length = 60;
  cfg.functions = {"MSR", "T2", "T3", "T4", "DET", "LRF"};
  cfg.seed = 8;
  cfg.mc_draws = 50;
  const auto a = sweep(src, cfg);
  const auto b = sweep(moved, cfg);
  double worst = 0.0;
  std::size_t flag_changes = 0;
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    for (std::size_t i = 0; i < a.series[s].points.size(); ++i) {
      worst = std::max(worst, std::abs(a.series[s].points[i].tau - b.series[s].points[i].tau));
      flag_changes += a.series[s].points[i].flag != b.series[s].points[i].flag;
    }
  }
  return {worst < 1e-8 && flag_changes == 0, format("max |dtau| %.2e, flag changes %zu", worst, flag_changes)};
}

Outcome ac9() {
  const Eigen::Index n = 20;
  DetectorConfig cfg;
  cfg.window.length = kT;
  cfg.functions = {"MSR", "LRF"};
  cfg.mc_draws = 200;
  std::map<std::string, std::size_t> flagged;
  std::size_t scored = 0;
  for (int run = 0; run < 10; ++run) {
    const auto src = sample_gaussian_matrix(n, kT - 1 + 1000, 900 + run);
    cfg.seed = 900 + run;
    const auto out = sweep(src, cfg);
    for (const auto& s : out.series) {
      for (const auto& p : s.points) flagged[s.function] += p.flag;
    }
    scored += out.series[0].points.size();
  }
  double worst = 0.0;
  for (const auto& [fn, count] : flagged) worst = std::max(worst, static_cast<double>(count) / static_cast<double>(scored));
  return {worst <= 0.02, format("N=%ld, %zu windows per function: MSR %zu flagged, LRF %zu flagged (max share %.4f)",
                                static_cast<long>(n), scored, flagged["MSR"], flagged["LRF"], worst)};
}

Outcome ac10() {
  // Step scenario.
  const auto src = generate(table3_scenario(), 1);
  PcaConfig pcfg;
  pcfg.train_first = 0;
  pcfg.train_last = 599;
  const auto model = train(src, pcfg);
  const auto step = judge_series(model, src, 600, 600);
  const auto* bus = step.find("bus-52", "PCA");
  const bool step_flag = bus && bus->points[0].flag;

  // Correlated streams with nonzero mean; every sample is negated from 600 on. The linear relations
  // between channels survive the flip, the sign pattern of the window does not.
  const Eigen::Index n = 20;
  const Eigen::Index t = 1000;
  const Eigen::MatrixXd a = sample_gaussian_matrix(n, 3, 101).values;
  Eigen::MatrixXd f = sample_gaussian_matrix(3, t, 102).values;
  f.array() += 2.0;
  DataSource flip = sample_gaussian_matrix(n, t, 103);
  flip.values = a * f + 0.3 * flip.values;
  flip.values.rightCols(t - 600) *= -1.0;
  PcaConfig fcfg;
  fcfg.train_first = 0;
  fcfg.train_last = 399;
  const auto fmodel = train(flip, fcfg);
  const auto judged = judge_series(fmodel, flip, 600, t - 1, 10);
  std::size_t pca_flags = 0;
  for (const auto& s : judged.series) {
    for (const auto& p : s.points) pca_flags += p.flag;
  }

  DetectorConfig cfg;
  cfg.window.length = kT;
  cfg.seed = 10;
  const auto rmt = sweep(flip, cfg);
  std::size_t rmt_flags = 0;
  Eigen::Index first_rmt = -1;
  for (const auto& p : rmt.series[0].points) {
    if (p.t < 600) continue;
    rmt_flags += p.flag;
    if (p.flag && first_rmt < 0) first_rmt = p.t;
  }
  return {step_flag && pca_flags == 0,
          format("PCA: bus-52 residual at 600 %.2f x rms (flag %s); sign flip: PCA flags %zu, RMT MSR flags %zu of %zu "
                 "windows from 600 (first at %ld)",
                 bus ? bus->points[0].eta : 0.0, step_flag ? "yes" : "no", pca_flags, rmt_flags,
                 static_cast<std::size_t>(std::count_if(rmt.series[0].points.begin(), rmt.series[0].points.end(),
                                                        [](const IndicatorPoint& p) { return p.t >= 600; })),
                 static_cast<long>(first_rmt))};
}

Outcome ac11() {
  const auto& series = preset_sweep();
  const auto stages = table3_stages(kT);
  bool pass = true;
  std::string detail;
  for (const char* fn : {"MSR", "LRF", "T2"}) {
    const auto* s = series.find("ALL", fn);
    std::vector<double> var;
    for (const auto& st : stages) {
      std::vector<double> taus;
      for (const auto& p : s->points) {
        if (p.t >= st.first_end && p.t <= st.last_end) taus.push_back(p.tau);
      }
      var.push_back(variance_of(taus));
    }
    const double flat = std::max(var[0], var[2]);
    const double r_step = var[1] / flat;
    const double r_collapse = var[4] / flat;
    pass = pass && r_step >= 10.0 && r_collapse >= 10.0;
    detail += format("%s%s step/flat %.0fx collapse/flat %.0fx", detail.empty() ? "" : "; ", fn, r_step, r_collapse);
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6},
      {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}, {11, ac11}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] AC%d %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
