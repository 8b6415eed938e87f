#include "rmteed/les.hpp"

#include "rmteed/error.hpp"
#include "rmteed/quadrature.hpp"
#include "rmteed/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace rmteed {

namespace {

const char* kModule = "les";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

constexpr double kHalfPi = M_PI / 2.0;

TestFunction make(TestFunctionName name, std::string label, std::function<double(double)> eval,
                  std::function<double(double)> derivative, FunctionDomain domain, std::string closed_form) {
  TestFunction f;
  f.name = name;
  f.label = std::move(label);
  f.eval = std::move(eval);
  f.derivative = std::move(derivative);
  f.domain = domain;
  f.closed_form = std::move(closed_form);
  return f;
}

double zeta(double c, double theta) { return 1.0 + 1.0 / c + 2.0 / std::sqrt(c) * std::sin(theta); }

void check_ratio(double c) {
  if (!(c > 0.0 && c <= 1.0)) fail(ErrorKind::Parameter, "ratio c must lie in (0, 1]");
}

}  // namespace

TestFunction TestFunction::msr() {
  return make(
      TestFunctionName::MSR, "MSR", [](double r) { return std::abs(r); },
      [](double r) { return r >= 0.0 ? 1.0 : -1.0; }, FunctionDomain::ComplexModulus, "(1/N) sum |lambda_i|");
}

TestFunction TestFunction::t2() {
  return make(
      TestFunctionName::T2, "T2", [](double x) { return 2.0 * x * x - 1.0; }, [](double x) { return 4.0 * x; },
      FunctionDomain::RealLine, "2x^2 - 1");
}

TestFunction TestFunction::t3() {
  return make(
      TestFunctionName::T3, "T3", [](double x) { return 4.0 * x * x * x - 3.0 * x; },
      [](double x) { return 12.0 * x * x - 3.0; }, FunctionDomain::RealLine, "4x^3 - 3x");
}

TestFunction TestFunction::t4() {
  return make(
      TestFunctionName::T4, "T4",
      [](double x) {
        const double x2 = x * x;
        return 8.0 * x2 * x2 - 8.0 * x2 + 1.0;
      },
      [](double x) { return 32.0 * x * x * x - 16.0 * x; }, FunctionDomain::RealLine, "8x^4 - 8x^2 + 1");
}

TestFunction TestFunction::det() {
  return make(
      TestFunctionName::DET, "DET", [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; },
      FunctionDomain::PositiveReals, "ln x");
}

TestFunction TestFunction::lrf() {
  return make(
      TestFunctionName::LRF, "LRF", [](double x) { return x - std::log(x) - 1.0; },
      [](double x) { return 1.0 - 1.0 / x; }, FunctionDomain::PositiveReals, "x - ln x - 1");
}

TestFunction TestFunction::custom(std::string label, std::function<double(double)> eval,
                                  std::function<double(double)> derivative, FunctionDomain domain) {
  return make(TestFunctionName::Custom, std::move(label), std::move(eval), std::move(derivative), domain, "custom");
}

TestFunction TestFunction::by_name(const std::string& name) {
  std::string up = name;
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (up == "MSR") return msr();
  if (up == "T2") return t2();
  if (up == "T3") return t3();
  if (up == "T4") return t4();
  if (up == "DET") return det();
  if (up == "LRF") return lrf();
  fail(ErrorKind::Configuration, "unknown test function '" + name + "' (MSR, T2, T3, T4, DET, LRF)");
}

double TestFunction::derivative_at(double x) const {
  if (derivative) return derivative(x);
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (eval(x + h) - eval(x - h)) / (2.0 * h);
}

std::vector<TestFunction> named_test_functions() {
  return {TestFunction::msr(), TestFunction::t2(), TestFunction::t3(),
          TestFunction::t4(),  TestFunction::det(), TestFunction::lrf()};
}

LesValue les(const SpectrumSet& s, const TestFunction& f, const LesOptions& opts) {
  const Eigen::Index n = s.eigenvalues.size();
  if (n == 0) fail(ErrorKind::Contract, "LES of an empty spectrum");
  LesValue out;
  if (f.domain == FunctionDomain::ComplexModulus) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += f.eval(std::abs(s.eigenvalues(i)));
    out.value = f.averaged() ? sum / static_cast<double>(n) : sum;
    return out;
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = s.eigenvalues(i).real();
    if (f.domain == FunctionDomain::PositiveReals && !(x > 0.0)) {
      if (!opts.clamp) {
        fail(ErrorKind::Domain, f.label + " needs positive eigenvalues, got " + std::to_string(x));
      }
      x = std::max(x, opts.clamp_floor);
      ++out.clamped;
    }
    sum += f.eval(x);
  }
  out.value = f.averaged() ? sum / static_cast<double>(n) : sum;
  return out;
}

double TheoreticalMoments::coefficient_of_variation() const {
  return expectation != 0.0 ? std::sqrt(std::max(variance, 0.0)) / expectation : 0.0;
}

std::string to_string(TheoreticalMoments::Method method) {
  switch (method) {
    case TheoreticalMoments::Method::ClosedForm: return "closed-form";
    case TheoreticalMoments::Method::Quadrature: return "quadrature";
    case TheoreticalMoments::Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

double lln_expectation(const TestFunction& f, const ReferenceDensity& d, Eigen::Index N) {
  d.validate();
  auto [lo, hi] = d.support();
  if (f.domain == FunctionDomain::PositiveReals) {
    if (lo < 0.0) fail(ErrorKind::Domain, f.label + " is undefined on the negative part of the " + to_string(d.kind) + " support");
    if (lo == 0.0 || (d.kind != ReferenceDensity::Kind::Ring && d.c >= 1.0)) {
      fail(ErrorKind::Divergence, f.label + " diverges against a density with support reaching 0 (c = 1 edge)");
    }
  }
  quad::Options opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-10;
  auto integrand = [&](double theta) {
    const double x = d.support_point(theta);
    const double phi = f.domain == FunctionDomain::ComplexModulus ? f.eval(std::abs(x)) : f.eval(x);
    return phi * d.theta_weight(theta);
  };
  const double integral = quad::integrate(integrand, -kHalfPi, kHalfPi, opts).value;
  return f.averaged() ? integral : static_cast<double>(N) * integral;
}

TheoreticalMoments msr_moments(double c, int L) {
  check_ratio(c);
  if (L < 1) fail(ErrorKind::Parameter, "depth L must be >= 1");
  if (L > 1) return msr_moments_quadrature(c, L);
  TheoreticalMoments m;
  const double er = 2.0 / (3.0 * c) * (1.0 - std::pow(1.0 - c, 1.5));
  const double er2 = 1.0 / (2.0 * c) * (1.0 - (1.0 - c) * (1.0 - c));
  m.expectation = er;
  m.variance = er2 - er * er;
  m.method = TheoreticalMoments::Method::ClosedForm;
  m.c = c;
  m.L = L;
  return m;
}

TheoreticalMoments msr_moments_quadrature(double c, int L) {
  check_ratio(c);
  const auto ring = ReferenceDensity::ring(c, L);
  quad::Options opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-12;
  auto moment = [&](int k) {
    return quad::integrate(
               [&](double theta) {
                 const double r = ring.support_point(theta);
                 return std::pow(r, k) * ring.theta_weight(theta);
               },
               -kHalfPi, kHalfPi, opts)
        .value;
  };
  TheoreticalMoments m;
  const double er = moment(1);
  m.expectation = er;
  m.variance = moment(2) - er * er;
  m.method = TheoreticalMoments::Method::Quadrature;
  m.c = c;
  m.L = L;
  return m;
}

double clt_variance(const TestFunction& f, double c, double kappa4) {
  check_ratio(c);
  const double zmin = zeta(c, -kHalfPi);
  if (f.domain == FunctionDomain::PositiveReals && !(zmin > 0.0)) {
    fail(ErrorKind::Divergence, f.label + " is singular at the lower support edge for c = 1");
  }
  auto phi = [&](double x) { return f.domain == FunctionDomain::ComplexModulus ? f.eval(std::abs(x)) : f.eval(x); };

  auto psi = [&](double t1, double t2) {
    const double z1 = zeta(c, t1);
    const double z2 = zeta(c, t2);
    const double dz = z1 - z2;
    if (std::abs(t1 - t2) < 1e-6 || std::abs(dz) < 1e-12 * (1.0 + std::abs(z1))) {
      return f.derivative_at(zeta(c, 0.5 * (t1 + t2)));
    }
    return (phi(z1) - phi(z2)) / dz;
  };

  quad::Options opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-7;
  const auto dbl = quad::integrate2d(
      [&](double t1, double t2) {
        const double p = psi(t1, t2);
        return p * p * (1.0 - std::sin(t1) * std::sin(t2));
      },
      -kHalfPi, kHalfPi, -kHalfPi, kHalfPi, opts);

  double variance = 2.0 / (c * M_PI * M_PI) * dbl.value;
  if (kappa4 != 0.0) {
    quad::Options o1;
    o1.abs_tol = 1e-12;
    o1.rel_tol = 1e-10;
    const double single =
        quad::integrate([&](double t) { return phi(zeta(c, t)) * std::sin(t); }, -kHalfPi, kHalfPi, o1).value;
    variance += kappa4 / (M_PI * M_PI) * single * single;
  }
  if (!std::isfinite(variance)) fail(ErrorKind::NumericalFailure, "CLT variance is not finite for " + f.label);
  return variance;
}

std::vector<MonteCarloMoments> monte_carlo_les(const std::vector<TestFunction>& fns, Eigen::Index N, Eigen::Index T,
                                               int draws, std::uint64_t seed) {
  if (N < 1 || T < 1) fail(ErrorKind::Parameter, "Monte Carlo needs positive dimensions");
  if (draws < 2) fail(ErrorKind::Parameter, "Monte Carlo needs at least 2 draws");
  for (const auto& f : fns) {
    if (f.domain == FunctionDomain::ComplexModulus) fail(ErrorKind::Contract, f.label + " is not a covariance statistic");
  }
  std::vector<std::vector<double>> samples(fns.size());
  for (int d = 0; d < draws; ++d) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(d)}));
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd x(N, T);
    for (Eigen::Index j = 0; j < T; ++j) {
      for (Eigen::Index i = 0; i < N; ++i) x(i, j) = n01(rng);
    }
    Covariance<double> m{x * x.transpose() / static_cast<double>(N), CovarianceConvention::M, N, T};
    const auto s = eigen_hermitian(m);
    for (std::size_t f = 0; f < fns.size(); ++f) samples[f].push_back(les(s, fns[f]).value);
  }
  std::vector<MonteCarloMoments> out;
  for (const auto& v : samples) {
    MonteCarloMoments m;
    m.draws = draws;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(draws);
    for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(draws - 1);
    out.push_back(m);
  }
  return out;
}

double kurtosis_excess(const std::vector<double>& sample) {
  if (sample.size() < 100) fail(ErrorKind::Contract, "kurtosis estimate needs at least 100 samples");
  const auto n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : sample) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) fail(ErrorKind::Contract, "kurtosis of a constant sample");
  return m4 / (m2 * m2) - 3.0;
}

std::vector<TheoryRow> theory_table(Eigen::Index N, Eigen::Index T, double kappa4, int L) {
  if (N < 1 || T < 1 || N > T) fail(ErrorKind::Parameter, "theory table needs 1 <= N <= T");
  const double c = static_cast<double>(N) / static_cast<double>(T);
  std::vector<TheoryRow> rows;
  const auto msr = msr_moments(c, L);
  rows.push_back({"MSR", msr.expectation, msr.variance, msr.coefficient_of_variation(), std::nullopt});
  const auto mp2 = ReferenceDensity::mp2(c);
  for (const auto& f : named_test_functions()) {
    if (f.name == TestFunctionName::MSR) continue;
    TheoryRow row;
    row.function = f.label;
    row.expectation = lln_expectation(f, mp2, N);
    row.variance = clt_variance(f, c, kappa4);
    row.cv = row.expectation != 0.0 ? std::sqrt(row.variance) / row.expectation : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rmteed
