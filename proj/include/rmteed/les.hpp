#pragma once

#include "rmteed/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rmteed {

enum class TestFunctionName { MSR, T2, T3, T4, DET, LRF, Custom };

enum class FunctionDomain { RealLine, PositiveReals, ComplexModulus };

/// Scalar test function phi applied to eigenvalues.
struct TestFunction {
  TestFunctionName name = TestFunctionName::Custom;
  std::string label;
  std::function<double(double)> eval;
  std::function<double(double)> derivative;  // may be empty; finite differences are used then
  FunctionDomain domain = FunctionDomain::RealLine;
  std::string closed_form;

  static TestFunction msr();
  static TestFunction t2();
  static TestFunction t3();
  static TestFunction t4();
  static TestFunction det();
  static TestFunction lrf();
  static TestFunction custom(std::string label, std::function<double(double)> eval,
                             std::function<double(double)> derivative = {},
                             FunctionDomain domain = FunctionDomain::RealLine);

  /// Looks up MSR, T2, T3, T4, DET or LRF (case-insensitive).
  static TestFunction by_name(const std::string& name);

  /// MSR uses the averaged form (1/N) sum |lambda|; everything else the plain sum.
  bool averaged() const { return name == TestFunctionName::MSR; }
  double derivative_at(double x) const;
};

/// The named functions in table order.
std::vector<TestFunction> named_test_functions();

struct LesOptions {
  bool clamp = false;           // replace lambda <= 0 by 1e-12 for positive-domain functions
  double clamp_floor = 1e-12;
};

struct LesValue {
  double value = 0.0;
  std::size_t clamped = 0;  // eigenvalues replaced by the clamp floor
};

LesValue les(const SpectrumSet& s, const TestFunction& f, const LesOptions& opts = {});

struct TheoreticalMoments {
  enum class Method { ClosedForm, Quadrature, MonteCarlo };

  double expectation = 0.0;
  double variance = 0.0;
  Method method = Method::ClosedForm;
  double c = 0.0;
  double sigma2 = 1.0;
  double kappa4 = 0.0;
  Eigen::Index N = 0;
  int L = 1;

  double coefficient_of_variation() const;
};

std::string to_string(TheoreticalMoments::Method method);

/// N * integral phi rho (MSR: the plain integral of r against the ring law, no N factor).
double lln_expectation(const TestFunction& f, const ReferenceDensity& d, Eigen::Index N);

/// Moments of one eigenvalue radius under the ring law. Closed form for L = 1:
///   E r = 2 (1 - (1-c)^{3/2}) / (3c),  E r^2 = (1 - (1-c)^2) / (2c),  D r = E r^2 - (E r)^2.
/// L > 1 integrates the ring law numerically.
TheoreticalMoments msr_moments(double c, int L = 1);

/// Radius moments by quadrature regardless of L; used to cross-check the closed form.
TheoreticalMoments msr_moments_quadrature(double c, int L = 1);

/// Limiting variance of the centred LES of M = XX^H / N (real entries with fourth cumulant kappa4):
///
///   V = 2/(c pi^2) iint psi^2(t1, t2) (1 - sin t1 sin t2) dt1 dt2
///       + kappa4/pi^2 (int phi(zeta(t)) sin t dt)^2,
///
/// zeta(t) = 1 + 1/c + (2/sqrt(c)) sin t, psi the divided difference of phi o zeta over zeta,
/// taken as phi'(zeta) on |t1 - t2| < 1e-6.
double clt_variance(const TestFunction& f, double c, double kappa4 = 0.0);

/// Sample mean and variance of tau over `draws` i.i.d. N(0, 1) N x T matrices X, tau taken on
/// M = XX^T/N without row standardization. Functions on the modulus domain are rejected.
struct MonteCarloMoments {
  double mean = 0.0;
  double variance = 0.0;
  int draws = 0;
};
std::vector<MonteCarloMoments> monte_carlo_les(const std::vector<TestFunction>& fns, Eigen::Index N, Eigen::Index T,
                                               int draws, std::uint64_t seed);

/// E[x^4] - 3 of the sample after z-scoring.
double kurtosis_excess(const std::vector<double>& sample);

/// Expectation, variance and c_v of every named function at (N, T, kappa4) for M-type spectra;
/// MSR reports the single-radius moments.
struct TheoryRow {
  std::string function;
  double expectation = 0.0;
  double variance = 0.0;
  double cv = 0.0;
  std::optional<double> mc_variance;
};

std::vector<TheoryRow> theory_table(Eigen::Index N, Eigen::Index T, double kappa4 = 0.0, int L = 1);

}  // namespace rmteed
