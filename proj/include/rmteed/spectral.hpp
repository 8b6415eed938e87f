#pragma once

#include "rmteed/rmm.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rmteed {

enum class SpectrumKind { Ring, Covariance, Wigner };

std::string to_string(SpectrumKind kind);

/// Eigenvalues plus the parameters of the model they came from.
struct SpectrumSet {
  Eigen::VectorXcd eigenvalues;
  SpectrumKind kind = SpectrumKind::Covariance;
  Eigen::Index N = 0;
  Eigen::Index T = 0;
  int L = 1;

  double ratio() const { return T > 0 ? static_cast<double>(N) / static_cast<double>(T) : 0.0; }
  Eigen::VectorXd real() const { return eigenvalues.real(); }
  Eigen::VectorXd moduli() const { return eigenvalues.cwiseAbs(); }
};

SpectrumSet eigen_general(const ComplexMatrix& a, SpectrumKind kind = SpectrumKind::Ring,
                          const std::string& provenance = {});

/// Real eigenvalues, ascending. Negatives down to -1e-10 * max|lambda| are clamped to 0.
template <typename Scalar>
SpectrumSet eigen_hermitian(const Covariance<Scalar>& m);

/// Same, for an arbitrary symmetric matrix (no clamping); used for Wigner fixtures.
SpectrumSet eigen_symmetric(const Eigen::MatrixXd& a, SpectrumKind kind = SpectrumKind::Wigner);

/// Limiting spectral laws.
///
/// Ring: planar density rho(lambda) = |lambda|^(2/L - 2) / (pi c L) on the annulus
/// (1-c)^(L/2) <= |lambda| <= 1; the induced law of the modulus r has density 2 pi r rho(r).
/// Mp: Marchenko-Pastur for S = XX^H/T, support sigma^2 (1 +- sqrt(c))^2.
/// Mp2: the same law for M = XX^H/N = S/c, support sigma^2 (1 +- 1/sqrt(c))^2.
/// Semicircle: sqrt(4 w^2 - x^2) / (2 pi w^2) on |x| < 2w.
struct ReferenceDensity {
  enum class Kind { Ring, Mp, Mp2, Semicircle };

  Kind kind = Kind::Mp2;
  double c = 0.5;
  double sigma2 = 1.0;
  double omega2 = 1.0;
  int L = 1;

  static ReferenceDensity ring(double c, int L = 1);
  static ReferenceDensity mp(double c, double sigma2 = 1.0);
  static ReferenceDensity mp2(double c, double sigma2 = 1.0);
  static ReferenceDensity semicircle(double omega2 = 1.0);

  /// Throws Parameter unless 0 < c <= 1, sigma2 > 0, omega2 > 0, L >= 1.
  void validate() const;

  /// Support endpoints; for Ring these are the annulus radii.
  std::pair<double, double> support() const;

  /// Maps theta in [-pi/2, pi/2] onto the support (x = centre + halfwidth * sin(theta)).
  double support_point(double theta) const;
  double support_theta(double x) const;

  /// Integrand of the reference measure in the theta parametrization: rho(x(theta)) x'(theta).
  double theta_weight(double theta) const;
};

std::string to_string(ReferenceDensity::Kind kind);

/// Pointwise density; 0 outside the support. For Ring this is the planar density at radius |x|.
double density_eval(const ReferenceDensity& d, double x);

/// Density of the modulus r = |lambda| under the Ring law (2 pi r rho(r)); Ring only.
double ring_radial_density(const ReferenceDensity& d, double r);

/// CDF by adaptive quadrature in the theta parametrization (radial CDF for Ring).
double reference_cdf(const ReferenceDensity& d, double x, double tol = 1e-10);

/// Sup-norm distance between the empirical CDF of `s` and the reference CDF.
/// Ring spectra are compared through their moduli.
double esd_distance(const SpectrumSet& s, const ReferenceDensity& d);

/// Kolmogorov distance of arbitrary samples against a CDF.
double kolmogorov_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Real symmetric n x n matrix n^{-1/2} W with E W_jk^2 = omega2 (1 + delta_jk).
Eigen::MatrixXd sample_goe(Eigen::Index n, double omega2, std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  double bin_width = 0.0;
  std::string rule = "freedman-diaconis";
};

/// Freedman-Diaconis binning (width 2 IQR n^{-1/3}); falls back to a single bin when IQR = 0.
Histogram histogram_fd(const std::vector<double>& values);

void write_spectrum_csv(const SpectrumSet& s, const std::filesystem::path& path);

}  // namespace rmteed
