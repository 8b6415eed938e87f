#include "rmteed/spectral.hpp"

#include "rmteed/error.hpp"
#include "rmteed/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace rmteed {

namespace {

const char* kModule = "spectral";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

constexpr double kHalfPi = M_PI / 2.0;

bool compatible(SpectrumKind s, ReferenceDensity::Kind d) {
  using K = ReferenceDensity::Kind;
  switch (s) {
    case SpectrumKind::Covariance: return d == K::Mp || d == K::Mp2;
    case SpectrumKind::Ring: return d == K::Ring;
    case SpectrumKind::Wigner: return d == K::Semicircle;
  }
  return false;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Ring: return "ring";
    case SpectrumKind::Covariance: return "covariance";
    case SpectrumKind::Wigner: return "wigner";
  }
  return "unknown";
}

std::string to_string(ReferenceDensity::Kind kind) {
  switch (kind) {
    case ReferenceDensity::Kind::Ring: return "ring";
    case ReferenceDensity::Kind::Mp: return "mp";
    case ReferenceDensity::Kind::Mp2: return "mp2";
    case ReferenceDensity::Kind::Semicircle: return "semicircle";
  }
  return "unknown";
}

SpectrumSet eigen_general(const ComplexMatrix& a, SpectrumKind kind, const std::string& provenance) {
  if (a.rows() != a.cols()) fail(ErrorKind::Shape, "eigen_general needs a square matrix");
  if (!a.allFinite()) fail(ErrorKind::NumericalFailure, "non-finite entries in matrix " + provenance);
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure, "eigensolver did not converge for matrix " +
                                          (provenance.empty() ? std::string("<unnamed>") : provenance));
  }
  SpectrumSet s;
  s.eigenvalues = solver.eigenvalues();
  s.kind = kind;
  s.N = a.rows();
  return s;
}

template <typename Scalar>
SpectrumSet eigen_hermitian(const Covariance<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "Hermitian eigensolver did not converge");
  Eigen::VectorXd w = solver.eigenvalues();
  const double scale = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0) {
      if (w(i) < -1e-10 * scale) {
        fail(ErrorKind::InvariantViolation, "covariance matrix is indefinite (eigenvalue " + fmt(w(i)) + ")");
      }
      w(i) = 0.0;
    }
  }
  SpectrumSet s;
  s.eigenvalues = w.cast<std::complex<double>>();
  s.kind = SpectrumKind::Covariance;
  s.N = m.N;
  s.T = m.T;
  return s;
}

template SpectrumSet eigen_hermitian<double>(const Covariance<double>&);
template SpectrumSet eigen_hermitian<std::complex<double>>(const Covariance<std::complex<double>>&);

SpectrumSet eigen_symmetric(const Eigen::MatrixXd& a, SpectrumKind kind) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "symmetric eigensolver did not converge");
  SpectrumSet s;
  s.eigenvalues = solver.eigenvalues().cast<std::complex<double>>();
  s.kind = kind;
  s.N = a.rows();
  return s;
}

ReferenceDensity ReferenceDensity::ring(double c, int L) {
  ReferenceDensity d;
  d.kind = Kind::Ring;
  d.c = c;
  d.L = L;
  d.validate();
  return d;
}

ReferenceDensity ReferenceDensity::mp(double c, double sigma2) {
  ReferenceDensity d;
  d.kind = Kind::Mp;
  d.c = c;
  d.sigma2 = sigma2;
  d.validate();
  return d;
}

ReferenceDensity ReferenceDensity::mp2(double c, double sigma2) {
  ReferenceDensity d;
  d.kind = Kind::Mp2;
  d.c = c;
  d.sigma2 = sigma2;
  d.validate();
  return d;
}

ReferenceDensity ReferenceDensity::semicircle(double omega2) {
  ReferenceDensity d;
  d.kind = Kind::Semicircle;
  d.omega2 = omega2;
  d.validate();
  return d;
}

void ReferenceDensity::validate() const {
  switch (kind) {
    case Kind::Semicircle:
      if (!(omega2 > 0.0) || !std::isfinite(omega2)) fail(ErrorKind::Parameter, "semicircle needs omega^2 > 0");
      return;
    case Kind::Ring:
      if (L < 1) fail(ErrorKind::Parameter, "ring law needs L >= 1");
      break;
    case Kind::Mp:
    case Kind::Mp2:
      if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorKind::Parameter, "M-P law needs sigma^2 > 0");
      break;
  }
  if (!(c > 0.0 && c <= 1.0)) fail(ErrorKind::Parameter, "ratio c=" + fmt(c) + " outside (0, 1]");
}

std::pair<double, double> ReferenceDensity::support() const {
  switch (kind) {
    case Kind::Ring: return {std::pow(1.0 - c, 0.5 * L), 1.0};
    case Kind::Mp: {
      const double s = std::sqrt(c);
      return {sigma2 * (1.0 - s) * (1.0 - s), sigma2 * (1.0 + s) * (1.0 + s)};
    }
    case Kind::Mp2: {
      const double s = 1.0 / std::sqrt(c);
      return {sigma2 * (1.0 - s) * (1.0 - s), sigma2 * (1.0 + s) * (1.0 + s)};
    }
    case Kind::Semicircle: {
      const double w = std::sqrt(omega2);
      return {-2.0 * w, 2.0 * w};
    }
  }
  return {0.0, 0.0};
}

double ReferenceDensity::support_point(double theta) const {
  // Mp2 at sigma^2 = 1 is exactly zeta(theta) = 1 + 1/c + (2/sqrt(c)) sin(theta).
  switch (kind) {
    case Kind::Mp: return sigma2 * (1.0 + c + 2.0 * std::sqrt(c) * std::sin(theta));
    case Kind::Mp2: return sigma2 * (1.0 + 1.0 / c + 2.0 / std::sqrt(c) * std::sin(theta));
    case Kind::Semicircle: return 2.0 * std::sqrt(omega2) * std::sin(theta);
    case Kind::Ring: {
      auto [lo, hi] = support();
      return 0.5 * (lo + hi) + 0.5 * (hi - lo) * std::sin(theta);
    }
  }
  return 0.0;
}

double ReferenceDensity::support_theta(double x) const {
  auto [lo, hi] = support();
  if (x <= lo) return -kHalfPi;
  if (x >= hi) return kHalfPi;
  const double s = (2.0 * x - (lo + hi)) / (hi - lo);
  return std::asin(std::clamp(s, -1.0, 1.0));
}

double ReferenceDensity::theta_weight(double theta) const {
  const double cs = std::cos(theta);
  switch (kind) {
    case Kind::Mp: return 2.0 * sigma2 * cs * cs / (M_PI * support_point(theta));
    case Kind::Mp2: return 2.0 * sigma2 * cs * cs / (M_PI * c * support_point(theta));
    case Kind::Semicircle: return 2.0 / M_PI * cs * cs;
    case Kind::Ring: {
      auto [lo, hi] = support();
      return ring_radial_density(*this, support_point(theta)) * 0.5 * (hi - lo) * cs;
    }
  }
  return 0.0;
}

double density_eval(const ReferenceDensity& d, double x) {
  d.validate();
  auto [lo, hi] = d.support();
  switch (d.kind) {
    case ReferenceDensity::Kind::Ring: {
      const double r = std::abs(x);
      if (r < lo || r > hi || r == 0.0) return 0.0;
      return std::pow(r, 2.0 / d.L - 2.0) / (M_PI * d.c * d.L);
    }
    case ReferenceDensity::Kind::Mp:
    case ReferenceDensity::Kind::Mp2: {
      if (x < lo || x > hi || x <= 0.0) return 0.0;
      const double scale = d.kind == ReferenceDensity::Kind::Mp ? d.c : 1.0;
      return std::sqrt(std::max((hi - x) * (x - lo), 0.0)) / (2.0 * M_PI * x * scale * d.sigma2);
    }
    case ReferenceDensity::Kind::Semicircle: {
      if (x * x >= 4.0 * d.omega2) return 0.0;
      return std::sqrt(4.0 * d.omega2 - x * x) / (2.0 * M_PI * d.omega2);
    }
  }
  return 0.0;
}

double ring_radial_density(const ReferenceDensity& d, double r) {
  if (d.kind != ReferenceDensity::Kind::Ring) fail(ErrorKind::Contract, "radial density is defined for the ring law only");
  return 2.0 * M_PI * r * density_eval(d, r);
}

double reference_cdf(const ReferenceDensity& d, double x, double tol) {
  d.validate();
  auto [lo, hi] = d.support();
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double theta = d.support_theta(x);
  quad::Options opts;
  opts.abs_tol = tol;
  opts.rel_tol = 0.0;
  auto r = quad::integrate([&](double t) { return d.theta_weight(t); }, -kHalfPi, theta, opts);
  return std::clamp(r.value, 0.0, 1.0);
}

double kolmogorov_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) fail(ErrorKind::Contract, "Kolmogorov distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    dist = std::max({dist, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return dist;
}

double esd_distance(const SpectrumSet& s, const ReferenceDensity& d) {
  if (!compatible(s.kind, d.kind)) {
    fail(ErrorKind::Contract, "cannot compare a " + to_string(s.kind) + " spectrum with the " + to_string(d.kind) + " law");
  }
  d.validate();
  std::vector<double> xs(static_cast<std::size_t>(s.eigenvalues.size()));
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    xs[static_cast<std::size_t>(i)] =
        s.kind == SpectrumKind::Ring ? std::abs(s.eigenvalues(i)) : s.eigenvalues(i).real();
  }
  std::sort(xs.begin(), xs.end());

  // Accumulate the CDF segment by segment between consecutive sorted points.
  quad::Options opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 0.0;
  double theta_prev = -kHalfPi;
  double cdf = 0.0;
  auto cdf_at = [&](double x) {
    const double theta = d.support_theta(x);
    if (theta > theta_prev) {
      cdf += quad::integrate([&](double t) { return d.theta_weight(t); }, theta_prev, theta, opts).value;
      theta_prev = theta;
    }
    return std::clamp(cdf, 0.0, 1.0);
  };
  return kolmogorov_distance(xs, cdf_at);
}

Eigen::MatrixXd sample_goe(Eigen::Index n, double omega2, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::Parameter, "sample_goe needs n >= 1");
  if (!(omega2 > 0.0)) fail(ErrorKind::Parameter, "sample_goe needs omega^2 > 0");
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double w = std::sqrt(omega2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = std::sqrt(2.0) * w * n01(rng) * scale;
    for (Eigen::Index k = j + 1; k < n; ++k) {
      m(j, k) = w * n01(rng) * scale;
      m(k, j) = m(j, k);
    }
  }
  return m;
}

Histogram histogram_fd(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorKind::Contract, "histogram of an empty sample");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double lo = v.front();
  const double hi = v.back();
  Histogram h;
  std::size_t bins = 1;
  if (iqr > 0.0 && hi > lo) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
    bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  }
  const double span = hi > lo ? hi - lo : 1.0;
  h.bin_width = span / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + h.bin_width * static_cast<double>(b));
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / h.bin_width);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

void write_spectrum_csv(const SpectrumSet& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out << "re,im\n";
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    out << fmt(s.eigenvalues(i).real()) << ',' << fmt(s.eigenvalues(i).imag()) << '\n';
  }
}

}  // namespace rmteed
