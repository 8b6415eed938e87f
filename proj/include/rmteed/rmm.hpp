#pragma once

#include "rmteed/error.hpp"
#include "rmteed/ingest.hpp"
#include "rmteed/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace rmteed {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ComplexMatrix = Eigen::MatrixXcd;

enum class DegeneratePolicy { Error, Jitter };

/// Row-wise z-scored window: every row has mean 0 and population variance 1.
template <typename Scalar>
struct Standardized {
  Matrix<Scalar> data;  // N x T

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
  double ratio() const { return static_cast<double>(data.rows()) / static_cast<double>(data.cols()); }
};

using StandardizedMatrix = Standardized<double>;

enum class CovarianceConvention {
  S,  // (1/T) X X^H
  M,  // (1/N) X X^H = S / c
};

template <typename Scalar>
struct Covariance {
  Matrix<Scalar> matrix;  // N x N, Hermitian
  CovarianceConvention convention = CovarianceConvention::M;
  Eigen::Index N = 0;
  Eigen::Index T = 0;
};

struct RingProduct {
  ComplexMatrix z;  // row-normalized product, N x N
  int depth = 1;
  std::uint64_t seed = 0;
};

struct StandardizeOptions {
  DegeneratePolicy policy = DegeneratePolicy::Error;
  std::uint64_t seed = 0;  // jitter stream
  std::vector<std::string> row_labels;  // for error messages; optional
};

namespace detail {

inline double abs2(double v) { return v * v; }
inline double abs2(const std::complex<double>& v) { return std::norm(v); }

template <typename Scalar>
Scalar gaussian(Rng& rng);

template <>
inline double gaussian<double>(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return n01(rng);
}

template <>
inline std::complex<double> gaussian<std::complex<double>>(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const double re = n01(rng);
  const double im = n01(rng);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

}  // namespace detail

/// Maps each row x to (x - mean(x)) / sigma(x) with the population (divide by T) variance.
///
/// A row with sigma == 0 raises DegenerateRow under DegeneratePolicy::Error. Under Jitter,
/// seeded Gaussian noise of standard deviation 1e-8 * (1 + |mean|) is added before
/// standardizing that row.
template <typename Derived>
Standardized<typename Derived::Scalar> standardize(const Eigen::MatrixBase<Derived>& raw,
                                                   const StandardizeOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index T = raw.cols();
  Standardized<Scalar> out{raw.eval()};
  if (T < 2) throw Error(ErrorKind::Shape, "rmm_core", "standardize needs at least 2 columns");

  for (Eigen::Index i = 0; i < out.data.rows(); ++i) {
    auto row = out.data.row(i);
    Scalar mean = row.mean();
    double var = 0.0;
    for (Eigen::Index j = 0; j < T; ++j) var += detail::abs2(row(j) - mean);
    var /= static_cast<double>(T);

    if (!(var > 0.0) || !std::isfinite(var)) {
      const std::string label = static_cast<std::size_t>(i) < opts.row_labels.size()
                                    ? opts.row_labels[static_cast<std::size_t>(i)]
                                    : "row " + std::to_string(i);
      if (opts.policy == DegeneratePolicy::Error) {
        throw Error(ErrorKind::DegenerateRow, "rmm_core", "zero-variance series for node '" + label + "'");
      }
      Rng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(i)}));
      const double scale = 1e-8 * (1.0 + std::abs(mean));
      for (Eigen::Index j = 0; j < T; ++j) row(j) += scale * detail::gaussian<Scalar>(rng);
      mean = row.mean();
      var = 0.0;
      for (Eigen::Index j = 0; j < T; ++j) var += detail::abs2(row(j) - mean);
      var /= static_cast<double>(T);
    }
    row = (row.array() - mean) / std::sqrt(var);
  }
  return out;
}

/// S = (1/T) X X^H or M = (1/N) X X^H, symmetrized as (A + A^H) / 2.
template <typename Scalar>
Covariance<Scalar> covariance(const Standardized<Scalar>& x, CovarianceConvention convention) {
  const Eigen::Index N = x.rows();
  const Eigen::Index T = x.cols();
  Matrix<Scalar> gram(N, N);
  gram.setZero();
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(x.data);
  Matrix<Scalar> full = gram.template selfadjointView<Eigen::Lower>();
  const double divisor = convention == CovarianceConvention::S ? static_cast<double>(T) : static_cast<double>(N);
  full /= divisor;
  Matrix<Scalar> sym = (full + full.adjoint()) / 2.0;
  return {std::move(sym), convention, N, T};
}

/// Haar-distributed n x n unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal moved onto Q.
ComplexMatrix haar_unitary(Eigen::Index n, std::uint64_t seed);

/// sqrt(X X^H) U with U Haar unitary. Shares the singular values of X.
ComplexMatrix singular_value_equivalent(const StandardizedMatrix& x, std::uint64_t seed);
ComplexMatrix singular_value_equivalent(const Standardized<std::complex<double>>& x, std::uint64_t seed);

/// Product of the singular-value equivalents of `windows` (independent Haar draws),
/// each row then scaled to unit Euclidean norm.
RingProduct ring_product(const std::vector<StandardizedMatrix>& windows, std::uint64_t seed);

/// Scales each row to unit Euclidean norm (z_i / (sqrt(N) * rms(z_i))).
ComplexMatrix normalize_rows(const ComplexMatrix& z);

/// Vertical concatenation [basic; factors repeated `replicate` times].
RawWindow augment(const RawWindow& basic, const Eigen::MatrixXd& factors, int replicate = 1,
                  const std::vector<std::string>& factor_ids = {});

}  // namespace rmteed
