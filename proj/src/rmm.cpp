#include "rmteed/rmm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace rmteed {

namespace {

// Hermitian square root via eigendecomposition; eigenvalues below 1e-12 * lambda_max
// (including roundoff negatives) are clamped to zero.
template <typename Scalar>
Matrix<Scalar> hermitian_sqrt(const Matrix<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "rmm_core", "eigendecomposition of X X^H did not converge");
  }
  Eigen::VectorXd w = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(w.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = w(i) <= cutoff ? 0.0 : std::sqrt(w(i));
  const auto& v = es.eigenvectors();
  return v * w.asDiagonal() * v.adjoint();
}

template <typename Scalar>
ComplexMatrix sve_impl(const Standardized<Scalar>& x, std::uint64_t seed) {
  const Eigen::Index N = x.rows();
  Matrix<Scalar> gram(N, N);
  gram.setZero();
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(x.data);
  Matrix<Scalar> full = gram.template selfadjointView<Eigen::Lower>();
  Matrix<Scalar> root = hermitian_sqrt<Scalar>(full);
  return root.template cast<std::complex<double>>() * haar_unitary(N, seed);
}

}  // namespace

ComplexMatrix haar_unitary(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::Parameter, "rmm_core", "haar_unitary needs n >= 1");
  Rng rng(seed);
  ComplexMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = detail::gaussian<std::complex<double>>(rng);
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : std::complex<double>(1.0, 0.0);
  }
  return q;
}

ComplexMatrix singular_value_equivalent(const StandardizedMatrix& x, std::uint64_t seed) {
  return sve_impl(x, seed);
}

ComplexMatrix singular_value_equivalent(const Standardized<std::complex<double>>& x, std::uint64_t seed) {
  return sve_impl(x, seed);
}

ComplexMatrix normalize_rows(const ComplexMatrix& z) {
  ComplexMatrix out = z;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::NumericalFailure, "rmm_core",
                  "row " + std::to_string(i) + " of the matrix product has zero or non-finite norm");
    }
    out.row(i) /= norm;
  }
  return out;
}

RingProduct ring_product(const std::vector<StandardizedMatrix>& windows, std::uint64_t seed) {
  if (windows.empty()) throw Error(ErrorKind::Parameter, "rmm_core", "ring_product needs L >= 1 windows");
  const Eigen::Index N = windows.front().rows();
  for (const auto& w : windows) {
    if (w.rows() != N) {
      throw Error(ErrorKind::Shape, "rmm_core",
                  "ring_product windows disagree on N (" + std::to_string(N) + " vs " + std::to_string(w.rows()) + ")");
    }
  }
  ComplexMatrix z = singular_value_equivalent(windows.front(), derive_seed(seed, {0}));
  for (std::size_t k = 1; k < windows.size(); ++k) {
    z = z * singular_value_equivalent(windows[k], derive_seed(seed, {static_cast<std::uint64_t>(k)}));
  }
  return {normalize_rows(z), static_cast<int>(windows.size()), seed};
}

RawWindow augment(const RawWindow& basic, const Eigen::MatrixXd& factors, int replicate,
                  const std::vector<std::string>& factor_ids) {
  if (replicate < 1) throw Error(ErrorKind::Parameter, "rmm_core", "factor replication must be >= 1");
  if (factors.cols() != basic.values.cols()) {
    throw Error(ErrorKind::Shape, "rmm_core",
                "factor block has " + std::to_string(factors.cols()) + " columns, status block has " +
                    std::to_string(basic.values.cols()));
  }
  RawWindow out;
  out.start_index = basic.start_index;
  out.end_index = basic.end_index;
  const Eigen::Index n0 = basic.values.rows();
  const Eigen::Index nf = factors.rows();
  out.values.resize(n0 + nf * replicate, basic.values.cols());
  out.values.topRows(n0) = basic.values;
  out.node_ids = basic.node_ids;
  for (int k = 0; k < replicate; ++k) {
    out.values.middleRows(n0 + k * nf, nf) = factors;
    for (Eigen::Index i = 0; i < nf; ++i) {
      std::string id = static_cast<std::size_t>(i) < factor_ids.size() ? factor_ids[static_cast<std::size_t>(i)]
                                                                         : "factor-" + std::to_string(i);
      if (replicate > 1) id += "#" + std::to_string(k);
      out.node_ids.push_back(std::move(id));
    }
  }
  return out;
}

}  // namespace rmteed
