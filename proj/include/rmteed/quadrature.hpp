#pragma once

#include <functional>

namespace rmteed::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 40;
};

/// Adaptive 15-point Gauss-Kronrod on [a, b]. Throws NumericalFailure on non-finite samples
/// or when the tolerance cannot be met within max_depth bisections.
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opts = {});

/// Nested adaptive integral over [a1, b1] x [a2, b2] (outer variable first).
Result integrate2d(const std::function<double(double, double)>& f, double a1, double b1, double a2, double b2,
                   const Options& opts = {});

}  // namespace rmteed::quad
