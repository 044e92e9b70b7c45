#pragma once

#include <cmath>
#include <functional>

namespace improvkit {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Phi via erfc keeps relative accuracy in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// Q(x) = 1 - Phi(x).
inline double normal_tail(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

inline double normal_pdf(double x, double mu, double sigma) {
  return normal_pdf((x - mu) / sigma) / sigma;
}

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Adaptive Gauss-Kronrod integral of f over [a, b]. Throws NumericalError when
// the error estimate exceeds abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-8);

}  // namespace improvkit
