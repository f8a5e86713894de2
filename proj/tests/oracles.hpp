#pragma once

#include <cmath>
#include <numbers>

// Independent reference values and closed forms used across the test suites.
namespace oracle {

inline constexpr double pi = std::numbers::pi;

// h_0 of the two-scale potential (3, -3/16) in R^3, from
// tests/oracles/two_scale_profile.py (DOP853 on the Riccati form, 1e-13).
inline constexpr double kTwoScaleRadii[] = {1.0, 10.0, 1e3, 1e6, 1e10, 1e14};
inline constexpr double kTwoScaleH0[] = {0.802210382340137, 2.13726972911681,  1.04498616312549,
                                         0.193060069238905, 0.019329388888412, 0.00193296227080572};
// lim h_0(r) r^{1/4}, extrapolated in r^{-1/2} from the two largest radii.
inline constexpr double kTwoScaleC0 = 6.11256415379;

// Free heat flow in R^3 of e^{-r^2}: (1 + 4t)^{-3/2} exp(-r^2 / (1 + 4t)).
inline double gaussian_k0(double r, double t) {
  const double s = 1.0 + 4.0 * t;
  return std::pow(s, -1.5) * std::exp(-r * r / s);
}

// Radial coefficient of the free flow of r e^{-r^2} cos(theta): r (1 + 4t)^{-5/2} exp(-r^2 / (1 + 4t)).
inline double gaussian_k1(double r, double t) {
  const double s = 1.0 + 4.0 * t;
  return r * std::pow(s, -2.5) * std::exp(-r * r / s);
}

inline double gaussian_k0_dt(double r, double t) {
  const double s = 1.0 + 4.0 * t;
  return gaussian_k0(r, t) * (-6.0 / s + 4.0 * r * r / (s * s));
}

// Spherical average over |y| = rho of the kernel of -Delta + lambda |x|^{-2} in R^N:
// (r rho)^{-(N-2)/2} (2t)^{-1} exp(-(r^2 + rho^2)/4t) I_nu(r rho / 2t) / |S^{N-1}|,
// nu = sqrt((N-2)^2/4 + lambda).
inline double hardy_kernel_average(double r, double rho, double t, int N, double lambda) {
  const double m = 0.5 * (N - 2);
  const double nu = std::sqrt(m * m + lambda);
  const double z = r * rho / (2.0 * t);
  const double area = 2.0 * std::pow(pi, 0.5 * N) / std::tgamma(0.5 * N);
  // scaled Bessel keeps the exponentials balanced for large z
  const double scaled = std::cyl_bessel_i(nu, z) * std::exp(-z);
  return std::pow(r * rho, -m) / (2.0 * t) * std::exp(-(r - rho) * (r - rho) / (4.0 * t)) * scaled / area;
}

// ||r^A 1_{B(0,R)}||_{L^{p,sigma}(R^N)} from f*(s) = (s/alpha)^{A/N} on s < alpha R^N, A < 0 < 1/p + A/N.
inline double power_law_norm(double A, double R, int N, double p, double sigma) {
  const double alpha = std::pow(pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
  const double e = 1.0 / p + A / N;
  const double top = std::pow(alpha * std::pow(R, N), e) * std::pow(alpha, -A / N);
  if (std::isinf(sigma)) return top;
  return top / std::pow(sigma * e, 1.0 / sigma);
}

}  // namespace oracle
