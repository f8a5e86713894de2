#include "hardy/mode_spectrum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hardy/errors.hpp"

namespace hardy {

namespace {

constexpr double kCriticalRelTol = 1e-12;

// Exact binomial coefficient; throws on overflow of 64 bits.
std::uint64_t binomial(long n, long m) {
  if (m < 0 || n < 0 || m > n) return 0;
  m = std::min(m, n - m);
  unsigned __int128 result = 1;
  for (long i = 1; i <= m; ++i) {
    result = result * static_cast<unsigned __int128>(n - m + i) / static_cast<unsigned __int128>(i);
    if (result > static_cast<unsigned __int128>(UINT64_MAX))
      throw std::overflow_error("multiplicity exceeds 64-bit range");
  }
  return static_cast<std::uint64_t>(result);
}

}  // namespace

Index parse_index(const std::string& text) {
  std::string lower;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "inf" || lower == "infinity" || lower == "+inf") return Index::infinity();
  std::size_t used = 0;
  double v = std::stod(lower, &used);
  if (used != lower.size()) throw std::invalid_argument("bad index: " + text);
  return Index(v);
}

Dimension::Dimension(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("dimension must be >= 2, got " + std::to_string(n));
}

const char* to_string(Criticality c) {
  return c == Criticality::Critical ? "critical" : "subcritical";
}

double critical_lambda(Dimension N) {
  const double m = N.as_double() - 2.0;
  return -m * m / 4.0;
}

bool is_critical_lambda(double lambda, Dimension N) {
  const double ls = critical_lambda(N);
  return std::abs(lambda - ls) <= kCriticalRelTol * std::max(1.0, std::abs(ls));
}

double omega(int k, Dimension N) {
  if (k < 0) throw std::invalid_argument("mode index must be >= 0");
  return static_cast<double>(k) * static_cast<double>(N.value() + k - 2);
}

std::uint64_t multiplicity(int k, Dimension N) {
  if (k < 0) throw std::invalid_argument("mode index must be >= 0");
  if (k == 0) return 1;
  // harmonic homogeneous polynomials of degree k: C(k+N-1,N-1) - C(k+N-3,N-1)
  const long n = N.value();
  return binomial(k + n - 1, n - 1) - binomial(k + n - 3, n - 1);
}

Exponents exponents(double lambda, Dimension N) {
  const double m = N.as_double() - 2.0;
  double D = m * m + 4.0 * lambda;
  if (lambda < critical_lambda(N)) {
    if (!is_critical_lambda(lambda, N))
      throw LambdaBelowCritical("lambda=" + std::to_string(lambda) + " < " +
                                std::to_string(critical_lambda(N)));
    D = 0.0;
  }
  if (is_critical_lambda(lambda, N)) D = 0.0;
  const double s = std::sqrt(std::max(D, 0.0));
  return {(-m - s) / 2.0, (-m + s) / 2.0, std::max(D, 0.0)};
}

ModeExponents mode_exponents(int k, Dimension N, double lambda1, double lambda2,
                             Criticality criticality) {
  ModeExponents e;
  e.k = k;
  e.omega_k = omega(k, N);
  e.d_k = multiplicity(k, N);
  const Exponents near = exponents(lambda1 + e.omega_k, N);
  const Exponents far = exponents(lambda2 + e.omega_k, N);
  e.D1 = near.discriminant;
  e.D2 = far.discriminant;
  e.A1k = near.plus;
  if (k == 0 && criticality == Criticality::Critical)
    e.A2k = far.minus;
  else
    e.A2k = far.plus;
  e.Bk = (k == 0 && is_critical_lambda(lambda2, N) && criticality == Criticality::Subcritical) ? 1 : 0;
  return e;
}

bool admissible(Index p, Index q, Index sigma, Index theta) {
  if (!p.in_range() || !q.in_range() || !sigma.in_range() || !theta.in_range()) return false;
  if (!(p <= q)) return false;
  if (p.is_one() && !sigma.is_one()) return false;
  if (p.is_infinite() && !sigma.is_infinite()) return false;
  if (q.is_one() && !theta.is_one()) return false;
  if (q.is_infinite() && !theta.is_infinite()) return false;
  if (p == q && !(sigma <= theta)) return false;
  return true;
}

bool nprime_holds(Dimension N, double lambda2, Criticality criticality) {
  if (criticality == Criticality::Subcritical) return true;
  const double a20 = exponents(lambda2, N).minus;
  const double border = -N.as_double() / 2.0;
  return a20 - border > kCriticalRelTol * std::max(1.0, std::abs(border));
}

double unit_ball_volume(Dimension N) {
  const double n = N.as_double();
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double unit_sphere_area(Dimension N) { return N.as_double() * unit_ball_volume(N); }

}  // namespace hardy
