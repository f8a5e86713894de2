#pragma once

#include <cstdint>

#include "hardy/index.hpp"

namespace hardy {

/// Space dimension N >= 2.
class Dimension {
 public:
  explicit Dimension(int n);
  int value() const noexcept { return n_; }
  double as_double() const noexcept { return static_cast<double>(n_); }
  friend bool operator==(Dimension a, Dimension b) { return a.n_ == b.n_; }

 private:
  int n_;
};

enum class Criticality { Subcritical, Critical };

const char* to_string(Criticality c);

/// Hardy constant -(N-2)^2/4.
double critical_lambda(Dimension N);

/// True when lambda equals the Hardy constant up to a relative tolerance of 1e-12.
bool is_critical_lambda(double lambda, Dimension N);

/// Eigenvalue k(N+k-2) of the Laplace-Beltrami operator on the sphere.
double omega(int k, Dimension N);

/// Dimension of the k-th spherical harmonic eigenspace (1 for k = 0).
std::uint64_t multiplicity(int k, Dimension N);

/// Roots of the indicial equation A(A+N-2) = lambda.
struct Exponents {
  double minus;
  double plus;
  double discriminant;
};

/// Throws LambdaBelowCritical when lambda < -(N-2)^2/4.
Exponents exponents(double lambda, Dimension N);

struct ModeExponents {
  int k = 0;
  double omega_k = 0.0;
  std::uint64_t d_k = 1;
  double D1 = 0.0;  // discriminant at lambda1 + omega_k
  double D2 = 0.0;  // discriminant at lambda2 + omega_k
  double A1k = 0.0; // small-r exponent
  double A2k = 0.0; // large-r exponent
  int Bk = 0;       // 1 when the large-r profile carries a log factor
};

ModeExponents mode_exponents(int k, Dimension N, double lambda1, double lambda2,
                             Criticality criticality);

struct LorentzQuadruple {
  Index p;
  Index q;
  Index sigma;
  Index theta;
};

/// Membership in the admissible set of Lorentz index quadruples.
bool admissible(Index p, Index q, Index sigma, Index theta);
inline bool admissible(const LorentzQuadruple& x) {
  return admissible(x.p, x.q, x.sigma, x.theta);
}

/// Condition (N'): subcritical, or critical with A_{2,0} > -N/2.
bool nprime_holds(Dimension N, double lambda2, Criticality criticality);

/// Volume of the unit ball in R^N.
double unit_ball_volume(Dimension N);

/// Surface area of the unit sphere S^{N-1}.
double unit_sphere_area(Dimension N);

}  // namespace hardy
