#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hardy {

/// Radii uniformly spaced in x = log r.
struct LogGrid {
  std::vector<double> x;
  std::vector<double> r;
  double dx = 0.0;

  /// Nodes from r_min to r_max (both included) with at least per_decade nodes per decade.
  static LogGrid span(double r_min, double r_max, int per_decade);
  /// n nodes x0, x0 + dx, ...
  static LogGrid from_log(double x0, double dx, std::size_t n);

  std::size_t size() const { return x.size(); }
  /// Largest node index with x[i] <= xq (clamped to [0, n-2]).
  std::size_t cell_of(double xq) const;
};

/// Number of Gauss-Legendre points used per cell by the cumulative integrators.
inline constexpr int kCellGaussPoints = 5;

/// Gauss points of every cell, laid out cell-major: (n-1) * kCellGaussPoints values of x.
std::vector<double> cell_gauss_points(const LogGrid& grid);

/// Four-point Lagrange interpolation of node values u at xq.
double interpolate_cubic(const LogGrid& grid, std::span<const double> u, double xq);

/// u interpolated at every cell Gauss point (same layout as cell_gauss_points).
std::vector<double> interpolate_at_gauss(const LogGrid& grid, std::span<const double> u);

/// S_j = int_{-inf}^{x_j} exp(-b (x_j - y)) m(y) u(y) dy on the nodes.
///
/// u is given by node values and interpolated with cubic Lagrange stencils;
/// m is given at the cell Gauss points (empty means m = 1). `tail` is the
/// contribution of (-inf, x_0], supplied by the caller from the known
/// power-law behaviour of the integrand below the grid.
std::vector<double> exp_kernel_cumulative(const LogGrid& grid, std::span<const double> u,
                                          double b, std::span<const double> m, double tail);

/// Same as exp_kernel_cumulative but with the integrand already sampled at
/// the Gauss points (layout of cell_gauss_points).
std::vector<double> exp_kernel_cumulative_sampled(const LogGrid& grid,
                                                  std::span<const double> integrand, double b,
                                                  double tail);

/// int_{x_a}^{x_b} f(y) dy with a fixed 5-point Gauss-Legendre rule.
template <class F>
double gauss5(F&& f, double a, double b);

namespace detail {
inline constexpr double kGaussNodes[5] = {0.046910077030668004, 0.23076534494715845, 0.5,
                                          0.76923465505284155, 0.95308992296933200};
inline constexpr double kGaussWeights[5] = {0.11846344252809454, 0.23931433524968324,
                                            0.28444444444444444, 0.23931433524968324,
                                            0.11846344252809454};
}  // namespace detail

template <class F>
double gauss5(F&& f, double a, double b) {
  double s = 0.0;
  for (int q = 0; q < 5; ++q) s += detail::kGaussWeights[q] * f(a + (b - a) * detail::kGaussNodes[q]);
  return s * (b - a);
}

}  // namespace hardy
