#include "hardy/log_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hardy {

namespace {

using detail::kGaussNodes;
using detail::kGaussWeights;

// Lagrange weights of the 4-point stencil at offset s (in units of dx from its first node).
std::array<double, 4> lagrange4(double s) {
  return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
          -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
}

std::size_t stencil_start(std::size_t cell, std::size_t n) {
  if (n < 4) return 0;
  if (cell == 0) return 0;
  return std::min(cell - 1, n - 4);
}

// Precomputed stencil weights for the Gauss points of a cell whose first
// node sits `offset` nodes above the stencil start.
struct StencilTable {
  std::array<std::array<std::array<double, 4>, 5>, 3> w{};
  StencilTable() {
    for (int off = 0; off < 3; ++off)
      for (int q = 0; q < 5; ++q) w[off][q] = lagrange4(off + kGaussNodes[q]);
  }
};

const StencilTable& stencils() {
  static const StencilTable table;
  return table;
}

}  // namespace

LogGrid LogGrid::span(double r_min, double r_max, int per_decade) {
  if (!(r_min > 0.0) || !(r_max > r_min) || per_decade < 1)
    throw std::invalid_argument("LogGrid::span needs 0 < r_min < r_max and per_decade >= 1");
  const std::size_t cells = static_cast<std::size_t>(
      std::ceil(per_decade * std::log10(r_max / r_min) - 1e-9));
  const double x0 = std::log(r_min);
  const double dx = (std::log(r_max) - x0) / static_cast<double>(cells);
  LogGrid g = from_log(x0, dx, cells + 1);
  g.r.back() = r_max;
  g.r.front() = r_min;
  return g;
}

LogGrid LogGrid::from_log(double x0, double dx, std::size_t n) {
  LogGrid g;
  g.dx = dx;
  g.x.resize(n);
  g.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.x[i] = x0 + dx * static_cast<double>(i);
    g.r[i] = std::exp(g.x[i]);
  }
  return g;
}

std::size_t LogGrid::cell_of(double xq) const {
  if (x.size() < 2) return 0;
  const double s = (xq - x.front()) / dx;
  if (!(s > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(s), x.size() - 2);
}

std::vector<double> cell_gauss_points(const LogGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> y(n > 1 ? (n - 1) * kCellGaussPoints : 0);
  for (std::size_t j = 0; j + 1 < n; ++j)
    for (int q = 0; q < kCellGaussPoints; ++q)
      y[j * kCellGaussPoints + q] = grid.x[j] + grid.dx * kGaussNodes[q];
  return y;
}

double interpolate_cubic(const LogGrid& grid, std::span<const double> u, double xq) {
  const std::size_t n = grid.size();
  if (n == 1) return u[0];
  const std::size_t cell = grid.cell_of(xq);
  if (n < 4) {
    const double s = (xq - grid.x[cell]) / grid.dx;
    return u[cell] + s * (u[cell + 1] - u[cell]);
  }
  const std::size_t i0 = stencil_start(cell, n);
  const auto w = lagrange4((xq - grid.x[i0]) / grid.dx);
  return w[0] * u[i0] + w[1] * u[i0 + 1] + w[2] * u[i0 + 2] + w[3] * u[i0 + 3];
}

std::vector<double> interpolate_at_gauss(const LogGrid& grid, std::span<const double> u) {
  const std::size_t n = grid.size();
  if (u.size() != n) throw std::invalid_argument("interpolate_at_gauss: size mismatch");
  std::vector<double> out(n > 1 ? (n - 1) * kCellGaussPoints : 0);
  const auto& table = stencils();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    for (int q = 0; q < kCellGaussPoints; ++q) {
      double v;
      if (n < 4) {
        v = u[j] + kGaussNodes[q] * (u[j + 1] - u[j]);
      } else {
        const std::size_t i0 = stencil_start(j, n);
        const auto& w = table.w[j - i0][q];
        v = w[0] * u[i0] + w[1] * u[i0 + 1] + w[2] * u[i0 + 2] + w[3] * u[i0 + 3];
      }
      out[j * kCellGaussPoints + q] = v;
    }
  }
  return out;
}

std::vector<double> exp_kernel_cumulative_sampled(const LogGrid& grid,
                                                  std::span<const double> integrand, double b,
                                                  double tail) {
  const std::size_t n = grid.size();
  std::vector<double> S(n);
  S[0] = tail;
  const double dx = grid.dx;
  const double decay = std::exp(-b * dx);
  std::array<double, 5> kernel{};
  for (int q = 0; q < 5; ++q) kernel[q] = kGaussWeights[q] * std::exp(-b * dx * (1.0 - kGaussNodes[q]));
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double cell = 0.0;
    for (int q = 0; q < 5; ++q) cell += kernel[q] * integrand[j * kCellGaussPoints + q];
    S[j + 1] = decay * S[j] + dx * cell;
  }
  return S;
}

std::vector<double> exp_kernel_cumulative(const LogGrid& grid, std::span<const double> u,
                                          double b, std::span<const double> m, double tail) {
  std::vector<double> f = interpolate_at_gauss(grid, u);
  if (!m.empty()) {
    if (m.size() != f.size()) throw std::invalid_argument("multiplier layout mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= m[i];
  }
  return exp_kernel_cumulative_sampled(grid, f, b, tail);
}

}  // namespace hardy
