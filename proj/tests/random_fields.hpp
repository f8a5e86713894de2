#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "hardy/lorentz.hpp"

namespace testing_fields {

// Random radial field on R^3 built from Gaussian shells, with an optional
// power-law core, sign changes or a power-law tail beyond the last node.
inline hardy::RadialField random_field(std::mt19937_64& rng, int per_decade = 100) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int shells = 1 + static_cast<int>(4 * U(rng));
  std::vector<double> amp, centre, width;
  for (int i = 0; i < shells; ++i) {
    amp.push_back((U(rng) < 0.2 ? -1.0 : 1.0) * (0.2 + 2.0 * U(rng)));
    centre.push_back(3.0 * U(rng));
    width.push_back(0.1 + U(rng));
  }
  const double core = U(rng) < 0.5 ? -0.5 * U(rng) : 0.0;  // r^core near 0
  const bool tail = U(rng) < 0.4;
  const bool oscillating = !tail && U(rng) < 0.5;
  const double R = tail ? 4.0 : 8.0;
  auto f = [&](double r) {
    double s = 0.0;
    for (int i = 0; i < shells; ++i) s += amp[i] * std::exp(-std::pow((r - centre[i]) / width[i], 2));
    const double base = std::pow(r, core) * (0.05 + s * s) * (oscillating ? std::cos(2.0 * r) : 1.0);
    return base + (tail ? 0.3 * std::pow(1.0 + (r / R) * (r / R), -1.25) : 0.0);
  };
  std::optional<double> outer;
  if (tail) outer = -2.5;
  return hardy::RadialField::sample(f, 1e-4, R, per_decade, hardy::Dimension(3), core, outer);
}

}  // namespace testing_fields
