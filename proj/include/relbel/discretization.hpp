#pragma once

// Regular 1-D discretizations: equal-width half-open cells [a, b) over
// [lo, hi), cell masses from densities, and the map from cell index sets back
// to unions of intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "relbel/error.hpp"
#include "relbel/numeric.hpp"

namespace relbel {

struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_cells = 1;

  double cell_width() const noexcept { return (hi - lo) / static_cast<double>(n_cells); }
  double lower(std::size_t i) const noexcept {
    return lo + static_cast<double>(i) * cell_width();
  }
  double upper(std::size_t i) const noexcept {
    return i + 1 == n_cells ? hi : lo + static_cast<double>(i + 1) * cell_width();
  }
  double midpoint(std::size_t i) const noexcept {
    return lo + (static_cast<double>(i) + 0.5) * cell_width();
  }
  std::vector<double> midpoints() const {
    std::vector<double> m(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) m[i] = midpoint(i);
    return m;
  }
  /// Index of the cell containing v, clamped to the grid.
  std::size_t locate(double v) const noexcept {
    if (v <= lo) return 0;
    auto i = std::min(static_cast<std::size_t>(std::floor((v - lo) / cell_width())), n_cells - 1);
    // The division can land one cell off near an edge; settle against lower().
    while (i > 0 && v < lower(i)) --i;
    while (i + 1 < n_cells && v >= lower(i + 1)) ++i;
    return i;
  }
};

inline Grid1D build_grid(double lo, double hi, std::size_t n_cells) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    fail(ErrorCode::BadRange, "grid", "need finite lo < hi");
  if (n_cells == 0) fail(ErrorCode::ZeroCells, "grid.n_cells", "need at least one cell");
  return Grid1D{lo, hi, n_cells};
}

/// Splits every cell into `factor` equal children. Child j lies in parent j / factor.
inline Grid1D refine(const Grid1D& grid, std::size_t factor) {
  if (factor < 2) fail(ErrorCode::InvalidSpec, "factor", "refinement factor must be at least 2");
  return Grid1D{grid.lo, grid.hi, grid.n_cells * factor};
}

struct Interval {
  double lo;
  double hi;  // half-open [lo, hi)
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Maximal disjoint intervals covering exactly the selected cells.
inline std::vector<Interval> undiscretize(const std::set<std::size_t>& cells, const Grid1D& grid) {
  std::vector<Interval> out;
  for (auto it = cells.begin(); it != cells.end();) {
    if (*it >= grid.n_cells)
      fail(ErrorCode::IndexOutOfRange, "cells", "cell " + std::to_string(*it) + " out of range");
    const std::size_t first = *it;
    std::size_t last = first;
    for (++it; it != cells.end() && *it == last + 1; ++it) last = *it;
    if (last >= grid.n_cells)
      fail(ErrorCode::IndexOutOfRange, "cells", "cell " + std::to_string(last) + " out of range");
    out.push_back({grid.lower(first), grid.upper(last)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Density families

struct NormalDensity {
  double mean = 0.0;
  double var = 1.0;

  double sd() const { return std::sqrt(var); }
  double pdf(double v) const {
    const double z = (v - mean) / sd();
    return std::exp(-0.5 * z * z) / (sd() * std::sqrt(2.0 * std::numbers::pi));
  }
  double cdf(double v) const { return 0.5 * std::erfc(-(v - mean) / (sd() * std::numbers::sqrt2)); }
  double sf(double v) const { return 0.5 * std::erfc((v - mean) / (sd() * std::numbers::sqrt2)); }
  /// Mass of [a, b), taken from whichever tail avoids cancellation.
  double interval_mass(double a, double b) const {
    if (a >= mean) return sf(a) - sf(b);
    return cdf(b) - cdf(a);
  }
};

struct BetaDensity {
  double alpha = 1.0;
  double beta = 1.0;

  double pdf(double v) const {
    if (v < 0.0 || v > 1.0) return 0.0;
    if ((v == 0.0 && alpha < 1.0) || (v == 1.0 && beta < 1.0)) return 0.0;
    return boost::math::pdf(boost::math::beta_distribution<double>(alpha, beta), v);
  }
  double cdf(double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    return boost::math::cdf(boost::math::beta_distribution<double>(alpha, beta), v);
  }
  double sf(double v) const {
    if (v <= 0.0) return 1.0;
    if (v >= 1.0) return 0.0;
    return boost::math::cdf(
        boost::math::complement(boost::math::beta_distribution<double>(alpha, beta), v));
  }
  double interval_mass(double a, double b) const {
    const double med = alpha / (alpha + beta);
    if (a >= med) return sf(a) - sf(b);
    return cdf(b) - cdf(a);
  }
};

struct UniformDensity {
  double a = 0.0;
  double b = 1.0;

  double pdf(double v) const { return (v >= a && v < b) ? 1.0 / (b - a) : 0.0; }
  double cdf(double v) const { return std::clamp((v - a) / (b - a), 0.0, 1.0); }
  double interval_mass(double l, double u) const { return cdf(u) - cdf(l); }
};

/// Density of exp(Z) with Z ~ N(mean, var).
struct LogNormalDensity {
  double mean = 0.0;
  double var = 1.0;

  double pdf(double v) const {
    if (v <= 0.0) return 0.0;
    return NormalDensity{mean, var}.pdf(std::log(v)) / v;
  }
  double cdf(double v) const { return v <= 0.0 ? 0.0 : NormalDensity{mean, var}.cdf(std::log(v)); }
  double interval_mass(double l, double u) const {
    if (u <= 0.0) return 0.0;
    const NormalDensity z{mean, var};
    const double lo = l <= 0.0 ? -INFINITY : std::log(l);
    if (lo == -INFINITY) return z.cdf(std::log(u));
    return z.interval_mass(lo, std::log(u));
  }
};

using DensityFamily = std::variant<NormalDensity, BetaDensity, UniformDensity, LogNormalDensity>;

inline double pdf(const DensityFamily& d, double v) {
  return std::visit([v](const auto& f) { return f.pdf(v); }, d);
}
inline double interval_mass(const DensityFamily& d, double a, double b) {
  return std::visit([a, b](const auto& f) { return f.interval_mass(a, b); }, d);
}

/// Range holding all but a negligible tail: +-6 sd for normals, the support otherwise.
inline Grid1D default_grid(const DensityFamily& d, std::size_t n_cells) {
  struct Visitor {
    std::size_t n;
    Grid1D operator()(const NormalDensity& f) const {
      return build_grid(f.mean - 6.0 * f.sd(), f.mean + 6.0 * f.sd(), n);
    }
    Grid1D operator()(const BetaDensity&) const { return build_grid(0.0, 1.0, n); }
    Grid1D operator()(const UniformDensity& f) const { return build_grid(f.a, f.b, n); }
    Grid1D operator()(const LogNormalDensity& f) const {
      return build_grid(0.0, std::exp(f.mean + 6.0 * std::sqrt(f.var)), n);
    }
  };
  return std::visit(Visitor{n_cells}, d);
}

// ---------------------------------------------------------------------------

struct GriddedDistribution {
  Grid1D grid;
  std::vector<double> masses;  // normalized cell masses
  double raw_total = 0.0;      // sum before normalization
  double tail_mass = 0.0;      // 1 - raw_total, meaningful for normalized densities
};

namespace detail {

inline GriddedDistribution finish(const Grid1D& grid, std::vector<double> raw) {
  const double total = accurate_sum(raw);
  if (!(total > 0.0)) fail(ErrorCode::AllZeroMass, "density", "no mass inside the grid range");
  GriddedDistribution out{grid, std::move(raw), total, std::max(0.0, 1.0 - total)};
  for (double& m : out.masses) m /= total;
  return out;
}

}  // namespace detail

/// Cell masses by the composite midpoint rule with `quadrature_points` nodes per cell.
inline GriddedDistribution discretize(const std::function<double(double)>& density, const Grid1D& grid,
                                      std::size_t quadrature_points = 8) {
  if (quadrature_points == 0)
    fail(ErrorCode::InvalidSpec, "quadrature_points", "need at least one node per cell");
  const double w = grid.cell_width();
  const double h = w / static_cast<double>(quadrature_points);
  std::vector<double> raw(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    KahanSum s;
    const double a = grid.lower(i);
    for (std::size_t k = 0; k < quadrature_points; ++k) {
      const double v = density(a + (static_cast<double>(k) + 0.5) * h);
      if (!(v >= 0.0))
        fail(ErrorCode::NegativeDensity, "density",
             "density is negative or undefined near " + std::to_string(a));
      s += v;
    }
    raw[i] = s.value() * h;
  }
  return detail::finish(grid, std::move(raw));
}

/// Exact cell masses from a family's distribution function.
inline GriddedDistribution discretize(const DensityFamily& family, const Grid1D& grid) {
  std::vector<double> raw(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i)
    raw[i] = std::max(0.0, interval_mass(family, grid.lower(i), grid.upper(i)));
  return detail::finish(grid, std::move(raw));
}

}  // namespace relbel
