#pragma once

#include "fwmbs/grid.hpp"

#include <limits>

namespace fwmbs {

enum class FilterShape { Rectangular };

/// Rectangular transmission H(w) = 1 for |w - center| <= width / 2.
struct SpectralFilter {
  double center = 0.0;  // rad/ps, relative to the idler carrier
  double width = 0.0;   // rad/ps
  FilterShape shape = FilterShape::Rectangular;

  static SpectralFilter rectangular(double width, double center = 0.0) {
    if (!(width > 0.0)) throw std::invalid_argument("SpectralFilter: width must be > 0");
    return {center, width, FilterShape::Rectangular};
  }

  /// A filter that passes the whole grid.
  static SpectralFilter all_pass() { return {0.0, std::numeric_limits<double>::infinity(), FilterShape::Rectangular}; }

  bool is_all_pass() const { return std::isinf(width); }

  double transmission(double omega) const {
    if (is_all_pass()) return 1.0;
    return std::abs(omega - center) <= 0.5 * width * (1.0 + 1e-12) ? 1.0 : 0.0;
  }

  RealVector samples(const TimeGrid& grid) const {
    if (!is_all_pass() && 0.5 * width + std::abs(center) > grid.nyquist())
      throw std::invalid_argument("SpectralFilter: filter extends beyond the grid Nyquist frequency");
    RealVector h(grid.size());
    for (int k = 0; k < grid.size(); ++k) h[k] = transmission(grid.omega(k));
    return h;
  }
};

/// Applies H along the first (row) index of every column.
inline void apply_filter(ComplexMatrix& columns, const TimeGrid& grid, const SpectralFilter& filter) {
  if (filter.is_all_pass()) return;
  apply_multiplier(columns, filter.samples(grid).cast<cdouble>());
}

inline SampledField apply_filter(const SampledField& field, const SpectralFilter& filter) {
  if (filter.is_all_pass()) return field;
  SampledField out = field;
  apply_multiplier(out.values, filter.samples(field.grid).cast<cdouble>());
  return out;
}

/// Filters the idler output rows (the ii and is blocks).
inline GreenMatrix apply_filter(const GreenMatrix& g, const SpectralFilter& filter) {
  GreenMatrix out = g;
  apply_filter(out.ii, g.grid, filter);
  apply_filter(out.is, g.grid, filter);
  return out;
}

}  // namespace fwmbs
