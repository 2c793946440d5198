#pragma once

// Uniform time/frequency grids, sampled fields and the Fourier transform
// contract shared by every numerical module.
//
// Units: time ps, angular frequency rad/ps.
//
// Transform convention (all modules go through these helpers):
//   forward   a(w) = 1/sqrt(2 pi) * Integral dt a(t) exp(+i w t)
//   inverse   a(t) = 1/sqrt(2 pi) * Integral dw a(w) exp(-i w t)
// Frequency samples are stored in FFT order: k*dw for k < n/2, (k-n)*dw after.

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace fwmbs {

using cdouble = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2Pi = 2.5066282746310002;
inline constexpr cdouble kI{0.0, 1.0};

class TimeGrid {
 public:
  TimeGrid() = default;

  /// Grid centred on t = 0: t spans [-n/2 dt, (n/2 - 1) dt].
  TimeGrid(int n_points, double dt) : TimeGrid(n_points, dt, -0.5 * n_points * dt) {}

  TimeGrid(int n_points, double dt, double t0) : n_(n_points), dt_(dt), t0_(t0) {
    if (n_points < 8) throw std::invalid_argument("TimeGrid: n_points must be >= 8");
    if (n_points % 2 != 0) throw std::invalid_argument("TimeGrid: n_points must be even");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (!std::isfinite(t0)) throw std::invalid_argument("TimeGrid: t0 must be finite");
  }

  int size() const { return n_; }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  double span() const { return n_ * dt_; }
  double t(int k) const { return t0_ + k * dt_; }
  double domega() const { return 2.0 * kPi / (n_ * dt_); }
  double nyquist() const { return kPi / dt_; }

  double omega(int k) const { return (k < n_ / 2 ? k : k - n_) * domega(); }

  RealVector times() const {
    RealVector out(n_);
    for (int k = 0; k < n_; ++k) out[k] = t(k);
    return out;
  }

  RealVector omegas() const {
    RealVector out(n_);
    for (int k = 0; k < n_; ++k) out[k] = omega(k);
    return out;
  }

  /// Nearest sample index, clamped to the grid.
  int index_of(double time) const {
    const long k = std::lround((time - t0_) / dt_);
    return static_cast<int>(std::clamp<long>(k, 0, n_ - 1));
  }

  bool operator==(const TimeGrid& o) const { return n_ == o.n_ && dt_ == o.dt_ && t0_ == o.t0_; }

 private:
  int n_ = 0;
  double dt_ = 0.0;
  double t0_ = 0.0;
};

/// Complex envelope on a time grid (sqrt(W) for pumps, sqrt(1/ps) for photons).
struct SampledField {
  TimeGrid grid;
  ComplexVector values;

  SampledField() = default;
  SampledField(TimeGrid g, ComplexVector v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("SampledField: length mismatch");
  }
  static SampledField zeros(const TimeGrid& g) { return {g, ComplexVector::Zero(g.size())}; }

  double energy() const { return values.squaredNorm() * grid.dt(); }
};

/// Frequency-domain samples in FFT order, paired with the originating grid.
struct Spectrum {
  TimeGrid grid;
  ComplexVector values;

  double energy() const { return values.squaredNorm() * grid.domega(); }
};

namespace detail {

// FFTW plans are created once per (length, batch, sign, alignment) and reused
// through the new-array execute interface, which is thread safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int howmany, int sign, int alignment) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, howmany, sign, alignment);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t count = static_cast<std::size_t>(n) * howmany;
    auto* raw = static_cast<char*>(fftw_malloc(count * sizeof(fftw_complex) + 64));
    char* p = raw;
    while (fftw_alignment_of(reinterpret_cast<double*>(p)) != alignment) p += 16;
    auto* buf = reinterpret_cast<fftw_complex*>(p);
    int dims[1] = {n};
    fftw_plan plan = fftw_plan_many_dft(1, dims, howmany, buf, nullptr, 1, n, buf, nullptr, 1, n,
                                        sign, FFTW_ESTIMATE);
    fftw_free(raw);
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

/// Unnormalised in-place DFT of `howmany` contiguous columns of length n.
/// sign = +1 computes sum x_n exp(+2 pi i k n / N).
inline void dft_columns(cdouble* data, int n, int howmany, int sign) {
  if (howmany <= 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data);
  const int align = fftw_alignment_of(reinterpret_cast<double*>(data));
  fftw_plan plan = PlanCache::instance().get(n, howmany, sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, align);
  fftw_execute_dft(plan, ptr, ptr);
}

inline constexpr int kColumnChunk = 64;

/// Runs fn(first_column, count) over column chunks; chunks are independent.
template <class Fn>
void for_column_chunks(int columns, Fn&& fn) {
  const int chunks = (columns + kColumnChunk - 1) / kColumnChunk;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c) {
    const int first = c * kColumnChunk;
    fn(first, std::min(kColumnChunk, columns - first));
  }
}

}  // namespace detail

inline Spectrum forward_fft(const SampledField& field) {
  const TimeGrid& g = field.grid;
  const int n = g.size();
  ComplexVector v = field.values;
  detail::dft_columns(v.data(), n, 1, +1);
  const double scale = g.dt() / kSqrt2Pi;
  for (int k = 0; k < n; ++k) v[k] *= scale * std::polar(1.0, g.omega(k) * g.t0());
  return {g, std::move(v)};
}

inline SampledField inverse_fft(const Spectrum& spectrum) {
  const TimeGrid& g = spectrum.grid;
  const int n = g.size();
  ComplexVector v(n);
  const double scale = g.domega() / kSqrt2Pi;
  for (int k = 0; k < n; ++k) v[k] = spectrum.values[k] * scale * std::polar(1.0, -g.omega(k) * g.t0());
  detail::dft_columns(v.data(), n, 1, -1);
  return {g, std::move(v)};
}

/// Multiplies every column of `columns` by m(w) in the frequency domain.
/// With m = sqrt(2 pi) * f(w) this is the convolution Integral dt' f(t - t') x(t').
inline void apply_multiplier(ComplexMatrix& columns, const ComplexVector& multiplier) {
  const int n = static_cast<int>(columns.rows());
  if (multiplier.size() != n) throw std::invalid_argument("apply_multiplier: size mismatch");
  const double inv_n = 1.0 / n;
  detail::for_column_chunks(static_cast<int>(columns.cols()), [&](int first, int count) {
    cdouble* base = columns.data() + static_cast<std::ptrdiff_t>(first) * n;
    detail::dft_columns(base, n, count, +1);
    for (int c = 0; c < count; ++c) {
      cdouble* col = base + static_cast<std::ptrdiff_t>(c) * n;
      for (int k = 0; k < n; ++k) col[k] *= multiplier[k] * inv_n;
    }
    detail::dft_columns(base, n, count, -1);
  });
}

inline void apply_multiplier(ComplexVector& column, const ComplexVector& multiplier) {
  Eigen::Map<ComplexMatrix> view(column.data(), column.size(), 1);
  ComplexMatrix tmp = view;
  apply_multiplier(tmp, multiplier);
  column = tmp.col(0);
}

/// Multiplier m(-w) in FFT order; the transpose of a spectral multiplier.
inline ComplexVector reversed_frequency(const ComplexVector& m) {
  const int n = static_cast<int>(m.size());
  ComplexVector out(n);
  out[0] = m[0];
  for (int k = 1; k < n; ++k) out[k] = m[n - k];
  return out;
}

/// Value 1/dt at the sample nearest `at`, zero elsewhere.
inline SampledField discrete_delta(const TimeGrid& grid, double at = 0.0) {
  SampledField out = SampledField::zeros(grid);
  out.values[grid.index_of(at)] = 1.0 / grid.dt();
  return out;
}

/// Discrete convolution Integral dt' a(t - t') b(t') on the periodic grid.
inline SampledField convolve(const SampledField& a, const SampledField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("convolve: grid mismatch");
  Spectrum fa = forward_fft(a);
  Spectrum fb = forward_fft(b);
  const TimeGrid& g = a.grid;
  Spectrum prod{g, ComplexVector(g.size())};
  for (int k = 0; k < g.size(); ++k) prod.values[k] = kSqrt2Pi * fa.values[k] * fb.values[k];
  return inverse_fft(prod);
}

/// Four-block Green function G_ij(t, t') sampled as kernels (identity = delta/dt).
struct GreenMatrix {
  TimeGrid grid;
  ComplexMatrix ii, is, si, ss;
  double z = 0.0;

  static GreenMatrix identity(const TimeGrid& g) {
    const int n = g.size();
    GreenMatrix out;
    out.grid = g;
    out.ii = ComplexMatrix::Identity(n, n) / g.dt();
    out.ss = out.ii;
    out.is = ComplexMatrix::Zero(n, n);
    out.si = ComplexMatrix::Zero(n, n);
    return out;
  }

  /// The dt-weighted 2N x 2N operator [[ii, is], [si, ss]] * dt.
  ComplexMatrix full_operator() const {
    const int n = grid.size();
    ComplexMatrix out(2 * n, 2 * n);
    out << ii, is, si, ss;
    return out * grid.dt();
  }
};

struct BandwidthRequirement {
  std::string name;
  double bandwidth;  // rad/ps
};

struct GridReport {
  bool ok = true;
  std::vector<std::string> messages;
};

/// The Nyquist frequency must exceed 4x the widest named bandwidth.
inline GridReport check_bandwidths(const TimeGrid& grid, const std::vector<BandwidthRequirement>& reqs) {
  GridReport report;
  for (const auto& r : reqs) {
    if (grid.nyquist() <= 4.0 * r.bandwidth) {
      report.ok = false;
      report.messages.push_back("grid Nyquist " + std::to_string(grid.nyquist()) +
                                " rad/ps does not exceed 4x " + r.name + " bandwidth " +
                                std::to_string(r.bandwidth) + " rad/ps");
    }
  }
  return report;
}

/// Fraction of the field energy within the outer 10% of the window on each side.
inline double edge_energy_fraction(const SampledField& field) {
  const int n = field.grid.size();
  const int edge = std::max(1, n / 10);
  const double total = field.values.squaredNorm();
  if (total == 0.0) return 0.0;
  const double outer = field.values.head(edge).squaredNorm() + field.values.tail(edge).squaredNorm();
  return outer / total;
}

}  // namespace fwmbs
