#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kkd {

using cplx = std::complex<double>;

/// Uniform sampling grid. Time samples t_k = t_start + k*dt; the conjugate
/// frequency grid has spacing dw = 2*pi/(n*dt) and spans [-pi/dt, pi/dt) in
/// FFT (wrapped) bin order.
struct TimeGrid {
  double t_start = 0.0;
  double dt = 1.0;
  std::size_t n = 2;

  TimeGrid() = default;
  TimeGrid(double t_start_, double dt_, std::size_t n_);

  double duration() const { return dt * static_cast<double>(n); }
  double time(std::size_t k) const { return t_start + dt * static_cast<double>(k); }
  double freq_spacing() const { return 2.0 * 3.14159265358979323846 / duration(); }

  /// Angular frequency of spectral bin j (FFT order: bins past n/2 wrap negative).
  double frequency(std::size_t j) const;

  /// Index of the spectral bin whose frequency is w; w must sit on the grid.
  std::size_t frequency_bin(double w) const;

  bool operator==(const TimeGrid& o) const {
    return t_start == o.t_start && dt == o.dt && n == o.n;
  }
};

/// Complex field envelope sampled on a TimeGrid. |s(t)|^2 is an instantaneous
/// photon flux (photons per second); amplitudes themselves are dimensionless.
class ComplexSignal {
 public:
  ComplexSignal() = default;
  ComplexSignal(TimeGrid grid, std::vector<cplx> samples);
  static ComplexSignal zeros(TimeGrid grid);

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return s_.size(); }
  std::span<const cplx> samples() const { return s_; }
  std::span<cplx> samples() { return s_; }
  const cplx& operator[](std::size_t k) const { return s_[k]; }
  cplx& operator[](std::size_t k) { return s_[k]; }

  /// Integral of |s|^2 dt (Riemann sum).
  double power() const;
  double max_abs() const;

 private:
  TimeGrid grid_;
  std::vector<cplx> s_;
};

/// Real-valued signal on a TimeGrid (intensities, phases, photocurrents).
struct RealSignal {
  TimeGrid grid;
  std::vector<double> v;

  RealSignal() = default;
  RealSignal(TimeGrid g, std::vector<double> vals);
  static RealSignal zeros(TimeGrid g) { return RealSignal(g, std::vector<double>(g.n, 0.0)); }

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
};

/// Spectral amplitudes on the conjugate grid, FFT bin order.
class SpectralSignal {
 public:
  SpectralSignal() = default;
  SpectralSignal(TimeGrid grid, std::vector<cplx> samples);

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return s_.size(); }
  std::span<const cplx> samples() const { return s_; }
  std::span<cplx> samples() { return s_; }
  const cplx& operator[](std::size_t j) const { return s_[j]; }
  cplx& operator[](std::size_t j) { return s_[j]; }

 private:
  TimeGrid grid_;
  std::vector<cplx> s_;
};

/// F(a)(w) = integral a(t) e^{+iwt} dt, discretized as dt * sum_k a_k e^{+i w t_k}.
/// Note the + sign in the forward kernel; e^{-i w0 t} transforms to a line at +w0.
SpectralSignal forward_transform(const ComplexSignal& sig);

/// a(t) = (1/2pi) integral F(w) e^{-iwt} dw; exact inverse of forward_transform.
ComplexSignal inverse_transform(const SpectralSignal& spec);

/// <f|g> = integral conj(f(t)) g(t) dt. Throws on grid mismatch.
cplx inner_product(const ComplexSignal& f, const ComplexSignal& g);

/// True iff the energy at negative frequencies is at most tol times the total.
/// The zero signal counts as single-sideband.
bool is_single_sideband(const ComplexSignal& sig, double tol);

/// Pointwise complex conjugate; the spectrum mirrors to negative frequencies.
ComplexSignal conjugate_mode(const ComplexSignal& f);

struct EncodedSignal {
  ComplexSignal signal;
  bool overlap_warning = false;  // pulses overlap non-orthogonally
};

/// a(t) = sum_k symbols[k] * g(t - k*T_S). symbol_period must be an integer
/// number of grid steps and all shifted pulses must fit in the grid.
EncodedSignal encode_symbols(const std::vector<cplx>& symbols, const ComplexSignal& pulse,
                             double symbol_period);

/// Matched filter recovery: alpha_l = <g_l|a>.
std::vector<cplx> decode_symbols(const ComplexSignal& a, const ComplexSignal& pulse,
                                 double symbol_period, std::size_t n_symbols);

}  // namespace kkd
