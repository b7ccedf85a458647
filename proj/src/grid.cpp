#include "kkd/grid.hpp"

#include <algorithm>
#include <cmath>

#include "kkd/fft.hpp"

namespace kkd {

namespace {

void check_finite(const std::vector<cplx>& s) {
  for (const auto& z : s) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("ComplexSignal: non-finite sample");
  }
}
}  // namespace

TimeGrid::TimeGrid(double t_start_, double dt_, std::size_t n_)
    : t_start(t_start_), dt(dt_), n(n_) {
  if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
  if (n < 2) throw std::invalid_argument("TimeGrid: n_samples must be >= 2");
}

double TimeGrid::frequency(std::size_t j) const {
  if (j >= n) throw std::out_of_range("TimeGrid::frequency: bin out of range");
  const double dw = freq_spacing();
  // Bins j >= ceil(n/2) represent negative frequencies; for even n the bin at
  // n/2 maps to -pi/dt so the grid spans [-pi/dt, pi/dt).
  const std::size_t half = (n + 1) / 2;
  if (j < half && !(n % 2 == 0 && j == n / 2)) return dw * static_cast<double>(j);
  return dw * (static_cast<double>(j) - static_cast<double>(n));
}

std::size_t TimeGrid::frequency_bin(double w) const {
  const double dw = freq_spacing();
  double jf = w / dw;
  long j = std::lround(jf);
  if (std::abs(jf - static_cast<double>(j)) > 1e-6)
    throw std::invalid_argument("TimeGrid::frequency_bin: frequency not on grid");
  long m = j % static_cast<long>(n);
  if (m < 0) m += static_cast<long>(n);
  return static_cast<std::size_t>(m);
}

ComplexSignal::ComplexSignal(TimeGrid grid, std::vector<cplx> samples)
    : grid_(grid), s_(std::move(samples)) {
  if (s_.size() != grid_.n)
    throw std::invalid_argument("ComplexSignal: sample count does not match grid");
  check_finite(s_);
}

ComplexSignal ComplexSignal::zeros(TimeGrid grid) {
  return ComplexSignal(grid, std::vector<cplx>(grid.n, cplx(0.0, 0.0)));
}

double ComplexSignal::power() const {
  double acc = 0.0;
  for (const auto& z : s_) acc += std::norm(z);
  return acc * grid_.dt;
}

double ComplexSignal::max_abs() const {
  double m = 0.0;
  for (const auto& z : s_) m = std::max(m, std::abs(z));
  return m;
}

RealSignal::RealSignal(TimeGrid g, std::vector<double> vals) : grid(g), v(std::move(vals)) {
  if (v.size() != grid.n) throw std::invalid_argument("RealSignal: sample count mismatch");
}

SpectralSignal::SpectralSignal(TimeGrid grid, std::vector<cplx> samples)
    : grid_(grid), s_(std::move(samples)) {
  if (s_.size() != grid_.n)
    throw std::invalid_argument("SpectralSignal: sample count does not match grid");
}

SpectralSignal forward_transform(const ComplexSignal& sig) {
  const TimeGrid& g = sig.grid();
  std::vector<cplx> out(g.n);
  fft::backward(sig.samples().data(), out.data(), g.n);
  // S_j = dt e^{+i w_j t_start} sum_k s_k e^{+2pi i jk/n}
  for (std::size_t j = 0; j < g.n; ++j) {
    const double w = g.frequency(j);
    out[j] *= g.dt * std::polar(1.0, w * g.t_start);
  }
  return SpectralSignal(g, std::move(out));
}

ComplexSignal inverse_transform(const SpectralSignal& spec) {
  const TimeGrid& g = spec.grid();
  std::vector<cplx> tmp(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double w = g.frequency(j);
    tmp[j] = spec[j] * std::polar(1.0, -w * g.t_start);
  }
  std::vector<cplx> out(g.n);
  fft::forward(tmp.data(), out.data(), g.n);
  const double scale = 1.0 / (g.dt * static_cast<double>(g.n));
  for (auto& z : out) z *= scale;
  return ComplexSignal(g, std::move(out));
}

cplx inner_product(const ComplexSignal& f, const ComplexSignal& g) {
  if (!(f.grid() == g.grid()))
    throw std::invalid_argument("inner_product: signals live on different grids");
  cplx acc(0.0, 0.0);
  const auto fs = f.samples();
  const auto gs = g.samples();
  for (std::size_t k = 0; k < fs.size(); ++k) acc += std::conj(fs[k]) * gs[k];
  return acc * f.grid().dt;
}

bool is_single_sideband(const ComplexSignal& sig, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("is_single_sideband: tol in (0,1)");
  SpectralSignal spec = forward_transform(sig);
  double total = 0.0, negative = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double e = std::norm(spec[j]);
    total += e;
    if (sig.grid().frequency(j) < 0.0) negative += e;
  }
  if (total == 0.0) return true;
  return negative <= tol * total;
}

ComplexSignal conjugate_mode(const ComplexSignal& f) {
  std::vector<cplx> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = std::conj(f[k]);
  return ComplexSignal(f.grid(), std::move(out));
}

namespace {

std::size_t pulse_shift_bins(const TimeGrid& g, double symbol_period) {
  const double bins = symbol_period / g.dt;
  const long b = std::lround(bins);
  if (b <= 0 || std::abs(bins - static_cast<double>(b)) > 1e-9 * bins)
    throw std::invalid_argument("symbol_period must be a positive integer number of grid steps");
  return static_cast<std::size_t>(b);
}

std::size_t pulse_support(const ComplexSignal& pulse) {
  const double thresh = 1e-12 * pulse.max_abs();
  std::size_t last = 0;
  bool any = false;
  for (std::size_t k = 0; k < pulse.size(); ++k) {
    if (std::abs(pulse[k]) > thresh) {
      last = k;
      any = true;
    }
  }
  return any ? last + 1 : 0;
}

}  // namespace

EncodedSignal encode_symbols(const std::vector<cplx>& symbols, const ComplexSignal& pulse,
                             double symbol_period) {
  const TimeGrid& g = pulse.grid();
  const std::size_t shift = pulse_shift_bins(g, symbol_period);
  const std::size_t support = pulse_support(pulse);
  if (symbols.empty()) throw std::invalid_argument("encode_symbols: no symbols");
  if (support + shift * (symbols.size() - 1) > g.n)
    throw std::invalid_argument("encode_symbols: shifted pulses do not fit in grid");

  EncodedSignal enc{ComplexSignal::zeros(g), false};
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const std::size_t off = k * shift;
    for (std::size_t j = 0; j < pulse.size() && off + j < g.n; ++j)
      enc.signal[off + j] += symbols[k] * pulse[j];
  }

  if (support > shift) {
    // Overlapping neighbours: warn unless the shifted pulses are orthogonal.
    cplx ov(0.0, 0.0);
    for (std::size_t j = shift; j < pulse.size(); ++j) ov += std::conj(pulse[j - shift]) * pulse[j];
    ov *= g.dt;
    const double nrm = pulse.power();
    if (std::abs(ov) > 1e-10 * nrm) enc.overlap_warning = true;
  }
  return enc;
}

std::vector<cplx> decode_symbols(const ComplexSignal& a, const ComplexSignal& pulse,
                                 double symbol_period, std::size_t n_symbols) {
  const TimeGrid& g = a.grid();
  if (!(g == pulse.grid())) throw std::invalid_argument("decode_symbols: grid mismatch");
  const std::size_t shift = pulse_shift_bins(g, symbol_period);
  if (pulse.power() <= 0.0) throw std::invalid_argument("decode_symbols: zero pulse");

  // Matched filter alpha_l = <g_l|a>; recovers the symbols when the shifted
  // pulses are orthonormal.
  std::vector<cplx> out(n_symbols);
  for (std::size_t k = 0; k < n_symbols; ++k) {
    const std::size_t off = k * shift;
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < pulse.size() && off + j < g.n; ++j)
      acc += std::conj(pulse[j]) * a[off + j];
    out[k] = acc * g.dt;
  }
  return out;
}

}  // namespace kkd
