#include "kkd/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "kkd/fft.hpp"

namespace kkd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

BeamsplitterParams::BeamsplitterParams(double r_, double t_) : r(r_), t(t_) {
  if (r < 0.0 || r > 1.0 || t < 0.0 || t > 1.0)
    throw std::invalid_argument("BeamsplitterParams: coefficients must be in [0,1]");
  if (std::abs(r * r + t * t - 1.0) > 1e-12)
    throw std::invalid_argument("BeamsplitterParams: r^2 + t^2 must equal 1");
}

BeamsplitterParams BeamsplitterParams::from_reflectivity(double r_) {
  if (r_ < 0.0 || r_ > 1.0)
    throw std::invalid_argument("BeamsplitterParams: r must be in [0,1]");
  return BeamsplitterParams(r_, std::sqrt(std::max(0.0, 1.0 - r_ * r_)));
}

KKRetrievalConfig KKRetrievalConfig::make(PhaseExpansion exp, const BeamsplitterParams& bs,
                                          double A, double theta) {
  KKRetrievalConfig cfg;
  cfg.expansion = exp;
  cfg.lo_amplitude = A;
  cfg.lo_phase = theta;
  cfg.intensity_floor = default_floor(bs, A);
  cfg.validate();
  return cfg;
}

void KKRetrievalConfig::validate() const {
  if (!(lo_amplitude > 0.0)) throw std::invalid_argument("KKRetrievalConfig: A must be > 0");
  if (!(intensity_floor > 0.0))
    throw std::invalid_argument("KKRetrievalConfig: intensity floor must be > 0");
}

namespace {

// Both Hilbert paths remove the grid mean first: the kernel is odd, so the
// principal value of a constant vanishes on the whole line, but a finite
// window would otherwise leave a logarithmic drift off center.
std::vector<double> demeaned(const RealSignal& f) {
  double mean = 0.0;
  for (double x : f.v) mean += x;
  mean /= static_cast<double>(f.size());
  std::vector<double> g(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) g[k] = f.v[k] - mean;
  return g;
}

}  // namespace

RealSignal serial::hilbert_kk_direct(const RealSignal& f) {
  const std::size_t n = f.size();
  const std::vector<double> g = demeaned(f);
  RealSignal h = RealSignal::zeros(f.grid);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    // opposite parity only: midpoint rule with 2dt cells around the pole
    for (std::size_t j = (k % 2 == 0) ? 1 : 0; j < n; j += 2)
      acc += g[j] / (static_cast<double>(j) - static_cast<double>(k));
    h.v[k] = acc / kPi;
  }
  return h;
}

RealSignal hilbert_kk_direct(const RealSignal& f) {
  const std::size_t n = f.size();
  const std::vector<double> g = demeaned(f);
  RealSignal h = RealSignal::zeros(f.grid);
  const double* gv = g.data();
  double* hv = h.v.data();
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t j = (k % 2 == 0) ? 1 : 0; j < n; j += 2)
      acc += gv[j] / (static_cast<double>(j) - static_cast<double>(k));
    hv[k] = acc / kPi;
  }
  return h;
}

RealSignal hilbert_kk_fft(const RealSignal& f) {
  const std::size_t n = f.size();
  const std::size_t N = 4 * n;

  double mean = 0.0;
  for (double x : f.v) mean += x;
  mean /= static_cast<double>(n);

  std::vector<cplx> buf(N, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) buf[k] = cplx(f.v[k] - mean, 0.0);

  fft::backward(buf.data(), buf.data(), N);  // matches the +iwt forward kernel

  // -(i/2) sign(w); the w = 0 bin (PV of a constant is zero) and the Nyquist
  // bin are zeroed.
  buf[0] = cplx(0.0, 0.0);
  buf[N / 2] = cplx(0.0, 0.0);
  const cplx mneg(0.0, 0.5), mpos(0.0, -0.5);
  for (std::size_t j = 1; j < N / 2; ++j) buf[j] *= mpos;
  for (std::size_t j = N / 2 + 1; j < N; ++j) buf[j] *= mneg;

  fft::forward(buf.data(), buf.data(), N);

  RealSignal h = RealSignal::zeros(f.grid);
  const double scale = 1.0 / static_cast<double>(N);
  for (std::size_t k = 0; k < n; ++k) h.v[k] = buf[k].real() * scale;
  return h;
}

MinPhaseReport min_phase_holds(const ComplexSignal& a, const BeamsplitterParams& bs, double A) {
  if (A < 0.0) throw std::invalid_argument("min_phase_holds: A must be >= 0");
  double peak = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) peak = std::max(peak, bs.t * std::abs(a[k]));
  MinPhaseReport rep;
  rep.margin = bs.r * A - peak;
  rep.holds = peak < bs.r * A;
  return rep;
}

PhaseRetrieval kk_phase_from_intensity(const RealSignal& I, const KKRetrievalConfig& cfg,
                                       const BeamsplitterParams& bs) {
  cfg.validate();
  const double ref = bs.r * bs.r * cfg.lo_amplitude * cfg.lo_amplitude;
  RealSignal x = RealSignal::zeros(I.grid);
  PhaseRetrieval out;
  if (cfg.expansion == PhaseExpansion::full_log) {
    for (std::size_t k = 0; k < I.size(); ++k) {
      double v = I.v[k];
      if (v <= cfg.intensity_floor) {
        v = cfg.intensity_floor;
        ++out.clamp_count;
      }
      x.v[k] = std::log(v);
    }
  } else {
    for (std::size_t k = 0; k < I.size(); ++k) x.v[k] = (I.v[k] - ref) / ref;
  }
  out.phase = hilbert_kk_fft(x);
  return out;
}

ComplexSignal kk_field_reconstruct(const RealSignal& I, const RealSignal& phase,
                                   const KKRetrievalConfig& cfg, const BeamsplitterParams& bs) {
  if (!(I.grid == phase.grid))
    throw std::invalid_argument("kk_field_reconstruct: grid mismatch");
  if (bs.t <= 0.0) throw std::invalid_argument("kk_field_reconstruct: t must be > 0");
  const double rA = bs.r * cfg.lo_amplitude;
  const cplx rot = std::polar(1.0, cfg.lo_phase);
  std::vector<cplx> out(I.size());
  for (std::size_t k = 0; k < I.size(); ++k) {
    const double amp = std::sqrt(std::max(0.0, I.v[k]));
    out[k] = rot * (std::polar(amp, phase.v[k]) - cplx(rA, 0.0)) / bs.t;
  }
  return ComplexSignal(I.grid, std::move(out));
}

std::pair<double, double> kk_quadratures(const ComplexSignal& a_rec, const ComplexSignal& f) {
  if (!is_single_sideband(f, 1e-3))
    throw std::invalid_argument("kk_quadratures: analysis mode is not single-sideband");
  const cplx proj = inner_product(f, a_rec);
  return {proj.real(), proj.imag()};
}

}  // namespace kkd
