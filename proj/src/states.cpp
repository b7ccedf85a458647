#include "kkd/states.hpp"

#include <cmath>

namespace kkd {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSsbTol = 1e-3;
}  // namespace

CoherentField::CoherentField(ComplexSignal psi) : psi_(std::move(psi)) {}

CoherentField::CoherentField(ComplexSignal psi, FieldDecomposition dec)
    : psi_(std::move(psi)), dec_(std::move(dec)) {
  const auto& d = *dec_;
  if (!(d.chi.grid() == psi_.grid()))
    throw std::invalid_argument("CoherentField: chi grid mismatch");
  if (!(d.chi.max_abs() < d.lo_amplitude))
    throw std::invalid_argument("CoherentField: decomposition requires max|chi| < A");
  if (!is_single_sideband(d.chi, kSsbTol))
    throw std::invalid_argument("CoherentField: chi must be single-sideband");
}

CoherentField CoherentField::from_symbol(cplx symbol, const ComplexSignal& mode) {
  std::vector<cplx> s(mode.size());
  for (std::size_t k = 0; k < mode.size(); ++k) s[k] = symbol * mode[k];
  return CoherentField(ComplexSignal(mode.grid(), std::move(s)));
}

CoherentField CoherentField::displaced(double lo_amplitude, const ComplexSignal& chi) {
  std::vector<cplx> s(chi.size());
  for (std::size_t k = 0; k < chi.size(); ++k) s[k] = cplx(lo_amplitude, 0.0) + chi[k];
  FieldDecomposition dec{lo_amplitude, chi};
  return CoherentField(ComplexSignal(chi.grid(), std::move(s)), std::move(dec));
}

FockVector::FockVector(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
  if (c_.size() < 2) throw std::invalid_argument("FockVector: truncation must be >= 1");
  double norm2 = 0.0;
  for (const auto& z : c_) norm2 += std::norm(z);
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw std::invalid_argument("FockVector: coefficients must be normalized");
  if (std::norm(c_.back()) >= 1e-8)
    throw std::invalid_argument("FockVector: tail mass too large, increase truncation");
}

double FockVector::mean_photon_number() const {
  double acc = 0.0;
  for (std::size_t n = 0; n < c_.size(); ++n) acc += static_cast<double>(n) * std::norm(c_[n]);
  return acc;
}

SinglePhotonState SinglePhotonState::make(double lo_amplitude, const ComplexSignal& alpha_env,
                                          double envelope_duration, const ComplexSignal& chi,
                                          double chi_duration) {
  if (!(alpha_env.grid() == chi.grid()))
    throw std::invalid_argument("SinglePhotonState: grid mismatch");
  if (!(envelope_duration >= 20.0 * chi_duration))
    throw std::invalid_argument("SinglePhotonState: envelope must last >= 20x chi duration");
  if (!is_single_sideband(chi, kSsbTol))
    throw std::invalid_argument("SinglePhotonState: chi must be single-sideband");

  const TimeGrid& g = alpha_env.grid();
  std::vector<cplx> raw(g.n);
  double env_peak = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    raw[k] = lo_amplitude * alpha_env[k] + chi[k];
    env_peak = std::max(env_peak, lo_amplitude * std::abs(alpha_env[k]));
  }
  if (!(env_peak >= 3.0 * chi.max_abs()))
    throw std::invalid_argument("SinglePhotonState: need max|A alpha_env| >= 3 max|chi|");

  ComplexSignal psi_raw(g, std::move(raw));
  const double norm = std::sqrt(psi_raw.power());
  if (!(norm > 0.0)) throw std::invalid_argument("SinglePhotonState: zero wavefunction");

  SinglePhotonState st;
  std::vector<cplx> ps(g.n), env(g.n), ch(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    ps[k] = psi_raw[k] / norm;
    env[k] = alpha_env[k];
    ch[k] = chi[k] / norm;
  }
  st.psi = ComplexSignal(g, std::move(ps));
  st.alpha_env = ComplexSignal(g, std::move(env));
  st.chi = ComplexSignal(g, std::move(ch));
  st.lo_amplitude = lo_amplitude / norm;
  st.chi_duration = chi_duration;
  st.envelope_duration = envelope_duration;

  if (std::abs(st.psi.power() - 1.0) > 1e-8)
    throw std::logic_error("SinglePhotonState: normalization failed");
  return st;
}

CoherentMixture::CoherentMixture(std::vector<Component> comps) : components(std::move(comps)) {
  if (components.empty()) throw std::invalid_argument("CoherentMixture: no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0 && c.weight <= 1.0))
      throw std::invalid_argument("CoherentMixture: weights must lie in (0,1]");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("CoherentMixture: weights must sum to 1");
}

CoherentMixture CoherentMixture::pure(CoherentField field) {
  std::vector<Component> c;
  c.push_back({1.0, std::move(field)});
  return CoherentMixture(std::move(c));
}

namespace {

ComplexSignal gaussian_spectrum_signal(const TimeGrid& grid, double w0, double sigma_w) {
  if (!(w0 >= 4.0 * sigma_w))
    throw std::invalid_argument("ssb gaussian: need center_freq >= 4*spectral_width");
  if (!(sigma_w >= 10.0 * grid.freq_spacing()))
    throw std::invalid_argument("ssb gaussian: spectral_width not resolvable on grid");
  std::vector<cplx> spec(grid.n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double w = grid.frequency(j);
    const double u = (w - w0) / sigma_w;
    spec[j] = cplx(std::exp(-0.5 * u * u), 0.0);
  }
  return inverse_transform(SpectralSignal(grid, std::move(spec)));
}

}  // namespace

ComplexSignal make_ssb_gaussian_chi(const TimeGrid& grid, double center_freq,
                                    double spectral_width, double peak_amplitude) {
  if (peak_amplitude == 0.0) return ComplexSignal::zeros(grid);
  ComplexSignal chi = gaussian_spectrum_signal(grid, center_freq, spectral_width);
  const double peak = chi.max_abs();
  const double scale = peak_amplitude / peak;
  for (std::size_t k = 0; k < chi.size(); ++k) chi[k] *= scale;
  return chi;
}

ComplexSignal make_ssb_gaussian_mode(const TimeGrid& grid, double center_freq,
                                     double spectral_width) {
  ComplexSignal f = gaussian_spectrum_signal(grid, center_freq, spectral_width);
  const double scale = 1.0 / std::sqrt(f.power());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= scale;
  return f;
}

ComplexSignal make_flat_top_envelope(const TimeGrid& grid, double center, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("flat top: duration must be > 0");
  std::vector<cplx> s(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double u = 2.0 * (grid.time(k) - center) / duration;
    const double u2 = u * u;
    const double u8 = u2 * u2 * u2 * u2;
    s[k] = cplx(std::exp(-u8), 0.0);
  }
  return ComplexSignal(grid, std::move(s));
}

FockVector make_phase_eigenstate(cplx z, std::size_t truncation) {
  const double mag = std::abs(z);
  if (!(mag < 1.0)) throw std::invalid_argument("phase eigenstate: |z| must be < 1");
  if (std::pow(mag, 2.0 * static_cast<double>(truncation)) >= 1e-10)
    throw std::invalid_argument("phase eigenstate: truncation too small for |z|");
  std::vector<cplx> c(truncation + 1);
  const double pref = std::sqrt(1.0 - mag * mag);
  cplx zn(1.0, 0.0);
  for (std::size_t n = 0; n <= truncation; ++n) {
    c[n] = pref * zn;
    zn *= z;
  }
  // renormalize the truncated tail so the invariant holds exactly
  double norm2 = 0.0;
  for (const auto& x : c) norm2 += std::norm(x);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : c) x *= inv;
  return FockVector(std::move(c));
}

FockVector make_cat_state(cplx alpha, std::size_t truncation) {
  const double mag = std::abs(alpha);
  const double needed = mag * mag + 6.0 * mag + 10.0;
  if (static_cast<double>(truncation) < needed)
    throw std::invalid_argument("cat state: truncation must be >= |a|^2 + 6|a| + 10");
  std::vector<cplx> c(truncation + 1, cplx(0.0, 0.0));
  cplx an(1.0, 0.0);  // alpha^n / sqrt(n!)
  double norm2 = 0.0;
  for (std::size_t n = 0; n <= truncation; ++n) {
    if (n > 0) an *= alpha / std::sqrt(static_cast<double>(n));
    if (n % 2 == 0) {
      c[n] = 2.0 * an;
      norm2 += std::norm(c[n]);
    }
  }
  if (!(norm2 > 0.0)) throw std::invalid_argument("cat state: zero norm");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : c) x *= inv;
  return FockVector(std::move(c));
}

NumberPhase number_statistics_phase(const FockVector& v) {
  NumberPhase out;
  cplx S(0.0, 0.0);
  const auto c = v.coeffs();
  for (std::size_t n = 0; n + 1 < c.size(); ++n)
    S += c[n] * std::conj(c[n + 1]) * std::sqrt(static_cast<double>(n + 1));
  out.S = S;
  out.defined = std::abs(S) >= 1e-14;
  return out;
}

InterferenceResult interference_term(const FockVector& v, cplx lo_symbol, const ComplexSignal& f,
                                     const ComplexSignal& g, const BeamsplitterParams& bs,
                                     double t) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("interference_term: grid mismatch");
  const TimeGrid& gr = f.grid();
  const double kf = (t - gr.t_start) / gr.dt;
  const long k = std::lround(kf);
  if (k < 0 || k >= static_cast<long>(gr.n) || std::abs(kf - static_cast<double>(k)) > 1e-6)
    throw std::invalid_argument("interference_term: t not on grid");

  const cplx ft = f[static_cast<std::size_t>(k)];
  const cplx gt = g[static_cast<std::size_t>(k)];
  const NumberPhase np = number_statistics_phase(v);

  InterferenceResult res;
  res.S = np.S;
  // <b'(t) a(t)> = f(t) g*(t) A* S*: the conjugate of S pairs with A* here
  res.value = bs.r * bs.t * ft * std::conj(gt) * std::conj(lo_symbol) * std::conj(np.S);
  res.total_phase = std::arg(lo_symbol * ft * np.S);
  res.direct_mean = bs.t * bs.t * std::norm(ft) * v.mean_photon_number() +
                    bs.r * bs.r * std::norm(lo_symbol) * std::norm(gt) + 2.0 * res.value.real();
  return res;
}

}  // namespace kkd
