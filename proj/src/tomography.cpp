#include "kkd/tomography.hpp"

#include <algorithm>
#include <cmath>

#include "kkd/errors.hpp"
#include "kkd/rng.hpp"

namespace kkd {

namespace {

RealSignal density_of(const SinglePhotonState& state) {
  RealSignal p = RealSignal::zeros(state.psi.grid());
  for (std::size_t k = 0; k < p.size(); ++k) p.v[k] = std::norm(state.psi[k]);
  return p;
}

}  // namespace

ClickSample sample_clicks_from_density(const RealSignal& p, std::size_t n_clicks,
                                       std::uint64_t rng_seed) {
  if (n_clicks < 1) throw std::invalid_argument("sample_clicks: need n_clicks >= 1");
  const TimeGrid& g = p.grid;
  std::vector<double> cdf(g.n);
  double acc = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    if (p.v[k] < 0.0) throw std::invalid_argument("sample_clicks: negative density");
    acc += p.v[k];
    cdf[k] = acc;
  }
  if (!(acc > 0.0)) throw std::invalid_argument("sample_clicks: zero density");
  for (auto& c : cdf) c /= acc;

  std::mt19937_64 rng = shot_rng(rng_seed, 0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ClickSample out;
  out.times.resize(n_clicks);
  for (std::size_t i = 0; i < n_clicks; ++i) {
    const double u = uni(rng);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    const double jitter = uni(rng);
    out.times[i] = g.t_start + (static_cast<double>(k) + jitter) * g.dt;
  }
  return out;
}

ClickSample sample_clicks(const SinglePhotonState& state, std::size_t n_clicks,
                          std::uint64_t rng_seed) {
  return sample_clicks_from_density(density_of(state), n_clicks, rng_seed);
}

DensityEstimate estimate_density(const ClickSample& clicks, const TimeGrid& grid,
                                 double smoothing_bandwidth) {
  if (clicks.n_clicks() == 0) throw std::invalid_argument("estimate_density: empty sample");
  if (clicks.n_clicks() < 1000)
    throw PreconditionError("estimate_density: need at least 1000 clicks");
  DensityEstimate est;
  est.grid = grid;
  est.bin_counts.assign(grid.n, 0);
  for (double t : clicks.times) {
    const double kf = (t - grid.t_start) / grid.dt;
    if (kf < 0.0 || kf >= static_cast<double>(grid.n))
      throw std::invalid_argument("estimate_density: click outside grid");
    ++est.bin_counts[static_cast<std::size_t>(kf)];
  }

  const double n = static_cast<double>(clicks.n_clicks());
  std::vector<double> p(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k)
    p[k] = static_cast<double>(est.bin_counts[k]) / (n * grid.dt);

  if (smoothing_bandwidth > 0.0) {
    const double sigma_bins = smoothing_bandwidth / grid.dt;
    const long half = std::max(1L, std::lround(4.0 * sigma_bins));
    std::vector<double> kern(2 * half + 1);
    double ksum = 0.0;
    for (long j = -half; j <= half; ++j) {
      const double u = static_cast<double>(j) / sigma_bins;
      kern[j + half] = std::exp(-0.5 * u * u);
      ksum += kern[j + half];
    }
    for (auto& x : kern) x /= ksum;
    std::vector<double> sm(grid.n, 0.0);
    for (std::size_t k = 0; k < grid.n; ++k) {
      double a = 0.0;
      for (long j = -half; j <= half; ++j) {
        const long idx = static_cast<long>(k) + j;
        if (idx >= 0 && idx < static_cast<long>(grid.n)) a += kern[j + half] * p[idx];
      }
      sm[k] = a;
    }
    p = std::move(sm);
    // edge truncation loses a little mass
    double mass = 0.0;
    for (double x : p) mass += x;
    mass *= grid.dt;
    for (auto& x : p) x /= mass;
  }

  est.floor = 1.0 / (10.0 * n * grid.duration());
  for (auto& x : p) x = std::max(x, est.floor);
  // the clamp adds at most 1/(10 n) of mass; renormalize it away
  double mass = 0.0;
  for (double x : p) mass += x;
  mass *= grid.dt;
  for (auto& x : p) x /= mass;
  est.p_hat = RealSignal(grid, std::move(p));
  return est;
}

DensityEstimate density_from_signal(const RealSignal& p, std::size_t nominal_clicks) {
  DensityEstimate est;
  est.grid = p.grid;
  est.bin_counts.assign(p.grid.n, 0);
  double mass = 0.0;
  for (double x : p.v) {
    if (x < 0.0) throw std::invalid_argument("density_from_signal: negative density");
    mass += x;
  }
  mass *= p.grid.dt;
  if (!(mass > 0.0)) throw std::invalid_argument("density_from_signal: zero density");
  est.floor = 1.0 / (10.0 * static_cast<double>(std::max<std::size_t>(nominal_clicks, 1)) *
                     p.grid.duration());
  std::vector<double> v(p.v);
  for (auto& x : v) x = std::max(x / mass, est.floor);
  est.p_hat = RealSignal(p.grid, std::move(v));
  return est;
}

RealSignal phase_psd(const RealSignal& phase) {
  ComplexSignal c(phase.grid, [&] {
    std::vector<cplx> s(phase.size());
    for (std::size_t k = 0; k < phase.size(); ++k) s[k] = cplx(phase.v[k], 0.0);
    return s;
  }());
  SpectralSignal spec = forward_transform(c);
  RealSignal psd = RealSignal::zeros(phase.grid);
  for (std::size_t j = 0; j < spec.size(); ++j) psd.v[j] = std::norm(spec[j]);
  return psd;
}

ReconstructionReport reconstruct_wavefunction(const DensityEstimate& est,
                                              const SinglePhotonState& state,
                                              const AnalysisWindow& window) {
  const TimeGrid& g = est.grid;
  if (!(g == state.psi.grid()))
    throw std::invalid_argument("reconstruct_wavefunction: grid mismatch");
  const double width = window.t_hi - window.t_lo;
  const double slack = 1e-9 * g.duration();
  if (!(width > 0.0)) throw std::invalid_argument("reconstruct_wavefunction: empty window");
  if (width + slack < 5.0 * state.chi_duration ||
      width - slack > 0.5 * state.envelope_duration)
    throw PreconditionError(
        "reconstruct_wavefunction: window must span [5 x chi duration, 0.5 x envelope duration]");

  long k_lo = static_cast<long>(std::ceil((window.t_lo - g.t_start) / g.dt));
  long k_hi = static_cast<long>(std::floor((window.t_hi - g.t_start) / g.dt));
  k_lo = std::max(k_lo, 0L);
  k_hi = std::min(k_hi, static_cast<long>(g.n) - 1);
  if (k_hi <= k_lo) throw std::invalid_argument("reconstruct_wavefunction: window outside grid");
  const std::size_t lo = static_cast<std::size_t>(k_lo);
  const std::size_t nw = static_cast<std::size_t>(k_hi - k_lo) + 1;

  ReconstructionReport rep;
  for (std::size_t k = lo; k < lo + nw; ++k) rep.clicks_in_window += est.bin_counts[k];
  const bool injected = est.bin_counts == std::vector<std::uint64_t>(g.n, 0);
  if (!injected && rep.clicks_in_window == 0)
    throw PreconditionError("reconstruct_wavefunction: no clicks in the analysis window");

  // Phase from the windowed log-density; the window is its own integration
  // domain (the envelope is flat there, so ln p decays to a constant at the
  // window edges as the FFT Hilbert requires). The density is normalized by
  // the declared LO profile |A alpha_env|^2 first: the envelope is known, and
  // its residual log-dip across the window would otherwise leave a spurious
  // slow phase component.
  TimeGrid wgrid(g.time(lo), g.dt, nw);
  RealSignal logp(wgrid, [&] {
    std::vector<double> v(nw);
    for (std::size_t k = 0; k < nw; ++k) {
      const double env2 = std::norm(state.lo_amplitude * state.alpha_env[lo + k]);
      v[k] = std::log(est.p_hat.v[lo + k]) - std::log(std::max(env2, est.floor));
    }
    return v;
  }());
  RealSignal phi_w = hilbert_kk_fft(logp);

  rep.phi_hat = RealSignal::zeros(g);
  for (std::size_t k = 0; k < nw; ++k) rep.phi_hat.v[lo + k] = phi_w.v[k];

  std::vector<cplx> psi_t(g.n);
  for (std::size_t k = 0; k < g.n; ++k)
    psi_t[k] = std::polar(std::sqrt(est.p_hat.v[k]), rep.phi_hat.v[k]);
  rep.psi_tilde = ComplexSignal(g, std::move(psi_t));

  std::vector<cplx> chi_t(g.n, cplx(0.0, 0.0));
  for (std::size_t k = lo; k < lo + nw; ++k)
    chi_t[k] = rep.psi_tilde[k] - state.lo_amplitude * state.alpha_env[k];
  rep.chi_tilde = ComplexSignal(g, std::move(chi_t));

  // F = |int conj(psi_tilde) psi dt|^2; both factors are unit-normalized.
  const cplx ov_total = inner_product(rep.psi_tilde, state.psi);
  rep.fidelity_total = std::min(1.0, std::norm(ov_total));

  cplx ov_chi(0.0, 0.0);
  for (std::size_t k = lo; k < lo + nw; ++k) ov_chi += std::conj(rep.chi_tilde[k]) * state.chi[k];
  ov_chi *= g.dt;
  const double chi_norm = state.chi.power();
  rep.fidelity_chi = std::min(1.0, std::norm(ov_chi) / (chi_norm * chi_norm));

  // PSDs on the window, both normalized by the true-phase PSD peak.
  RealSignal phi_true_w(wgrid, [&] {
    std::vector<double> v(nw);
    for (std::size_t k = 0; k < nw; ++k) v[k] = std::arg(state.psi[lo + k]);
    return v;
  }());
  rep.psd_true = phase_psd(phi_true_w);
  rep.psd_rec = phase_psd(phi_w);
  double peak = 0.0;
  for (double x : rep.psd_true.v) peak = std::max(peak, x);
  if (peak > 0.0) {
    for (auto& x : rep.psd_true.v) x /= peak;
    for (auto& x : rep.psd_rec.v) x /= peak;
  }

  // Noise floor: median excess of the reconstructed PSD over the true one,
  // taken on the off-signal part of the display band (0.25..3x the true-phase
  // peak frequency, true PSD below 1e-4 of its peak). The excess form makes
  // the metric collapse for a noiseless injection; far outside the band the
  // density smoothing rolls everything off and medians turn meaningless.
  double w_peak = 0.0, p_peak = 0.0;
  for (std::size_t j = 0; j < nw; ++j) {
    if (rep.psd_true.v[j] > p_peak) {
      p_peak = rep.psd_true.v[j];
      w_peak = std::abs(wgrid.frequency(j));
    }
  }
  std::vector<double> off;
  for (std::size_t j = 0; j < nw; ++j) {
    const double w = std::abs(wgrid.frequency(j));
    if (rep.psd_true.v[j] < 1e-4 && w >= 0.25 * w_peak && w <= 3.0 * w_peak)
      off.push_back(std::max(rep.psd_rec.v[j] - rep.psd_true.v[j], 0.0));
  }
  if (!off.empty()) {
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    rep.noise_floor = off[off.size() / 2];
  }
  return rep;
}

}  // namespace kkd
