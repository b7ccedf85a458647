#include "kkd/detectors.hpp"

#include <cmath>
#include <limits>

#include "kkd/errors.hpp"
#include "kkd/rng.hpp"

namespace kkd {

namespace {

constexpr double kSsbTol = 1e-3;

void poisson_counts(const ComplexSignal& envelope, double dt, std::mt19937_64& rng,
                    std::vector<double>& counts) {
  counts.resize(envelope.size());
  for (std::size_t k = 0; k < envelope.size(); ++k) {
    const double lambda = std::norm(envelope[k]) * dt;
    if (lambda <= 0.0) {
      counts[k] = 0.0;
      continue;
    }
    std::poisson_distribution<long long> dist(lambda);
    counts[k] = static_cast<double>(dist(rng));
  }
}

std::vector<double> convolve_taps(const std::vector<double>& x, const std::vector<double>& taps) {
  const std::size_t n = x.size();
  const std::size_t m = taps.size();
  const long half = static_cast<long>(m / 2);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const long idx = static_cast<long>(k) + static_cast<long>(j) - half;
      if (idx >= 0 && idx < static_cast<long>(n)) acc += taps[j] * x[idx];
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

PhotodiodeResponse PhotodiodeResponse::with_kernel(std::vector<double> taps) {
  if (taps.empty() || taps.size() % 2 == 0)
    throw std::invalid_argument("PhotodiodeResponse: kernel taps must be odd-length");
  PhotodiodeResponse H;
  H.kind = ResponseKind::kernel;
  H.taps = std::move(taps);
  return H;
}

double PhotodiodeResponse::dc_gain(double dt) const {
  if (kind == ResponseKind::ideal_delta) return 1.0;
  double acc = 0.0;
  for (double t : taps) acc += t;
  return acc * dt;
}

LocalOscillator LocalOscillator::monochromatic(double amplitude, double phase) {
  if (amplitude < 0.0) throw std::invalid_argument("LocalOscillator: amplitude must be >= 0");
  LocalOscillator lo;
  lo.amplitude = amplitude;
  lo.phase = phase;
  return lo;
}

LocalOscillator LocalOscillator::with_mode(double amplitude, ComplexSignal mode, double phase) {
  if (amplitude < 0.0) throw std::invalid_argument("LocalOscillator: amplitude must be >= 0");
  if (std::abs(mode.power() - 1.0) > 1e-6)
    throw std::invalid_argument("LocalOscillator: shaped mode must be normalized");
  LocalOscillator lo;
  lo.amplitude = amplitude;
  lo.phase = phase;
  lo.kind = LoModeKind::shaped;
  lo.shaped = std::move(mode);
  return lo;
}

ComplexSignal LocalOscillator::mode_signal(const TimeGrid& grid) const {
  if (kind == LoModeKind::shaped) {
    if (!(shaped->grid() == grid))
      throw std::invalid_argument("LocalOscillator: mode grid mismatch");
    return *shaped;
  }
  return ComplexSignal(grid, std::vector<cplx>(grid.n, cplx(1.0, 0.0)));
}

DetectionStats stats_from_samples(const std::vector<double>& q, const std::vector<double>& p) {
  const std::size_t n = q.size();
  if (n < 2 || p.size() != n) throw std::invalid_argument("stats_from_samples: need >= 2 shots");
  DetectionStats st;
  st.shots = n;
  double mq = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mq += q[i];
    mp += p[i];
  }
  mq /= static_cast<double>(n);
  mp /= static_cast<double>(n);
  double vq = 0.0, vp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vq += (q[i] - mq) * (q[i] - mq);
    vp += (p[i] - mp) * (p[i] - mp);
  }
  vq /= static_cast<double>(n - 1);
  vp /= static_cast<double>(n - 1);
  st.mean_q = mq;
  st.mean_p = mp;
  st.var_q = vq;
  st.var_p = vp;
  st.snr_q = mq * mq / (4.0 * vq);
  st.snr_p = mp * mp / (4.0 * vp);
  st.stderr_mean_q = std::sqrt(vq / static_cast<double>(n));
  st.stderr_mean_p = std::sqrt(vp / static_cast<double>(n));
  const double rel = std::sqrt(2.0 / static_cast<double>(n - 1));
  st.stderr_var_q = vq * rel;
  st.stderr_var_p = vp * rel;
  return st;
}

ShotNoiseCalibration calibrate(const DetectionStats& vacuum_stats, Receiver receiver) {
  const double v = vacuum_stats.var_q;
  if (!(v > 0.0)) throw std::invalid_argument("calibrate: zero reference variance");
  ShotNoiseCalibration cal;
  cal.reference_variance = v;
  switch (receiver) {
    case Receiver::hd:
      cal.scale = 1.0 / (2.0 * std::sqrt(v));
      break;
    case Receiver::dhd:
      cal.scale = 1.0 / (std::sqrt(2.0) * std::sqrt(v));
      break;
    case Receiver::kk:
      cal.scale = 1.0;  // field units already
      break;
  }
  return cal;
}

DetectionStats apply_calibration(const DetectionStats& raw, const ShotNoiseCalibration& cal) {
  DetectionStats st = raw;
  const double s = cal.scale, s2 = s * s;
  st.mean_q *= s;
  st.mean_p *= s;
  st.var_q *= s2;
  st.var_p *= s2;
  st.stderr_mean_q *= s;
  st.stderr_mean_p *= s;
  st.stderr_var_q *= s2;
  st.stderr_var_p *= s2;
  // snr = mean^2/(4 var) is scale invariant
  return st;
}

namespace {

/// xi(t) = |A| w_H f(t) with w_H the response's effective flat weight.
ComplexSignal make_xi(const LocalOscillator& lo, const PhotodiodeResponse& H,
                      const TimeGrid& grid) {
  ComplexSignal f = lo.mode_signal(grid);
  const double w = lo.amplitude * H.dc_gain(grid.dt);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= w;
  return f;
}

}  // namespace

DetectionStats hd_analytic(cplx alpha, const ComplexSignal& g, const LocalOscillator& lo,
                           const PhotodiodeResponse& H) {
  ComplexSignal xi = make_xi(lo, H, g.grid());
  const double var = xi.power();  // <xi|xi>
  if (!(var > 0.0)) throw std::invalid_argument("hd_analytic: zero-norm xi");
  const cplx overlap = std::polar(1.0, -lo.phase) * alpha * inner_product(xi, g);
  DetectionStats st;
  st.mean_q = 2.0 * overlap.real();
  st.mean_p = 2.0 * overlap.imag();
  st.var_q = var;
  st.var_p = var;
  st.snr_q = st.mean_q * st.mean_q / (4.0 * var);
  st.snr_p = st.mean_p * st.mean_p / (4.0 * var);
  return st;
}

DetectionStats dhd_analytic(cplx alpha, const ComplexSignal& g, const LocalOscillator& lo,
                            const PhotodiodeResponse& H) {
  ComplexSignal xi = make_xi(lo, H, g.grid());
  const double var = xi.power();
  if (!(var > 0.0)) throw std::invalid_argument("dhd_analytic: zero-norm xi");
  const cplx overlap = std::polar(1.0, -lo.phase) * alpha * inner_product(xi, g);
  DetectionStats st;
  st.mean_q = std::sqrt(2.0) * overlap.real();
  st.mean_p = std::sqrt(2.0) * overlap.imag();
  st.var_q = var;
  st.var_p = var;
  st.snr_q = st.mean_q * st.mean_q / (4.0 * var);
  st.snr_p = st.mean_p * st.mean_p / (4.0 * var);
  return st;
}

RealSignal sample_photocurrent(const ComplexSignal& envelope, const PhotodiodeResponse& H,
                               CountModel model, std::uint64_t rng_seed) {
  const TimeGrid& g = envelope.grid();
  std::mt19937_64 rng = shot_rng(rng_seed, 0);
  std::vector<double> counts(g.n);
  if (model == CountModel::poisson) {
    poisson_counts(envelope, g.dt, rng, counts);
  } else {
    double min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.n; ++k)
      min_lambda = std::min(min_lambda, std::norm(envelope[k]) * g.dt);
    if (min_lambda < 100.0)
      throw PreconditionError("sample_photocurrent: gaussian model needs lambda >= 100 per bin");
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < g.n; ++k) {
      const double lambda = std::norm(envelope[k]) * g.dt;
      counts[k] = lambda + std::sqrt(lambda) * unit(rng);
    }
  }
  for (auto& c : counts) c /= g.dt;
  if (H.kind == ResponseKind::kernel) counts = convolve_taps(counts, H.taps);
  return RealSignal(g, std::move(counts));
}

namespace detail {

/// One homodyne shot: Poisson counts on the two diodes, difference current,
/// integrated against the flat response weight. lo_phase selects the measured
/// quadrature.
double hd_single_shot(const ComplexSignal& signal_field, const ComplexSignal& lo_field,
                      const PhotodiodeResponse& H, std::mt19937_64& rng) {
  const TimeGrid& g = signal_field.grid();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double acc = 0.0;
  const double w = H.dc_gain(g.dt);
  for (std::size_t k = 0; k < g.n; ++k) {
    const cplx cp = (signal_field[k] + lo_field[k]) * inv_sqrt2;
    const cplx cm = (signal_field[k] - lo_field[k]) * inv_sqrt2;
    const double lp = std::norm(cp) * g.dt;
    const double lm = std::norm(cm) * g.dt;
    double np = 0.0, nm = 0.0;
    if (lp > 0.0) {
      std::poisson_distribution<long long> dp(lp);
      np = static_cast<double>(dp(rng));
    }
    if (lm > 0.0) {
      std::poisson_distribution<long long> dm(lm);
      nm = static_cast<double>(dm(rng));
    }
    acc += (np - nm);  // (counts/dt) * dt
  }
  return acc * w;
}

void check_strong_lo(const ComplexSignal& lo_field, double dt, double min_counts) {
  double peak = 0.0;
  for (std::size_t k = 0; k < lo_field.size(); ++k)
    peak = std::max(peak, std::norm(lo_field[k]) * dt / 2.0);  // per diode
  if (peak < min_counts)
    throw PreconditionError("hd_monte_carlo: weak LO (peak per-bin counts below threshold)");
}

ComplexSignal scaled_lo_field(const LocalOscillator& lo, const TimeGrid& grid, double phase) {
  ComplexSignal f = lo.mode_signal(grid);
  const cplx amp = std::polar(lo.amplitude, phase);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= amp;
  return f;
}

template <typename ShotFn>
void run_shots(std::uint64_t shots, bool parallel, ShotFn&& fn) {
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::uint64_t s = 0; s < shots; ++s) fn(s);
  } else {
    for (std::uint64_t s = 0; s < shots; ++s) fn(s);
  }
}

MonteCarloResult hd_monte_carlo_impl(const CoherentField& state, const LocalOscillator& lo,
                                     const PhotodiodeResponse& H, const MonteCarloOptions& opt,
                                     bool parallel) {
  if (opt.shots < 100) throw PreconditionError("hd_monte_carlo: shots must be >= 100");
  const TimeGrid& g = state.psi().grid();
  const ComplexSignal lo_field = scaled_lo_field(lo, g, lo.phase);
  check_strong_lo(lo_field, g.dt, opt.strong_lo_min_counts);

  MonteCarloResult res;
  res.samples.q.resize(opt.shots);
  res.samples.p.resize(opt.shots);
  const ComplexSignal lo_field_p = scaled_lo_field(lo, g, lo.phase + 1.5707963267948966);
  run_shots(opt.shots, parallel, [&](std::uint64_t s) {
    std::mt19937_64 rng = shot_rng(opt.seed, s);
    res.samples.q[s] = hd_single_shot(state.psi(), lo_field, H, rng);
    res.samples.p[s] = hd_single_shot(state.psi(), lo_field_p, H, rng);
  });
  res.stats = stats_from_samples(res.samples.q, res.samples.p);
  return res;
}

}  // namespace detail

MonteCarloResult hd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                const PhotodiodeResponse& H, const MonteCarloOptions& opt) {
  return detail::hd_monte_carlo_impl(state, lo, H, opt, true);
}

MonteCarloResult serial::hd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                        const PhotodiodeResponse& H,
                                        const MonteCarloOptions& opt) {
  return detail::hd_monte_carlo_impl(state, lo, H, opt, false);
}

MonteCarloResult dhd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                 const PhotodiodeResponse& H, const MonteCarloOptions& opt) {
  if (opt.shots < 100) throw PreconditionError("dhd_monte_carlo: shots must be >= 100");
  const TimeGrid& g = state.psi().grid();

  // Balanced input split: each arm carries a coherent state psi/sqrt(2); for
  // coherent inputs the two outputs are independent.
  std::vector<cplx> half(g.n);
  for (std::size_t k = 0; k < g.n; ++k) half[k] = state.psi()[k] / std::sqrt(2.0);
  const ComplexSignal arm_field(g, std::move(half));

  const ComplexSignal lo_q = detail::scaled_lo_field(lo, g, lo.phase);
  const ComplexSignal lo_p = detail::scaled_lo_field(lo, g, lo.phase + 1.5707963267948966);
  detail::check_strong_lo(lo_q, g.dt, opt.strong_lo_min_counts);

  MonteCarloResult res;
  res.samples.q.resize(opt.shots);
  res.samples.p.resize(opt.shots);
  detail::run_shots(opt.shots, true, [&](std::uint64_t s) {
    std::mt19937_64 rng = shot_rng(opt.seed, s);
    res.samples.q[s] = detail::hd_single_shot(arm_field, lo_q, H, rng);
    res.samples.p[s] = detail::hd_single_shot(arm_field, lo_p, H, rng);
  });
  res.stats = stats_from_samples(res.samples.q, res.samples.p);
  return res;
}

namespace detail {

KKReceiveResult kk_receive_impl(const CoherentField& state, const LocalOscillator& lo,
                                const BeamsplitterParams& bs, const KKRetrievalConfig& cfg,
                                const ComplexSignal& f, const PhotodiodeResponse& H,
                                const KKReceiveOptions& opt, bool parallel) {
  const TimeGrid& g = state.psi().grid();
  cfg.validate();
  if (lo.kind != LoModeKind::monochromatic)
    throw std::invalid_argument("kk_receive: LO must be monochromatic");
  if (std::abs(cfg.lo_amplitude - lo.amplitude) > 1e-12 * lo.amplitude)
    throw std::invalid_argument("kk_receive: cfg.lo_amplitude must match lo.amplitude");
  if (!(f.grid() == g)) throw std::invalid_argument("kk_receive: mode grid mismatch");
  if (std::abs(f.power() - 1.0) > 1e-6)
    throw std::invalid_argument("kk_receive: analysis mode must be normalized");
  if (!is_single_sideband(f, kSsbTol))
    throw std::invalid_argument("kk_receive: analysis mode must be single-sideband");

  const MinPhaseReport mp = min_phase_holds(state.psi(), bs, lo.amplitude);
  const double rA = bs.r * lo.amplitude;
  if (!mp.holds || mp.margin < opt.min_phase_margin_frac * rA)
    throw PreconditionError("kk_receive: minimum-phase condition violated (margin too small)");

  const double lo_counts = rA * rA * g.dt;
  if (lo_counts < opt.mc.strong_lo_min_counts)
    throw PreconditionError("kk_receive: weak LO (per-bin counts below threshold)");
  if (opt.mc.shots < 100) throw PreconditionError("kk_receive: shots must be >= 100");

  // Rotated frame: detect |rA + t a e^{-i theta}|^2, rotate back on output.
  std::vector<cplx> det(g.n);
  const cplx derot = std::polar(1.0, -lo.phase);
  for (std::size_t k = 0; k < g.n; ++k) det[k] = cplx(rA, 0.0) + bs.t * derot * state.psi()[k];
  const ComplexSignal detected(g, std::move(det));

  std::size_t probe_idx = 0;
  const bool probe = opt.phase_probe_time.has_value();
  if (probe) {
    const double kf = (*opt.phase_probe_time - g.t_start) / g.dt;
    const long k = std::lround(kf);
    if (k < 0 || k >= static_cast<long>(g.n))
      throw std::invalid_argument("kk_receive: probe time outside grid");
    probe_idx = static_cast<std::size_t>(k);
  }

  KKReceiveResult res;
  res.samples.q.resize(opt.mc.shots);
  res.samples.p.resize(opt.mc.shots);
  if (probe) res.probe_phase.resize(opt.mc.shots);
  std::vector<std::size_t> clamps(opt.mc.shots, 0);

  const auto fs = f.samples();
  run_shots(opt.mc.shots, parallel, [&](std::uint64_t s) {
    std::mt19937_64 rng = shot_rng(opt.mc.seed, s);
    std::vector<double> counts;
    poisson_counts(detected, g.dt, rng, counts);
    for (auto& c : counts) c /= g.dt;
    if (H.kind == ResponseKind::kernel) counts = convolve_taps(counts, H.taps);
    RealSignal I(g, std::move(counts));

    PhaseRetrieval ret = kk_phase_from_intensity(I, cfg, bs);
    clamps[s] = ret.clamp_count;
    if (probe) res.probe_phase[s] = ret.phase.v[probe_idx];

    // a_rec = e^{i theta}(e^{i phi} sqrt(I) - rA)/t, projected on f
    cplx proj(0.0, 0.0);
    const cplx rot = std::polar(1.0, lo.phase);
    for (std::size_t k = 0; k < g.n; ++k) {
      const double amp = std::sqrt(std::max(0.0, I.v[k]));
      const cplx a_rec = rot * (std::polar(amp, ret.phase.v[k]) - cplx(rA, 0.0)) / bs.t;
      proj += std::conj(fs[k]) * a_rec;
    }
    proj *= g.dt;
    res.samples.q[s] = proj.real();
    res.samples.p[s] = proj.imag();
  });

  for (std::size_t c : clamps) res.clamp_count += c;
  res.stats = stats_from_samples(res.samples.q, res.samples.p);
  return res;
}

}  // namespace detail

KKReceiveResult kk_receive(const CoherentField& state, const LocalOscillator& lo,
                           const BeamsplitterParams& bs, const KKRetrievalConfig& cfg,
                           const ComplexSignal& f, const PhotodiodeResponse& H,
                           const KKReceiveOptions& opt) {
  return detail::kk_receive_impl(state, lo, bs, cfg, f, H, opt, true);
}

KKReceiveResult serial::kk_receive(const CoherentField& state, const LocalOscillator& lo,
                                   const BeamsplitterParams& bs, const KKRetrievalConfig& cfg,
                                   const ComplexSignal& f, const PhotodiodeResponse& H,
                                   const KKReceiveOptions& opt) {
  return detail::kk_receive_impl(state, lo, bs, cfg, f, H, opt, false);
}

VarianceScalingResult phase_variance_scan(const ComplexSignal& chi, const BeamsplitterParams& bs,
                                          const std::vector<double>& lo_amplitudes,
                                          double probe_time, const PhotodiodeResponse& H,
                                          const MonteCarloOptions& opt) {
  if (lo_amplitudes.size() < 2)
    throw std::invalid_argument("phase_variance_scan: need at least two amplitudes");
  VarianceScalingResult out;
  out.lo_amplitudes = lo_amplitudes;
  CoherentField state(chi);

  for (std::size_t i = 0; i < lo_amplitudes.size(); ++i) {
    const double A = lo_amplitudes[i];
    LocalOscillator lo = LocalOscillator::monochromatic(A);
    KKRetrievalConfig cfg = KKRetrievalConfig::make(PhaseExpansion::first_order, bs, A);
    KKReceiveOptions kopt;
    kopt.mc = opt;
    kopt.mc.seed = derive_seed(opt.seed, "variance_scan") + i;
    kopt.phase_probe_time = probe_time;
    // the probe mode is irrelevant for the phase variance; reuse chi normalized
    ComplexSignal f = chi;
    const double nrm = std::sqrt(f.power());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] /= nrm;
    KKReceiveResult r = kk_receive(state, lo, bs, cfg, f, H, kopt);

    double m = 0.0;
    for (double x : r.probe_phase) m += x;
    m /= static_cast<double>(r.probe_phase.size());
    double v = 0.0;
    for (double x : r.probe_phase) v += (x - m) * (x - m);
    v /= static_cast<double>(r.probe_phase.size() - 1);
    out.phase_variance.push_back(v);
  }

  // least squares on (ln A, ln Var)
  const std::size_t n = lo_amplitudes.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(lo_amplitudes[i]);
    const double y = std::log(out.phase_variance[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  out.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / static_cast<double>(n);
  return out;
}

}  // namespace kkd
