#pragma once

#include <cstdint>
#include <optional>

#include "kkd/dsp.hpp"
#include "kkd/states.hpp"

namespace kkd {

enum class ResponseKind { ideal_delta, kernel };

/// Photodiode response. ideal_delta detects the instantaneous intensity;
/// kernel convolves the photocurrent with short real taps (centered, odd
/// count, spaced by the grid dt).
struct PhotodiodeResponse {
  ResponseKind kind = ResponseKind::ideal_delta;
  std::vector<double> taps;  // kernel case only

  static PhotodiodeResponse ideal() { return {}; }
  static PhotodiodeResponse with_kernel(std::vector<double> taps);

  /// Effective weight of the response inside a flat time integral.
  double dc_gain(double dt) const;
};

enum class LoModeKind { monochromatic, shaped };

/// Strong classical local oscillator: amplitude A (flux^(1/2)), phase theta,
/// and either a flat (monochromatic) temporal mode or a normalized shaped one.
struct LocalOscillator {
  double amplitude = 0.0;
  double phase = 0.0;
  LoModeKind kind = LoModeKind::monochromatic;
  std::optional<ComplexSignal> shaped;

  static LocalOscillator monochromatic(double amplitude, double phase = 0.0);
  static LocalOscillator with_mode(double amplitude, ComplexSignal mode, double phase = 0.0);

  /// LO mode samples on the grid (all ones for monochromatic).
  ComplexSignal mode_signal(const TimeGrid& grid) const;
};

enum class Receiver { hd, dhd, kk };

struct DetectionStats {
  double mean_q = 0.0, mean_p = 0.0;
  double var_q = 0.0, var_p = 0.0;
  double snr_q = 0.0, snr_p = 0.0;  // mean^2 / (4 var); calibration invariant
  std::uint64_t shots = 0;          // 0 for analytic results
  double stderr_mean_q = 0.0, stderr_mean_p = 0.0;
  double stderr_var_q = 0.0, stderr_var_p = 0.0;
};

DetectionStats stats_from_samples(const std::vector<double>& q, const std::vector<double>& p);

/// Vacuum-referenced estimator rescaling. The scale preserves the mean of the
/// quadrature estimate, so the calibrated vacuum variance is 1/4 for HD and
/// 1/2 per quadrature for DHD; KK already reports field units (scale 1).
struct ShotNoiseCalibration {
  double reference_variance = 0.0;
  double scale = 1.0;
};

ShotNoiseCalibration calibrate(const DetectionStats& vacuum_stats, Receiver receiver);
DetectionStats apply_calibration(const DetectionStats& raw, const ShotNoiseCalibration& cal);

/// Closed-form HD stats for a coherent state with symbol alpha in mode g:
/// mean 2 Re{e^{-i theta} alpha <xi|g>}, variance <xi|xi>, xi = |A| H f.
DetectionStats hd_analytic(cplx alpha, const ComplexSignal& g, const LocalOscillator& lo,
                           const PhotodiodeResponse& H);

/// DHD: means sqrt(2) Re / sqrt(2) Im of alpha <xi|g>, variances <xi|xi> each.
DetectionStats dhd_analytic(cplx alpha, const ComplexSignal& g, const LocalOscillator& lo,
                            const PhotodiodeResponse& H);

enum class CountModel { poisson, gaussian };

/// Semiclassical photodetection of a field envelope: per-bin counts with mean
/// |c(t_k)|^2 dt (Poisson, or Normal(lambda, lambda) requiring lambda >= 100),
/// returned as counts/dt and convolved with the response kernel if present.
RealSignal sample_photocurrent(const ComplexSignal& envelope, const PhotodiodeResponse& H,
                               CountModel model, std::uint64_t rng_seed);

struct MonteCarloOptions {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  double strong_lo_min_counts = 1e3;  // peak per-bin LO counts required
};

struct ShotRecord {
  std::vector<double> q, p;
};

struct MonteCarloResult {
  DetectionStats stats;
  ShotRecord samples;
};

/// Two-photodiode homodyne simulation: diodes on (a±b)/sqrt(2), Poisson counts,
/// difference photocurrent integrated against the response weight.
MonteCarloResult hd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                const PhotodiodeResponse& H, const MonteCarloOptions& opt);

/// Double homodyne: balanced split, one HD per quadrature (LO phases theta,
/// theta + pi/2) on independent Poisson streams.
MonteCarloResult dhd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                 const PhotodiodeResponse& H, const MonteCarloOptions& opt);

struct KKReceiveOptions {
  MonteCarloOptions mc;
  double min_phase_margin_frac = 0.5;  // required margin as a fraction of r*A
  std::optional<double> phase_probe_time;  // record retrieved phase here
};

struct KKReceiveResult {
  DetectionStats stats;
  ShotRecord samples;
  std::vector<double> probe_phase;  // per shot, when phase_probe_time is set
  std::size_t clamp_count = 0;      // total intensity-floor clamps
};

/// Kramers-Kronig receiver: Poisson-sample the single detected output
/// c = r A e^{i theta} + t a(t), retrieve the phase from the intensity,
/// reconstruct the field, project the quadratures on mode f.
KKReceiveResult kk_receive(const CoherentField& state, const LocalOscillator& lo,
                           const BeamsplitterParams& bs, const KKRetrievalConfig& cfg,
                           const ComplexSignal& f, const PhotodiodeResponse& H,
                           const KKReceiveOptions& opt);

struct VarianceScalingResult {
  std::vector<double> lo_amplitudes;
  std::vector<double> phase_variance;  // Var(phi_hat(t0)) per amplitude
  double slope = 0.0;                  // d log Var / d log A
  double intercept = 0.0;
};

/// Var(phi_hat(t0)) versus LO amplitude for a fixed chi; the retrieved-phase
/// variance scales as 1/A^2.
VarianceScalingResult phase_variance_scan(const ComplexSignal& chi, const BeamsplitterParams& bs,
                                          const std::vector<double>& lo_amplitudes,
                                          double probe_time, const PhotodiodeResponse& H,
                                          const MonteCarloOptions& opt);

namespace serial {
/// Single-threaded shot loops with identical per-shot streams; used to check
/// that parallel execution is bit-identical.
MonteCarloResult hd_monte_carlo(const CoherentField& state, const LocalOscillator& lo,
                                const PhotodiodeResponse& H, const MonteCarloOptions& opt);
KKReceiveResult kk_receive(const CoherentField& state, const LocalOscillator& lo,
                           const BeamsplitterParams& bs, const KKRetrievalConfig& cfg,
                           const ComplexSignal& f, const PhotodiodeResponse& H,
                           const KKReceiveOptions& opt);
}  // namespace serial

}  // namespace kkd
