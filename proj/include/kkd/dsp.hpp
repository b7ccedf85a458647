#pragma once

#include "kkd/grid.hpp"

namespace kkd {

/// Real beamsplitter coefficients with r^2 + t^2 = 1.
struct BeamsplitterParams {
  double r = 0.0;
  double t = 1.0;

  BeamsplitterParams() = default;
  BeamsplitterParams(double r_, double t_);
  static BeamsplitterParams from_reflectivity(double r_);
  static BeamsplitterParams balanced() { return from_reflectivity(1.0 / std::sqrt(2.0)); }
};

enum class PhaseExpansion { full_log, first_order };

struct KKRetrievalConfig {
  PhaseExpansion expansion = PhaseExpansion::full_log;
  double lo_amplitude = 0.0;  // A > 0
  double lo_phase = 0.0;      // theta, radians
  double intensity_floor = 0.0;

  static double default_floor(const BeamsplitterParams& bs, double lo_amplitude) {
    return 1e-12 * bs.r * bs.r * lo_amplitude * lo_amplitude;
  }
  static KKRetrievalConfig make(PhaseExpansion exp, const BeamsplitterParams& bs, double A,
                                double theta = 0.0);
  void validate() const;
};

/// h(t) = -PV int f(t') / (2pi (t - t')) dt' by the midpoint PV rule: cells of
/// width 2dt centered on odd offsets straddle the singularity, so
/// h_k = (1/pi) sum_{j-k odd} f_j / (j-k). Brute-force oracle for the FFT path.
RealSignal hilbert_kk_direct(const RealSignal& f);

/// Same transform via the spectral multiplier -(i/2) sign(w) under the +iwt
/// forward convention. The input is de-meaned and zero padded 4x before the
/// multiplier; only interior samples are contract bearing.
RealSignal hilbert_kk_fft(const RealSignal& f);

struct MinPhaseReport {
  bool holds = false;
  double margin = 0.0;  // r*A - max_t |t * a(t)|
};

/// Sufficient minimum-phase condition: |t a(t)| < r A at every sample.
MinPhaseReport min_phase_holds(const ComplexSignal& a, const BeamsplitterParams& bs, double A);

struct PhaseRetrieval {
  RealSignal phase;
  std::size_t clamp_count = 0;  // samples clamped to the intensity floor
};

/// Phase trace from a direct-detection intensity record.
/// full_log:    phi = hilbert_kk(ln max(I, eps))
/// first_order: phi = hilbert_kk((I - r^2 A^2) / (r^2 A^2))
PhaseRetrieval kk_phase_from_intensity(const RealSignal& I, const KKRetrievalConfig& cfg,
                                       const BeamsplitterParams& bs);

/// a(t) = e^{i theta} (e^{i phi(t)} sqrt(I(t)) - r A) / t.
ComplexSignal kk_field_reconstruct(const RealSignal& I, const RealSignal& phase,
                                   const KKRetrievalConfig& cfg, const BeamsplitterParams& bs);

/// q = Re<f|a_rec>, p = Im<f|a_rec>. f must be normalized and single-sideband
/// (tol 1e-3); the reconstruction contract only holds for SSB modes.
std::pair<double, double> kk_quadratures(const ComplexSignal& a_rec, const ComplexSignal& f);

namespace serial {
/// Single-threaded reference for hilbert_kk_direct; identical arithmetic.
RealSignal hilbert_kk_direct(const RealSignal& f);
}  // namespace serial

}  // namespace kkd
