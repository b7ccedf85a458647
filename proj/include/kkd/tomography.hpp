#pragma once

#include <cstdint>

#include "kkd/states.hpp"

namespace kkd {

struct ClickSample {
  std::vector<double> times;  // within [t_start, t_start + T)
  std::size_t n_clicks() const { return times.size(); }
};

struct DensityEstimate {
  TimeGrid grid;
  RealSignal p_hat;                 // normalized, floor-clamped density
  std::vector<std::uint64_t> bin_counts;
  double floor = 0.0;               // clamp level applied before any logarithm
};

/// i.i.d. arrival times drawn from |psi(t)|^2 by inverse CDF with uniform
/// intra-bin jitter.
ClickSample sample_clicks(const SinglePhotonState& state, std::size_t n_clicks,
                          std::uint64_t rng_seed);

/// Same sampler for an arbitrary normalized density on the grid (test hook).
ClickSample sample_clicks_from_density(const RealSignal& p, std::size_t n_clicks,
                                       std::uint64_t rng_seed);

/// Histogram on the grid bins, normalized, Gaussian-smoothed (bandwidth =
/// kernel sigma in seconds; 0 disables smoothing), floor-clamped at
/// 1/(10 n_clicks T).
DensityEstimate estimate_density(const ClickSample& clicks, const TimeGrid& grid,
                                 double smoothing_bandwidth);

/// Wraps a known analytic density as a DensityEstimate (noiseless injection).
DensityEstimate density_from_signal(const RealSignal& p, std::size_t nominal_clicks);

struct AnalysisWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct ReconstructionReport {
  ComplexSignal psi_tilde;   // sqrt(p_hat) e^{i phi_hat}; phase zero outside window
  ComplexSignal chi_tilde;   // psi_tilde - A_eff alpha_env on the window
  RealSignal phi_hat;        // retrieved phase (zero outside the window)
  double fidelity_total = 0.0;
  double fidelity_chi = 0.0;
  RealSignal psd_true;       // phase PSDs on the window's conjugate grid,
  RealSignal psd_rec;        // both normalized to the true-phase PSD peak
  double noise_floor = 0.0;  // median reconstructed PSD over the off-signal band
  std::size_t clicks_in_window = 0;
};

/// KK reconstruction of the single-photon wavefunction from a density
/// estimate: phi = hilbert_kk(ln p_hat) on the analysis window, amplitude
/// sqrt(p_hat), chi_tilde = psi_tilde - A_eff alpha_env. The window must
/// satisfy 5 x chi duration <= width <= 0.5 x envelope duration.
ReconstructionReport reconstruct_wavefunction(const DensityEstimate& est,
                                              const SinglePhotonState& state,
                                              const AnalysisWindow& window);

/// Periodogram |F(phi)(w)|^2 of a phase trace (unnormalized).
RealSignal phase_psd(const RealSignal& phase);

}  // namespace kkd
