#pragma once

#include <cstdint>

#include "kkd/states.hpp"

namespace kkd {

struct SeriesConfig {
  std::size_t n_max = 8;         // outer expansion order, >= 1
  double convergence_tol = 1e-10;

  void validate() const;
};

/// Stirling number of the second kind, exact. Throws if the value would
/// overflow uint64 (n, k <= 25 is always safe).
std::uint64_t stirling2(unsigned n, unsigned k);

/// First two moments of the instantaneous intensity for a discrete coherent
/// mixture: m1 = sum_i p_i |psi_i(t)|^2, m2 = sum_i p_i (|psi_i|^4 + |psi_i|^2).
std::pair<double, double> intensity_moments_mixture(const CoherentMixture& m, double t);

struct SeriesPhaseResult {
  RealSignal phase;
  double tail_estimate = 0.0;  // geometric bound on the truncated remainder
  double ratio = 0.0;          // max_t ||psi|^2 - A^2| / A^2
};

/// Exact KK phase average for a discrete coherent mixture: the log expansion
/// in the intensity fluctuation evaluated through the intensity moments
/// (Stirling numbers), then the principal-value kernel. Linear in the mixture
/// weights. Throws PreconditionError if the truncated series cannot converge.
SeriesPhaseResult kk_phase_series(const CoherentMixture& m, double lo_amplitude,
                                  const SeriesConfig& cfg);

namespace serial {
/// Single-threaded reference for the series integrand evaluation.
std::vector<double> series_integrand(const CoherentMixture& m, double lo_amplitude,
                                     const SeriesConfig& cfg);
}  // namespace serial

/// Parallel integrand evaluation (one value per grid sample).
std::vector<double> series_integrand(const CoherentMixture& m, double lo_amplitude,
                                     const SeriesConfig& cfg);

}  // namespace kkd
