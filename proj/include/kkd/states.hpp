#pragma once

#include <optional>

#include "kkd/dsp.hpp"
#include "kkd/grid.hpp"

namespace kkd {

/// Decomposition psi(t) = A + chi(t) of a coherent-state eigenfunction into a
/// constant local-oscillator part and a single-sideband part.
struct FieldDecomposition {
  double lo_amplitude = 0.0;
  ComplexSignal chi;
};

/// Bosonic coherent state given by its eigenvalue function psi(t).
class CoherentField {
 public:
  explicit CoherentField(ComplexSignal psi);
  CoherentField(ComplexSignal psi, FieldDecomposition dec);

  /// psi(t) = symbol * mode(t).
  static CoherentField from_symbol(cplx symbol, const ComplexSignal& mode);
  /// psi(t) = A + chi(t) with chi single-sideband and max|chi| < A.
  static CoherentField displaced(double lo_amplitude, const ComplexSignal& chi);

  const ComplexSignal& psi() const { return psi_; }
  const std::optional<FieldDecomposition>& decomposition() const { return dec_; }

 private:
  ComplexSignal psi_;
  std::optional<FieldDecomposition> dec_;
};

/// Truncated particle-number coefficients c_0..c_N of a monomode state.
class FockVector {
 public:
  explicit FockVector(std::vector<cplx> coeffs);

  std::size_t truncation() const { return c_.size() - 1; }
  std::span<const cplx> coeffs() const { return c_; }
  const cplx& operator[](std::size_t n) const { return c_[n]; }

  double mean_photon_number() const;

 private:
  std::vector<cplx> c_;
};

/// Normalized single-photon temporal wavefunction psi = A alpha_env + chi,
/// rescaled so that integral |psi|^2 dt = 1. Stored components are the
/// post-normalization ones, so psi == lo_amplitude*alpha_env + chi exactly.
struct SinglePhotonState {
  ComplexSignal psi;
  double lo_amplitude = 0.0;
  ComplexSignal alpha_env;
  ComplexSignal chi;
  double chi_duration = 0.0;       // declared: 4 sigma_t of the chi envelope
  double envelope_duration = 0.0;  // declared: full width at 1/e of alpha_env

  static SinglePhotonState make(double lo_amplitude, const ComplexSignal& alpha_env,
                                double envelope_duration, const ComplexSignal& chi,
                                double chi_duration);
};

struct CoherentMixture {
  struct Component {
    double weight;
    CoherentField field;
  };
  std::vector<Component> components;

  explicit CoherentMixture(std::vector<Component> comps);
  static CoherentMixture pure(CoherentField field);
};

/// chi(t) with Gaussian amplitude spectrum exp(-(w-w0)^2/(2 sigma_w^2)),
/// scaled so max|chi| = peak_amplitude. Requires w0 >= 4 sigma_w (SSB) and
/// sigma_w >= 10*(2pi/T) (resolvable on the grid).
ComplexSignal make_ssb_gaussian_chi(const TimeGrid& grid, double center_freq,
                                    double spectral_width, double peak_amplitude);

/// Same spectral shape normalized to integral |f|^2 dt = 1 (a detection mode).
ComplexSignal make_ssb_gaussian_mode(const TimeGrid& grid, double center_freq,
                                     double spectral_width);

/// Flat-top (super-Gaussian, order 8) envelope exp(-(2(t-center)/duration)^8);
/// duration is the full width at 1/e.
ComplexSignal make_flat_top_envelope(const TimeGrid& grid, double center, double duration);

/// Phase eigenstate c_n = sqrt(1-|z|^2) z^n, |z| < 1.
FockVector make_phase_eigenstate(cplx z, std::size_t truncation);

/// Even cat state, c_n proportional to (alpha^n/sqrt(n!)) (1 + (-1)^n), normalized.
FockVector make_cat_state(cplx alpha, std::size_t truncation);

struct NumberPhase {
  cplx S;                // sum_n c_n conj(c_{n+1}) sqrt(n+1)
  bool defined = false;  // |S| above threshold, arg S meaningful
};

/// Phase of the particle-number statistics: S = sum c_n c*_{n+1} sqrt(n+1).
NumberPhase number_statistics_phase(const FockVector& v);

struct InterferenceResult {
  cplx value;         // r t f(t) g*(t) A* S
  cplx S;             // particle-number statistics sum
  double total_phase; // zeta(t) = arg(A f(t) S) = theta - phi + arg f(t)
  double direct_mean; // t^2 |f|^2 <n> + r^2 |A|^2 |g|^2 + 2 Re(value)
};

/// Interference term of the direct-detection mean when the state in mode f
/// meets a coherent probe A in mode g on a beamsplitter; t must lie on the grid.
InterferenceResult interference_term(const FockVector& v, cplx lo_symbol,
                                     const ComplexSignal& f, const ComplexSignal& g,
                                     const BeamsplitterParams& bs, double t);

}  // namespace kkd
