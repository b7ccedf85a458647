#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "test_util.hpp"

#include "kkd/dsp.hpp"
#include "kkd/errors.hpp"
#include "kkd/mixedphase.hpp"

using namespace kkd;
using test::kPi;

namespace {

/// The explicit sum S(n,k) = (1/k!) sum_j (-1)^{k-j} C(k,j) j^n, evaluated in
/// exact integer arithmetic; independent of the recurrence implementation.
std::uint64_t stirling2_sum(unsigned n, unsigned k) {
  auto binom = [](unsigned a, unsigned b) {
    unsigned long long r = 1;
    for (unsigned i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
    return r;
  };
  long long acc = 0;
  for (unsigned j = 0; j <= k; ++j) {
    long long term = static_cast<long long>(binom(k, j));
    for (unsigned p = 0; p < n; ++p) term *= j;
    acc += ((k - j) % 2 == 0 ? term : -term);
  }
  unsigned long long fact = 1;
  for (unsigned i = 2; i <= k; ++i) fact *= i;
  return static_cast<std::uint64_t>(acc / static_cast<long long>(fact));
}

CoherentMixture pure_displaced(const ComplexSignal& chi, double A) {
  return CoherentMixture::pure(CoherentField::displaced(A, chi));
}

double max_interior_dev(const RealSignal& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = a.size() / 4; k < 3 * a.size() / 4; ++k)
    m = std::max(m, std::abs(a.v[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("stirling2") {
  SUBCASE("boundary identities") {
    for (unsigned n = 1; n <= 20; ++n) {
      CHECK(stirling2(n, 1) == 1);
      CHECK(stirling2(n, n) == 1);
      CHECK(stirling2(n, 0) == 0);
    }
    CHECK(stirling2(0, 0) == 1);
  }

  SUBCASE("explicit-sum oracle values") {
    CHECK(stirling2(4, 2) == 7);
    CHECK(stirling2(4, 2) == stirling2_sum(4, 2));
    CHECK(stirling2(5, 3) == 25);
    for (unsigned n = 0; n <= 12; ++n)
      for (unsigned k = 0; k <= n; ++k) CHECK(stirling2(n, k) == stirling2_sum(n, k));
  }

  SUBCASE("recurrence holds exactly up to n = 25") {
    for (unsigned n = 2; n <= 25; ++n)
      for (unsigned k = 1; k <= n; ++k)
        CHECK(stirling2(n, k) ==
              static_cast<std::uint64_t>(k) * stirling2(n - 1, k) + stirling2(n - 1, k - 1));
  }

  SUBCASE("uint64 overflow reported") {
    CHECK(stirling2(25, 12) == 362262620784874680ULL);
    CHECK(stirling2(26, 13) == 1850568574253550060ULL);
    CHECK_THROWS_AS(stirling2(27, 8), std::overflow_error);
  }
}

TEST_CASE("intensity_moments_mixture") {
  TimeGrid g = test::centered_grid(256, 1.0);

  SUBCASE("vanishing field gives (0, 0)") {
    CoherentMixture m = CoherentMixture::pure(CoherentField(ComplexSignal::zeros(g)));
    auto [m1, m2] = intensity_moments_mixture(m, g.time(10));
    CHECK(m1 == 0.0);
    CHECK(m2 == 0.0);
  }

  SUBCASE("|psi|^2 = 4 gives (4, 20)") {
    ComplexSignal c(g, std::vector<cplx>(g.n, cplx(2.0, 0.0)));
    CoherentMixture m = CoherentMixture::pure(CoherentField(std::move(c)));
    auto [m1, m2] = intensity_moments_mixture(m, g.time(100));
    CHECK(m1 == doctest::Approx(4.0));
    CHECK(m2 == doctest::Approx(20.0));
  }

  SUBCASE("two equal components with |psi|^2 = 1 and 9 give (5, 46)") {
    ComplexSignal a(g, std::vector<cplx>(g.n, cplx(1.0, 0.0)));
    ComplexSignal b(g, std::vector<cplx>(g.n, cplx(3.0, 0.0)));
    CoherentMixture m({{0.5, CoherentField(std::move(a))}, {0.5, CoherentField(std::move(b))}});
    auto [m1, m2] = intensity_moments_mixture(m, g.time(42));
    CHECK(m1 == doctest::Approx(5.0));
    CHECK(m2 == doctest::Approx(46.0));
  }

  SUBCASE("off-grid time rejected") {
    ComplexSignal c(g, std::vector<cplx>(g.n, cplx(1.0, 0.0)));
    CoherentMixture m = CoherentMixture::pure(CoherentField(std::move(c)));
    CHECK_THROWS(intensity_moments_mixture(m, g.time(5) + 0.4 * g.dt));
  }
}

TEST_CASE("kk_phase_series") {
  TimeGrid g = test::centered_grid(1024, 1.0);
  ComplexSignal chi = make_ssb_gaussian_chi(g, 600.0, 100.0, 1.0);
  SeriesConfig cfg;
  cfg.n_max = 10;
  cfg.convergence_tol = 1e-8;

  SUBCASE("flat field: zero phase in the interior") {
    const double A = 100.0;
    ComplexSignal flat(g, std::vector<cplx>(g.n, cplx(A, 0.0)));
    CoherentMixture m = CoherentMixture::pure(CoherentField(std::move(flat)));
    SeriesPhaseResult res = kk_phase_series(m, A, cfg);
    for (std::size_t k = g.n / 4; k < 3 * g.n / 4; ++k)
      CHECK(std::abs(res.phase.v[k]) < 1e-10);
  }

  SUBCASE("pure component converges to arg psi with 1/A^2 relative error") {
    // The phase itself scales as 1/A; the deviation from arg psi (quantum
    // moment corrections, with the constant part annihilated by the PV
    // kernel) scales as 1/A^3, so the dimensionless relative error goes as
    // 1/A^2.
    std::vector<double> errs;
    const std::vector<double> ratios = {20.0, 40.0, 80.0};
    for (double ratio : ratios) {
      const double A = ratio * chi.max_abs();
      CoherentMixture m = pure_displaced(chi, A);
      SeriesPhaseResult res = kk_phase_series(m, A, cfg);
      std::vector<double> exact(g.n);
      double scale = 0.0;
      for (std::size_t k = 0; k < g.n; ++k) {
        exact[k] = std::arg(m.components.front().field.psi()[k]);
        scale = std::max(scale, std::abs(exact[k]));
      }
      errs.push_back(max_interior_dev(res.phase, exact) / scale);
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    // log-log slope across the doublings
    const double slope =
        std::log(errs[2] / errs[0]) / std::log(ratios[2] / ratios[0]);
    CHECK(slope == doctest::Approx(-2.0).epsilon(0.1));
  }

  SUBCASE("matches the DSP retrieval path for a pure component") {
    const double A = 20.0 * chi.max_abs();
    CoherentMixture m = pure_displaced(chi, A);
    SeriesPhaseResult series = kk_phase_series(m, A, cfg);

    // classical path: exact log intensity through the balanced-splitter form
    BeamsplitterParams bs = BeamsplitterParams::balanced();
    RealSignal I = RealSignal::zeros(g);
    for (std::size_t k = 0; k < g.n; ++k)
      I.v[k] = std::norm(m.components.front().field.psi()[k]);
    KKRetrievalConfig kcfg =
        KKRetrievalConfig::make(PhaseExpansion::full_log, bs, A * std::sqrt(2.0));
    PhaseRetrieval dsp = kk_phase_from_intensity(I, kcfg, bs);

    const double budget = std::max(1e-3, 2.0 / (A * A));
    CHECK(max_interior_dev(series.phase, dsp.phase.v) < budget);
  }

  SUBCASE("mixture output is the convex sum of component outputs") {
    ComplexSignal chi2 = make_ssb_gaussian_chi(g, 900.0, 120.0, 0.7);
    const double A = 30.0;
    CoherentField fa = CoherentField::displaced(A, chi);
    CoherentField fb = CoherentField::displaced(A, chi2);
    CoherentMixture mix({{0.3, fa}, {0.7, fb}});
    SeriesPhaseResult joint = kk_phase_series(mix, A, cfg);
    SeriesPhaseResult pa = kk_phase_series(CoherentMixture::pure(fa), A, cfg);
    SeriesPhaseResult pb = kk_phase_series(CoherentMixture::pure(fb), A, cfg);
    for (std::size_t k = 0; k < g.n; ++k)
      CHECK(std::abs(joint.phase.v[k] - (0.3 * pa.phase.v[k] + 0.7 * pb.phase.v[k])) < 1e-10);
  }

  SUBCASE("equal mixture of chi and -chi cancels to second order") {
    const double A = 20.0 * chi.max_abs();
    std::vector<cplx> neg(g.n);
    for (std::size_t k = 0; k < g.n; ++k) neg[k] = -chi[k];
    ComplexSignal chin(g, std::move(neg));
    CoherentMixture mix({{0.5, CoherentField::displaced(A, chi)},
                         {0.5, CoherentField::displaced(A, chin)}});
    SeriesPhaseResult res = kk_phase_series(mix, A, cfg);
    SeriesPhaseResult pure = kk_phase_series(pure_displaced(chi, A), A, cfg);
    double mix_max = 0.0, pure_max = 0.0;
    for (std::size_t k = g.n / 4; k < 3 * g.n / 4; ++k) {
      mix_max = std::max(mix_max, std::abs(res.phase.v[k]));
      pure_max = std::max(pure_max, std::abs(pure.phase.v[k]));
    }
    // first order cancels; what survives is the second-order intensity term
    const double second_order = std::pow(chi.max_abs() / A, 2.0);
    CHECK(mix_max < 10.0 * second_order);
    CHECK(mix_max < 0.1 * pure_max);
  }

  SUBCASE("non-convergent fluctuation ratio rejected") {
    const double A = 1.2 * chi.max_abs();  // |psi|^2 strays beyond 2 A^2
    CoherentMixture m = CoherentMixture::pure(
        CoherentField(ComplexSignal(g, [&] {
          std::vector<cplx> s(g.n);
          for (std::size_t k = 0; k < g.n; ++k) s[k] = cplx(A, 0.0) + chi[k];
          return s;
        }())));
    CHECK_THROWS_AS(kk_phase_series(m, A, cfg), PreconditionError);
  }

  SUBCASE("truncation tail above tolerance rejected") {
    SeriesConfig tight;
    tight.n_max = 2;
    tight.convergence_tol = 1e-12;
    const double A = 5.0 * chi.max_abs();
    CHECK_THROWS_AS(kk_phase_series(pure_displaced(chi, A), A, tight), PreconditionError);
  }

  SUBCASE("serial and OpenMP integrands are bit identical") {
    const double A = 25.0;
    CoherentMixture m = pure_displaced(chi, A);
    std::vector<double> a = series_integrand(m, A, cfg);
    std::vector<double> b = serial::series_integrand(m, A, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
}
