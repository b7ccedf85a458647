#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "test_util.hpp"

using namespace kkd;
using test::kPi;

TEST_CASE("grid invariants") {
  CHECK_THROWS(TimeGrid(0.0, 0.0, 16));
  CHECK_THROWS(TimeGrid(0.0, 1.0, 1));
  TimeGrid g(-0.5, 1.0 / 64, 64);
  CHECK(g.duration() == doctest::Approx(1.0));
  CHECK(g.freq_spacing() == doctest::Approx(2.0 * kPi));
  // frequency grid spans [-pi/dt, pi/dt)
  double wmin = 0.0, wmax = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    wmin = std::min(wmin, g.frequency(j));
    wmax = std::max(wmax, g.frequency(j));
  }
  CHECK(wmin == doctest::Approx(-kPi / g.dt));
  CHECK(wmax == doctest::Approx(kPi / g.dt - g.freq_spacing()));
}

TEST_CASE("forward transform: DC mass at zero frequency") {
  TimeGrid g = test::centered_grid(128, 2.0);
  ComplexSignal one(g, std::vector<cplx>(g.n, cplx(1.0, 0.0)));
  SpectralSignal S = forward_transform(one);
  CHECK(S[g.frequency_bin(0.0)].real() == doctest::Approx(g.duration()).epsilon(1e-12));
  double off = 0.0;
  for (std::size_t j = 1; j < g.n; ++j) off = std::max(off, std::abs(S[j]));
  CHECK(off < 1e-10 * g.duration());
}

TEST_CASE("forward transform: e^{-i w0 t} lands at +w0") {
  TimeGrid g = test::centered_grid(256, 1.0);
  const double w0 = 12.0 * g.freq_spacing();
  SpectralSignal S = forward_transform(test::tone(g, w0));
  const std::size_t jp = g.frequency_bin(w0);
  CHECK(std::abs(S[jp]) == doctest::Approx(g.duration()).epsilon(1e-10));
  for (std::size_t j = 0; j < g.n; ++j)
    if (j != jp) CHECK(std::abs(S[j]) < 1e-9);
}

TEST_CASE("forward transform: Gaussian closed form and slow-DFT oracle") {
  TimeGrid g = test::centered_grid(256, 8.0);
  const double sigma = 0.25;
  std::vector<cplx> s(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    const double t = g.time(k);
    s[k] = cplx(std::exp(-t * t / (2.0 * sigma * sigma)), 0.0);
  }
  ComplexSignal gauss(g, std::move(s));
  SpectralSignal S = forward_transform(gauss);

  // closed form sigma sqrt(2 pi) exp(-sigma^2 w^2 / 2)
  const double peak = sigma * std::sqrt(2.0 * kPi);
  CHECK(S[g.frequency_bin(0.0)].real() == doctest::Approx(peak).epsilon(1e-9));
  for (int m = -20; m <= 20; ++m) {
    const double w = m * g.freq_spacing();
    const double expected = peak * std::exp(-sigma * sigma * w * w / 2.0);
    CHECK(S[g.frequency_bin(w)].real() == doctest::Approx(expected).epsilon(1e-8));
  }

  SpectralSignal slow = test::forward_transform_slow(gauss);
  for (std::size_t j = 0; j < g.n; ++j) CHECK(std::abs(S[j] - slow[j]) < 1e-10);
}

TEST_CASE("round trip and Parseval on random signals") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    TimeGrid g(-0.3, 0.01, 200);
    ComplexSignal x = test::random_signal(g, rng);
    SpectralSignal S = forward_transform(x);
    ComplexSignal back = inverse_transform(S);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
      err = std::max(err, std::abs(back[k] - x[k]));
      scale = std::max(scale, std::abs(x[k]));
    }
    CHECK(err < 1e-12 * scale);

    double et = 0.0, ew = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) et += std::norm(x[k]);
    et *= g.dt;
    for (std::size_t j = 0; j < g.n; ++j) ew += std::norm(S[j]);
    ew *= g.freq_spacing() / (2.0 * kPi);
    CHECK(et == doctest::Approx(ew).epsilon(1e-10));
  }
}

TEST_CASE("inner product") {
  TimeGrid g = test::centered_grid(512, 1.0);
  std::mt19937_64 rng(11);
  ComplexSignal f = test::random_signal(g, rng);
  ComplexSignal h = test::random_signal(g, rng);

  SUBCASE("conjugate symmetry and normalization") {
    const cplx a = inner_product(f, h);
    const cplx b = inner_product(h, f);
    CHECK(std::abs(a - std::conj(b)) < 1e-12 * std::abs(a));

    const double nrm = std::sqrt(f.power());
    std::vector<cplx> fs(f.samples().begin(), f.samples().end());
    for (auto& z : fs) z /= nrm;
    ComplexSignal fn(g, std::move(fs));
    CHECK(inner_product(fn, fn).real() == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("grid mismatch throws") {
    TimeGrid g2(0.0, g.dt, g.n);
    ComplexSignal other(g2, std::vector<cplx>(g.n, cplx(1.0, 0.0)));
    CHECK_THROWS(inner_product(f, other));
  }

  SUBCASE("time-domain equals spectral-domain value") {
    const cplx td = inner_product(f, h);
    SpectralSignal F = forward_transform(f);
    SpectralSignal H = forward_transform(h);
    cplx fd(0.0, 0.0);
    for (std::size_t j = 0; j < g.n; ++j) fd += std::conj(F[j]) * H[j];
    fd *= g.freq_spacing() / (2.0 * kPi);
    CHECK(std::abs(td - fd) < 1e-10 * std::abs(td));
  }

  SUBCASE("<f|f*> vanishes for single-sideband f") {
    // disjoint spectral supports under Parseval
    ComplexSignal ssb = test::tone(g, 40.0 * g.freq_spacing());
    std::vector<cplx> mix(g.n);
    for (std::size_t k = 0; k < g.n; ++k)
      mix[k] = ssb[k] + 0.5 * test::tone(g, 90.0 * g.freq_spacing())[k];
    ComplexSignal fssb(g, std::move(mix));
    REQUIRE(is_single_sideband(fssb, 1e-6));
    const cplx ov = inner_product(fssb, conjugate_mode(fssb));
    CHECK(std::abs(ov) < 1e-8 * fssb.power());
  }

  SUBCASE("orthonormal time-shifted pulses") {
    // rectangular non-overlapping pulses, unit norm
    const std::size_t w = 64;
    auto pulse_at = [&](std::size_t off) {
      std::vector<cplx> s(g.n, cplx(0.0, 0.0));
      for (std::size_t k = 0; k < w; ++k)
        s[off + k] = cplx(1.0 / std::sqrt(w * g.dt), 0.0);
      return ComplexSignal(g, std::move(s));
    };
    ComplexSignal g0 = pulse_at(0), g1 = pulse_at(w), g2 = pulse_at(2 * w);
    CHECK(inner_product(g0, g0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner_product(g0, g1)) < 1e-14);
    CHECK(std::abs(inner_product(g1, g2)) < 1e-14);
  }
}

TEST_CASE("is_single_sideband") {
  TimeGrid g = test::centered_grid(512, 1.0);
  const double w0 = 30.0 * g.freq_spacing();

  CHECK(is_single_sideband(test::tone(g, w0), 1e-6));
  CHECK(is_single_sideband(ComplexSignal::zeros(g), 0.5));

  // cos has half its energy at negative frequencies
  std::vector<cplx> c(g.n);
  for (std::size_t k = 0; k < g.n; ++k) c[k] = cplx(std::cos(w0 * g.time(k)), 0.0);
  CHECK_FALSE(is_single_sideband(ComplexSignal(g, std::move(c)), 0.01));

  CHECK_THROWS(is_single_sideband(test::tone(g, w0), 0.0));
}

TEST_CASE("is_single_sideband: Gaussian spectrum at +3 sigma") {
  TimeGrid g = test::centered_grid(1024, 1.0);
  const double dw = g.freq_spacing();
  const double sigma_w = 30.0 * dw;
  const double w0 = 3.0 * sigma_w;
  std::vector<cplx> spec(g.n, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < g.n; ++j) {
    const double u = (g.frequency(j) - w0) / sigma_w;
    spec[j] = std::exp(-0.5 * u * u);
  }
  ComplexSignal chi = inverse_transform(SpectralSignal(g, std::move(spec)));

  // numeric tail oracle: fraction of spectral energy below zero frequency
  double neg = 0.0, tot = 0.0;
  SpectralSignal S = forward_transform(chi);
  for (std::size_t j = 0; j < g.n; ++j) {
    tot += std::norm(S[j]);
    if (g.frequency(j) < 0.0) neg += std::norm(S[j]);
  }
  REQUIRE(neg / tot < 1e-3);
  CHECK(is_single_sideband(chi, 1e-3));
}

TEST_CASE("conjugate_mode") {
  TimeGrid g = test::centered_grid(512, 1.0);

  SUBCASE("real signal unchanged") {
    std::mt19937_64 rng(3);
    RealSignal r = test::random_band_limited(g, rng);
    std::vector<cplx> s(g.n);
    for (std::size_t k = 0; k < g.n; ++k) s[k] = cplx(r.v[k], 0.0);
    ComplexSignal f(g, std::move(s));
    ComplexSignal fc = conjugate_mode(f);
    for (std::size_t k = 0; k < g.n; ++k) CHECK(fc[k] == f[k]);
  }

  SUBCASE("mirrors the spectrum; SSB becomes anti-SSB") {
    ComplexSignal f = test::tone(g, 25.0 * g.freq_spacing());
    REQUIRE(is_single_sideband(f, 1e-3));
    ComplexSignal fc = conjugate_mode(f);
    CHECK_FALSE(is_single_sideband(fc, 0.49));
    SpectralSignal Sf = forward_transform(f);
    SpectralSignal Sc = forward_transform(fc);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double w = g.frequency(j);
      if (w == -kPi / g.dt) continue;  // unpaired Nyquist bin
      const std::size_t jm = g.frequency_bin(-w);
      CHECK(std::abs(Sc[j] - std::conj(Sf[jm])) < 1e-9);
    }
  }

  SUBCASE("<f|conj f> equals the quadrature of f*^2") {
    std::mt19937_64 rng(17);
    ComplexSignal f = test::random_signal(g, rng);
    cplx direct(0.0, 0.0);
    for (std::size_t k = 0; k < g.n; ++k) direct += std::conj(f[k]) * std::conj(f[k]);
    direct *= g.dt;
    const cplx ov = inner_product(f, conjugate_mode(f));
    CHECK(std::abs(ov - direct) < 1e-12 * std::abs(direct));
  }
}

TEST_CASE("symbol encode/decode") {
  TimeGrid g(0.0, 1.0 / 1024, 1024);
  const std::size_t w = 64;
  std::vector<cplx> ps(g.n, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < w; ++k) ps[k] = cplx(1.0 / std::sqrt(w * g.dt), 0.0);
  ComplexSignal pulse(g, std::move(ps));
  const double period = w * g.dt;

  SUBCASE("single unit symbol reproduces the pulse") {
    EncodedSignal enc = encode_symbols({cplx(1.0, 0.0)}, pulse, period);
    CHECK_FALSE(enc.overlap_warning);
    for (std::size_t k = 0; k < g.n; ++k) CHECK(std::abs(enc.signal[k] - pulse[k]) < 1e-15);
  }

  SUBCASE("QPSK-ish triple round trip") {
    std::vector<cplx> syms = {cplx(1, 0), cplx(0, 1), cplx(-1, 0)};
    EncodedSignal enc = encode_symbols(syms, pulse, period);
    auto back = decode_symbols(enc.signal, pulse, period, syms.size());
    for (std::size_t i = 0; i < syms.size(); ++i) CHECK(std::abs(back[i] - syms[i]) < 1e-10);
  }

  SUBCASE("16 random QAM symbols with a smooth pulse; quadrature oracle") {
    // raised-cosine-like pulse confined to one period
    std::vector<cplx> sp(g.n, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < w; ++k) {
      const double u = (static_cast<double>(k) + 0.5) / w;
      sp[k] = cplx(0.5 * (1.0 - std::cos(2.0 * kPi * u)), 0.0);
    }
    ComplexSignal smooth_raw(g, std::move(sp));
    const double nrm = std::sqrt(smooth_raw.power());
    std::vector<cplx> spn(smooth_raw.samples().begin(), smooth_raw.samples().end());
    for (auto& z : spn) z /= nrm;
    ComplexSignal smooth(g, std::move(spn));

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> level(0, 3);
    std::vector<cplx> syms(16);
    for (auto& s : syms) s = cplx(2.0 * level(rng) - 3.0, 2.0 * level(rng) - 3.0);

    EncodedSignal enc = encode_symbols(syms, smooth, period);
    auto back = decode_symbols(enc.signal, smooth, period, syms.size());

    // independent matched-filter oracle by direct quadrature
    for (std::size_t l = 0; l < syms.size(); ++l) {
      cplx acc(0.0, 0.0);
      for (std::size_t k = 0; k < g.n; ++k) {
        const long rel = static_cast<long>(k) - static_cast<long>(l * w);
        if (rel >= 0 && rel < static_cast<long>(w))
          acc += std::conj(smooth[rel]) * enc.signal[k];
      }
      acc *= g.dt;
      CHECK(std::abs(back[l] - acc) < 1e-12);
      CHECK(std::abs(back[l] - syms[l]) < 1e-8);
    }
  }

  SUBCASE("overlapping non-orthogonal pulses warn") {
    EncodedSignal enc = encode_symbols({cplx(1, 0), cplx(1, 0)}, pulse, period / 2.0);
    CHECK(enc.overlap_warning);
  }

  SUBCASE("pulses that do not fit throw") {
    CHECK_THROWS(encode_symbols(std::vector<cplx>(20, cplx(1, 0)), pulse, period));
  }
}

TEST_CASE("property: conjugate of a nonzero SSB signal is not SSB") {
  std::mt19937_64 rng(31);
  TimeGrid g = test::centered_grid(512, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::uniform_int_distribution<int> bin(20, 120);
    ComplexSignal f = test::tone(g, bin(rng) * g.freq_spacing(),
                                 cplx(0.2 + rep * 0.1, 0.1 * rep));
    REQUIRE(is_single_sideband(f, 1e-3));
    CHECK_FALSE(is_single_sideband(conjugate_mode(f), 0.49));
  }
}
