// Timing comparison between the OpenMP kernels and their serial references.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "kkd/detectors.hpp"
#include "kkd/mixedphase.hpp"
#include "kkd/states.hpp"

using namespace kkd;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double time_ms(Fn&& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    fn();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   omp %9.2f ms   speedup %.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  {
    const std::size_t n = 4096;
    TimeGrid g(-0.5, 1.0 / static_cast<double>(n), n);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    RealSignal f = RealSignal::zeros(g);
    for (auto& x : f.v) x = nd(rng);
    volatile double sink = 0.0;
    const double ts = time_ms([&] { sink = serial::hilbert_kk_direct(f).v[n / 2]; });
    const double tp = time_ms([&] { sink = hilbert_kk_direct(f).v[n / 2]; });
    (void)sink;
    report("hilbert_kk_direct n=4096", ts, tp);
  }

  {
    TimeGrid g(-0.5, 1.0 / 1024, 1024);
    ComplexSignal chi = make_ssb_gaussian_chi(g, 900.0, 150.0, 100.0);
    CoherentField state(chi);
    const double A = 4000.0;
    BeamsplitterParams bs = BeamsplitterParams::balanced();
    LocalOscillator lo = LocalOscillator::monochromatic(A);
    KKRetrievalConfig cfg = KKRetrievalConfig::make(PhaseExpansion::first_order, bs, A);
    ComplexSignal f = make_ssb_gaussian_mode(g, 900.0, 150.0);
    KKReceiveOptions opt;
    opt.mc.shots = 1000;
    opt.mc.seed = 42;
    PhotodiodeResponse H;
    const double ts = time_ms([&] { serial::kk_receive(state, lo, bs, cfg, f, H, opt); }, 2);
    const double tp = time_ms([&] { kk_receive(state, lo, bs, cfg, f, H, opt); }, 2);
    report("kk_receive 1000 shots", ts, tp);
  }

  {
    TimeGrid g(-0.5, 1.0 / 2048, 2048);
    ComplexSignal chi = make_ssb_gaussian_chi(g, 900.0, 150.0, 1.0);
    CoherentMixture mix = CoherentMixture::pure(CoherentField::displaced(20.0, chi));
    SeriesConfig cfg;
    cfg.n_max = 10;
    cfg.convergence_tol = 1e-8;
    const double ts = time_ms([&] { serial::series_integrand(mix, 20.0, cfg); });
    const double tp = time_ms([&] { series_integrand(mix, 20.0, cfg); });
    report("series_integrand n=2048", ts, tp);
  }

  return 0;
}
