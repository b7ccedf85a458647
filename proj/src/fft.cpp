#include "kkd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace kkd::fft {
namespace {

// FFTW planning is not thread safe; executing distinct plans is. Plans are
// cached per length with FFTW_UNALIGNED so they run on any caller buffer.
class PlanCache {
 public:
  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), scratch.data(), scratch.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(const std::complex<double>* in, std::complex<double>* out, std::size_t n, int sign) {
  fftw_plan p = cache().get(n, sign);
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in));
  auto* dst = reinterpret_cast<fftw_complex*>(out);
  fftw_execute_dft(p, src, dst);
}

}  // namespace

void backward(const std::complex<double>* in, std::complex<double>* out, std::size_t n) {
  run(in, out, n, FFTW_BACKWARD);
}

void forward(const std::complex<double>* in, std::complex<double>* out, std::size_t n) {
  run(in, out, n, FFTW_FORWARD);
}

}  // namespace kkd::fft
