#pragma once

#include <complex>
#include <cstddef>

namespace kkd::fft {

/// out_j = sum_k in_k e^{+2pi i jk/n} (unnormalized). in == out is allowed.
void backward(const std::complex<double>* in, std::complex<double>* out, std::size_t n);

/// out_k = sum_j in_j e^{-2pi i jk/n} (unnormalized). in == out is allowed.
void forward(const std::complex<double>* in, std::complex<double>* out, std::size_t n);

}  // namespace kkd::fft
