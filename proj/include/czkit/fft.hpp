#pragma once

#include <complex>
#include <span>
#include <vector>

namespace czkit {

using cplx = std::complex<double>;

/// Unnormalized multi-dimensional complex DFT (row-major, last axis fastest).
///
/// forward:  X[k] = sum_j x[j] exp(-2 pi i j.k / N)
/// backward: x[j] = sum_k X[k] exp(+2 pi i j.k / N)
///
/// Plans are cached per shape and shared between threads; execution is
/// in place on the caller's buffer.
void fft_forward(std::span<cplx> data, std::span<const int> shape);
void fft_backward(std::span<cplx> data, std::span<const int> shape);

}  // namespace czkit
