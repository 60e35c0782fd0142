#include "czkit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace czkit {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Plans are created with FFTW_UNALIGNED so they may run on any buffer of
// the planned shape; fftw_execute_dft is thread safe.
const PlanPair& plans_for(std::span<const int> shape) {
  static std::map<std::vector<int>, PlanPair> cache;
  std::vector<int> key(shape.begin(), shape.end());
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const std::size_t n =
      std::accumulate(key.begin(), key.end(), std::size_t{1}, std::multiplies<>());
  fftw_complex* buf = fftw_alloc_complex(n);
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft(static_cast<int>(key.size()), key.data(), buf, buf, FFTW_FORWARD, flags);
  p.backward =
      fftw_plan_dft(static_cast<int>(key.size()), key.data(), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
  return cache.emplace(std::move(key), p).first->second;
}

void run(std::span<cplx> data, std::span<const int> shape, bool forward) {
  std::size_t n = 1;
  for (int s : shape) {
    if (s <= 0) throw std::invalid_argument("FFT shape entries must be positive");
    n *= static_cast<std::size_t>(s);
  }
  if (data.size() != n) throw std::invalid_argument("FFT buffer does not match shape");
  const PlanPair& p = plans_for(shape);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(forward ? p.forward : p.backward, ptr, ptr);
}

}  // namespace

void fft_forward(std::span<cplx> data, std::span<const int> shape) { run(data, shape, true); }
void fft_backward(std::span<cplx> data, std::span<const int> shape) { run(data, shape, false); }

}  // namespace czkit
