#include "fiberlab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace fiberlab::spectral {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> real(n);
  std::vector<std::complex<double>> cplx(n / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  PlanPair p;
  p.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

}  // namespace

std::vector<std::complex<double>> forward(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> in(values.begin(), values.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plans_for(n).r2c, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse(std::span<const std::complex<double>> coeffs, std::size_t n) {
  // c2r destroys its input.
  std::vector<std::complex<double>> in(coeffs.begin(), coeffs.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans_for(n).c2r, reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace fiberlab::spectral
