// Compiled with -mavx2 -mfma; only reached after the CPUID check in kernels.cpp.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "bukhgeim/kernels.hpp"

namespace bukhgeim::kernels::avx2 {

namespace {

// Two complex numbers per register: [re0 im0 re1 im1].
inline __m256d load(const complex* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(complex* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

// a * conj(b)
inline __m256d cmul_conj(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmsubadd_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

inline complex mul(complex a, complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline complex mul_conj(complex a, complex b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

}  // namespace

void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(&out[i], cmul(load(&a[i]), load(&b[i])));
  for (; i < n; ++i) out[i] = mul(a[i], b[i]);
}

void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    store(&out[i], cmul_conj(cmul(load(&a[i]), load(&b[i])), load(&c[i])));
  }
  for (; i < n; ++i) out[i] = mul_conj(mul(a[i], b[i]), c[i]);
}

void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(&out[i], cmul(cmul(load(&a[i]), load(&b[i])), load(&c[i])));
  for (; i < n; ++i) out[i] = mul(mul(a[i], b[i]), c[i]);
}

complex sum(std::span<const complex> a) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, load(&a[i]));
    acc1 = _mm256_add_pd(acc1, load(&a[i + 2]));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double re = lanes[0] + lanes[2];
  double im = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    re += a[i].real();
    im += a[i].imag();
  }
  return {re, im};
}

double max_abs_diff(std::span<const complex> a, std::span<const complex> b) {
  const std::size_t n = a.size();
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d d = _mm256_sub_pd(load(&a[i]), load(&b[i]));
    const __m256d sq = _mm256_mul_pd(d, d);
    // re^2 + im^2 in both lanes of each pair
    best = _mm256_max_pd(best, _mm256_hadd_pd(sq, sq));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    const double dr = a[i].real() - b[i].real();
    const double di = a[i].imag() - b[i].imag();
    m = std::max(m, dr * dr + di * di);
  }
  return std::sqrt(m);
}

double squared_norm(std::span<const complex> a) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = load(&a[i]);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

}  // namespace bukhgeim::kernels::avx2
