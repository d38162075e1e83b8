#include "bukhgeim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "bukhgeim/error.hpp"

namespace bukhgeim::kernels {

namespace scalar {

// Explicit component arithmetic: std::complex operator* goes through the
// C99 Annex G NaN recovery path, which is both slow and not what the vector
// variant computes.
namespace {
inline complex mul(complex a, complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline complex mul_conj(complex a, complex b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}
}  // namespace

void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul(a[i], b[i]);
}

void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul_conj(mul(a[i], b[i]), c[i]);
}

void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul(mul(a[i], b[i]), c[i]);
}

complex sum(std::span<const complex> a) {
  double re = 0.0, im = 0.0;
  for (complex v : a) {
    re += v.real();
    im += v.imag();
  }
  return {re, im};
}

double max_abs_diff(std::span<const complex> a, std::span<const complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dr = a[i].real() - b[i].real();
    const double di = a[i].imag() - b[i].imag();
    m = std::max(m, dr * dr + di * di);
  }
  return std::sqrt(m);
}

double squared_norm(std::span<const complex> a) {
  double s = 0.0;
  for (complex v : a) s += v.real() * v.real() + v.imag() * v.imag();
  return s;
}

}  // namespace scalar

namespace {

struct Table {
  Backend backend;
  void (*multiply)(std::span<const complex>, std::span<const complex>, std::span<complex>);
  void (*multiply_conj)(std::span<const complex>, std::span<const complex>,
                        std::span<const complex>, std::span<complex>);
  void (*multiply3)(std::span<const complex>, std::span<const complex>,
                    std::span<const complex>, std::span<complex>);
  complex (*sum)(std::span<const complex>);
  double (*max_abs_diff)(std::span<const complex>, std::span<const complex>);
  double (*squared_norm)(std::span<const complex>);
};

constexpr Table kScalar{Backend::scalar,     scalar::multiply,     scalar::multiply_conj,
                        scalar::multiply3,   scalar::sum,          scalar::max_abs_diff,
                        scalar::squared_norm};

#if defined(BUKHGEIM_HAVE_AVX2)
constexpr Table kAvx2{Backend::avx2,     avx2::multiply,     avx2::multiply_conj,
                      avx2::multiply3,   avx2::sum,          avx2::max_abs_diff,
                      avx2::squared_norm};
#endif

bool cpu_has_avx2() noexcept {
#if defined(BUKHGEIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Backend backend) noexcept {
#if defined(BUKHGEIM_HAVE_AVX2)
  if (backend == Backend::avx2) return &kAvx2;
#endif
  return backend == Backend::scalar ? &kScalar : nullptr;
}

const Table* initial_table() noexcept {
  Backend wanted = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("BUKHGEIM_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") wanted = Backend::scalar;
    else if (choice == "avx2" && cpu_has_avx2()) wanted = Backend::avx2;
  }
  return table_for(wanted);
}

const Table*& active() noexcept {
  static const Table* table = initial_table();
  return table;
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) noexcept {
  if (backend == Backend::scalar) return true;
  return table_for(backend) != nullptr && cpu_has_avx2();
}

Backend active_backend() noexcept { return active()->backend; }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw Error(ErrorCode::InvalidArgument,
                "kernel backend '" + std::string(to_string(backend)) + "' is not available");
  }
  active() = table_for(backend);
}

void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out) {
  active()->multiply(a, b, out);
}

void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out) {
  active()->multiply_conj(a, b, c, out);
}

void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out) {
  active()->multiply3(a, b, c, out);
}

complex sum(std::span<const complex> a) { return active()->sum(a); }

double max_abs_diff(std::span<const complex> a, std::span<const complex> b) {
  return active()->max_abs_diff(a, b);
}

double squared_norm(std::span<const complex> a) { return active()->squared_norm(a); }

}  // namespace bukhgeim::kernels
