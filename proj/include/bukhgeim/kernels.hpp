#pragma once

// Data-parallel inner loops shared by the Cauchy transform and the CGO
// iteration. Every routine has a scalar reference implementation and, on
// x86-64, an AVX2/FMA variant; the variant is picked once at startup from
// CPUID and can be overridden (BUKHGEIM_SIMD=scalar|avx2 or set_backend).
//
// All spans passed to one call must have equal length; aliasing between the
// output and any input is allowed.

#include <complex>
#include <span>
#include <string_view>

namespace bukhgeim::kernels {

using complex = std::complex<double>;

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend backend) noexcept;
bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;
/// Throws InvalidArgument if the backend is not supported on this CPU/build.
void set_backend(Backend backend);

/// out[i] = a[i] * b[i]
void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out);
/// out[i] = a[i] * b[i] * conj(c[i])
void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out);
/// out[i] = a[i] * b[i] * c[i]
void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out);
/// Sum of all entries.
complex sum(std::span<const complex> a);
/// max_i |a[i] - b[i]|
double max_abs_diff(std::span<const complex> a, std::span<const complex> b);
/// sum_i |a[i]|^2
double squared_norm(std::span<const complex> a);

namespace scalar {
void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out);
void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out);
void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out);
complex sum(std::span<const complex> a);
double max_abs_diff(std::span<const complex> a, std::span<const complex> b);
double squared_norm(std::span<const complex> a);
}  // namespace scalar

#if defined(BUKHGEIM_HAVE_AVX2)
namespace avx2 {
void multiply(std::span<const complex> a, std::span<const complex> b, std::span<complex> out);
void multiply_conj(std::span<const complex> a, std::span<const complex> b,
                   std::span<const complex> c, std::span<complex> out);
void multiply3(std::span<const complex> a, std::span<const complex> b,
               std::span<const complex> c, std::span<complex> out);
complex sum(std::span<const complex> a);
double max_abs_diff(std::span<const complex> a, std::span<const complex> b);
double squared_norm(std::span<const complex> a);
}  // namespace avx2
#endif

}  // namespace bukhgeim::kernels
