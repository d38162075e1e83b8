#pragma once

// Uniform square grids, complex fields on them, midpoint quadrature and the
// analytic presets (bump test functions, exp(bump) conductivities).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bukhgeim/error.hpp"

namespace bukhgeim {

using complex = std::complex<double>;

/// Uniform N x N grid on the square [-L, L)^2.
///
/// Node (j, k) sits at (-L + j h) + i(-L + k h) with h = 2L/N. Storage is
/// row-major with k (the y index) as the row: flat index = k * N + j.
class GridSpec {
 public:
  GridSpec(double half_width, int points_per_side);

  double half_width() const noexcept { return half_width_; }
  int points_per_side() const noexcept { return n_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  double cell_area() const noexcept { return spacing_ * spacing_; }

  complex node(int j, int k) const noexcept {
    return {-half_width_ + j * spacing_, -half_width_ + k * spacing_};
  }
  std::size_t index(int j, int k) const noexcept {
    return static_cast<std::size_t>(k) * n_ + j;
  }

  bool operator==(const GridSpec& other) const noexcept {
    return n_ == other.n_ && half_width_ == other.half_width_;
  }

 private:
  double half_width_;
  int n_;
  double spacing_;
};

/// Validating factory. Throws OddGridSize, GridTooSmall or InvalidArgument.
GridSpec make_grid(double half_width, int points_per_side);

/// Half-open rectangle of node indices [j0, j1) x [k0, k1).
struct IndexBox {
  int j0 = 0, j1 = 0, k0 = 0, k1 = 0;

  int width() const noexcept { return j1 - j0; }
  int height() const noexcept { return k1 - k0; }
  bool empty() const noexcept { return j1 <= j0 || k1 <= k0; }
  bool contains(int j, int k) const noexcept { return j >= j0 && j < j1 && k >= k0 && k < k1; }
  bool operator==(const IndexBox&) const = default;
};

class ComplexField {
 public:
  explicit ComplexField(const GridSpec& grid, complex fill = {});
  ComplexField(const GridSpec& grid, std::vector<complex> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<complex> values() noexcept { return values_; }
  std::span<const complex> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  complex& operator[](std::size_t i) noexcept { return values_[i]; }
  const complex& operator[](std::size_t i) const noexcept { return values_[i]; }
  complex& at(int j, int k) noexcept { return values_[grid_.index(j, k)]; }
  const complex& at(int j, int k) const noexcept { return values_[grid_.index(j, k)]; }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;
  double l2_norm() const noexcept;

  /// Smallest box holding every node with a nonzero value (empty box for the zero field).
  IndexBox support_box() const noexcept;

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(complex scale) noexcept;

 private:
  GridSpec grid_;
  std::vector<complex> values_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(complex scale, ComplexField a);
ComplexField conj(ComplexField f);

/// Throws GridMismatch unless both fields live on the same grid.
void require_same_grid(const GridSpec& a, const GridSpec& b, std::string_view where);

/// values[j, k] = f(z_jk). Throws NonFiniteSample if f produces NaN or Inf.
ComplexField sample(const std::function<complex(complex)>& f, const GridSpec& grid);

/// Midpoint rule: spacing^2 * sum of values.
complex integrate(const ComplexField& f);

/// Sup-norm of a - b.
double max_abs_difference(const ComplexField& a, const ComplexField& b);

/// One flag per node (flat index): nonzero nodes of f, dilated by `cells` in
/// the max-norm (a (2 cells + 1)^2 square around each nonzero node).
std::vector<std::uint8_t> dilated_support(const ComplexField& f, int cells);

/// Zeroes every node whose mask flag is clear.
void apply_mask(ComplexField& f, const std::vector<std::uint8_t>& mask);

// ---------------------------------------------------------------------------
// Analytic presets

enum class TestFunctionKind { gaussian_bump, cosine_bump, two_bump };

/// Smooth bump identically zero outside the disk |z - center| < radius,
/// with value `amplitude` at the center.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::gaussian_bump;
  complex center{};
  double radius = 0.5;
  complex amplitude{1.0, 0.0};

  complex operator()(complex z) const noexcept;
  /// Half-width of the axis-aligned square around `center` that holds the support.
  double support_half_width() const noexcept { return radius; }
};

enum class ConductivityKind { unit, real_bump, complex_bump, two_bump };

/// gamma = exp(bump), so gamma == 1 outside the bump support and log(gamma) is
/// globally single-valued.
struct ConductivityPreset {
  ConductivityKind kind = ConductivityKind::unit;
  complex center{};
  double radius = 0.5;
  complex amplitude{};

  complex log_gamma(complex z) const noexcept;
  complex gamma(complex z) const noexcept { return std::exp(log_gamma(z)); }
  TestFunction exponent() const noexcept;

  /// Defaults used by the CLI and the test suites.
  static ConductivityPreset unit();
  static ConductivityPreset real_bump(complex center = {}, double radius = 0.5, double amplitude = 0.8);
  static ConductivityPreset complex_bump(complex center = {}, double radius = 0.5,
                                         complex amplitude = {0.6, 0.4});
  static ConductivityPreset two_bump(complex center = {}, double radius = 0.5,
                                     complex amplitude = {0.7, 0.3});
};

std::string_view to_string(TestFunctionKind kind) noexcept;
std::string_view to_string(ConductivityKind kind) noexcept;
TestFunctionKind parse_test_function_kind(std::string_view name);
ConductivityKind parse_conductivity_kind(std::string_view name);

/// Fraction of the half-width that must separate any support from the grid frame.
inline constexpr double kSupportMargin = 0.1;

/// Throws SupportOutsideGrid unless the square of half-width `half_width`
/// around `center` sits inside the grid with the required margin.
void require_support_inside(const GridSpec& grid, complex center, double half_width);

ComplexField sample(const TestFunction& g, const GridSpec& grid);
ComplexField sample_gamma(const ConductivityPreset& preset, const GridSpec& grid);
ComplexField sample_log_gamma(const ConductivityPreset& preset, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Serialization
//
// CFLD binary layout (little endian):
//   "CFLD" | version u32 | N u32 | L float64 | N*N x (re float64, im float64), row-major

inline constexpr std::uint32_t kCfldVersion = 1;

void write_cfld(const ComplexField& f, const std::filesystem::path& path);
ComplexField read_cfld(const std::filesystem::path& path);
void write_field_csv(const ComplexField& f, const std::filesystem::path& path);

}  // namespace bukhgeim
