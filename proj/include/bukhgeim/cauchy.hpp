#pragma once

// Solid Cauchy transform  (Cf)(z) = (1/pi) \int f(z') / (z - z') dsigma(z'),
// the right inverse of dbar on compactly supported densities, plus the
// Wirtinger derivatives dbar = (d_x + i d_y)/2 and partial = (d_x - i d_y)/2.
//
// The fast transform is a zero-padded FFT convolution with the point-sampled
// kernel 1/(pi z); the singular cell carries the exact cell integral of the
// kernel instead of a point value. That punctured rule is only second order:
// the term f_z (z' - z)/(z - z') has a nonzero limit at the singular point
// that the rule drops. The corrected rule adds it back as -(h^2/pi) f_z(z),
// with f_z from a fourth-order stencil folded into the kernel, and is then
// fourth order for smooth densities. The correction is local (two cells), so
// the transform away from the support is unchanged.

#include <memory>

#include "bukhgeim/grid.hpp"

namespace bukhgeim {

namespace detail {
class Convolution;
class FftBuffer;
}  // namespace detail

/// (1/pi) * integral of 1/u over the axis-aligned square cell of side `spacing`
/// centered at `offset`. Closed form; zero for the centered cell.
complex cauchy_cell_integral(complex offset, double spacing);

enum class CauchyQuadrature { punctured, corrected };

/// Precomputed FFT of h^2/(pi z) on a (2N)^2 zero-padded grid. Immutable and
/// shareable across threads; transforms of sub-boxes get their own (smaller)
/// padded kernels, built lazily and cached.
class CauchyKernel {
 public:
  explicit CauchyKernel(const GridSpec& grid, CauchyQuadrature quadrature = CauchyQuadrature::corrected);

  const GridSpec& grid() const noexcept;
  CauchyQuadrature quadrature() const noexcept;
  int padded_size() const noexcept;
  /// Kernel value used at the singular cell: cell integral / h^2.
  complex singular_cell_value() const noexcept;

  std::shared_ptr<const detail::Convolution> full_convolution() const;
  std::shared_ptr<const detail::Convolution> box_convolution(int width, int height) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Per-thread scratch space for transforms. Not shareable between threads.
class CauchyWorkspace {
 public:
  CauchyWorkspace();
  ~CauchyWorkspace();
  CauchyWorkspace(CauchyWorkspace&&) noexcept;
  CauchyWorkspace& operator=(CauchyWorkspace&&) noexcept;

  complex* buffer(std::size_t count);

 private:
  std::unique_ptr<detail::FftBuffer> buffer_;
};

/// Fast transform of a density supported strictly inside the grid.
/// Throws GridMismatch, or SupportAtFrame if f is nonzero on the outermost ring.
ComplexField cauchy_transform(const ComplexField& f, const CauchyKernel& kernel);

/// As above, reusing caller-owned scratch and output storage.
void cauchy_transform(const ComplexField& f, const CauchyKernel& kernel, CauchyWorkspace& workspace,
                      ComplexField& out);

/// Transform restricted to a box: reads f only inside `box` (f is taken to
/// vanish elsewhere) and writes `out` only inside `box`. The box must not touch
/// the grid frame.
void cauchy_transform_box(const ComplexField& f, const IndexBox& box, const CauchyKernel& kernel,
                          CauchyWorkspace& workspace, ComplexField& out);

/// Direct O(N^2)-per-point summation used as an independent check of the fast
/// transform. z need not be a node; the cell containing z contributes its
/// exact cell integral times the node value. With `corrected`, a z that is a
/// node also gets the gradient correction, evaluated from the neighbors.
complex cauchy_oracle(const ComplexField& f, complex z,
                      CauchyQuadrature quadrature = CauchyQuadrature::punctured);

enum class DerivativeMode {
  spectral,           ///< FFT on the (2N)^2 zero-padded grid; needs compact support.
  finite_difference,  ///< fourth-order centered stencil, lower order at the frame.
};

ComplexField dbar(const ComplexField& f, DerivativeMode mode = DerivativeMode::spectral);
ComplexField partial(const ComplexField& f, DerivativeMode mode = DerivativeMode::spectral);

}  // namespace bukhgeim
