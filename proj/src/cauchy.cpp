#include "bukhgeim/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fft.hpp"

namespace bukhgeim {

namespace {

// Antiderivatives F with d^2F/dxdy = x/(x^2+y^2) and y/(x^2+y^2).
double primitive_x(double x, double y) {
  if (x == 0.0 && y == 0.0) return 0.0;
  const double log_term = 0.5 * y * std::log(x * x + y * y);
  return x == 0.0 ? log_term : log_term + x * std::atan(y / x);
}

double primitive_y(double x, double y) { return primitive_x(y, x); }

double rectangle(double (*f)(double, double), double x0, double x1, double y0, double y1) {
  return f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0);
}

void require_clear_frame(const ComplexField& f) {
  const int n = f.grid().points_per_side();
  for (int i = 0; i < n; ++i) {
    if (f.at(i, 0) != complex{} || f.at(i, n - 1) != complex{} || f.at(0, i) != complex{} ||
        f.at(n - 1, i) != complex{}) {
      throw Error(ErrorCode::SupportAtFrame,
                  "Cauchy transform density must vanish on the grid frame");
    }
  }
}

}  // namespace

complex cauchy_cell_integral(complex offset, double spacing) {
  const double half = 0.5 * spacing;
  const double x0 = offset.real() - half, x1 = offset.real() + half;
  const double y0 = offset.imag() - half, y1 = offset.imag() + half;
  // 1/(x+iy) = (x - iy)/(x^2+y^2)
  const double re = rectangle(primitive_x, x0, x1, y0, y1);
  const double im = -rectangle(primitive_y, x0, x1, y0, y1);
  return complex(re, im) / std::numbers::pi;
}

// ---------------------------------------------------------------------------

// Fourth-order first-derivative weights at offsets -2..2 (times 1/h).
constexpr double kStencil[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};

struct CauchyKernel::Impl {
  GridSpec grid;
  CauchyQuadrature quadrature;
  complex singular_cell_integral;
  std::shared_ptr<detail::Convolution> full;
  mutable std::mutex cache_mutex;
  mutable std::map<std::pair<int, int>, std::shared_ptr<detail::Convolution>> boxes;

  Impl(const GridSpec& g, CauchyQuadrature q)
      : grid(g), quadrature(q), singular_cell_integral(cauchy_cell_integral({}, g.spacing())) {
    const int n = g.points_per_side();
    full = make(n, n, 2 * n, 2 * n);
  }

  std::shared_ptr<detail::Convolution> make(int width, int height, int cols, int rows) const {
    const double h = grid.spacing();
    const complex singular = singular_cell_integral;
    const bool corrected = quadrature == CauchyQuadrature::corrected;
    return std::make_shared<detail::Convolution>(width, height, cols, rows, [=](int dj, int dk) {
      complex w = (dj == 0 && dk == 0) ? singular : complex(h / std::numbers::pi, 0.0) / complex(dj, dk);
      if (corrected) {
        // -(h^2/pi) * (f_x - i f_y)/2; the input sits at offset -d from the output.
        const double c = h / (2.0 * std::numbers::pi);
        if (dk == 0 && std::abs(dj) <= 2) w -= c * kStencil[2 - dj];
        if (dj == 0 && std::abs(dk) <= 2) w += complex(0.0, c * kStencil[2 - dk]);
      }
      return w;
    });
  }
};

CauchyKernel::CauchyKernel(const GridSpec& grid, CauchyQuadrature quadrature)
    : impl_(std::make_shared<Impl>(grid, quadrature)) {}

const GridSpec& CauchyKernel::grid() const noexcept { return impl_->grid; }

CauchyQuadrature CauchyKernel::quadrature() const noexcept { return impl_->quadrature; }

int CauchyKernel::padded_size() const noexcept { return impl_->full->padded_cols(); }

complex CauchyKernel::singular_cell_value() const noexcept {
  return impl_->singular_cell_integral / impl_->grid.cell_area();
}

std::shared_ptr<const detail::Convolution> CauchyKernel::full_convolution() const { return impl_->full; }

std::shared_ptr<const detail::Convolution> CauchyKernel::box_convolution(int width, int height) const {
  std::lock_guard lock(impl_->cache_mutex);
  auto& slot = impl_->boxes[{width, height}];
  if (!slot) {
    slot = impl_->make(width, height, detail::fft_friendly_size(2 * width),
                       detail::fft_friendly_size(2 * height));
  }
  return slot;
}

// ---------------------------------------------------------------------------

CauchyWorkspace::CauchyWorkspace() : buffer_(std::make_unique<detail::FftBuffer>()) {}
CauchyWorkspace::~CauchyWorkspace() = default;
CauchyWorkspace::CauchyWorkspace(CauchyWorkspace&&) noexcept = default;
CauchyWorkspace& CauchyWorkspace::operator=(CauchyWorkspace&&) noexcept = default;

complex* CauchyWorkspace::buffer(std::size_t count) { return buffer_->reserve(count); }

namespace {

void convolve_region(const ComplexField& f, int j0, int k0, int width, int height,
                     const detail::Convolution& conv, CauchyWorkspace& workspace, ComplexField& out) {
  const int cols = conv.padded_cols();
  complex* padded = workspace.buffer(conv.padded_size());
  std::fill(padded, padded + conv.padded_size(), complex{});
  for (int k = 0; k < height; ++k) {
    const complex* src = &f.at(j0, k0 + k);
    std::copy(src, src + width, padded + static_cast<std::size_t>(k) * cols);
  }
  conv.apply(padded);
  for (int k = 0; k < height; ++k) {
    const complex* src = padded + static_cast<std::size_t>(k) * cols;
    std::copy(src, src + width, &out.at(j0, k0 + k));
  }
}

}  // namespace

void cauchy_transform(const ComplexField& f, const CauchyKernel& kernel, CauchyWorkspace& workspace,
                      ComplexField& out) {
  require_same_grid(f.grid(), kernel.grid(), "cauchy_transform");
  require_same_grid(out.grid(), kernel.grid(), "cauchy_transform output");
  require_clear_frame(f);
  const int n = f.grid().points_per_side();
  convolve_region(f, 0, 0, n, n, *kernel.full_convolution(), workspace, out);
}

ComplexField cauchy_transform(const ComplexField& f, const CauchyKernel& kernel) {
  CauchyWorkspace workspace;
  ComplexField out(f.grid());
  cauchy_transform(f, kernel, workspace, out);
  return out;
}

void cauchy_transform_box(const ComplexField& f, const IndexBox& box, const CauchyKernel& kernel,
                          CauchyWorkspace& workspace, ComplexField& out) {
  require_same_grid(f.grid(), kernel.grid(), "cauchy_transform_box");
  require_same_grid(out.grid(), kernel.grid(), "cauchy_transform_box output");
  const int n = f.grid().points_per_side();
  if (box.empty()) return;
  if (box.j0 < 1 || box.k0 < 1 || box.j1 > n - 1 || box.k1 > n - 1) {
    throw Error(ErrorCode::SupportAtFrame, "transform box touches the grid frame");
  }
  const auto conv = kernel.box_convolution(box.width(), box.height());
  convolve_region(f, box.j0, box.k0, box.width(), box.height(), *conv, workspace, out);
}

complex cauchy_oracle(const ComplexField& f, complex z, CauchyQuadrature quadrature) {
  const GridSpec& grid = f.grid();
  const double h = grid.spacing();
  const double half = 0.5 * h;
  const int n = grid.points_per_side();
  complex total{};
  if (quadrature == CauchyQuadrature::corrected) {
    const complex rel = (z - grid.node(0, 0)) / h;
    const int j = static_cast<int>(std::lround(rel.real()));
    const int k = static_cast<int>(std::lround(rel.imag()));
    if (std::abs(rel - complex(j, k)) < 1e-9 && j >= 0 && k >= 0 && j < n && k < n) {
      auto value = [&](int jj, int kk) {
        return (jj < 0 || kk < 0 || jj >= n || kk >= n) ? complex{} : f.at(jj, kk);
      };
      complex fx{}, fy{};
      for (int m = -2; m <= 2; ++m) {
        fx += kStencil[m + 2] * value(j + m, k);
        fy += kStencil[m + 2] * value(j, k + m);
      }
      const complex f_z = 0.5 * (fx - complex(0.0, 1.0) * fy) / h;
      total -= grid.cell_area() / std::numbers::pi * f_z;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const complex value = f.at(j, k);
      if (value == complex{}) continue;
      const complex d = z - grid.node(j, k);
      if (std::abs(d.real()) <= half && std::abs(d.imag()) <= half) {
        total += cauchy_cell_integral(d, h) * value;
      } else {
        total += grid.cell_area() * value / (std::numbers::pi * d);
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

namespace {

enum class Wirtinger { dbar, partial };

ComplexField spectral_derivative(const ComplexField& f, Wirtinger which) {
  const GridSpec& grid = f.grid();
  const int n = grid.points_per_side();
  const int p = 2 * n;
  const double h = grid.spacing();
  detail::Fft2d fft(p, p);
  detail::FftBuffer buffer(fft.size());
  complex* data = buffer.data();
  std::fill(data, data + fft.size(), complex{});
  for (int k = 0; k < n; ++k) {
    std::copy(&f.at(0, k), &f.at(0, k) + n, data + static_cast<std::size_t>(k) * p);
  }
  fft.forward(data);

  auto wavenumber = [p, h](int m) {
    if (2 * m == p) return 0.0;  // Nyquist mode carries no derivative information
    const int signed_m = 2 * m < p ? m : m - p;
    return 2.0 * std::numbers::pi * signed_m / (p * h);
  };
  const double scale = 1.0 / static_cast<double>(fft.size());
  const double sign = which == Wirtinger::dbar ? -1.0 : 1.0;
  for (int row = 0; row < p; ++row) {
    const double ky = wavenumber(row);
    for (int col = 0; col < p; ++col) {
      const double kx = wavenumber(col);
      // dbar -> (i kx - ky)/2, partial -> (i kx + ky)/2
      const complex symbol(0.5 * sign * ky, 0.5 * kx);
      data[static_cast<std::size_t>(row) * p + col] *= symbol * scale;
    }
  }
  fft.backward(data);

  ComplexField out(grid);
  for (int k = 0; k < n; ++k) {
    const complex* src = data + static_cast<std::size_t>(k) * p;
    std::copy(src, src + n, &out.at(0, k));
  }
  return out;
}

// d/dx along index j when `along_x`, d/dy along k otherwise.
complex fd_derivative(const ComplexField& f, int j, int k, bool along_x) {
  const int n = f.grid().points_per_side();
  const double h = f.grid().spacing();
  const int i = along_x ? j : k;
  auto v = [&](int offset) { return along_x ? f.at(j + offset, k) : f.at(j, k + offset); };
  if (i >= 2 && i <= n - 3) {
    return (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * h);
  }
  if (i == 1 || i == n - 2) return (v(1) - v(-1)) / (2.0 * h);
  if (i == 0) return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
  return (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h);
}

ComplexField fd_wirtinger(const ComplexField& f, Wirtinger which) {
  const int n = f.grid().points_per_side();
  const complex i_sign(0.0, which == Wirtinger::dbar ? 1.0 : -1.0);
  ComplexField out(f.grid());
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      out.at(j, k) = 0.5 * (fd_derivative(f, j, k, true) + i_sign * fd_derivative(f, j, k, false));
    }
  }
  return out;
}

}  // namespace

ComplexField dbar(const ComplexField& f, DerivativeMode mode) {
  return mode == DerivativeMode::spectral ? spectral_derivative(f, Wirtinger::dbar)
                                          : fd_wirtinger(f, Wirtinger::dbar);
}

ComplexField partial(const ComplexField& f, DerivativeMode mode) {
  return mode == DerivativeMode::spectral ? spectral_derivative(f, Wirtinger::partial)
                                          : fd_wirtinger(f, Wirtinger::partial);
}

}  // namespace bukhgeim
