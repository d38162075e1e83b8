#pragma once

// Thin RAII layer over FFTW. The planner is not thread-safe, so every plan is
// created under one process-wide mutex; execution on caller buffers
// (fftw_execute_dft) is reentrant. Plans use FFTW_ESTIMATE so that the chosen
// algorithm, and therefore every rounding, is identical from run to run.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

namespace bukhgeim::detail {

using complex = std::complex<double>;

std::mutex& fftw_planner_mutex();

/// Smallest m >= n whose only prime factors are 2, 3, 5, 7.
int fft_friendly_size(int n);

class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t count);
  ~FftBuffer();
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  FftBuffer(FftBuffer&& other) noexcept;
  FftBuffer& operator=(FftBuffer&& other) noexcept;

  complex* data() noexcept { return data_; }
  std::size_t size() const noexcept { return size_; }
  /// Grows (never shrinks) to hold `count` values; contents are not preserved.
  complex* reserve(std::size_t count);

 private:
  complex* data_ = nullptr;
  std::size_t size_ = 0;
};

/// In-place 2D complex FFT pair on a rows x cols row-major array.
class Fft2d {
 public:
  Fft2d(int rows, int cols);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

  /// `data` must come from an FftBuffer (FFTW's SIMD alignment).
  void forward(complex* data) const;
  /// Unnormalized inverse.
  void backward(complex* data) const;

 private:
  int rows_, cols_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Linear convolution with a fixed kernel through a zero-padded cyclic FFT.
/// The input occupies the first `height` rows and `width` columns of the
/// padded array; offsets up to (width-1, height-1) in either direction are
/// represented without wrap-around.
class Convolution {
 public:
  /// kernel(dj, dk) weights an input node sitting (dj, dk) cells before the
  /// output node (output index minus input index); sampled for |dj| < width,
  /// |dk| < height.
  template <typename KernelFn>
  Convolution(int width, int height, int padded_cols, int padded_rows, KernelFn kernel);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int padded_cols() const noexcept { return fft_.cols(); }
  int padded_rows() const noexcept { return fft_.rows(); }
  std::size_t padded_size() const noexcept { return fft_.size(); }

  /// In-place: padded input -> padded output (normalized). Cell (row k, col j)
  /// of the result holds the convolution at output offset (j, k).
  void apply(complex* padded) const;

 private:
  void finish_setup(std::vector<complex> samples);

  int width_, height_;
  Fft2d fft_;
  std::vector<complex> spectrum_;
};

template <typename KernelFn>
Convolution::Convolution(int width, int height, int padded_cols, int padded_rows, KernelFn kernel)
    : width_(width), height_(height), fft_(padded_rows, padded_cols) {
  std::vector<complex> samples(fft_.size());
  for (int dk = -(height - 1); dk <= height - 1; ++dk) {
    const int row = (dk + padded_rows) % padded_rows;
    for (int dj = -(width - 1); dj <= width - 1; ++dj) {
      const int col = (dj + padded_cols) % padded_cols;
      samples[static_cast<std::size_t>(row) * padded_cols + col] = kernel(dj, dk);
    }
  }
  finish_setup(std::move(samples));
}

}  // namespace bukhgeim::detail
