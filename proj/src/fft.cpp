#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <utility>

#include "bukhgeim/kernels.hpp"

namespace bukhgeim::detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

FftBuffer::FftBuffer(std::size_t count) { reserve(count); }

FftBuffer::~FftBuffer() {
  if (data_) fftw_free(data_);
}

FftBuffer::FftBuffer(FftBuffer&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}

FftBuffer& FftBuffer::operator=(FftBuffer&& other) noexcept {
  if (this != &other) {
    if (data_) fftw_free(data_);
    data_ = std::exchange(other.data_, nullptr);
    size_ = std::exchange(other.size_, 0);
  }
  return *this;
}

complex* FftBuffer::reserve(std::size_t count) {
  if (count <= size_) return data_;
  if (data_) fftw_free(data_);
  data_ = reinterpret_cast<complex*>(fftw_alloc_complex(count));
  if (!data_) {
    size_ = 0;
    throw std::bad_alloc();
  }
  size_ = count;
  return data_;
}

Fft2d::Fft2d(int rows, int cols) : rows_(rows), cols_(cols) {
  FftBuffer scratch(size());
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(fftw_planner_mutex());
  forward_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_2d(rows, cols, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw std::bad_alloc();
}

Fft2d::~Fft2d() {
  std::lock_guard lock(fftw_planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
}

void Fft2d::forward(complex* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(forward_, p, p);
}

void Fft2d::backward(complex* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(backward_, p, p);
}

void Convolution::finish_setup(std::vector<complex> samples) {
  FftBuffer work(fft_.size());
  std::copy(samples.begin(), samples.end(), work.data());
  fft_.forward(work.data());
  const double scale = 1.0 / static_cast<double>(fft_.size());
  spectrum_.assign(work.data(), work.data() + fft_.size());
  for (complex& v : spectrum_) v *= scale;
}

void Convolution::apply(complex* padded) const {
  fft_.forward(padded);
  std::span<complex> data(padded, fft_.size());
  kernels::multiply(data, spectrum_, data);
  fft_.backward(padded);
}

}  // namespace bukhgeim::detail
