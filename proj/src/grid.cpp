#include "bukhgeim/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bukhgeim/kernels.hpp"

namespace bukhgeim {

// Smallest grid accepted; anything below cannot hold a support with a frame margin.
constexpr int kMinPointsPerSide = 4;

GridSpec::GridSpec(double half_width, int points_per_side)
    : half_width_(half_width),
      n_(points_per_side),
      spacing_(2.0 * half_width / points_per_side) {}

GridSpec make_grid(double half_width, int points_per_side) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::InvalidArgument, "half_width must be positive and finite");
  }
  if (points_per_side % 2 != 0) {
    throw Error(ErrorCode::OddGridSize,
                "points_per_side must be even, got " + std::to_string(points_per_side));
  }
  if (points_per_side < kMinPointsPerSide) {
    throw Error(ErrorCode::GridTooSmall,
                "points_per_side must be at least " + std::to_string(kMinPointsPerSide));
  }
  return GridSpec(half_width, points_per_side);
}

// ---------------------------------------------------------------------------

ComplexField::ComplexField(const GridSpec& grid, complex fill)
    : grid_(grid), values_(grid.size(), fill) {}

ComplexField::ComplexField(const GridSpec& grid, std::vector<complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match grid size");
  }
}

bool ComplexField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](complex v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double ComplexField::max_abs() const noexcept {
  double m = 0.0;
  for (complex v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexField::l2_norm() const noexcept {
  return std::sqrt(kernels::squared_norm(values_));
}

IndexBox ComplexField::support_box() const noexcept {
  const int n = grid_.points_per_side();
  IndexBox box{n, 0, n, 0};
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (at(j, k) != complex{}) {
        box.j0 = std::min(box.j0, j);
        box.j1 = std::max(box.j1, j + 1);
        box.k0 = std::min(box.k0, k);
        box.k1 = std::max(box.k1, k + 1);
      }
    }
  }
  if (box.empty()) return IndexBox{};
  return box;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, std::string_view where) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << where << ": grids differ (N=" << a.points_per_side() << ", L=" << a.half_width()
        << " vs N=" << b.points_per_side() << ", L=" << b.half_width() << ")";
    throw Error(ErrorCode::GridMismatch, msg.str());
  }
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(complex scale) noexcept {
  for (complex& v : values_) v *= scale;
  return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(complex scale, ComplexField a) { return a *= scale; }

ComplexField conj(ComplexField f) {
  for (complex& v : f.values()) v = std::conj(v);
  return f;
}

ComplexField sample(const std::function<complex(complex)>& f, const GridSpec& grid) {
  ComplexField out(grid);
  const int n = grid.points_per_side();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const complex v = f(grid.node(j, k));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream msg;
        msg << "non-finite value at node (" << j << ", " << k << ")";
        throw Error(ErrorCode::NonFiniteSample, msg.str());
      }
      out.at(j, k) = v;
    }
  }
  return out;
}

complex integrate(const ComplexField& f) {
  return f.grid().cell_area() * kernels::sum(f.values());
}

double max_abs_difference(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid(), b.grid(), "max_abs_difference");
  return kernels::max_abs_diff(a.values(), b.values());
}

// ---------------------------------------------------------------------------

namespace {

double smooth_bump(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double cosine_profile(double s) {
  if (s >= 1.0) return 0.0;
  const double c = 0.5 * (1.0 + std::cos(std::numbers::pi * s));
  return c * c * c;
}

// Second lobe of the two-bump profile, placed so that it vanishes at the center.
constexpr double kLobeOffset = 0.5;
constexpr double kLobeRadius = 0.35;
constexpr double kLobeWeight = -0.6;

}  // namespace

complex TestFunction::operator()(complex z) const noexcept {
  const double s = std::abs(z - center) / radius;
  switch (kind) {
    case TestFunctionKind::gaussian_bump:
      return amplitude * smooth_bump(s);
    case TestFunctionKind::cosine_bump:
      return amplitude * cosine_profile(s);
    case TestFunctionKind::two_bump: {
      const complex lobe_center = center + kLobeOffset * radius;
      const double s2 = std::abs(z - lobe_center) / (kLobeRadius * radius);
      return amplitude * (smooth_bump(s) + kLobeWeight * smooth_bump(s2));
    }
  }
  return {};
}

TestFunction ConductivityPreset::exponent() const noexcept {
  TestFunction f;
  f.center = center;
  f.radius = radius;
  switch (kind) {
    case ConductivityKind::unit:
      f.amplitude = 0.0;
      break;
    case ConductivityKind::real_bump:
      f.amplitude = amplitude.real();
      break;
    case ConductivityKind::complex_bump:
      f.amplitude = amplitude;
      break;
    case ConductivityKind::two_bump:
      f.kind = TestFunctionKind::two_bump;
      f.amplitude = amplitude;
      break;
  }
  return f;
}

complex ConductivityPreset::log_gamma(complex z) const noexcept {
  if (kind == ConductivityKind::unit) return {};
  return exponent()(z);
}

ConductivityPreset ConductivityPreset::unit() { return {}; }

ConductivityPreset ConductivityPreset::real_bump(complex center, double radius, double amplitude) {
  return {ConductivityKind::real_bump, center, radius, amplitude};
}

ConductivityPreset ConductivityPreset::complex_bump(complex center, double radius, complex amplitude) {
  return {ConductivityKind::complex_bump, center, radius, amplitude};
}

ConductivityPreset ConductivityPreset::two_bump(complex center, double radius, complex amplitude) {
  return {ConductivityKind::two_bump, center, radius, amplitude};
}

std::string_view to_string(TestFunctionKind kind) noexcept {
  switch (kind) {
    case TestFunctionKind::gaussian_bump: return "gaussian_bump";
    case TestFunctionKind::cosine_bump: return "cosine_bump";
    case TestFunctionKind::two_bump: return "two_bump";
  }
  return "?";
}

std::string_view to_string(ConductivityKind kind) noexcept {
  switch (kind) {
    case ConductivityKind::unit: return "unit";
    case ConductivityKind::real_bump: return "real_bump";
    case ConductivityKind::complex_bump: return "complex_bump";
    case ConductivityKind::two_bump: return "two_bump";
  }
  return "?";
}

TestFunctionKind parse_test_function_kind(std::string_view name) {
  for (auto kind : {TestFunctionKind::gaussian_bump, TestFunctionKind::cosine_bump,
                    TestFunctionKind::two_bump}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::ConfigError, "unknown test function kind '" + std::string(name) + "'");
}

ConductivityKind parse_conductivity_kind(std::string_view name) {
  for (auto kind : {ConductivityKind::unit, ConductivityKind::real_bump,
                    ConductivityKind::complex_bump, ConductivityKind::two_bump}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::ConfigError, "unknown conductivity preset '" + std::string(name) + "'");
}

void require_support_inside(const GridSpec& grid, complex center, double half_width) {
  const double reach = std::max(std::abs(center.real()), std::abs(center.imag())) + half_width;
  const double limit = (1.0 - kSupportMargin) * grid.half_width();
  if (reach > limit) {
    std::ostringstream msg;
    msg << "support reaches " << reach << " but must stay within " << limit
        << " (10% frame margin on L=" << grid.half_width() << ")";
    throw Error(ErrorCode::SupportOutsideGrid, msg.str());
  }
}

ComplexField sample(const TestFunction& g, const GridSpec& grid) {
  require_support_inside(grid, g.center, g.support_half_width());
  return sample(std::function<complex(complex)>(g), grid);
}

ComplexField sample_log_gamma(const ConductivityPreset& preset, const GridSpec& grid) {
  if (preset.kind != ConductivityKind::unit) {
    require_support_inside(grid, preset.center, preset.radius);
  }
  return sample([&preset](complex z) { return preset.log_gamma(z); }, grid);
}

ComplexField sample_gamma(const ConductivityPreset& preset, const GridSpec& grid) {
  ComplexField f = sample_log_gamma(preset, grid);
  for (complex& v : f.values()) v = std::exp(v);
  return f;
}

std::vector<std::uint8_t> dilated_support(const ComplexField& f, int cells) {
  const int n = f.grid().points_per_side();
  std::vector<std::uint8_t> rows(f.size(), 0), mask(f.size(), 0);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (f.at(j, k) == complex{}) continue;
      for (int jj = std::max(0, j - cells); jj <= std::min(n - 1, j + cells); ++jj) {
        rows[f.grid().index(jj, k)] = 1;
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      if (!rows[f.grid().index(j, k)]) continue;
      for (int kk = std::max(0, k - cells); kk <= std::min(n - 1, k + cells); ++kk) {
        mask[f.grid().index(j, kk)] = 1;
      }
    }
  }
  return mask;
}

void apply_mask(ComplexField& f, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != f.size()) throw Error(ErrorCode::GridMismatch, "mask size does not match field");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask[i]) f[i] = complex{};
  }
}

// ---------------------------------------------------------------------------

static_assert(std::endian::native == std::endian::little, "CFLD I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::FormatError, "truncated CFLD stream");
  return value;
}

}  // namespace

void write_cfld(const ComplexField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write("CFLD", 4);
  put<std::uint32_t>(out, kCfldVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().points_per_side()));
  put<double>(out, f.grid().half_width());
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(complex)));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

ComplexField read_cfld(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CFLD", 4) != 0) {
    throw Error(ErrorCode::FormatError, path.string() + " is not a CFLD file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCfldVersion) {
    throw Error(ErrorCode::FormatError, "unsupported CFLD version " + std::to_string(version));
  }
  const auto n = get<std::uint32_t>(in);
  const auto half_width = get<double>(in);
  const GridSpec grid = make_grid(half_width, static_cast<int>(n));
  std::vector<complex> values(grid.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(complex)));
  if (!in) throw Error(ErrorCode::FormatError, "truncated CFLD payload in " + path.string());
  ComplexField field(grid, std::move(values));
  if (!field.all_finite()) throw Error(ErrorCode::FormatError, "non-finite values in " + path.string());
  return field;
}

void write_field_csv(const ComplexField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "x,y,re,im\n";
  const int n = f.grid().points_per_side();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const complex z = f.grid().node(j, k);
      const complex v = f.at(j, k);
      out << z.real() << ',' << z.imag() << ',' << v.real() << ',' << v.imag() << '\n';
    }
  }
}

}  // namespace bukhgeim
