#include "bukhgeim/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

namespace bukhgeim {

double annulus_constant() noexcept { return 4.0 * std::numbers::pi * std::numbers::pi * std::numbers::ln2; }

namespace {

// |lambda|^-1 times the quadrature weight, divided by the annulus constant.
std::vector<double> lambda_factors(const AnnulusQuadrature& annulus) {
  std::vector<double> out(annulus.nodes.size());
  const double c = annulus_constant();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = annulus.weights[i] / std::abs(annulus.nodes[i]) / c;
  return out;
}

void require_complete(const ScatteringDataset& ds) {
  if (!ds.complete()) {
    throw Error(ErrorCode::PartialDataset, std::to_string(ds.failed_count()) + " of " +
                                               std::to_string(ds.sample_count()) + " samples did not converge");
  }
}

}  // namespace

Matrix2 reconstruct_weak(const ScatteringDataset& ds, const TestFunction& g) {
  if (ds.w_samples.empty()) throw Error(ErrorCode::SupportNotCovered, "dataset has no w samples");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (complex w : ds.w_samples) {
    x0 = std::min(x0, w.real());
    x1 = std::max(x1, w.real());
    y0 = std::min(y0, w.imag());
    y1 = std::max(y1, w.imag());
  }
  const double r = g.support_half_width();
  const double slack = 1e-9 * ds.grid.spacing();
  if (g.center.real() - r < x0 - slack || g.center.real() + r > x1 + slack || g.center.imag() - r < y0 - slack ||
      g.center.imag() + r > y1 + slack) {
    throw Error(ErrorCode::SupportNotCovered, "test function support leaves the w samples");
  }
  require_complete(ds);

  const double spacing = ds.w_sampling.coarse_grid(ds.grid).spacing();
  const double area = spacing * spacing;
  std::vector<complex> gw(ds.w_samples.size());
  for (std::size_t iw = 0; iw < gw.size(); ++iw) gw[iw] = g(ds.w_samples[iw]) * area;

  const std::vector<double> factor = lambda_factors(ds.annulus);
  Matrix2 total{};
  for (std::size_t il = 0; il < ds.annulus.nodes.size(); ++il) {
    Matrix2 paired{};
    for (std::size_t iw = 0; iw < gw.size(); ++iw) {
      const Matrix2& h = ds.h[ds.sample_id(il, iw)];
      for (int e = 0; e < 4; ++e) paired[e] += gw[iw] * h[e];
    }
    for (int e = 0; e < 4; ++e) total[e] += factor[il] * paired[e];
  }
  return total;
}

double PointwiseReconstruction::noise_floor() const noexcept {
  const double off = std::max(potential.q12.max_abs(), potential.q21.max_abs());
  const double diag = std::max(diagonal11.max_abs(), diagonal22.max_abs());
  if (off == 0.0) return diag == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diag / off;
}

PointwiseReconstruction reconstruct_pointwise(const ScatteringDataset& ds) {
  require_complete(ds);
  const GridSpec coarse = ds.w_sampling.coarse_grid(ds.grid);
  PointwiseReconstruction rec{DiracPotential(coarse), ComplexField(coarse), ComplexField(coarse),
                              ds.annulus.inner_radius};
  const auto indices = ds.w_sampling.coarse_indices(ds.grid);
  if (indices.size() != ds.w_samples.size()) {
    throw Error(ErrorCode::FormatError, "w samples do not match the dataset's w sampling");
  }
  const std::vector<double> factor = lambda_factors(ds.annulus);
  for (std::size_t iw = 0; iw < indices.size(); ++iw) {
    Matrix2 sum{};
    for (std::size_t il = 0; il < ds.annulus.nodes.size(); ++il) {
      const Matrix2& h = ds.h[ds.sample_id(il, iw)];
      for (int e = 0; e < 4; ++e) sum[e] += factor[il] * h[e];
    }
    const auto [j, k] = indices[iw];
    rec.diagonal11.at(j, k) = sum[0];
    rec.potential.q12.at(j, k) = sum[1];
    rec.potential.q21.at(j, k) = sum[2];
    rec.diagonal22.at(j, k) = sum[3];
  }
  return rec;
}

ComplexField recover_gamma(const PointwiseReconstruction& rec, const GammaOptions& options) {
  const GridSpec& grid = rec.potential.grid();
  ComplexField gamma = potential_to_conductivity(rec.potential, CauchyKernel(grid), options.inversion);
  const int n = grid.points_per_side();
  complex frame{};
  for (int i = 0; i < n - 1; ++i) {
    frame += gamma.at(i, 0) + gamma.at(n - 1, i) + gamma.at(n - 1 - i, n - 1) + gamma.at(0, n - 1 - i);
  }
  frame /= 4.0 * (n - 1);
  gamma *= 1.0 / frame;
  return gamma;
}

ComplexField recover_gamma(const ScatteringDataset& ds, const GammaOptions& options) {
  return recover_gamma(reconstruct_pointwise(ds), options);
}

ComplexField restrict_to_samples(const ComplexField& fine, const WSampling& w_sampling) {
  const GridSpec coarse = w_sampling.coarse_grid(fine.grid());
  ComplexField out(coarse);
  for (auto [j, k] : w_sampling.coarse_indices(fine.grid())) {
    out.at(j, k) = fine.at(j * w_sampling.stride, k * w_sampling.stride);
  }
  return out;
}

DiracPotential restrict_to_samples(const DiracPotential& fine, const WSampling& w_sampling) {
  return DiracPotential(restrict_to_samples(fine.q12, w_sampling), restrict_to_samples(fine.q21, w_sampling));
}

// ---------------------------------------------------------------------------

StationaryPhaseTable stationary_phase_check(const TestFunction& g, complex z, const std::vector<complex>& lambdas,
                                            const GridSpec& grid) {
  const ComplexField values = sample(g, grid);
  const complex gz = g(z);
  StationaryPhaseTable table{{}, std::numeric_limits<double>::quiet_NaN()};
  for (complex lambda : lambdas) {
    const Phase phase = bukhgeim_phase(grid, {lambda, z});
    ComplexField product(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) product[i] = phase.e_minus[i] * values[i];
    const complex lhs = integrate(product);
    const double modulus = std::abs(lambda);
    const complex leading = 2.0 * std::numbers::pi / modulus * gz;
    table.rows.push_back({modulus, lhs, leading, std::abs(lhs - leading)});
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const auto& row : table.rows) {
    if (!(row.abs_error > 0.0) || !(row.modulus > 0.0)) continue;
    const double x = std::log(row.modulus), y = std::log(row.abs_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  if (count >= 2 && denom > 0.0) table.slope = (count * sxy - sx * sy) / denom;
  return table;
}

void write_stationary_phase_csv(const StationaryPhaseTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(17);
  out << "abs_lambda,lhs_re,lhs_im,leading_re,leading_im,abs_error\n";
  for (const auto& r : table.rows) {
    out << r.modulus << ',' << r.lhs.real() << ',' << r.lhs.imag() << ',' << r.leading.real() << ','
        << r.leading.imag() << ',' << r.abs_error << '\n';
  }
  out << "# slope," << table.slope << '\n';
}

// ---------------------------------------------------------------------------

namespace {

struct Norms {
  double diff_sq = 0, ref_sq = 0, diff_max = 0, ref_max = 0;

  void add(complex f, complex ref) {
    const double d = std::abs(f - ref), r = std::abs(ref);
    diff_sq += d * d;
    ref_sq += r * r;
    diff_max = std::max(diff_max, d);
    ref_max = std::max(ref_max, r);
  }
  double rel_l2() const { return ref_sq > 0 ? std::sqrt(diff_sq / ref_sq) : std::sqrt(diff_sq); }
  double rel_linf() const { return ref_max > 0 ? diff_max / ref_max : diff_max; }
};

ErrorMetrics combine(const std::vector<const ComplexField*>& fs, const std::vector<const ComplexField*>& refs) {
  Norms all, support;
  for (std::size_t m = 0; m < fs.size(); ++m) {
    require_same_grid(fs[m]->grid(), refs[m]->grid(), "error_metrics");
    const std::vector<std::uint8_t> mask = dilated_support(*refs[m], 2);
    for (std::size_t i = 0; i < fs[m]->size(); ++i) {
      all.add((*fs[m])[i], (*refs[m])[i]);
      if (mask[i]) support.add((*fs[m])[i], (*refs[m])[i]);
    }
  }
  return {all.rel_l2(), all.rel_linf(), support.rel_l2(), support.rel_linf()};
}

}  // namespace

ErrorMetrics error_metrics(const ComplexField& f, const ComplexField& ref) { return combine({&f}, {&ref}); }

ErrorMetrics error_metrics(const DiracPotential& f, const DiracPotential& ref) {
  return combine({&f.q12, &f.q21}, {&ref.q12, &ref.q21});
}

}  // namespace bukhgeim
