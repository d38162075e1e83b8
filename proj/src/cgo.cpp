#include "bukhgeim/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "bukhgeim/kernels.hpp"

namespace bukhgeim {

MatrixField MatrixField::identity(const GridSpec& grid) {
  MatrixField m(grid);
  m.m11 = ComplexField(grid, 1.0);
  m.m22 = ComplexField(grid, 1.0);
  return m;
}

ComplexField& MatrixField::entry(int i) noexcept {
  switch (i) {
    case 0: return m11;
    case 1: return m12;
    case 2: return m21;
    default: return m22;
  }
}

const ComplexField& MatrixField::entry(int i) const noexcept {
  return const_cast<MatrixField*>(this)->entry(i);
}

Phase bukhgeim_phase(const GridSpec& grid, const SpectralPoint& sp) {
  Phase phase{std::vector<double>(grid.size()), ComplexField(grid), ComplexField(grid)};
  const int n = grid.points_per_side();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const complex d = grid.node(j, k) - sp.w;
      const double rho = 0.5 * (sp.lambda * d * d).imag();
      const std::size_t i = grid.index(j, k);
      const double c = std::cos(rho), s = std::sin(rho);
      phase.rho[i] = rho;
      phase.e_minus[i] = {c, -s};
      phase.e_plus[i] = {c, s};
    }
  }
  return phase;
}

namespace {

// out = a * b * conj(c) on the whole grid.
ComplexField product_conj(const ComplexField& a, const ComplexField& b, const ComplexField& c) {
  ComplexField out(a.grid());
  kernels::multiply_conj(a.values(), b.values(), c.values(), out.values());
  return out;
}

ComplexField apply_M_with(const ComplexField& f, const DiracPotential& q, const ComplexField& e_minus,
                          const CauchyKernel& kernel, CauchyWorkspace& ws) {
  ComplexField inner(f.grid());
  cauchy_transform(product_conj(e_minus, q.q21, f), kernel, ws, inner);
  ComplexField out(f.grid());
  cauchy_transform(product_conj(e_minus, q.q12, inner), kernel, ws, out);
  return out;
}

// Densities e_minus Q conj(mu) for the four entries, inside `box` only.
// Entry i of the result pairs Q12 (rows of mu's second row) or Q21.
void densities(const MatrixField& mu, const DiracPotential& q, const ComplexField& e_minus, const IndexBox& box,
               MatrixField& out) {
  const GridSpec& grid = mu.grid();
  const std::size_t width = static_cast<std::size_t>(box.width());
  // (Q conj mu)_11 = Q12 conj mu21, _12 = Q12 conj mu22, _21 = Q21 conj mu11, _22 = Q21 conj mu12
  const ComplexField* potential[4] = {&q.q12, &q.q12, &q.q21, &q.q21};
  const ComplexField* source[4] = {&mu.m21, &mu.m22, &mu.m11, &mu.m12};
  for (int k = box.k0; k < box.k1; ++k) {
    const std::size_t offset = grid.index(box.j0, k);
    const auto e_row = e_minus.values().subspan(offset, width);
    for (int i = 0; i < 4; ++i) {
      kernels::multiply_conj(e_row, potential[i]->values().subspan(offset, width),
                             source[i]->values().subspan(offset, width),
                             out.entry(i).values().subspan(offset, width));
    }
  }
}

double box_max_diff(const MatrixField& a, const MatrixField& b, const IndexBox& box) {
  const GridSpec& grid = a.grid();
  const std::size_t width = static_cast<std::size_t>(box.width());
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int k = box.k0; k < box.k1; ++k) {
      const std::size_t offset = grid.index(box.j0, k);
      worst = std::max(worst, kernels::max_abs_diff(a.entry(i).values().subspan(offset, width),
                                                    b.entry(i).values().subspan(offset, width)));
    }
  }
  return worst;
}

[[noreturn]] void give_up(ErrorCode code, const SpectralPoint& sp, int iterations, double residual,
                          const char* reason) {
  std::ostringstream msg;
  msg << reason << " at lambda = " << sp.lambda << ", w = " << sp.w << " after " << iterations
      << " iterations (residual " << residual << ")";
  throw SolverError(code, msg.str(), iterations, residual);
}

// Tracks consecutive non-decreasing residuals.
class StallMonitor {
 public:
  explicit StallMonitor(int limit) : limit_(limit) {}

  // True once the residual has failed to decrease `limit` times in a row.
  bool stalled(double residual) {
    if (!std::isfinite(residual)) return true;
    stalls_ = residual >= previous_ ? stalls_ + 1 : 0;
    previous_ = residual;
    return stalls_ >= limit_;
  }

 private:
  int limit_;
  int stalls_ = 0;
  double previous_ = std::numeric_limits<double>::infinity();
};

}  // namespace

ComplexField apply_L_lambda(const ComplexField& phi, const SpectralPoint& sp, const CauchyKernel& kernel) {
  const Phase phase = bukhgeim_phase(phi.grid(), sp);
  ComplexField weighted(phi.grid());
  kernels::multiply(phase.e_minus.values(), phi.values(), weighted.values());
  return cauchy_transform(weighted, kernel);
}

ComplexField apply_M(const ComplexField& f, const DiracPotential& q, const SpectralPoint& sp,
                     const CauchyKernel& kernel) {
  require_same_grid(f.grid(), q.grid(), "apply_M");
  CauchyWorkspace ws;
  return apply_M_with(f, q, bukhgeim_phase(f.grid(), sp).e_minus, kernel, ws);
}

MuSolution solve_mu(const DiracPotential& q, const SpectralPoint& sp, const SolverOptions& options,
                    const CauchyKernel& kernel) {
  const GridSpec& grid = q.grid();
  require_same_grid(grid, kernel.grid(), "solve_mu");
  const int n = grid.points_per_side();
  MuSolution solution{MatrixField::identity(grid), sp, 0, 0.0, false, {}, IndexBox{0, n, 0, n}};

  const IndexBox box = q.support_box();
  if (box.empty()) {
    solution.iterations = 1;
    solution.converged = true;
    solution.residual_history = {0.0};
    return solution;
  }

  const Phase phase = bukhgeim_phase(grid, sp);
  CauchyWorkspace ws;
  MatrixField current = MatrixField::identity(grid);
  MatrixField next = MatrixField::identity(grid);
  MatrixField density(grid);
  StallMonitor monitor(options.stall_limit);

  double residual = std::numeric_limits<double>::infinity();
  int iteration = 0;
  while (true) {
    if (iteration == options.max_iter) {
      give_up(ErrorCode::MaxIterations, sp, iteration, residual, "no convergence");
    }
    ++iteration;
    densities(current, q, phase.e_minus, box, density);
    for (int i = 0; i < 4; ++i) cauchy_transform_box(density.entry(i), box, kernel, ws, next.entry(i));
    for (int k = box.k0; k < box.k1; ++k) {
      for (int j = box.j0; j < box.j1; ++j) {
        next.m11.at(j, k) += 1.0;
        next.m22.at(j, k) += 1.0;
      }
    }
    residual = box_max_diff(next, current, box);
    solution.residual_history.push_back(residual);
    std::swap(current, next);
    if (residual <= options.tol) break;
    if (monitor.stalled(residual)) {
      give_up(ErrorCode::NotContractive, sp, iteration, residual, "residual stopped decreasing");
    }
  }

  // One more application gives mu on the requested region.
  densities(current, q, phase.e_minus, box, density);
  if (options.output_margin < 0) {
    for (int i = 0; i < 4; ++i) cauchy_transform(density.entry(i), kernel, ws, solution.mu.entry(i));
    for (complex& v : solution.mu.m11.values()) v += 1.0;
    for (complex& v : solution.mu.m22.values()) v += 1.0;
  } else {
    const int m = options.output_margin;
    const IndexBox out{std::max(1, box.j0 - m), std::min(n - 1, box.j1 + m), std::max(1, box.k0 - m),
                       std::min(n - 1, box.k1 + m)};
    for (int i = 0; i < 4; ++i) cauchy_transform_box(density.entry(i), out, kernel, ws, solution.mu.entry(i));
    for (int k = out.k0; k < out.k1; ++k) {
      for (int j = out.j0; j < out.j1; ++j) {
        solution.mu.m11.at(j, k) += 1.0;
        solution.mu.m22.at(j, k) += 1.0;
      }
    }
    solution.valid_box = out;
  }

  solution.iterations = iteration;
  solution.final_residual = residual;
  solution.converged = true;
  return solution;
}

ComplexField solve_mu11_via_M(const DiracPotential& q, const SpectralPoint& sp, const SolverOptions& options,
                              const CauchyKernel& kernel, std::vector<double>* term_norms) {
  const GridSpec& grid = q.grid();
  require_same_grid(grid, kernel.grid(), "solve_mu11_via_M");
  ComplexField mu11(grid, 1.0);
  if (q.is_zero()) return mu11;

  const ComplexField e_minus = bukhgeim_phase(grid, sp).e_minus;
  CauchyWorkspace ws;
  StallMonitor monitor(options.stall_limit);
  ComplexField term = apply_M_with(ComplexField(grid, 1.0), q, e_minus, kernel, ws);
  for (int k = 1;; ++k) {
    mu11 += term;
    const double size = term.max_abs();
    if (term_norms) term_norms->push_back(size);
    if (size <= options.tol) break;
    if (monitor.stalled(size)) give_up(ErrorCode::NotContractive, sp, k, size, "Neumann series terms stopped decreasing");
    if (k == options.max_iter) give_up(ErrorCode::MaxIterations, sp, k, size, "Neumann series not converged");
    term = apply_M_with(term, q, e_minus, kernel, ws);
  }
  return mu11;
}

MatrixField fixed_point_residual(const MuSolution& solution, const DiracPotential& q, const CauchyKernel& kernel) {
  const GridSpec& grid = q.grid();
  const Phase phase = bukhgeim_phase(grid, solution.spectral);
  const IndexBox all{0, grid.points_per_side(), 0, grid.points_per_side()};
  MatrixField density(grid);
  densities(solution.mu, q, phase.e_minus, all, density);
  MatrixField residual(grid);
  CauchyWorkspace ws;
  for (int i = 0; i < 4; ++i) {
    cauchy_transform(density.entry(i), kernel, ws, residual.entry(i));
    residual.entry(i) -= solution.mu.entry(i);
  }
  for (complex& v : residual.m11.values()) v += 1.0;
  for (complex& v : residual.m22.values()) v += 1.0;
  return residual;
}

MatrixField assemble_psi(const MuSolution& solution) {
  const GridSpec& grid = solution.mu.grid();
  const SpectralPoint& sp = solution.spectral;
  const int n = grid.points_per_side();
  ComplexField growth(grid);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const complex d = grid.node(j, k) - sp.w;
      const complex exponent = 0.25 * sp.lambda * d * d;
      worst = std::max(worst, exponent.real());
      growth.at(j, k) = exponent;
    }
  }
  if (worst > kMaxExponent) {
    std::ostringstream msg;
    msg << "Re[lambda (z - w)^2]/4 reaches " << worst << " (budget " << kMaxExponent << ")";
    throw Error(ErrorCode::ExponentialOverflow, msg.str());
  }
  for (complex& v : growth.values()) v = std::exp(v);
  MatrixField psi(grid);
  for (int i = 0; i < 4; ++i) {
    kernels::multiply(solution.mu.entry(i).values(), growth.values(), psi.entry(i).values());
  }
  return psi;
}

// ---------------------------------------------------------------------------

std::vector<double> DecayReport::series(const std::string& quantity) const {
  std::vector<double> out;
  for (const DecayRow& row : rows) {
    if (row.quantity == quantity) out.push_back(row.norm);
  }
  return out;
}

namespace {

std::size_t nearest_node(const GridSpec& grid, complex z) {
  const complex rel = (z - grid.node(0, 0)) / grid.spacing();
  const int last = grid.points_per_side() - 1;
  const int j = std::clamp(static_cast<int>(std::lround(rel.real())), 0, last);
  const int k = std::clamp(static_cast<int>(std::lround(rel.imag())), 0, last);
  return grid.index(j, k);
}

}  // namespace

DecayReport decay_diagnostics(const DiracPotential& q, const std::vector<double>& shells,
                              const std::vector<complex>& z_samples, const std::vector<complex>& w_samples,
                              const CauchyKernel& kernel, const DecayOptions& options) {
  const GridSpec& grid = q.grid();
  require_same_grid(grid, kernel.grid(), "decay_diagnostics");
  if (!(options.p > 1.0)) throw Error(ErrorCode::InvalidArgument, "decay norms need p > 1");
  if (!std::is_sorted(shells.begin(), shells.end())) {
    throw Error(ErrorCode::InvalidArgument, "shells must be ordered by increasing radius");
  }

  DecayReport report;
  report.p = options.p;
  report.shells = shells;
  std::ostringstream quad;
  quad << "polar tensor rule per shell (R, 2R): " << options.radial_nodes << " Gauss-Legendre radii x "
       << options.angular_nodes << " uniform angles, weights r dr dtheta; sup over " << z_samples.size()
       << " z and " << w_samples.size() << " w samples";
  report.quadrature = quad.str();

  std::vector<std::size_t> z_index;
  for (complex z : z_samples) z_index.push_back(nearest_node(grid, z));
  const ComplexField one(grid, 1.0);
  CauchyWorkspace ws;

  for (double radius : shells) {
    const AnnulusQuadrature annulus = make_annulus(radius, options.radial_nodes, options.angular_nodes);
    // Accumulated sum of weight * |f|^p per (w, z) pair.
    std::vector<double> m1(w_samples.size() * z_index.size(), 0.0);
    std::vector<double> mu(m1.size(), 0.0);
    std::vector<double> t(w_samples.size(), 0.0);
    bool mu_failed = false;
    for (std::size_t iw = 0; iw < w_samples.size(); ++iw) {
      for (std::size_t il = 0; il < annulus.nodes.size(); ++il) {
        const SpectralPoint sp{annulus.nodes[il], w_samples[iw]};
        const double weight = annulus.weights[il];
        const ComplexField e_minus = bukhgeim_phase(grid, sp).e_minus;
        const ComplexField m = q.is_zero() ? ComplexField(grid) : apply_M_with(one, q, e_minus, kernel, ws);
        for (std::size_t iz = 0; iz < z_index.size(); ++iz) {
          m1[iw * z_index.size() + iz] += weight * std::pow(std::abs(m[z_index[iz]]), options.p);
        }
        ComplexField weighted(grid);
        kernels::multiply3(e_minus.values(), q.q21.values(), m.values(), weighted.values());
        t[iw] += weight * std::pow(std::abs(integrate(weighted)), options.p);

        if (options.include_mu && !mu_failed) {
          try {
            const MuSolution s = solve_mu(q, sp, options.solver, kernel);
            for (std::size_t iz = 0; iz < z_index.size(); ++iz) {
              mu[iw * z_index.size() + iz] +=
                  weight * std::pow(std::abs(s.mu.m11[z_index[iz]] - 1.0), options.p);
            }
          } catch (const SolverError&) {
            mu_failed = true;
          }
        }
      }
    }
    auto sup_norm = [&](const std::vector<double>& sums) {
      double worst = 0.0;
      for (double s : sums) worst = std::max(worst, std::pow(s, 1.0 / options.p));
      return worst;
    };
    report.rows.push_back({radius, "M1", sup_norm(m1)});
    if (options.include_mu) {
      report.rows.push_back(
          {radius, "mu11_minus_1", mu_failed ? std::numeric_limits<double>::quiet_NaN() : sup_norm(mu)});
    }
    report.rows.push_back({radius, "T_M1", sup_norm(t)});
  }
  return report;
}

void write_decay_csv(const DecayReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(17);
  out << "shell_R,quantity,norm\n";
  for (const DecayRow& row : report.rows) out << row.shell_inner << ',' << row.quantity << ',' << row.norm << '\n';
}

}  // namespace bukhgeim
