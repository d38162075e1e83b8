#pragma once

// Complex geometrical optics solutions of dbar psi = Q conj(psi) with
// psi ~ exp(lambda (z - w)^2 / 4) at infinity, through the bounded
// normalization mu = psi exp(-lambda (z - w)^2 / 4), which solves
//
//   mu = I + C(e_minus Q conj(mu)),   e_minus = exp(-i Im[lambda (z - w)^2] / 2).
//
// Entrywise, with Q off-diagonal, (Q conj mu) = [Q12 conj mu21, Q12 conj mu22;
//                                                Q21 conj mu11, Q21 conj mu12].

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "bukhgeim/cauchy.hpp"
#include "bukhgeim/dirac.hpp"
#include "bukhgeim/quadrature.hpp"

namespace bukhgeim {

struct SpectralPoint {
  complex lambda;
  complex w;
};

/// 2x2 matrix stored as {m11, m12, m21, m22}.
using Matrix2 = std::array<complex, 4>;

struct MatrixField {
  ComplexField m11, m12, m21, m22;

  explicit MatrixField(const GridSpec& grid) : m11(grid), m12(grid), m21(grid), m22(grid) {}
  static MatrixField identity(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return m11.grid(); }
  ComplexField& entry(int i) noexcept;
  const ComplexField& entry(int i) const noexcept;
};

/// rho = Im[lambda (z - w)^2] / 2 and the unimodular weights exp(-/+ i rho),
/// built from cos/sin of the real rho.
struct Phase {
  std::vector<double> rho;
  ComplexField e_minus;
  ComplexField e_plus;
};

Phase bukhgeim_phase(const GridSpec& grid, const SpectralPoint& sp);

/// C(e_minus phi): the phase-modulated Cauchy transform.
ComplexField apply_L_lambda(const ComplexField& phi, const SpectralPoint& sp, const CauchyKernel& kernel);

/// phi -> L(Q12 conj(L(Q21 conj(phi)))). Linear in phi.
ComplexField apply_M(const ComplexField& f, const DiracPotential& q, const SpectralPoint& sp,
                     const CauchyKernel& kernel);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 200;
  /// Give up after this many consecutive iterations without a residual decrease.
  int stall_limit = 5;
  /// Negative: the returned mu covers the full grid. Otherwise only the
  /// support box of Q dilated by this many cells is filled (cheaper; enough
  /// for a contour that hugs the support).
  int output_margin = -1;
};

struct MuSolution {
  MatrixField mu;
  SpectralPoint spectral;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  /// Nodes where mu is valid; the whole grid unless output_margin was set.
  IndexBox valid_box;
};

/// Fixed-point iteration mu_{k+1} = I + C(e_minus Q conj(mu_k)) (all four
/// entries updated from mu_k). The iterates are only needed on the support of
/// Q, so the loop transforms that box alone; the returned mu is evaluated on
/// the full grid from the last iterate. Throws SolverError with NotContractive
/// (stalled or non-finite residual) or MaxIterations.
MuSolution solve_mu(const DiracPotential& q, const SpectralPoint& sp, const SolverOptions& options,
                    const CauchyKernel& kernel);

/// mu11 from the Neumann series 1 + sum_k M^k 1, truncated once a term's
/// sup-norm drops to options.tol. Throws as solve_mu.
ComplexField solve_mu11_via_M(const DiracPotential& q, const SpectralPoint& sp, const SolverOptions& options,
                              const CauchyKernel& kernel, std::vector<double>* term_norms = nullptr);

/// I + C(e_minus Q conj(mu)) - mu, full grid, re-evaluated once.
MatrixField fixed_point_residual(const MuSolution& solution, const DiracPotential& q, const CauchyKernel& kernel);

/// Largest Re[lambda (z - w)^2] / 4 accepted by assemble_psi.
inline constexpr double kMaxExponent = 700.0;

/// psi = mu exp(lambda (z - w)^2 / 4). Throws ExponentialOverflow.
MatrixField assemble_psi(const MuSolution& solution);

// ---------------------------------------------------------------------------
// Empirical decay measurements

struct DecayRow {
  double shell_inner;
  std::string quantity;
  double norm;
};

struct DecayReport {
  double p = 4.0;
  std::vector<double> shells;  ///< inner radii R of the shells (R, 2R), increasing
  std::vector<DecayRow> rows;
  std::string quadrature;  ///< description of the lambda quadrature used

  /// Norms of one quantity in shell order.
  std::vector<double> series(const std::string& quantity) const;
};

struct DecayOptions {
  double p = 4.0;
  int radial_nodes = 2;
  int angular_nodes = 8;
  SolverOptions solver{};
  /// Skip the (expensive) mu11 - 1 measurement.
  bool include_mu = true;
};

/// Shell norms ||f||_{L^p over lambda in the shell}, maximized over the z and w
/// samples, for f = M1 ("M1"), mu11 - 1 ("mu11_minus_1") and the (2,1) entry
/// of T^lambda[M1] ("T_M1"; no z dependence).
DecayReport decay_diagnostics(const DiracPotential& q, const std::vector<double>& shells,
                              const std::vector<complex>& z_samples, const std::vector<complex>& w_samples,
                              const CauchyKernel& kernel, const DecayOptions& options = {});

/// Columns shell_R, quantity, norm.
void write_decay_csv(const DecayReport& report, const std::filesystem::path& path);

}  // namespace bukhgeim
