#pragma once

// Potential and conductivity from scattering data by averaging over the
// annulus R <= |lambda| <= 2R:
//
//   integral g Q = (1 / (4 pi^2 ln 2)) sum_lambda weight |lambda|^-1 sum_w area_w g(w) h(lambda, w)
//
// The constant is the annulus integral of |lambda|^-1 (2 pi / |lambda|), the
// stationary-phase size of the phase integral. Dropping the g pairing gives a
// pointwise estimate of Q at every w sample (derived, not part of the limit
// statement); h12 and h21 feed Q12 and Q21 and the diagonal of the average is
// kept as a noise floor since the true Q has none.

#include <vector>

#include "bukhgeim/scattering.hpp"

namespace bukhgeim {

/// 4 pi^2 ln 2
double annulus_constant() noexcept;

/// Annulus average of the h values paired with g over the w samples.
/// Throws SupportNotCovered if the support square of g leaves the w-sample hull.
Matrix2 reconstruct_weak(const ScatteringDataset& ds, const TestFunction& g);

struct PointwiseReconstruction {
  /// On the coarse w grid; zero outside the sampled window.
  DiracPotential potential;
  ComplexField diagonal11;
  ComplexField diagonal22;
  double inner_radius = 0.0;

  /// max |diagonal| / max |off-diagonal| (0 when both vanish).
  double noise_floor() const noexcept;
};

/// Throws PartialDataset unless every sample converged.
PointwiseReconstruction reconstruct_pointwise(const ScatteringDataset& ds);

struct GammaOptions {
  /// Looser than the forward default: a reconstructed Q21 is not exactly the
  /// dbar of a compactly supported function, so log gamma keeps a small 1/z tail.
  InversionOptions inversion{0.25};
};

/// conductivity from the pointwise potential on the coarse grid, scaled so
/// that the mean of gamma over the frame is 1. Throws as reconstruct_pointwise
/// and potential_to_conductivity.
ComplexField recover_gamma(const ScatteringDataset& ds, const GammaOptions& options = {});
ComplexField recover_gamma(const PointwiseReconstruction& rec, const GammaOptions& options = {});

/// Values of a fine-grid field at the w samples of `w_sampling`, on the coarse
/// grid (zero at coarse nodes outside the window).
ComplexField restrict_to_samples(const ComplexField& fine, const WSampling& w_sampling);
DiracPotential restrict_to_samples(const DiracPotential& fine, const WSampling& w_sampling);

// ---------------------------------------------------------------------------

struct StationaryPhaseRow {
  double modulus;
  complex lhs;      ///< grid quadrature of exp(-i Im[lambda (w - z)^2] / 2) g(w)
  complex leading;  ///< (2 pi / |lambda|) g(z)
  double abs_error;
};

struct StationaryPhaseTable {
  std::vector<StationaryPhaseRow> rows;
  /// Least-squares slope of log(abs_error) against log|lambda|; NaN if fewer
  /// than two rows have a positive error.
  double slope;
};

StationaryPhaseTable stationary_phase_check(const TestFunction& g, complex z, const std::vector<complex>& lambdas,
                                            const GridSpec& grid);

void write_stationary_phase_csv(const StationaryPhaseTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
  /// Same norms restricted to supp(ref) dilated by two cells.
  double support_rel_l2 = 0.0;
  double support_rel_linf = 0.0;
};

/// Relative norms of f - ref; absolute when ref vanishes. Throws GridMismatch.
ErrorMetrics error_metrics(const ComplexField& f, const ComplexField& ref);
/// Both off-diagonal entries taken together.
ErrorMetrics error_metrics(const DiracPotential& f, const DiracPotential& ref);

}  // namespace bukhgeim
