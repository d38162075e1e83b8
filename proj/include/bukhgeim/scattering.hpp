#pragma once

// Generalized scattering data h(lambda, w) computed two ways:
//
//   volume:    h = integral of e_minus Q conj(mu)          (needs Q)
//   boundary:  h = (1/2i) closed integral of mu dz         (needs mu on a contour)
//
// The boundary form follows from the volume form by Green's formula and is
// used to decide whether mu enters the volume form conjugated.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bukhgeim/cgo.hpp"
#include "bukhgeim/quadrature.hpp"

namespace bukhgeim {

enum class ConjMode { conjugated, plain };
enum class ScatteringMethod { volume, boundary };

std::string_view to_string(ConjMode mode) noexcept;
std::string_view to_string(ScatteringMethod method) noexcept;
ConjMode parse_conj_mode(std::string_view name);
ScatteringMethod parse_scattering_method(std::string_view name);

/// integral of e_minus Q G with the matrix product Q G.
Matrix2 T_lambda(const MatrixField& g, const DiracPotential& q, const SpectralPoint& sp);
/// Scalar G: Q G = [0, Q12 G; Q21 G, 0].
Matrix2 T_lambda(const ComplexField& g, const DiracPotential& q, const SpectralPoint& sp);

/// integral of e_minus Q conj(mu) (or Q mu for ConjMode::plain). Throws NotConverged.
Matrix2 scattering_volume(const DiracPotential& q, const MuSolution& mu, ConjMode mode = ConjMode::conjugated);

/// Axis-aligned square through grid nodes, corners (j0, k0) and (j1, k1) inclusive.
struct SquareContour {
  int j0, k0, j1, k1;
};

/// Minimum number of cells between supp Q and the contour.
inline constexpr int kContourClearance = 3;

/// Tightest square contour keeping `clearance` cells from supp Q.
/// Throws ContourTooTight if it would leave the grid.
SquareContour contour_around(const DiracPotential& q, int clearance = kContourClearance);

/// (1/2i) times the trapezoidal counter-clockwise integral of mu dz.
/// Throws ContourTooTight if supp Q comes within kContourClearance cells of
/// the contour, or NotConverged if mu is not valid on the contour.
Matrix2 scattering_boundary(const MuSolution& mu, const SquareContour& contour, const DiracPotential& q);

/// Relative disagreement |a - b| / max(|a|, eps) in the max-entry norm.
double relative_discrepancy(const Matrix2& a, const Matrix2& b, double eps = 1e-12);

// ---------------------------------------------------------------------------
// Datasets

/// w samples: interior nodes of the coarse grid (L, N / stride) with
/// |x|, |y| <= window. Each coarse node is also a node of the main grid.
struct WSampling {
  int stride = 8;
  double window = 0.5;

  GridSpec coarse_grid(const GridSpec& grid) const;
  /// Coarse (j, k) indices of the samples, row-major.
  std::vector<std::pair<int, int>> coarse_indices(const GridSpec& grid) const;
  std::vector<complex> points(const GridSpec& grid) const;
};

struct DatasetOptions {
  SolverOptions solver{};
  ConjMode conj_mode = ConjMode::conjugated;
  ScatteringMethod method = ScatteringMethod::boundary;
  int threads = 1;
  double discrepancy_limit = 0.05;
  std::string provenance;
};

enum class SampleStatus : std::uint32_t { ok = 0, not_contractive = 1, max_iterations = 2, forms_disagree = 3 };

std::string_view to_string(SampleStatus status) noexcept;

struct SampleRecord {
  SampleStatus status = SampleStatus::ok;
  std::uint32_t iterations = 0;
  double residual = 0.0;
  double discrepancy = 0.0;  ///< between the volume and boundary forms
};

struct ScatteringDataset {
  GridSpec grid;
  AnnulusQuadrature annulus;
  WSampling w_sampling;
  std::vector<complex> w_samples;
  SolverOptions solver;
  ConjMode conj_mode = ConjMode::conjugated;
  ScatteringMethod method = ScatteringMethod::boundary;
  std::string provenance;
  /// Sample id = lambda_index * w_samples.size() + w_index.
  std::vector<Matrix2> h;          ///< from `method`
  std::vector<Matrix2> secondary;  ///< from the other method
  std::vector<SampleRecord> records;

  std::size_t sample_count() const noexcept { return h.size(); }
  std::size_t sample_id(std::size_t lambda_index, std::size_t w_index) const noexcept {
    return lambda_index * w_samples.size() + w_index;
  }
  std::size_t failed_count() const noexcept;
  bool complete() const noexcept { return failed_count() == 0; }
  bool any_not_contractive() const noexcept;
  double max_discrepancy() const noexcept;
};

/// Solves for mu at every (lambda, w) pair on a pool of options.threads
/// workers and stores both forms of h. Output does not depend on the thread
/// count. Solver failures are recorded per sample, not thrown.
ScatteringDataset compute_dataset(const DiracPotential& q, const AnnulusQuadrature& annulus,
                                  const WSampling& w_sampling, const DatasetOptions& options,
                                  const CauchyKernel& kernel);

/// Binary layout (little endian):
///   "BKDS" | version u32 | header length u64 | JSON header
///   | primary h: per sample 4 entries x (re, im) float64
///   | secondary h: same
///   | per sample: status u32, iterations u32, residual f64, discrepancy f64
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const ScatteringDataset& ds, const std::filesystem::path& path);
ScatteringDataset read_dataset(const std::filesystem::path& path);

/// re_lambda, im_lambda, re_w, im_w, h11_re, h11_im, ..., h22_im, residual
void write_dataset_csv(const ScatteringDataset& ds, const std::filesystem::path& path);

}  // namespace bukhgeim
