#pragma once

// Change of variables between the conductivity equation and the first-order
// Dirac system dbar psi = Q conj(psi) with off-diagonal potential
//
//   Q = [ 0    q12 ]     q12 = -1/2 partial log(gamma)
//       [ q21  0   ]     q21 = conj(-1/2 dbar log(gamma))
//
// and back: log(gamma) = C(-2 conj(q21)), which solves dbar log(gamma) = -2 conj(q21)
// with log(gamma) -> 0 away from the support.

#include <filesystem>
#include <string>

#include "bukhgeim/cauchy.hpp"
#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Off-diagonal entries of the Dirac potential; the diagonal is zero by construction.
struct DiracPotential {
  ComplexField q12;
  ComplexField q21;

  explicit DiracPotential(const GridSpec& grid) : q12(grid), q21(grid) {}
  DiracPotential(ComplexField upper, ComplexField lower);

  const GridSpec& grid() const noexcept { return q12.grid(); }
  double max_abs() const noexcept;
  /// Smallest index box holding the support of both entries.
  IndexBox support_box() const noexcept;
  bool is_zero() const noexcept { return support_box().empty(); }
};

struct DiracOptions {
  DerivativeMode derivative = DerivativeMode::spectral;
  /// Smallest |gamma| accepted.
  double min_modulus = 1e-6;
  /// Q is zeroed outside supp(log gamma) dilated by this many cells.
  int stencil_radius = 2;
};

/// log(gamma) on the continuous branch that is 0 at the grid frame, unwrapped
/// along grid rows and cross-checked along columns.
/// Throws VanishingConductivity, SupportAtFrame (gamma != 1 on the frame) or
/// BranchAmbiguity (nonzero winding along a grid line, or rows and columns
/// disagree by a multiple of 2 pi).
ComplexField unwrap_log(const ComplexField& gamma, double min_modulus = 1e-6);

DiracPotential conductivity_to_potential(const ComplexField& gamma, const DiracOptions& options = {});

struct InversionOptions {
  /// Largest |log gamma| allowed on the frame, relative to max(1, max |log gamma|).
  double frame_tolerance = 0.05;
};

/// gamma = exp(C(-2 conj(q21))). Throws NonDecayingSolution when log(gamma)
/// has not decayed at the frame.
ComplexField potential_to_conductivity(const DiracPotential& q, const CauchyKernel& kernel,
                                       const InversionOptions& options = {});

/// Writes <stem>_q12.cfld, <stem>_q21.cfld and a <stem>.json sidecar holding
/// the grid and `provenance`.
void write_potential(const DiracPotential& q, const std::filesystem::path& directory,
                     const std::string& stem, const std::string& provenance = {});
DiracPotential read_potential(const std::filesystem::path& directory, const std::string& stem);

}  // namespace bukhgeim
