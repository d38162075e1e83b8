#pragma once

#include <complex>
#include <vector>

namespace bukhgeim {

using complex = std::complex<double>;

/// Tensor polar rule on R <= |lambda| <= 2R: Gauss-Legendre radii times
/// uniform angles, weights r dr dtheta (they sum to 3 pi R^2).
struct AnnulusQuadrature {
  double inner_radius = 0.0;
  int radial_nodes = 0;
  int angular_nodes = 0;
  std::vector<complex> nodes;
  std::vector<double> weights;

  double outer_radius() const noexcept { return 2.0 * inner_radius; }
};

AnnulusQuadrature make_annulus(double inner_radius, int radial_nodes, int angular_nodes,
                               double angle_offset = 0.0);

}  // namespace bukhgeim
