#include "bukhgeim/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <memory>
#include <numbers>

#include "bukhgeim/error.hpp"

namespace bukhgeim {

AnnulusQuadrature make_annulus(double inner_radius, int radial_nodes, int angular_nodes, double angle_offset) {
  if (!(inner_radius > 0.0) || radial_nodes < 1 || angular_nodes < 1) {
    throw Error(ErrorCode::InvalidArgument, "annulus needs R > 0 and at least one radial and angular node");
  }
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(radial_nodes)),
      &gsl_integration_glfixed_table_free);
  if (!table) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre table allocation failed");

  AnnulusQuadrature q;
  q.inner_radius = inner_radius;
  q.radial_nodes = radial_nodes;
  q.angular_nodes = angular_nodes;
  const double dtheta = 2.0 * std::numbers::pi / angular_nodes;
  for (int ir = 0; ir < radial_nodes; ++ir) {
    double r = 0.0, wr = 0.0;
    gsl_integration_glfixed_point(inner_radius, 2.0 * inner_radius, static_cast<std::size_t>(ir), &r, &wr,
                                  table.get());
    for (int it = 0; it < angular_nodes; ++it) {
      q.nodes.push_back(std::polar(r, angle_offset + it * dtheta));
      q.weights.push_back(wr * r * dtheta);
    }
  }
  return q;
}

}  // namespace bukhgeim
