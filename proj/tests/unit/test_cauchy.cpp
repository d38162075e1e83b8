#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bukhgeim/cauchy.hpp"

using namespace bukhgeim;

namespace {

double rel_l2(const ComplexField& a, const ComplexField& b) {
  return (a - b).l2_norm() / b.l2_norm();
}

// Random smooth compactly supported density: a few bumps with random centers
// and amplitudes, all inside |z| < 0.8.
ComplexField random_density(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexField f(g);
  for (int b = 0; b < 3; ++b) {
    const TestFunction t{TestFunctionKind::gaussian_bump, {0.2 * u(rng), 0.2 * u(rng)}, 0.5, {u(rng), u(rng)}};
    f += sample(t, g);
  }
  return f;
}

// Cutoff that is 1 to within 1e-14 for |z| < 0.3 and below 1e-20 past |z| = 1,
// with a spectrum that is resolved at N = 128 on [-1, 1)^2.
double cutoff(complex z) { return 0.5 * std::erfc((std::abs(z) - 0.6) / 0.055); }

}  // namespace

TEST_CASE("cell integral") {
  CHECK(std::abs(cauchy_cell_integral({}, 0.1)) < 1e-16);
  // Off-center cell against a fine midpoint sum.
  const double h = 0.2;
  const complex c(0.3, -0.1);
  complex ref{};
  const int m = 400;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const complex u = c + complex(-0.5 * h + (a + 0.5) * h / m, -0.5 * h + (b + 0.5) * h / m);
      ref += 1.0 / u;
    }
  }
  ref *= (h / m) * (h / m) / std::numbers::pi;
  CHECK(std::abs(cauchy_cell_integral(c, h) - ref) < 1e-7 * std::abs(ref));
  // Far cells approach the point value.
  const complex far(3.0, 2.0);
  CHECK(std::abs(cauchy_cell_integral(far, 0.01) - 1e-4 / (std::numbers::pi * far)) < 1e-12);
}

TEST_CASE("kernel bookkeeping") {
  const CauchyKernel kernel(make_grid(1.0, 32));
  CHECK(kernel.padded_size() >= 64);
  CHECK(std::abs(kernel.singular_cell_value()) < 1e-12);
}

TEST_CASE("zero density") {
  const GridSpec g = make_grid(1.0, 32);
  const CauchyKernel kernel(g);
  CHECK(cauchy_transform(ComplexField(g), kernel).max_abs() == 0.0);
  CHECK(cauchy_oracle(ComplexField(g), {0.3, 0.2}) == complex{});
}

TEST_CASE("errors") {
  const CauchyKernel kernel(make_grid(1.0, 32));
  CHECK_THROWS_AS(cauchy_transform(ComplexField(make_grid(1.0, 16)), kernel), Error);
  ComplexField edge(make_grid(1.0, 32));
  edge.at(0, 5) = 1.0;
  try {
    cauchy_transform(edge, kernel);
    FAIL("expected SupportAtFrame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportAtFrame);
  }
}

TEST_CASE("fast transform matches direct summation") {
  const GridSpec g = make_grid(1.0, 32);
  const ComplexField f = random_density(g, 7);
  for (auto q : {CauchyQuadrature::punctured, CauchyQuadrature::corrected}) {
    const ComplexField fast = cauchy_transform(f, CauchyKernel(g, q));
    ComplexField oracle(g);
    for (int k = 0; k < 32; ++k) {
      for (int j = 0; j < 32; ++j) oracle.at(j, k) = cauchy_oracle(f, g.node(j, k), q);
    }
    CHECK(rel_l2(fast, oracle) <= 1e-12);
  }
}

TEST_CASE("corrected quadrature converges faster") {
  // Radial density (1 - r^2)^3 on the unit disk; for radial f,
  // C f(z) = (1/z) (1/pi) * integral of f over the disk of radius |z|.
  auto density = [](complex z) {
    const double r2 = std::norm(z);
    return r2 < 1.0 ? complex((1.0 - r2) * (1.0 - r2) * (1.0 - r2)) : complex{};
  };
  // C f(z) = (1/z) * integral_{|u|<|z|} f dA / pi for radial f.
  auto exact = [](complex z) {
    const double r2 = std::min(std::norm(z), 1.0);
    return complex(0.25 * (1.0 - std::pow(1.0 - r2, 4)), 0.0) / z;
  };
  double previous[2] = {0.0, 0.0};
  for (int n : {64, 128}) {
    const GridSpec g = make_grid(1.5, n);
    const ComplexField f = sample(density, g);
    ComplexField ref(g);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        const complex z = g.node(j, k);
        ref.at(j, k) = std::abs(z) < 1e-12 ? complex{} : exact(z);
      }
    }
    int i = 0;
    for (auto q : {CauchyQuadrature::punctured, CauchyQuadrature::corrected}) {
      const double err = rel_l2(cauchy_transform(f, CauchyKernel(g, q)), ref);
      if (n == 128) CHECK(previous[i] / err > (i == 0 ? 3.0 : 12.0));
      previous[i++] = err;
    }
  }
}

TEST_CASE("unit disk indicator") {
  const GridSpec g = make_grid(2.0, 256);
  const CauchyKernel kernel(g);
  const ComplexField f = sample([](complex z) { return std::abs(z) <= 1.0 ? complex(1.0) : complex{}; }, g);
  const ComplexField c = cauchy_transform(f, kernel);
  const double h = g.spacing();
  double err = 0.0, norm = 0.0;
  for (int k = 0; k < 256; ++k) {
    for (int j = 0; j < 256; ++j) {
      const complex z = g.node(j, k);
      if (std::abs(std::abs(z) - 1.0) <= 3.0 * h) continue;
      const complex exact = std::abs(z) < 1.0 ? std::conj(z) : 1.0 / z;
      err += std::norm(c.at(j, k) - exact);
      norm += std::norm(exact);
    }
  }
  CHECK(std::sqrt(err / norm) <= 0.02);
  CHECK(std::abs(cauchy_oracle(f, {2.0, 0.0}) - 0.5) <= 0.005);
}

TEST_CASE("disk of radius one half") {
  const GridSpec g = make_grid(1.0, 128);
  const CauchyKernel kernel(g);
  const double a = 0.5;
  const ComplexField f = sample([a](complex z) { return std::abs(z) <= a ? complex(1.0) : complex{}; }, g);
  const ComplexField c = cauchy_transform(f, kernel);
  double err = 0.0, norm = 0.0;
  for (int k = 0; k < 128; ++k) {
    for (int j = 0; j < 128; ++j) {
      const complex z = g.node(j, k);
      if (std::abs(z) <= a + 3.0 * g.spacing()) continue;
      const complex exact = a * a / z;
      err += std::norm(c.at(j, k) - exact);
      norm += std::norm(exact);
    }
  }
  CHECK(std::sqrt(err / norm) <= 0.02);
}

TEST_CASE("dbar inverts the transform") {
  const GridSpec g = make_grid(1.0, 128);
  const CauchyKernel kernel(g);
  const ComplexField f = random_density(g, 3);
  const ComplexField back = dbar(cauchy_transform(f, kernel), DerivativeMode::finite_difference);
  CHECK(rel_l2(back, f) <= 1e-3);
}

TEST_CASE("Wirtinger derivatives of z and conj(z)") {
  const GridSpec g = make_grid(1.0, 128);
  const ComplexField zbar = sample([](complex z) { return std::conj(z) * cutoff(z); }, g);
  const ComplexField zed = sample([](complex z) { return z * cutoff(z); }, g);
  for (auto mode : {DerivativeMode::spectral, DerivativeMode::finite_difference}) {
    const double tol = mode == DerivativeMode::spectral ? 1e-8 : 1e-6;
    const ComplexField d1 = dbar(zbar, mode), p1 = partial(zbar, mode);
    const ComplexField d2 = dbar(zed, mode), p2 = partial(zed, mode);
    double worst = 0.0;
    for (int k = 0; k < 128; ++k) {
      for (int j = 0; j < 128; ++j) {
        if (std::abs(g.node(j, k)) > 0.3) continue;
        worst = std::max({worst, std::abs(d1.at(j, k) - 1.0), std::abs(p1.at(j, k)),
                          std::abs(d2.at(j, k)), std::abs(p2.at(j, k) - 1.0)});
      }
    }
    CHECK(worst <= tol);
  }
}

TEST_CASE("linearity and translation equivariance") {
  const GridSpec g = make_grid(1.0, 64);
  const CauchyKernel kernel(g);
  const ComplexField f = random_density(g, 5), h = random_density(g, 6);
  const complex a(1.5, -0.5), b(-0.2, 2.0);
  const ComplexField lhs = cauchy_transform(a * f + b * h, kernel);
  const ComplexField rhs = a * cauchy_transform(f, kernel) + b * cauchy_transform(h, kernel);
  CHECK(rel_l2(lhs, rhs) <= 1e-13);

  ComplexField shifted(g);
  for (int k = 0; k < 64; ++k) {
    for (int j = 1; j < 64; ++j) shifted.at(j, k) = f.at(j - 1, k);
  }
  const ComplexField c0 = cauchy_transform(f, kernel), c1 = cauchy_transform(shifted, kernel);
  double err = 0.0, norm = 0.0;
  for (int k = 0; k < 64; ++k) {
    for (int j = 1; j < 64; ++j) {
      err += std::norm(c1.at(j, k) - c0.at(j - 1, k));
      norm += std::norm(c0.at(j - 1, k));
    }
  }
  CHECK(std::sqrt(err / norm) <= 1e-10);
}

TEST_CASE("box transform agrees with the full transform inside the box") {
  const GridSpec g = make_grid(1.0, 64);
  const CauchyKernel kernel(g);
  const ComplexField f = random_density(g, 9);
  const IndexBox box = f.support_box();
  REQUIRE(!box.empty());
  CauchyWorkspace ws;
  ComplexField out(g);
  cauchy_transform_box(f, box, kernel, ws, out);
  const ComplexField full = cauchy_transform(f, kernel);
  double worst = 0.0;
  for (int k = 0; k < 64; ++k) {
    for (int j = 0; j < 64; ++j) {
      if (box.contains(j, k)) {
        worst = std::max(worst, std::abs(out.at(j, k) - full.at(j, k)));
      } else {
        CHECK(out.at(j, k) == complex{});
      }
    }
  }
  CHECK(worst <= 1e-13);
}
