#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "bukhgeim/dirac.hpp"

using namespace bukhgeim;

namespace {

double cutoff(complex z) { return 0.5 * std::erfc((std::abs(z) - 0.55) / 0.05); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

double worst_inside(const ComplexField& f, complex expected, double radius) {
  double worst = 0.0;
  const GridSpec& g = f.grid();
  for (int k = 0; k < g.points_per_side(); ++k) {
    for (int j = 0; j < g.points_per_side(); ++j) {
      if (std::abs(g.node(j, k)) < radius) worst = std::max(worst, std::abs(f.at(j, k) - expected));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("unit conductivity has zero potential") {
  const GridSpec g = make_grid(1.0, 32);
  const DiracPotential q = conductivity_to_potential(ComplexField(g, 1.0));
  CHECK(q.q12.max_abs() == 0.0);
  CHECK(q.q21.max_abs() == 0.0);
  CHECK(q.is_zero());
}

TEST_CASE("windowed exponentials") {
  const GridSpec g = make_grid(1.0, 128);
  SUBCASE("gamma = e^x") {
    const auto gamma = sample([](complex z) { return std::exp(z.real() * cutoff(z)); }, g);
    const DiracPotential q = conductivity_to_potential(gamma);
    CHECK(worst_inside(q.q12, -0.25, 0.25) < 1e-8);
    CHECK(worst_inside(q.q21, -0.25, 0.25) < 1e-8);
  }
  SUBCASE("gamma = e^{iy}") {
    const auto gamma = sample([](complex z) { return std::exp(complex(0.0, z.imag() * cutoff(z))); }, g);
    const DiracPotential q = conductivity_to_potential(gamma);
    CHECK(worst_inside(q.q12, -0.25, 0.25) < 1e-8);
    CHECK(worst_inside(q.q21, 0.25, 0.25) < 1e-8);
  }
}

TEST_CASE("real conductivity gives q21 = q12") {
  const GridSpec g = make_grid(1.0, 64);
  const DiracPotential q = conductivity_to_potential(sample_gamma(ConductivityPreset::real_bump(), g));
  CHECK(max_abs_difference(q.q12, q.q21) < 1e-14);
  CHECK(q.q12.max_abs() > 0.1);
}

TEST_CASE("potential is supported near the conductivity support") {
  const GridSpec g = make_grid(1.0, 64);
  const auto preset = ConductivityPreset::complex_bump({0.1, -0.1}, 0.4);
  const DiracPotential q = conductivity_to_potential(sample_gamma(preset, g));
  const auto mask = dilated_support(sample_log_gamma(preset, g), 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask[i]) {
      CHECK(q.q12[i] == complex{});
      CHECK(q.q21[i] == complex{});
    }
  }
  for (auto mode : {DerivativeMode::spectral, DerivativeMode::finite_difference}) {
    const DiracPotential fd = conductivity_to_potential(sample_gamma(preset, g), {.derivative = mode});
    CHECK(fd.support_box() == q.support_box());
  }
}

TEST_CASE("branch and modulus errors") {
  const GridSpec g = make_grid(1.0, 64);
  auto step = [](double t) { return 0.5 * std::erfc(-t / 0.08); };
  // arg(gamma) climbs by 2 pi along the middle rows and gamma returns to 1.
  const auto winding = sample(
      [&](complex z) {
        const double w = step(0.4 - std::abs(z.imag()));
        return std::exp(complex(0.0, 2.0 * std::numbers::pi * step(z.real()) * w));
      },
      g);
  // Fix the frame so that only the winding is wrong.
  ComplexField framed = winding;
  for (int i = 0; i < 64; ++i) {
    framed.at(i, 0) = framed.at(i, 63) = framed.at(0, i) = framed.at(63, i) = 1.0;
  }
  CHECK(code_of([&] { conductivity_to_potential(framed); }) == ErrorCode::BranchAmbiguity);

  const auto vanishing = sample([&](complex z) { return complex(1.0 - cutoff(z)); }, g);
  CHECK(code_of([&] { conductivity_to_potential(vanishing); }) == ErrorCode::VanishingConductivity);

  ComplexField frame(g, 1.0);
  frame.at(0, 10) = 1.5;
  CHECK(code_of([&] { conductivity_to_potential(frame); }) == ErrorCode::SupportAtFrame);
}

TEST_CASE("zero potential inverts to unit conductivity") {
  const GridSpec g = make_grid(1.0, 32);
  const ComplexField gamma = potential_to_conductivity(DiracPotential(g), CauchyKernel(g));
  CHECK(max_abs_difference(gamma, ComplexField(g, 1.0)) == 0.0);
}

TEST_CASE("conductivity roundtrip") {
  const GridSpec g = make_grid(1.0, 256);
  const CauchyKernel kernel(g);
  for (const auto& preset :
       {ConductivityPreset::real_bump(), ConductivityPreset::complex_bump(), ConductivityPreset::two_bump()}) {
    const ComplexField gamma = sample_gamma(preset, g);
    const ComplexField back = potential_to_conductivity(conductivity_to_potential(gamma), kernel);
    const double err = (back - gamma).l2_norm() / gamma.l2_norm();
    CAPTURE(to_string(preset.kind));
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("potential without a global logarithm does not decay") {
  const GridSpec g = make_grid(1.0, 64);
  DiracPotential q(g);
  q.q21 = sample(TestFunction{TestFunctionKind::cosine_bump, {}, 0.5, {3.0, 0.0}}, g);
  CHECK(code_of([&] { potential_to_conductivity(q, CauchyKernel(g)); }) == ErrorCode::NonDecayingSolution);
}

TEST_CASE("potential files roundtrip") {
  const GridSpec g = make_grid(1.0, 32);
  const DiracPotential q = conductivity_to_potential(sample_gamma(ConductivityPreset::two_bump(), g));
  const auto dir = std::filesystem::temp_directory_path() / "bukhgeim_potential_test";
  write_potential(q, dir, "q", "abc");
  const DiracPotential back = read_potential(dir, "q");
  CHECK(max_abs_difference(back.q12, q.q12) == 0.0);
  CHECK(max_abs_difference(back.q21, q.q21) == 0.0);
  CHECK(std::filesystem::exists(dir / "q.json"));
  std::filesystem::remove_all(dir);
}
