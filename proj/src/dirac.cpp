#include "bukhgeim/dirac.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace bukhgeim {

DiracPotential::DiracPotential(ComplexField upper, ComplexField lower)
    : q12(std::move(upper)), q21(std::move(lower)) {
  require_same_grid(q12.grid(), q21.grid(), "DiracPotential");
}

double DiracPotential::max_abs() const noexcept { return std::max(q12.max_abs(), q21.max_abs()); }

IndexBox DiracPotential::support_box() const noexcept {
  const IndexBox a = q12.support_box(), b = q21.support_box();
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.j0, b.j0), std::max(a.j1, b.j1), std::min(a.k0, b.k0), std::max(a.k1, b.k1)};
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Number of full turns separating two determinations of the same argument.
long turns(double a, double b) { return std::lround((a - b) / kTwoPi); }

}  // namespace

ComplexField unwrap_log(const ComplexField& gamma, double min_modulus) {
  const GridSpec& grid = gamma.grid();
  const int n = grid.points_per_side();
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!(std::abs(gamma[i]) >= min_modulus)) {
      std::ostringstream msg;
      msg << "|gamma| = " << std::abs(gamma[i]) << " below " << min_modulus << " at flat index " << i;
      throw Error(ErrorCode::VanishingConductivity, msg.str());
    }
  }
  for (int i = 0; i < n; ++i) {
    for (auto [j, k] : {std::pair{i, 0}, std::pair{i, n - 1}, std::pair{0, i}, std::pair{n - 1, i}}) {
      if (std::abs(gamma.at(j, k) - 1.0) > 1e-12) {
        throw Error(ErrorCode::SupportAtFrame, "gamma must equal 1 on the grid frame");
      }
    }
  }

  // Row sweep fixes the branch; the column sweep checks it.
  std::vector<double> row_phase(gamma.size()), col_phase(gamma.size());
  for (int k = 0; k < n; ++k) {
    double phase = std::arg(gamma.at(0, k));
    row_phase[grid.index(0, k)] = phase;
    for (int j = 1; j < n; ++j) {
      phase += std::arg(gamma.at(j, k) / gamma.at(j - 1, k));
      row_phase[grid.index(j, k)] = phase;
    }
    if (turns(phase, std::arg(gamma.at(n - 1, k))) != 0) {
      throw Error(ErrorCode::BranchAmbiguity, "gamma winds around 0 along row " + std::to_string(k));
    }
  }
  for (int j = 0; j < n; ++j) {
    double phase = std::arg(gamma.at(j, 0));
    col_phase[grid.index(j, 0)] = phase;
    for (int k = 1; k < n; ++k) {
      phase += std::arg(gamma.at(j, k) / gamma.at(j, k - 1));
      col_phase[grid.index(j, k)] = phase;
    }
    if (turns(phase, std::arg(gamma.at(j, n - 1))) != 0) {
      throw Error(ErrorCode::BranchAmbiguity, "gamma winds around 0 along column " + std::to_string(j));
    }
  }

  ComplexField log_gamma(grid);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (turns(row_phase[i], col_phase[i]) != 0) {
      throw Error(ErrorCode::BranchAmbiguity, "row and column unwrapping of arg(gamma) disagree");
    }
    log_gamma[i] = gamma[i] == complex(1.0) ? complex{} : complex(std::log(std::abs(gamma[i])), row_phase[i]);
  }
  return log_gamma;
}

DiracPotential conductivity_to_potential(const ComplexField& gamma, const DiracOptions& options) {
  const ComplexField log_gamma = unwrap_log(gamma, options.min_modulus);
  DiracPotential q(gamma.grid());
  if (log_gamma.support_box().empty()) return q;

  q.q12 = -0.5 * partial(log_gamma, options.derivative);
  q.q21 = conj(-0.5 * dbar(log_gamma, options.derivative));
  const auto mask = dilated_support(log_gamma, options.stencil_radius);
  apply_mask(q.q12, mask);
  apply_mask(q.q21, mask);
  return q;
}

ComplexField potential_to_conductivity(const DiracPotential& q, const CauchyKernel& kernel,
                                       const InversionOptions& options) {
  require_same_grid(q.grid(), kernel.grid(), "potential_to_conductivity");
  ComplexField log_gamma = cauchy_transform(-2.0 * conj(q.q21), kernel);

  const int n = q.grid().points_per_side();
  double frame = 0.0;
  for (int i = 0; i < n; ++i) {
    frame = std::max({frame, std::abs(log_gamma.at(i, 0)), std::abs(log_gamma.at(i, n - 1)),
                      std::abs(log_gamma.at(0, i)), std::abs(log_gamma.at(n - 1, i))});
  }
  const double limit = options.frame_tolerance * std::max(1.0, log_gamma.max_abs());
  if (frame > limit) {
    std::ostringstream msg;
    msg << "|log gamma| reaches " << frame << " on the frame (limit " << limit << ")";
    throw Error(ErrorCode::NonDecayingSolution, msg.str());
  }
  for (complex& v : log_gamma.values()) v = std::exp(v);
  return log_gamma;
}

void write_potential(const DiracPotential& q, const std::filesystem::path& directory,
                     const std::string& stem, const std::string& provenance) {
  std::filesystem::create_directories(directory);
  write_cfld(q.q12, directory / (stem + "_q12.cfld"));
  write_cfld(q.q21, directory / (stem + "_q21.cfld"));
  const nlohmann::json sidecar = {
      {"grid", {{"half_width", q.grid().half_width()}, {"points_per_side", q.grid().points_per_side()}}},
      {"entries", {stem + "_q12.cfld", stem + "_q21.cfld"}},
      {"provenance", provenance},
  };
  std::ofstream out(directory / (stem + ".json"));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (directory / (stem + ".json")).string());
  out << sidecar.dump(2) << '\n';
}

DiracPotential read_potential(const std::filesystem::path& directory, const std::string& stem) {
  return DiracPotential(read_cfld(directory / (stem + "_q12.cfld")), read_cfld(directory / (stem + "_q21.cfld")));
}

}  // namespace bukhgeim
