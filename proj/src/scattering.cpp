#include "bukhgeim/scattering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bukhgeim/kernels.hpp"

namespace bukhgeim {

std::string_view to_string(ConjMode mode) noexcept {
  return mode == ConjMode::conjugated ? "conjugated" : "plain";
}

std::string_view to_string(ScatteringMethod method) noexcept {
  return method == ScatteringMethod::volume ? "volume" : "boundary";
}

ConjMode parse_conj_mode(std::string_view name) {
  if (name == "conjugated") return ConjMode::conjugated;
  if (name == "plain") return ConjMode::plain;
  throw Error(ErrorCode::ConfigError, "unknown conj_mode '" + std::string(name) + "'");
}

ScatteringMethod parse_scattering_method(std::string_view name) {
  if (name == "volume") return ScatteringMethod::volume;
  if (name == "boundary") return ScatteringMethod::boundary;
  throw Error(ErrorCode::ConfigError, "unknown scattering method '" + std::string(name) + "'");
}

std::string_view to_string(SampleStatus status) noexcept {
  switch (status) {
    case SampleStatus::ok: return "ok";
    case SampleStatus::not_contractive: return "not_contractive";
    case SampleStatus::max_iterations: return "max_iterations";
    case SampleStatus::forms_disagree: return "forms_disagree";
  }
  return "unknown";
}

namespace {

complex weighted_integral(const ComplexField& e_minus, const ComplexField& potential, const ComplexField& g,
                          bool conjugate) {
  ComplexField product(e_minus.grid());
  if (conjugate) {
    kernels::multiply_conj(e_minus.values(), potential.values(), g.values(), product.values());
  } else {
    kernels::multiply3(e_minus.values(), potential.values(), g.values(), product.values());
  }
  return kernels::sum(product.values()) * e_minus.grid().cell_area();
}

}  // namespace

Matrix2 T_lambda(const MatrixField& g, const DiracPotential& q, const SpectralPoint& sp) {
  require_same_grid(g.grid(), q.grid(), "T_lambda");
  if (q.is_zero()) return {};
  const ComplexField e_minus = bukhgeim_phase(q.grid(), sp).e_minus;
  // (Q G)_11 = Q12 G21, _12 = Q12 G22, _21 = Q21 G11, _22 = Q21 G12
  return {weighted_integral(e_minus, q.q12, g.m21, false), weighted_integral(e_minus, q.q12, g.m22, false),
          weighted_integral(e_minus, q.q21, g.m11, false), weighted_integral(e_minus, q.q21, g.m12, false)};
}

Matrix2 T_lambda(const ComplexField& g, const DiracPotential& q, const SpectralPoint& sp) {
  require_same_grid(g.grid(), q.grid(), "T_lambda");
  if (q.is_zero()) return {};
  const ComplexField e_minus = bukhgeim_phase(q.grid(), sp).e_minus;
  return {complex{}, weighted_integral(e_minus, q.q12, g, false), weighted_integral(e_minus, q.q21, g, false),
          complex{}};
}

Matrix2 scattering_volume(const DiracPotential& q, const MuSolution& mu, ConjMode mode) {
  if (!mu.converged) throw Error(ErrorCode::NotConverged, "scattering data needs a converged mu");
  require_same_grid(mu.mu.grid(), q.grid(), "scattering_volume");
  if (q.is_zero()) return {};
  const ComplexField e_minus = bukhgeim_phase(q.grid(), mu.spectral).e_minus;
  const bool c = mode == ConjMode::conjugated;
  const MatrixField& m = mu.mu;
  return {weighted_integral(e_minus, q.q12, m.m21, c), weighted_integral(e_minus, q.q12, m.m22, c),
          weighted_integral(e_minus, q.q21, m.m11, c), weighted_integral(e_minus, q.q21, m.m12, c)};
}

SquareContour contour_around(const DiracPotential& q, int clearance) {
  const int n = q.grid().points_per_side();
  const IndexBox box = q.support_box();
  // An empty potential gets the contour through the middle of the grid.
  const IndexBox core = box.empty() ? IndexBox{n / 2, n / 2 + 1, n / 2, n / 2 + 1} : box;
  const SquareContour c{core.j0 - clearance, core.k0 - clearance, core.j1 - 1 + clearance,
                        core.k1 - 1 + clearance};
  if (c.j0 < 0 || c.k0 < 0 || c.j1 > n - 1 || c.k1 > n - 1) {
    throw Error(ErrorCode::ContourTooTight, "no room for a contour " + std::to_string(clearance) +
                                                " cells outside the potential support");
  }
  return c;
}

Matrix2 scattering_boundary(const MuSolution& mu, const SquareContour& c, const DiracPotential& q) {
  if (!mu.converged) throw Error(ErrorCode::NotConverged, "scattering data needs a converged mu");
  const IndexBox support = q.support_box();
  if (!support.empty() &&
      (support.j0 - c.j0 < kContourClearance || support.k0 - c.k0 < kContourClearance ||
       c.j1 - (support.j1 - 1) < kContourClearance || c.k1 - (support.k1 - 1) < kContourClearance)) {
    throw Error(ErrorCode::ContourTooTight, "potential support within " + std::to_string(kContourClearance) +
                                                " cells of the contour");
  }
  const IndexBox& valid = mu.valid_box;
  if (!valid.contains(c.j0, c.k0) || !valid.contains(c.j1, c.k1)) {
    throw Error(ErrorCode::NotConverged, "mu was not evaluated on the contour");
  }

  const GridSpec& grid = mu.mu.grid();
  const double h = grid.spacing();
  Matrix2 total{};
  for (int e = 0; e < 4; ++e) {
    const ComplexField& f = mu.mu.entry(e);
    complex sum{};
    // Counter-clockwise: bottom, right, top, left; trapezoid on each edge.
    auto edge = [&](int ja, int ka, int jb, int kb, complex step) {
      const int count = std::max(std::abs(jb - ja), std::abs(kb - ka));
      const int dj = (jb > ja) - (jb < ja), dk = (kb > ka) - (kb < ka);
      complex s = 0.5 * (f.at(ja, ka) + f.at(jb, kb));
      for (int i = 1; i < count; ++i) s += f.at(ja + i * dj, ka + i * dk);
      sum += s * step;
    };
    edge(c.j0, c.k0, c.j1, c.k0, complex(h, 0.0));
    edge(c.j1, c.k0, c.j1, c.k1, complex(0.0, h));
    edge(c.j1, c.k1, c.j0, c.k1, complex(-h, 0.0));
    edge(c.j0, c.k1, c.j0, c.k0, complex(0.0, -h));
    total[e] = sum / complex(0.0, 2.0);
  }
  return total;
}

double relative_discrepancy(const Matrix2& a, const Matrix2& b, double eps) {
  double diff = 0.0, size = 0.0;
  for (int i = 0; i < 4; ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    size = std::max(size, std::abs(a[i]));
  }
  return diff / std::max(size, eps);
}

// ---------------------------------------------------------------------------

GridSpec WSampling::coarse_grid(const GridSpec& grid) const {
  const int n = grid.points_per_side();
  if (stride < 1 || n % stride != 0 || (n / stride) % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "w stride " + std::to_string(stride) +
                                            " must divide N into an even number of coarse cells");
  }
  return make_grid(grid.half_width(), n / stride);
}

std::vector<std::pair<int, int>> WSampling::coarse_indices(const GridSpec& grid) const {
  const GridSpec coarse = coarse_grid(grid);
  std::vector<std::pair<int, int>> out;
  const double slack = 1e-9 * grid.spacing();
  // The coarse frame is skipped so a reconstruction on the coarse grid
  // vanishes there, as the Cauchy transform requires.
  for (int k = 1; k + 1 < coarse.points_per_side(); ++k) {
    for (int j = 1; j + 1 < coarse.points_per_side(); ++j) {
      const complex z = coarse.node(j, k);
      if (std::abs(z.real()) <= window + slack && std::abs(z.imag()) <= window + slack) out.emplace_back(j, k);
    }
  }
  return out;
}

std::vector<complex> WSampling::points(const GridSpec& grid) const {
  const GridSpec coarse = coarse_grid(grid);
  std::vector<complex> out;
  for (auto [j, k] : coarse_indices(grid)) out.push_back(coarse.node(j, k));
  return out;
}

std::size_t ScatteringDataset::failed_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [](const SampleRecord& r) { return r.status != SampleStatus::ok; }));
}

bool ScatteringDataset::any_not_contractive() const noexcept {
  return std::any_of(records.begin(), records.end(),
                     [](const SampleRecord& r) { return r.status == SampleStatus::not_contractive; });
}

double ScatteringDataset::max_discrepancy() const noexcept {
  double worst = 0.0;
  for (const SampleRecord& r : records) {
    if (r.status == SampleStatus::ok || r.status == SampleStatus::forms_disagree) {
      worst = std::max(worst, r.discrepancy);
    }
  }
  return worst;
}

ScatteringDataset compute_dataset(const DiracPotential& q, const AnnulusQuadrature& annulus,
                                  const WSampling& w_sampling, const DatasetOptions& options,
                                  const CauchyKernel& kernel) {
  const GridSpec& grid = q.grid();
  require_same_grid(grid, kernel.grid(), "compute_dataset");
  ScatteringDataset ds{grid,
                       annulus,
                       w_sampling,
                       w_sampling.points(grid),
                       options.solver,
                       options.conj_mode,
                       options.method,
                       options.provenance,
                       {},
                       {},
                       {}};
  const std::size_t total = annulus.nodes.size() * ds.w_samples.size();
  ds.h.assign(total, Matrix2{});
  ds.secondary.assign(total, Matrix2{});
  ds.records.assign(total, SampleRecord{});

  const SquareContour contour = contour_around(q);
  // |h| <= ||Q||_1 sup|mu|; samples far below that scale (for example a
  // symmetric potential at w = 0, where h vanishes by parity) are compared
  // against it instead of against their own size.
  double q_l1 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) q_l1 += std::abs(q.q12[i]) + std::abs(q.q21[i]);
  const double floor = std::max(1e-12, 1e-6 * q_l1 * grid.cell_area());
  SolverOptions solver = options.solver;
  solver.output_margin = kContourClearance + 1;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t id = next++; id < total; id = next++) {
      const std::size_t il = id / ds.w_samples.size();
      const std::size_t iw = id % ds.w_samples.size();
      const SpectralPoint sp{annulus.nodes[il], ds.w_samples[iw]};
      SampleRecord& record = ds.records[id];
      try {
        const MuSolution mu = solve_mu(q, sp, solver, kernel);
        const Matrix2 volume = scattering_volume(q, mu, options.conj_mode);
        const Matrix2 boundary = scattering_boundary(mu, contour, q);
        const bool boundary_first = options.method == ScatteringMethod::boundary;
        ds.h[id] = boundary_first ? boundary : volume;
        ds.secondary[id] = boundary_first ? volume : boundary;
        record.iterations = static_cast<std::uint32_t>(mu.iterations);
        record.residual = mu.final_residual;
        record.discrepancy = relative_discrepancy(volume, boundary, floor);
        if (record.discrepancy > options.discrepancy_limit) record.status = SampleStatus::forms_disagree;
      } catch (const SolverError& e) {
        record.status = e.code() == ErrorCode::NotContractive ? SampleStatus::not_contractive
                                                              : SampleStatus::max_iterations;
        record.iterations = static_cast<std::uint32_t>(e.iterations());
        record.residual = e.residual();
      }
    }
  };

  const int width = std::max(1, options.threads);
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < width; ++t) pool.emplace_back(worker);
  }
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'K', 'D', 'S'};

nlohmann::json complex_list(const std::vector<complex>& values) {
  nlohmann::json out = nlohmann::json::array();
  for (complex v : values) out.push_back({v.real(), v.imag()});
  return out;
}

std::vector<complex> parse_complex_list(const nlohmann::json& j) {
  std::vector<complex> out;
  for (const auto& v : j) out.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  return out;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::FormatError, "dataset file truncated");
  return value;
}

}  // namespace

void write_dataset(const ScatteringDataset& ds, const std::filesystem::path& path) {
  const nlohmann::json header = {
      {"grid", {{"half_width", ds.grid.half_width()}, {"points_per_side", ds.grid.points_per_side()}}},
      {"annulus",
       {{"inner_radius", ds.annulus.inner_radius},
        {"radial_nodes", ds.annulus.radial_nodes},
        {"angular_nodes", ds.annulus.angular_nodes},
        {"nodes", complex_list(ds.annulus.nodes)},
        {"weights", ds.annulus.weights}}},
      {"w_sampling", {{"stride", ds.w_sampling.stride}, {"window", ds.w_sampling.window}}},
      {"w_samples", complex_list(ds.w_samples)},
      {"solver",
       {{"tol", ds.solver.tol}, {"max_iter", ds.solver.max_iter}, {"stall_limit", ds.solver.stall_limit}}},
      {"conj_mode", to_string(ds.conj_mode)},
      {"method", to_string(ds.method)},
      {"provenance", ds.provenance},
      {"samples", ds.sample_count()},
      {"failed", ds.failed_count()},
      {"max_discrepancy", ds.max_discrepancy()},
  };
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kDatasetVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* block : {&ds.h, &ds.secondary}) {
    for (const Matrix2& m : *block) {
      for (complex v : m) {
        put(out, v.real());
        put(out, v.imag());
      }
    }
  }
  for (const SampleRecord& r : ds.records) {
    put(out, static_cast<std::uint32_t>(r.status));
    put(out, r.iterations);
    put(out, r.residual);
    put(out, r.discrepancy);
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

ScatteringDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::FormatError, "not a BKDS dataset");
  const auto version = get<std::uint32_t>(in);
  if (version != kDatasetVersion) {
    throw Error(ErrorCode::FormatError, "unsupported dataset version " + std::to_string(version));
  }
  const auto length = get<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw Error(ErrorCode::FormatError, "dataset header truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("dataset header: ") + e.what());
  }
  try {
    const auto& g = header.at("grid");
    const auto& a = header.at("annulus");
    const auto& s = header.at("solver");
    ScatteringDataset ds{make_grid(g.at("half_width").get<double>(), g.at("points_per_side").get<int>()),
                         AnnulusQuadrature{a.at("inner_radius").get<double>(), a.at("radial_nodes").get<int>(),
                                           a.at("angular_nodes").get<int>(), parse_complex_list(a.at("nodes")),
                                           a.at("weights").get<std::vector<double>>()},
                         WSampling{header.at("w_sampling").at("stride").get<int>(),
                                   header.at("w_sampling").at("window").get<double>()},
                         parse_complex_list(header.at("w_samples")),
                         SolverOptions{s.at("tol").get<double>(), s.at("max_iter").get<int>(),
                                       s.at("stall_limit").get<int>()},
                         parse_conj_mode(header.at("conj_mode").get<std::string>()),
                         parse_scattering_method(header.at("method").get<std::string>()),
                         header.at("provenance").get<std::string>(),
                         {},
                         {},
                         {}};
    const std::size_t total = header.at("samples").get<std::size_t>();
    if (total != ds.annulus.nodes.size() * ds.w_samples.size()) {
      throw Error(ErrorCode::FormatError, "sample count does not match the lambda and w samples");
    }
    for (auto* block : {&ds.h, &ds.secondary}) {
      block->resize(total);
      for (Matrix2& m : *block) {
        for (complex& v : m) {
          const double re = get<double>(in);
          v = {re, get<double>(in)};
        }
      }
    }
    ds.records.resize(total);
    for (SampleRecord& r : ds.records) {
      r.status = static_cast<SampleStatus>(get<std::uint32_t>(in));
      r.iterations = get<std::uint32_t>(in);
      r.residual = get<double>(in);
      r.discrepancy = get<double>(in);
    }
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("dataset header: ") + e.what());
  }
}

void write_dataset_csv(const ScatteringDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << std::setprecision(17);
  out << "re_lambda,im_lambda,re_w,im_w,h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im,residual\n";
  for (std::size_t il = 0; il < ds.annulus.nodes.size(); ++il) {
    for (std::size_t iw = 0; iw < ds.w_samples.size(); ++iw) {
      const std::size_t id = ds.sample_id(il, iw);
      out << ds.annulus.nodes[il].real() << ',' << ds.annulus.nodes[il].imag() << ',' << ds.w_samples[iw].real()
          << ',' << ds.w_samples[iw].imag();
      for (complex v : ds.h[id]) out << ',' << v.real() << ',' << v.imag();
      out << ',' << ds.records[id].residual << '\n';
    }
  }
}

}  // namespace bukhgeim
