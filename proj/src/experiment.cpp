#include "bukhgeim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bukhgeim/provenance.hpp"

namespace bukhgeim {

using nlohmann::json;

namespace {

json to_json(complex z) { return json::array({z.real(), z.imag()}); }

complex complex_from(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::ConfigError, std::string(what) + " must be a number or [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<complex> complex_list_from(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, std::string(what) + " must be a list");
  std::vector<complex> out;
  for (const auto& v : j) out.push_back(complex_from(v, what));
  return out;
}

json to_json(const TestFunction& f) {
  return {{"kind", to_string(f.kind)}, {"center", to_json(f.center)}, {"radius", f.radius},
          {"amplitude", to_json(f.amplitude)}};
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad value for '") + key + "': " + e.what());
  }
}

TestFunction test_function_from(const json& j, TestFunction f) {
  if (j.contains("kind")) f.kind = parse_test_function_kind(j.at("kind").get<std::string>());
  if (j.contains("center")) f.center = complex_from(j.at("center"), "center");
  read_if(j, "radius", f.radius);
  if (j.contains("amplitude")) f.amplitude = complex_from(j.at("amplitude"), "amplitude");
  return f;
}

ConductivityPreset preset_defaults(ConductivityKind kind) {
  switch (kind) {
    case ConductivityKind::unit: return ConductivityPreset::unit();
    case ConductivityKind::real_bump: return ConductivityPreset::real_bump();
    case ConductivityKind::complex_bump: return ConductivityPreset::complex_bump();
    case ConductivityKind::two_bump: return ConductivityPreset::two_bump();
  }
  return {};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json manifest(const ExperimentConfig& config, const char* command) {
  return {{"command", command},
          {"config", config_to_json(config)},
          {"provenance", config_provenance(config)},
          {"conj_mode", to_string(config.conj_mode)},
          {"outputs", json::object()},
          {"timings_s", json::object()}};
}

DiracPotential true_potential(const ExperimentConfig& config, const GridSpec& grid) {
  return conductivity_to_potential(sample_gamma(config.conductivity, grid));
}

}  // namespace

AnnulusQuadrature ExperimentConfig::annulus() const {
  return make_annulus(inner_radius, radial_nodes, angular_nodes, angle_offset);
}

ExperimentConfig config_from_json(const json& root) {
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  // A manifest carries its config under "config".
  const json& j = root.contains("config") && root.at("config").is_object() ? root.at("config") : root;
  ExperimentConfig c;
  try {
    if (j.contains("grid")) {
      read_if(j.at("grid"), "half_width", c.half_width);
      read_if(j.at("grid"), "points_per_side", c.points_per_side);
    }
    if (j.contains("conductivity")) {
      const json& g = j.at("conductivity");
      const ConductivityKind kind = parse_conductivity_kind(g.value("kind", std::string("complex_bump")));
      c.conductivity = preset_defaults(kind);
      if (g.contains("center")) c.conductivity.center = complex_from(g.at("center"), "conductivity center");
      read_if(g, "radius", c.conductivity.radius);
      if (g.contains("amplitude")) {
        c.conductivity.amplitude = complex_from(g.at("amplitude"), "conductivity amplitude");
      }
    }
    if (j.contains("annulus")) {
      const json& a = j.at("annulus");
      read_if(a, "inner_radius", c.inner_radius);
      read_if(a, "radial_nodes", c.radial_nodes);
      read_if(a, "angular_nodes", c.angular_nodes);
      read_if(a, "angle_offset", c.angle_offset);
    }
    if (j.contains("w_sampling")) {
      read_if(j.at("w_sampling"), "stride", c.w_sampling.stride);
      read_if(j.at("w_sampling"), "window", c.w_sampling.window);
    }
    if (j.contains("solver")) {
      read_if(j.at("solver"), "tol", c.solver.tol);
      read_if(j.at("solver"), "max_iter", c.solver.max_iter);
      read_if(j.at("solver"), "stall_limit", c.solver.stall_limit);
    }
    if (j.contains("conj_mode")) c.conj_mode = parse_conj_mode(j.at("conj_mode").get<std::string>());
    if (j.contains("method")) c.method = parse_scattering_method(j.at("method").get<std::string>());
    read_if(j, "threads", c.threads);
    read_if(j, "seed", c.seed);
    if (j.contains("weak_test_function")) {
      c.weak_test_function = test_function_from(j.at("weak_test_function"), c.weak_test_function);
    }
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      DiagnosticsConfig& dc = c.diagnostics;
      read_if(d, "shells", dc.shells);
      read_if(d, "p", dc.p);
      read_if(d, "radial_nodes", dc.radial_nodes);
      read_if(d, "angular_nodes", dc.angular_nodes);
      read_if(d, "include_mu", dc.include_mu);
      if (d.contains("z_samples")) dc.z_samples = complex_list_from(d.at("z_samples"), "z_samples");
      if (d.contains("w_samples")) dc.w_samples = complex_list_from(d.at("w_samples"), "w_samples");
      if (d.contains("stationary_phase")) {
        const json& s = d.at("stationary_phase");
        if (s.contains("test_function")) dc.phase_function = test_function_from(s.at("test_function"), dc.phase_function);
        if (s.contains("z")) dc.phase_point = complex_from(s.at("z"), "stationary_phase z");
        read_if(s, "moduli", dc.phase_moduli);
        read_if(s, "angle", dc.phase_angle);
        read_if(s, "points_per_side", dc.phase_points_per_side);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }

  require(c.half_width > 0.0 && std::isfinite(c.half_width), "grid.half_width must be positive");
  require(c.points_per_side >= 4 && c.points_per_side % 2 == 0, "grid.points_per_side must be even and >= 4");
  require(c.conductivity.radius > 0.0, "conductivity.radius must be positive");
  require(c.inner_radius > 0.0, "annulus.inner_radius must be positive");
  require(c.radial_nodes >= 1 && c.angular_nodes >= 1, "annulus node counts must be positive");
  require(c.w_sampling.window >= 0.0, "w_sampling.window must be nonnegative");
  require(c.solver.tol > 0.0 && c.solver.max_iter >= 1 && c.solver.stall_limit >= 1, "bad solver settings");
  require(c.threads >= 1, "threads must be at least 1");
  require(c.diagnostics.p > 1.0, "diagnostics.p must exceed 1");
  require(c.diagnostics.phase_points_per_side >= 4 && c.diagnostics.phase_points_per_side % 2 == 0,
          "stationary_phase.points_per_side must be even and >= 4");
  try {
    c.w_sampling.coarse_grid(c.grid());
    if (c.conductivity.kind != ConductivityKind::unit) {
      require_support_inside(c.grid(), c.conductivity.center, c.conductivity.exponent().support_half_width());
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const DiagnosticsConfig& d = c.diagnostics;
  json z = json::array(), w = json::array();
  for (complex v : d.z_samples) z.push_back(to_json(v));
  for (complex v : d.w_samples) w.push_back(to_json(v));
  return {
      {"grid", {{"half_width", c.half_width}, {"points_per_side", c.points_per_side}}},
      {"conductivity",
       {{"kind", to_string(c.conductivity.kind)},
        {"center", to_json(c.conductivity.center)},
        {"radius", c.conductivity.radius},
        {"amplitude", to_json(c.conductivity.amplitude)}}},
      {"annulus",
       {{"inner_radius", c.inner_radius},
        {"radial_nodes", c.radial_nodes},
        {"angular_nodes", c.angular_nodes},
        {"angle_offset", c.angle_offset}}},
      {"w_sampling", {{"stride", c.w_sampling.stride}, {"window", c.w_sampling.window}}},
      {"solver", {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"stall_limit", c.solver.stall_limit}}},
      {"conj_mode", to_string(c.conj_mode)},
      {"method", to_string(c.method)},
      {"threads", c.threads},
      {"seed", c.seed},
      {"weak_test_function", to_json(c.weak_test_function)},
      {"diagnostics",
       {{"shells", d.shells},
        {"p", d.p},
        {"radial_nodes", d.radial_nodes},
        {"angular_nodes", d.angular_nodes},
        {"include_mu", d.include_mu},
        {"z_samples", z},
        {"w_samples", w},
        {"stationary_phase",
         {{"test_function", to_json(d.phase_function)},
          {"z", to_json(d.phase_point)},
          {"moduli", d.phase_moduli},
          {"angle", d.phase_angle},
          {"points_per_side", d.phase_points_per_side}}}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<std::string> config_warnings(const ExperimentConfig& config) {
  std::vector<std::string> out;
  const int n = config.points_per_side;
  if ((n & (n - 1)) != 0) out.push_back("points_per_side " + std::to_string(n) + " is not a power of two");
  if (config.angular_nodes < 8) out.push_back("fewer than 8 angular nodes per annulus");
  return out;
}

std::string config_provenance(const ExperimentConfig& config) {
  // Thread count does not change the outputs, so it stays out of the hash.
  json j = config_to_json(config);
  j.erase("threads");
  return git_blob_hash(j.dump());
}

// ---------------------------------------------------------------------------

ForwardResult cmd_forward(const ExperimentConfig& config, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  Stopwatch clock;
  json m = manifest(config, "forward");

  const GridSpec grid = config.grid();
  const DiracPotential q = true_potential(config, grid);
  const CauchyKernel kernel(grid);
  m["timings_s"]["setup"] = clock.lap();

  DatasetOptions options;
  options.solver = config.solver;
  options.conj_mode = config.conj_mode;
  options.method = config.method;
  options.threads = config.threads;
  options.provenance = config_provenance(config);
  ForwardResult result{compute_dataset(q, config.annulus(), config.w_sampling, options, kernel), ExitStatus::success};
  m["timings_s"]["dataset"] = clock.lap();

  write_dataset(result.dataset, out / "dataset.bkds");
  write_dataset_csv(result.dataset, out / "dataset.csv");
  m["timings_s"]["write"] = clock.lap();

  if (result.dataset.any_not_contractive()) {
    result.status = ExitStatus::not_contractive;
  } else if (!result.dataset.complete()) {
    result.status = ExitStatus::partial_dataset;
  }
  m["outputs"] = {{"dataset", "dataset.bkds"}, {"dataset_csv", "dataset.csv"}};
  m["samples"] = result.dataset.sample_count();
  m["failed_samples"] = result.dataset.failed_count();
  m["max_discrepancy"] = result.dataset.max_discrepancy();
  m["exit_status"] = static_cast<int>(result.status);
  write_json(m, out / "manifest.json");
  return result;
}

ReconstructResult cmd_reconstruct(const std::filesystem::path& dataset, const ExperimentConfig& config,
                                  const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  Stopwatch clock;
  json m = manifest(config, "reconstruct");

  const ScatteringDataset ds = read_dataset(dataset);
  const GridSpec grid = config.grid();
  require_same_grid(ds.grid, grid, "reconstruct");

  ReconstructResult r{reconstruct_pointwise(ds), {}, {}, {}, 0.0, false};
  const GridSpec coarse = r.reconstruction.potential.grid();
  const DiracPotential q = true_potential(config, grid);
  r.potential_error = error_metrics(r.reconstruction.potential, restrict_to_samples(q, ds.w_sampling));
  m["timings_s"]["pointwise"] = clock.lap();

  const ComplexField gamma = recover_gamma(r.reconstruction);
  r.gamma_recovered = true;
  r.gamma_error = error_metrics(gamma, sample_gamma(config.conductivity, coarse));
  m["timings_s"]["gamma"] = clock.lap();

  r.weak = reconstruct_weak(ds, config.weak_test_function);
  const ComplexField g = sample(config.weak_test_function, grid);
  ComplexField g12(grid), g21(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    g12[i] = g[i] * q.q12[i];
    g21[i] = g[i] * q.q21[i];
  }
  const Matrix2 truth{complex{}, integrate(g12), integrate(g21), complex{}};
  double diff = 0.0, size = 0.0;
  for (int e = 0; e < 4; ++e) {
    diff = std::max(diff, std::abs(r.weak[e] - truth[e]));
    size = std::max(size, std::abs(truth[e]));
  }
  r.weak_rel_error = size > 0.0 ? diff / size : diff;
  m["timings_s"]["weak"] = clock.lap();

  write_cfld(r.reconstruction.potential.q12, out / "q_rec_q12.cfld");
  write_cfld(r.reconstruction.potential.q21, out / "q_rec_q21.cfld");
  write_cfld(gamma, out / "gamma_rec.cfld");
  {
    std::ofstream csv(out / "errors.csv");
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (out / "errors.csv").string());
    csv << std::setprecision(17) << kErrorTableHeader << '\n'
        << to_string(config.conductivity.kind) << ',' << grid.points_per_side() << ',' << ds.annulus.inner_radius
        << ',' << ds.annulus.radial_nodes << ',' << ds.annulus.angular_nodes << ',' << r.potential_error.rel_l2
        << ',' << r.gamma_error.rel_l2 << ',' << r.reconstruction.noise_floor() << ',' << r.weak_rel_error << '\n';
  }
  m["dataset"] = std::filesystem::absolute(dataset).string();
  m["dataset_provenance"] = ds.provenance;
  m["outputs"] = {{"q12", "q_rec_q12.cfld"}, {"q21", "q_rec_q21.cfld"}, {"gamma", "gamma_rec.cfld"},
                  {"errors", "errors.csv"}};
  json weak = json::array();
  for (complex v : r.weak) weak.push_back(to_json(v));
  m["weak"] = weak;
  write_json(m, out / "manifest.json");
  return r;
}

ExitStatus cmd_roundtrip(const ExperimentConfig& config, const std::filesystem::path& out) {
  const ForwardResult forward = cmd_forward(config, out / "forward");
  if (forward.status != ExitStatus::success) return forward.status;
  cmd_reconstruct(out / "forward" / "dataset.bkds", config, out / "reconstruct");
  std::filesystem::copy_file(out / "reconstruct" / "errors.csv", out / "summary.csv",
                             std::filesystem::copy_options::overwrite_existing);
  return ExitStatus::success;
}

void cmd_diagnostics(const ExperimentConfig& config, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  Stopwatch clock;
  json m = manifest(config, "diagnostics");
  const DiagnosticsConfig& d = config.diagnostics;

  const GridSpec grid = config.grid();
  const DiracPotential q = true_potential(config, grid);
  const CauchyKernel kernel(grid);
  DecayOptions options;
  options.p = d.p;
  options.radial_nodes = d.radial_nodes;
  options.angular_nodes = d.angular_nodes;
  options.solver = config.solver;
  options.include_mu = d.include_mu;
  const DecayReport report = decay_diagnostics(q, d.shells, d.z_samples, d.w_samples, kernel, options);
  write_decay_csv(report, out / "decay.csv");
  m["timings_s"]["decay"] = clock.lap();
  m["decay_quadrature"] = report.quadrature;

  std::vector<complex> lambdas;
  for (double r : d.phase_moduli) lambdas.push_back(std::polar(r, d.phase_angle));
  const StationaryPhaseTable table = stationary_phase_check(
      d.phase_function, d.phase_point, lambdas, make_grid(config.half_width, d.phase_points_per_side));
  write_stationary_phase_csv(table, out / "stationary_phase.csv");
  m["timings_s"]["stationary_phase"] = clock.lap();
  m["stationary_phase_slope"] = table.slope;
  m["outputs"] = {{"decay", "decay.csv"}, {"stationary_phase", "stationary_phase.csv"}};
  write_json(m, out / "manifest.json");
}

}  // namespace bukhgeim
