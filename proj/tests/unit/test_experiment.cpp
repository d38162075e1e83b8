#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "bukhgeim/experiment.hpp"

using namespace bukhgeim;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config json roundtrip") {
  ExperimentConfig c;
  c.conductivity = ConductivityPreset::two_bump({0.1, -0.1}, 0.4);
  c.inner_radius = 30.0;
  c.conj_mode = ConjMode::plain;
  c.method = ScatteringMethod::volume;
  const nlohmann::json j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
  CHECK(config_from_json(nlohmann::json::object()).points_per_side == ExperimentConfig{}.points_per_side);
}

TEST_CASE("manifest is accepted as a config") {
  const ExperimentConfig c;
  const nlohmann::json manifest{{"command", "forward"}, {"config", config_to_json(c)}};
  CHECK(config_provenance(config_from_json(manifest)) == config_provenance(c));
}

TEST_CASE("invalid configs") {
  CHECK(code_of([] { config_from_json({{"grid", {{"points_per_side", 7}}}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"conductivity", {{"kind", "sphere"}}}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"threads", 0}}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { config_from_json({{"conj_mode", "sometimes"}}); }) == ErrorCode::ConfigError);
  // Bump reaching the frame.
  CHECK(code_of([] { config_from_json({{"conductivity", {{"kind", "real_bump"}, {"radius", 1.2}}}}); }) ==
        ErrorCode::ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "bukhgeim_bad_config.json";
  std::ofstream(path) << "{ not json";
  CHECK(code_of([&] { load_config(path); }) == ErrorCode::ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("provenance ignores the thread count only") {
  ExperimentConfig a, b, c;
  b.threads = 4;
  c.inner_radius = 21.0;
  CHECK(config_provenance(a) == config_provenance(b));
  CHECK(config_provenance(a) != config_provenance(c));
  CHECK(config_provenance(a).size() == 40);
}

TEST_CASE("warnings") {
  ExperimentConfig c;
  CHECK(config_warnings(c).empty());
  c.points_per_side = 48;
  c.angular_nodes = 4;
  CHECK(config_warnings(c).size() == 2);
}

TEST_CASE("forward and reconstruct on a small grid") {
  ExperimentConfig c;
  c.points_per_side = 32;
  c.conductivity = ConductivityPreset::complex_bump({}, 0.6);
  c.w_sampling = {4, 0.85};
  c.weak_test_function = {TestFunctionKind::gaussian_bump, {}, 0.3, {1.0, 0.0}};
  c.angular_nodes = 4;
  const auto out = std::filesystem::temp_directory_path() / "bukhgeim_experiment_test";
  std::filesystem::remove_all(out);
  const ForwardResult f = cmd_forward(c, out / "forward");
  CHECK(f.status == ExitStatus::success);
  for (const char* name : {"dataset.bkds", "dataset.csv", "manifest.json"}) CHECK(std::filesystem::exists(out / "forward" / name));
  const ReconstructResult r = cmd_reconstruct(out / "forward" / "dataset.bkds", c, out / "reconstruct");
  CHECK(r.gamma_recovered);
  CHECK(std::isfinite(r.potential_error.rel_l2));
  ExperimentConfig other = c;
  other.points_per_side = 64;
  CHECK(code_of([&] { cmd_reconstruct(out / "forward" / "dataset.bkds", other, out / "other"); }) ==
        ErrorCode::GridMismatch);
  std::filesystem::remove_all(out);
}
