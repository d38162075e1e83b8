// bukhgeim forward|reconstruct|roundtrip|diagnostics --config <path> --out <dir> [--threads n]
//
// Exit codes: 0 success, 2 config error, 3 partial dataset, 4 non-contractive
// lambda, 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bukhgeim/experiment.hpp"

using namespace bukhgeim;

namespace {

int thread_count(int flag, int from_config) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("BUKHGEIM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    throw Error(ErrorCode::ConfigError, std::string("BUKHGEIM_THREADS='") + env + "' is not a positive integer");
  }
  return from_config;
}

ExperimentConfig prepare(const std::string& path, int threads) {
  ExperimentConfig config = load_config(path);
  config.threads = thread_count(threads, config.threads);
  for (const std::string& w : config_warnings(config)) std::cerr << "warning: " << w << '\n';
  return config;
}

// The dataset to reconstruct: explicit flag, else the one a forward manifest
// points at, else <out>/dataset.bkds.
std::filesystem::path dataset_path(const std::string& flag, const std::string& config_path,
                                   const std::filesystem::path& out) {
  if (!flag.empty()) return flag;
  std::ifstream in(config_path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (!j.is_discarded() && j.contains("outputs") && j["outputs"].contains("dataset")) {
    return std::filesystem::path(config_path).parent_path() / j["outputs"]["dataset"].get<std::string>();
  }
  return out / "dataset.bkds";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering-data reconstruction of complex conductivities"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dataset;
  int threads = 0;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON) or a manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--threads", threads, "worker threads (default: BUKHGEIM_THREADS, then the config)")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* forward = app.add_subcommand("forward", "conductivity -> scattering dataset");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "scattering dataset -> potential and conductivity");
  CLI::App* roundtrip = app.add_subcommand("roundtrip", "forward, reconstruct and compare to ground truth");
  CLI::App* diagnostics = app.add_subcommand("diagnostics", "decay norms and stationary-phase table");
  for (CLI::App* cmd : {forward, reconstruct, roundtrip, diagnostics}) common(cmd);
  reconstruct->add_option("--dataset", dataset, "dataset file (default: from the manifest or <out>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::config_error);
  }

  try {
    const ExperimentConfig config = prepare(config_path, threads);
    const std::filesystem::path out(out_dir);
    if (forward->parsed()) {
      const ForwardResult r = cmd_forward(config, out);
      std::cout << "samples " << r.dataset.sample_count() << ", failed " << r.dataset.failed_count()
                << ", max volume/boundary discrepancy " << r.dataset.max_discrepancy() << '\n';
      return static_cast<int>(r.status);
    }
    if (reconstruct->parsed()) {
      const ReconstructResult r = cmd_reconstruct(dataset_path(dataset, config_path, out), config, out);
      std::cout << "relL2_Q " << r.potential_error.rel_l2 << ", relL2_gamma " << r.gamma_error.rel_l2
                << ", diag_noise_floor " << r.reconstruction.noise_floor() << '\n';
      return 0;
    }
    if (roundtrip->parsed()) {
      const ExitStatus s = cmd_roundtrip(config, out);
      if (s == ExitStatus::success) std::cout << "summary: " << (out / "summary.csv").string() << '\n';
      return static_cast<int>(s);
    }
    cmd_diagnostics(config, out);
    std::cout << "decay: " << (out / "decay.csv").string() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError: return static_cast<int>(ExitStatus::config_error);
      case ErrorCode::PartialDataset: return static_cast<int>(ExitStatus::partial_dataset);
      case ErrorCode::NotContractive: return static_cast<int>(ExitStatus::not_contractive);
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
