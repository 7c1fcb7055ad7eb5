// nullwave: experiment runner.
//
// Exit codes: 0 success, 2 bad config or parameters (nothing written),
// 3 numerical failure (error.json written to the output directory).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "nullwave/errors.hpp"
#include "nullwave/experiment.hpp"
#include "nullwave/kernels.hpp"

namespace {

using nullwave::ExperimentConfig;
using Driver = std::function<nlohmann::json(const ExperimentConfig&)>;

std::string g(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string summary_line(const std::string& command, const nlohmann::json& j) {
  if (command == "verify-geometry") {
    return "max round-trip residual " + g(j["max_roundtrip_residual"].get<double>());
  }
  if (command == "run-linear") {
    return "local energy decay rate " + g(j["decay_fit"]["rate"].get<double>()) +
           ", fit residual " + g(j["decay_fit"]["residual"].get<double>());
  }
  if (command == "run-nonlinear") {
    return "picard iterations " + std::to_string(j["iteration_report"]["iterations"].get<int>()) +
           ", sup-norm exponent " + g(j["sup_decay_fit"]["exponent"].get<double>());
  }
  if (command == "scan-smallness") {
    return "convergence boundary eps " + g(j["boundary"].get<double>());
  }
  if (command == "check-compat") {
    return std::string("compatible: ") + (j["compatible"].get<bool>() ? "yes" : "no");
  }
  return "done";
}

std::string error_kind(const nullwave::Error& e) {
  if (dynamic_cast<const nullwave::NoConvergence*>(&e)) return "NoConvergence";
  if (dynamic_cast<const nullwave::CflError*>(&e)) return "CflError";
  if (dynamic_cast<const nullwave::NanError*>(&e)) return "NanError";
  if (dynamic_cast<const nullwave::FitError*>(&e)) return "FitError";
  if (dynamic_cast<const nullwave::DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const nullwave::ShapeError*>(&e)) return "ShapeError";
  return "Error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exterior null-form wave experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool quiet = false;

  const std::map<std::string, std::pair<Driver, std::string>> drivers{
      {"verify-geometry", {nullwave::verify_geometry, "Penrose map identities and boundary degeneration"}},
      {"run-linear", {nullwave::run_linear, "linear exterior run and local energy decay fit"}},
      {"run-nonlinear", {nullwave::run_nonlinear, "Picard iteration for the null-form system"}},
      {"scan-smallness", {nullwave::scan_smallness, "convergence of the iteration over a range of eps"}},
      {"estimate-report", {nullwave::estimate_report, "LHS/RHS ratios of the a priori estimates"}},
      {"check-compat", {nullwave::check_compat, "compatibility traces on the obstacle boundary"}},
  };
  for (const auto& [name, entry] : drivers) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", config_path, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("-j,--threads", threads, "OpenMP threads (0: runtime default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("-q,--quiet", quiet, "no summary line");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = nullwave::load_config(config_path);
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    nullwave::validate(cfg);
  } catch (const nullwave::Error& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    return 2;
  }
  if (threads > 0) nullwave::kernels::set_threads(threads);

  try {
    const nlohmann::json result = drivers.at(command).first(cfg);
    if (!quiet) std::cout << command << ": " << summary_line(command, result) << "\n";
    return 0;
  } catch (const nullwave::ConfigError& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    return 2;
  } catch (const nullwave::ParamError& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    return 2;
  } catch (const nullwave::IndexError& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    return 2;
  } catch (const nullwave::OrderError& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    return 2;
  } catch (const nullwave::Error& e) {
    std::cerr << "nullwave: " << e.what() << "\n";
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    std::ofstream os(cfg.out_dir / "error.json");
    os << nlohmann::json{{"schema_version", nullwave::kSchemaVersion},
                         {"command", command},
                         {"error", error_kind(e)},
                         {"message", e.what()}}
              .dump(2)
       << "\n";
    return 3;
  }
}
