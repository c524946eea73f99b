#include "kcm/errors.hpp"
#include "kcm/pipeline.hpp"

#include <CLI11.hpp>

#include <cstring>
#include <iomanip>
#include <iostream>

using namespace kcm;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

// The config file is applied before flag parsing so explicit flags win.
void apply_config_file(int argc, char** argv, RunConfig& config) {
  for (int i = 1; i < argc; ++i) {
    std::string path;
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) {
      path = argv[i + 1];
    } else if (std::strncmp(argv[i], "--config=", 9) == 0) {
      path = argv[i] + 9;
    }
    if (path.empty()) continue;
    for (const auto& [key, value] : read_config_file(path)) apply_setting(config, key, value);
  }
}

void print_verify(const PipelineOutput& out) {
  for (const auto& check : out.summary["checks"]) {
    std::cout << "[" << check["status"].get<std::string>() << "] " << check["name"].get<std::string>() << "  ("
              << check["detail"].get<std::string>() << ", " << std::fixed << std::setprecision(3)
              << check["seconds"].get<double>() << " s)\n";
  }
  std::cout << out.summary["passed"] << " passed, " << out.summary["failed"] << " failed, " << out.summary["skipped"]
            << " skipped\n";
}

void print_scaling(const PipelineOutput& out) {
  std::cout << std::setprecision(6);
  for (const auto& point : out.summary["points"]) {
    for (const auto& e : point["estimates"]) {
      std::cout << "n=" << point["n"] << " " << e["term"].get<std::string>() << " t=" << e["t"] << "  "
                << e["estimate"].get<double>() << " +- " << e["std_error"].get<double>() << "\n";
    }
  }
  for (const auto& fit : out.summary["fits"]) {
    std::cout << "fit " << fit["term"].get<std::string>() << " t=" << fit["t"] << ": exponent "
              << fit["exponent"].get<double>() << " +- " << fit["exponent_std_error"].get<double>() << "\n";
  }
  if (out.summary.contains("bgp2")) {
    for (const auto& v : out.summary["bgp2"]) {
      std::cout << "bgp2 " << (v["monotone"].get<bool>() ? "nonincreasing in n" : "NOT nonincreasing in n")
                << ", fitted C " << v["fitted_constant"].get<double>() << ", ratio spread ["
                << v["ratio_min"].get<double>() << ", " << v["ratio_max"].get<double>() << "]\n";
    }
  }
}

void print_rows(const PipelineOutput& out, const char* key) {
  std::cout << std::setprecision(6);
  for (const auto& row : out.summary[key]) std::cout << row.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  config.out = "kcm_out";
  try {
    apply_config_file(argc, argv, config);
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"Weakly asymmetric constrained exclusion: exact checks, simulation and fluctuation estimators"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; flags override it");
  app.add_option("--m", config.m, "constraint order")->capture_default_str();
  app.add_option("--rho", config.rho, "density, e.g. 2/3")->capture_default_str();
  app.add_option("--b", config.b, "asymmetry amplitude")->capture_default_str();
  app.add_option("--gamma", config.gamma, "asymmetry exponent")->capture_default_str();
  app.add_option("--n", config.n, "scaling parameter")->capture_default_str();
  app.add_option("--L", config.L, "ring size (0: 8n)")->capture_default_str();
  app.add_option("--t-max", config.t_max, "final macroscopic time")->capture_default_str();
  app.add_option("--eps", config.eps, "block length fraction (ell = floor(eps n))")->capture_default_str();
  app.add_option("--ell", config.ell, "block length (overrides --eps when positive)")->capture_default_str();
  app.add_option("--n-traj", config.n_traj, "trajectories per grid point")->capture_default_str();
  app.add_option("--seed", config.seed, "base seed")->capture_default_str();
  app.add_option("--threads", config.threads, "worker threads")->capture_default_str();
  app.add_option("--out", config.out, "output directory")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "exact identities, bad-box bound and exchange paths");
  verify->add_option("--m-list", config.m_list, "orders to check")->delimiter(',')->capture_default_str();
  verify->add_flag("--corrupt-rates", config.corrupt_rates, "negative control: break stationarity");
  verify->add_option("--path-trials", config.path_trials, "random exchange paths per order")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "equilibrium-started trajectories with snapshots");
  simulate->add_option("--dt", config.dt, "snapshot spacing (0: only t-max)")->capture_default_str();

  auto* bgp2 = app.add_subcommand("bgp2", "squared time integrals over an (n, t) grid with trend and bound fit");
  bgp2->add_option("--ns", config.ns, "n grid")->delimiter(',')->capture_default_str();
  bgp2->add_option("--times", config.times, "integration times")->delimiter(',')->capture_default_str();
  bgp2->add_option("--terms", config.terms, "terms: bgp2-inner, rest, triple, ...")->delimiter(',')->capture_default_str();
  bgp2->add_option("--width", config.width, "Gaussian test function width")->capture_default_str();

  auto* covariance = app.add_subcommand("covariance", "E[Y_t(H) Y_0(H)] against the OU covariance");
  covariance->add_option("--times", config.times, "observation times")->delimiter(',')->capture_default_str();
  covariance->add_option("--width", config.width, "Gaussian test function width")->capture_default_str();

  auto* demo = app.add_subcommand("path-demo", "print the exchange path as configuration frames");
  demo->add_option("--eta", config.eta, "ring configuration as 0/1 string (default: drawn)");
  demo->add_option("--y", config.y, "first exchanged site");
  demo->add_option("--z", config.z, "second exchanged site");
  demo->add_option("--box-anchor", config.box_anchor, "box {anchor+1, ..., anchor+length}");
  demo->add_option("--box-length", config.box_length, "box length (default max(m, L/4))");

  auto* equilibrium = app.add_subcommand("sample-equilibrium", "law of Y_0(H) under the product measure");
  equilibrium->add_option("--samples", config.samples, "independent samples")->capture_default_str();
  equilibrium->add_option("--width", config.width, "test function width")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    PipelineOutput out;
    if (verify->parsed()) {
      out = verify_pipeline(config);
      print_verify(out);
    } else if (simulate->parsed()) {
      out = simulate_pipeline(config);
      if (out.summary.contains("mean_current")) std::cout << "mean current " << out.summary["mean_current"].dump() << "\n";
    } else if (bgp2->parsed()) {
      out = bgp2_pipeline(config);
      print_scaling(out);
    } else if (covariance->parsed()) {
      out = covariance_pipeline(config);
      print_rows(out, "rows");
    } else if (equilibrium->parsed()) {
      out = sample_equilibrium_pipeline(config);
      print_rows(out, "functions");
    } else if (demo->parsed()) {
      const PathDemo path = path_demo(config);
      out.name = "path-demo";
      out.summary = output_header(config, "path-demo");
      out.summary["y"] = path.y;
      out.summary["z"] = path.z;
      out.summary["box"] = {{"anchor", path.box.anchor}, {"length", path.box.length}};
      out.summary["moves"] = path.frames.size() - 1;
      out.summary["target"] = path.target;
      out.summary["verified"] = path.verified;
      out.passed = path.verified;
      std::cerr << "exchange " << path.y << " <-> " << path.z << " using box " << path.box.first() << ".."
                << path.box.last() << ", " << path.frames.size() - 1 << " moves\n";
      for (const auto& frame : path.frames) std::cout << frame << "\n";
    }
    if (!config.out.empty()) write_output(out, config.out);
    if (!out.passed) std::cerr << out.name << ": check failed\n";
    return out.passed ? kExitPass : kExitFail;
  } catch (const InvalidInput& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NoCluster& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
