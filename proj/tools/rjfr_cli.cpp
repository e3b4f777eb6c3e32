#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "rjfr/harness.hpp"

namespace {

rjfr::Scenario parse_scenario(const std::string& s) {
  if (s == "rkhs") return rjfr::Scenario::RkhsResponse;
  if (s == "l2") return rjfr::Scenario::L2Response;
  if (s == "gbm-rkhs") return rjfr::Scenario::GbmRkhs;
  if (s == "gbm-l2") return rjfr::Scenario::GbmL2;
  if (s == "mix-homo") return rjfr::Scenario::MixtureHomoscedastic;
  if (s == "mix-hetero") return rjfr::Scenario::MixtureHeteroscedastic;
  throw CLI::ValidationError("--scenario", "unknown scenario: " + s);
}

rjfr::KernelSpec parse_kernel(const std::string& s) {
  rjfr::KernelSpec k;
  if (s == "bm") k.kind = rjfr::KernelKind::BrownianMotion;
  else if (s == "fbm") k.kind = rjfr::KernelKind::FractionalBM;
  else if (s == "ou") k.kind = rjfr::KernelKind::OrnsteinUhlenbeck;
  else if (s == "sqexp") k.kind = rjfr::KernelKind::SquaredExponential;
  else throw CLI::ValidationError("--kernel", "unknown kernel: " + s);
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RKHS Bayesian functional regression via reversible-jump ensemble MCMC"};

  std::string problem = "linear";
  std::string scenario = "rkhs";
  std::string kernel = "bm";
  std::string data_path;
  std::string p_prior = "poisson:3";
  std::string methods = "w-pp,map-pp,w-vs,map-vs";
  std::string summaries = "tmean,median,mode";
  std::string out_dir = "results";
  rjfr::ExperimentConfig cfg;
  int multiple_try = 0;  // 0 = auto (2 for the uniform prior, else 1)
  double eta2 = 25.0;
  int p_max = 10;

  app.add_option("--problem", problem, "linear | logistic")->capture_default_str();
  app.add_option("--scenario", scenario,
                 "rkhs | l2 | gbm-rkhs | gbm-l2 | mix-homo | mix-hetero")
      ->capture_default_str();
  app.add_option("--kernel", kernel, "bm | fbm | ou | sqexp")->capture_default_str();
  app.add_option("--hurst", cfg.scenario.kernel.hurst, "fBM Hurst parameter")
      ->capture_default_str();
  app.add_option("--length-scale", cfg.scenario.kernel.length_scale,
                 "squared-exponential length scale")
      ->capture_default_str();
  app.add_option("--data", data_path, "external CSV dataset (replaces simulation)");
  app.add_option("--n-train", cfg.n_train)->capture_default_str();
  app.add_option("--n-test", cfg.n_test)->capture_default_str();
  app.add_option("--grid-size", cfg.grid_size)->capture_default_str();
  app.add_option("--reps", cfg.reps)->capture_default_str();
  app.add_option("--seed", cfg.master_seed)->capture_default_str();
  app.add_option("--walkers", cfg.sampler.n_walkers)->capture_default_str();
  app.add_option("--temps", cfg.sampler.n_temps)->capture_default_str();
  app.add_option("--iters", cfg.sampler.n_iters)->capture_default_str();
  app.add_option("--burn", cfg.sampler.n_burn)->capture_default_str();
  app.add_option("--beta-min", cfg.sampler.beta_min,
                 "hottest inverse temperature of the geometric ladder")
      ->capture_default_str();
  app.add_option("--p-prior", p_prior, "poisson:<rate> | uniform")->capture_default_str();
  app.add_option("--p-max", p_max)->capture_default_str();
  app.add_option("--eta2", eta2, "Gaussian coefficient-prior variance (linear)")
      ->capture_default_str();
  app.add_option("--multiple-try", multiple_try,
                 "candidates per dimension move (default: 2 with the uniform prior, else 1)");
  app.add_option("--methods", methods, "comma-separated subset of w-pp,map-pp,w-vs,map-vs")
      ->capture_default_str();
  app.add_option("--summaries", summaries, "comma-separated subset of tmean,median,mode")
      ->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", cfg.threads, "repetition workers (0 = hardware)")
      ->capture_default_str();
  app.add_option("--noise-sd", cfg.scenario.noise_sd, "simulation noise sd (linear)")
      ->capture_default_str();
  bool emit_plots = false;
  app.add_flag("--emit-plot-data", emit_plots, "write plot-ready CSVs for repetition 0");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.problem = [&] {
      if (problem == "linear") return rjfr::Problem::Linear;
      if (problem == "logistic") return rjfr::Problem::Logistic;
      throw CLI::ValidationError("--problem", "must be linear or logistic");
    }();
    cfg.scenario.scenario = parse_scenario(scenario);
    const auto kernel_spec = parse_kernel(kernel);
    cfg.scenario.kernel.kind = kernel_spec.kind;
    cfg.csv_path = data_path;
    cfg.out_path = out_dir;
    cfg.emit_plots = emit_plots;
    cfg.prior.p_max = p_max;
    cfg.prior.eta2 = eta2;
    if (p_prior == "uniform") {
      cfg.prior.p_prior = rjfr::PPrior::Uniform;
    } else if (p_prior.rfind("poisson:", 0) == 0) {
      cfg.prior.p_prior = rjfr::PPrior::TruncatedPoisson;
      cfg.prior.rate = std::stod(p_prior.substr(8));
    } else {
      throw CLI::ValidationError("--p-prior", "must be poisson:<rate> or uniform");
    }
    cfg.sampler.multiple_try =
        multiple_try > 0 ? multiple_try : (cfg.prior.p_prior == rjfr::PPrior::Uniform ? 2 : 1);

    cfg.methods.clear();
    {
      std::stringstream ss(methods);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.methods.push_back(tok);
    }
    cfg.summaries.clear();
    {
      std::stringstream ss(summaries);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.summaries.push_back(rjfr::SummaryStat::parse(tok));
    }
    cfg.dataset_label = data_path.empty()
                            ? scenario + "_" + kernel + "_" + problem
                            : std::filesystem::path(data_path).stem().string() + "_" + problem;

    const rjfr::ExperimentResult res = rjfr::run_experiment(cfg);
    for (const auto& row : res.rows)
      if (row.rep == -1)
        std::cout << row.dataset << " " << row.method << "_" << row.summary << " "
                  << row.metric << " = " << row.value << "\n";
    if (res.failures > 0) {
      std::cerr << res.failures << " repetition(s) failed\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
