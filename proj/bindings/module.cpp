#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rjfr/harness.hpp"

namespace py = pybind11;
using namespace rjfr;

namespace {

KernelSpec make_kernel(const std::string& kind, double hurst, double length_scale,
                       double variance) {
  KernelSpec k;
  if (kind == "bm") k.kind = KernelKind::BrownianMotion;
  else if (kind == "fbm") k.kind = KernelKind::FractionalBM;
  else if (kind == "ou") k.kind = KernelKind::OrnsteinUhlenbeck;
  else if (kind == "sqexp") k.kind = KernelKind::SquaredExponential;
  else throw std::invalid_argument("unknown kernel kind: " + kind);
  k.hurst = hurst;
  k.length_scale = length_scale;
  k.variance = variance;
  return k;
}

ModelKind parse_kind(const std::string& s) {
  if (s == "linear") return ModelKind::Linear;
  if (s == "logistic") return ModelKind::Logistic;
  throw std::invalid_argument("model kind must be 'linear' or 'logistic'");
}

Scenario parse_scenario(const std::string& s) {
  if (s == "rkhs") return Scenario::RkhsResponse;
  if (s == "l2") return Scenario::L2Response;
  if (s == "gbm-rkhs") return Scenario::GbmRkhs;
  if (s == "gbm-l2") return Scenario::GbmL2;
  if (s == "mix-homo") return Scenario::MixtureHomoscedastic;
  if (s == "mix-hetero") return Scenario::MixtureHeteroscedastic;
  throw std::invalid_argument("unknown scenario: " + s);
}

FunctionalDataset make_dataset(const std::vector<double>& grid_points,
                               const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const std::string& problem) {
  FunctionalDataset d;
  d.grid.points = grid_points;
  d.X = X;
  d.y = y;
  d.problem = problem == "logistic" ? Problem::Logistic : Problem::Linear;
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_rjfr, m) {
  m.doc() = "C++ core: RKHS functional regression with a reversible-jump ensemble sampler";

  py::class_<Grid>(m, "Grid")
      .def_static("equispaced", &Grid::equispaced, py::arg("m"))
      .def_readonly("points", &Grid::points)
      .def("nearest_index", &Grid::nearest_index);

  py::class_<FunctionalDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("grid_points"), py::arg("X"), py::arg("y"),
           py::arg("problem") = "linear")
      .def_property_readonly("grid_points",
                             [](const FunctionalDataset& d) { return d.grid.points; })
      .def_readonly("X", &FunctionalDataset::X)
      .def_readonly("y", &FunctionalDataset::y);

  m.def(
      "kernel_eval",
      [](const std::string& kind, double t, double s, double hurst, double length_scale,
         double variance) {
        return kernel_eval(make_kernel(kind, hurst, length_scale, variance), t, s);
      },
      py::arg("kind"), py::arg("t"), py::arg("s"), py::arg("hurst") = 0.8,
      py::arg("length_scale") = 0.2, py::arg("variance") = 1.0,
      "Covariance kernel value K(t, s)");

  m.def(
      "gram_matrix",
      [](const std::string& kind, const std::vector<double>& grid_points, double hurst,
         double length_scale, double variance) {
        Grid g;
        g.points = grid_points;
        return gram_matrix(make_kernel(kind, hurst, length_scale, variance), g);
      },
      py::arg("kind"), py::arg("grid_points"), py::arg("hurst") = 0.8,
      py::arg("length_scale") = 0.2, py::arg("variance") = 1.0);

  m.def(
      "sample_gp",
      [](const std::string& kind, const std::vector<double>& grid_points, std::size_t n,
         std::uint64_t seed, double hurst, double length_scale, double variance) {
        Grid g;
        g.points = grid_points;
        RngStream rng(seed);
        return sample_gp(make_kernel(kind, hurst, length_scale, variance), g, n, rng);
      },
      py::arg("kind"), py::arg("grid_points"), py::arg("n"), py::arg("seed") = 0,
      py::arg("hurst") = 0.8, py::arg("length_scale") = 0.2, py::arg("variance") = 1.0,
      "Centered Gaussian-process trajectories on the grid");

  m.def(
      "generate_dataset",
      [](const std::string& scenario, const std::string& kernel, std::size_t n,
         std::size_t grid_size, const std::string& problem, double noise_sd,
         std::uint64_t seed) {
        ScenarioSpec spec;
        spec.scenario = parse_scenario(scenario);
        spec.kernel = make_kernel(kernel, 0.8, 0.2, 1.0);
        spec.n = n;
        spec.noise_sd = noise_sd;
        spec.problem = problem == "logistic" ? Problem::Logistic : Problem::Linear;
        spec.seed = seed;
        RngStream rng(seed);
        return generate_dataset(spec, Grid::equispaced(grid_size), rng);
      },
      py::arg("scenario"), py::arg("kernel") = "bm", py::arg("n") = 200,
      py::arg("grid_size") = 100, py::arg("problem") = "linear",
      py::arg("noise_sd") = 0.7071067811865476, py::arg("seed") = 0);

  py::class_<ParamState>(m, "ParamState")
      .def(py::init([](const Eigen::VectorXd& beta, const Eigen::VectorXd& tau, double alpha0,
                       double log_sigma) {
             ParamState th;
             th.beta = beta;
             th.tau = tau;
             th.alpha0 = alpha0;
             th.log_sigma = log_sigma;
             return th;
           }),
           py::arg("beta"), py::arg("tau"), py::arg("alpha0") = 0.0,
           py::arg("log_sigma") = 0.0)
      .def_readonly("beta", &ParamState::beta)
      .def_readonly("tau", &ParamState::tau)
      .def_readonly("alpha0", &ParamState::alpha0)
      .def_readonly("log_sigma", &ParamState::log_sigma)
      .def_property_readonly("p", &ParamState::p);

  py::class_<PriorConfig>(m, "PriorConfig")
      .def(py::init([](const std::string& p_prior, double rate, int p_max, double eta2) {
             PriorConfig c;
             c.p_prior = p_prior == "uniform" ? PPrior::Uniform : PPrior::TruncatedPoisson;
             c.rate = rate;
             c.p_max = p_max;
             c.eta2 = eta2;
             return c;
           }),
           py::arg("p_prior") = "poisson", py::arg("rate") = 3.0, py::arg("p_max") = 10,
           py::arg("eta2") = 25.0)
      .def("log_pmf", &PriorConfig::log_pmf);

  m.def(
      "log_posterior",
      [](const ParamState& th, const FunctionalDataset& d, const PriorConfig& c,
         const std::string& kind) { return log_posterior(th, d, c, parse_kind(kind)); },
      py::arg("theta"), py::arg("dataset"), py::arg("prior"), py::arg("kind"));
  m.def(
      "log_likelihood",
      [](const ParamState& th, const FunctionalDataset& d, const std::string& kind) {
        return log_likelihood(th, d, parse_kind(kind));
      },
      py::arg("theta"), py::arg("dataset"), py::arg("kind"));
  m.def(
      "tempered_log_posterior",
      [](const ParamState& th, const FunctionalDataset& d, const PriorConfig& c,
         const std::string& kind, double temperature) {
        return tempered_log_posterior(th, d, c, parse_kind(kind), temperature);
      },
      py::arg("theta"), py::arg("dataset"), py::arg("prior"), py::arg("kind"),
      py::arg("temperature"));

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init([](int walkers, int temps, int iters, int burn, int multiple_try,
                       std::uint64_t seed) {
             SamplerConfig c;
             c.n_walkers = walkers;
             c.n_temps = temps;
             c.n_iters = iters;
             c.n_burn = burn;
             c.multiple_try = multiple_try;
             c.seed = seed;
             return c;
           }),
           py::arg("walkers") = 64, py::arg("temps") = 10, py::arg("iters") = 5000,
           py::arg("burn") = 4000, py::arg("multiple_try") = 1, py::arg("seed") = 0)
      .def_readwrite("seed", &SamplerConfig::seed);

  py::class_<ChainStore>(m, "ChainStore")
      .def_property_readonly("n_samples",
                             [](const ChainStore& c) { return c.samples.size(); })
      .def("sample", [](const ChainStore& c, std::size_t i) { return c.samples.at(i).theta; })
      .def("p_histogram", &ChainStore::p_histogram, py::arg("temp"), py::arg("p_max"))
      .def("in_model_acceptance", &ChainStore::in_model_acceptance_post_burn,
           py::arg("temp") = 0);

  m.def(
      "run_sampler",
      [](const FunctionalDataset& d, const PriorConfig& pc, const std::string& kind,
         const SamplerConfig& sc) { return run_sampler(d, pc, parse_kind(kind), sc); },
      py::arg("dataset"), py::arg("prior"), py::arg("kind"), py::arg("config"),
      "Reversible-jump affine-invariant ensemble sampler with parallel tempering");

  py::class_<RelabeledChains>(m, "RelabeledChains")
      .def_property_readonly("ordering_variable",
                             [](const RelabeledChains& r) {
                               return r.ordering_variable == OrderingVariable::ByBeta
                                          ? std::string("beta")
                                          : std::string("tau");
                             })
      .def_readonly("separation_beta", &RelabeledChains::separation_beta)
      .def_readonly("separation_tau", &RelabeledChains::separation_tau)
      .def_property_readonly("chains",
                             [](const RelabeledChains& r) { return r.samples; });

  m.def("relabel", &relabel, py::arg("chains"));
  m.def("p_posterior", &p_posterior, py::arg("chains"));

  m.def(
      "predict",
      [](const RelabeledChains& chains, const FunctionalDataset& train,
         const FunctionalDataset& test, const std::string& method, const std::string& summary,
         const std::string& kind, std::uint64_t seed) {
        const SummaryStat g = SummaryStat::parse(summary);
        const ModelKind mk = parse_kind(kind);
        RngStream rng(seed);
        if (method == "w-pp") return predict_pp_batch(chains, test, g, mk, false, rng);
        if (method == "map-pp") return predict_pp_batch(chains, test, g, mk, true, rng);
        if (method == "w-vs") return predict_vs_batch(chains, train, test, g, mk, false);
        if (method == "map-vs") return predict_vs_batch(chains, train, test, g, mk, true);
        throw std::invalid_argument("unknown method: " + method);
      },
      py::arg("chains"), py::arg("train"), py::arg("test"), py::arg("method"),
      py::arg("summary"), py::arg("kind"), py::arg("seed") = 0,
      "Point predictions for every test trajectory (probabilities for logistic)");

  m.def("trimmed_mean", &trimmed_mean, py::arg("xs"), py::arg("frac") = 0.10);
  m.def("half_sample_mode", &half_sample_mode, py::arg("xs"));
  m.def(
      "snap_to_grid",
      [](const std::vector<double>& taus, const std::vector<double>& grid_points) {
        Grid g;
        g.points = grid_points;
        return snap_to_grid(taus, g);
      },
      py::arg("taus"), py::arg("grid_points"));
  m.def(
      "metrics",
      [](const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred,
         const std::string& kind) { return metrics(y_true, y_pred, parse_kind(kind)); },
      py::arg("y_true"), py::arg("y_pred"), py::arg("kind"));

  m.def(
      "run_experiment",
      [](const std::string& problem, const std::string& scenario, const std::string& kernel,
         int n_train, int n_test, int reps, int walkers, int temps, int iters, int burn,
         const std::string& p_prior, double rate, int p_max, double eta2, int multiple_try,
         const std::vector<std::string>& methods, const std::vector<std::string>& summaries,
         std::uint64_t seed, const std::string& out, int threads) {
        ExperimentConfig cfg;
        cfg.problem = problem == "logistic" ? Problem::Logistic : Problem::Linear;
        cfg.scenario.scenario = parse_scenario(scenario);
        cfg.scenario.kernel = make_kernel(kernel, 0.8, 0.2, 1.0);
        cfg.n_train = n_train;
        cfg.n_test = n_test;
        cfg.reps = reps;
        cfg.sampler.n_walkers = walkers;
        cfg.sampler.n_temps = temps;
        cfg.sampler.n_iters = iters;
        cfg.sampler.n_burn = burn;
        cfg.sampler.multiple_try = multiple_try;
        cfg.prior.p_prior = p_prior == "uniform" ? PPrior::Uniform : PPrior::TruncatedPoisson;
        cfg.prior.rate = rate;
        cfg.prior.p_max = p_max;
        cfg.prior.eta2 = eta2;
        cfg.methods = methods;
        for (const auto& s : summaries) cfg.summaries.push_back(SummaryStat::parse(s));
        cfg.master_seed = seed;
        cfg.out_path = out;
        cfg.threads = threads;
        cfg.dataset_label = scenario + "_" + kernel + "_" + problem;
        const ExperimentResult res = run_experiment(cfg);
        py::list rows;
        for (const auto& r : res.rows) {
          py::dict d;
          d["dataset"] = r.dataset;
          d["method"] = r.method;
          d["summary"] = r.summary;
          d["rep"] = r.rep;
          d["metric"] = r.metric;
          d["value"] = r.value;
          rows.append(d);
        }
        return rows;
      },
      py::arg("problem") = "linear", py::arg("scenario") = "rkhs", py::arg("kernel") = "bm",
      py::arg("n_train") = 200, py::arg("n_test") = 100, py::arg("reps") = 10,
      py::arg("walkers") = 64, py::arg("temps") = 10, py::arg("iters") = 5000,
      py::arg("burn") = 4000, py::arg("p_prior") = "poisson", py::arg("rate") = 3.0,
      py::arg("p_max") = 10, py::arg("eta2") = 25.0, py::arg("multiple_try") = 1,
      py::arg("methods") = std::vector<std::string>{"w-pp"},
      py::arg("summaries") = std::vector<std::string>{"median"}, py::arg("seed") = 2024,
      py::arg("out") = "", py::arg("threads") = 0,
      "Full experiment protocol: repeated simulate/fit/predict with metric rows");
}
