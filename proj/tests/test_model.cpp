#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rjfr/model.hpp"

using namespace rjfr;

namespace {

FunctionalDataset random_dataset(std::size_t n, std::size_t m, Problem problem,
                                 RngStream& rng) {
  FunctionalDataset ds;
  ds.grid = Grid::equispaced(m);
  ds.problem = problem;
  ds.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  ds.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) ds.X(i, j) = rng.normal();
    ds.y[i] = problem == Problem::Linear ? rng.normal(0.0, 2.0)
                                         : (rng.uniform() < 0.5 ? 0.0 : 1.0);
  }
  return ds;
}

ParamState random_state(int p, ModelKind kind, RngStream& rng) {
  ParamState th;
  th.beta.resize(p);
  th.tau.resize(p);
  for (int j = 0; j < p; ++j) {
    th.beta[j] = rng.normal(0.0, 3.0);
    th.tau[j] = rng.uniform();
  }
  th.alpha0 = rng.normal(0.0, 2.0);
  th.log_sigma = kind == ModelKind::Linear ? rng.uniform(-1.0, 1.0) : 0.0;
  return th;
}

// Independent density-composition oracle, long-double arithmetic throughout.
long double oracle_log_posterior(const ParamState& th, const FunctionalDataset& ds,
                                 const PriorConfig& cfg, ModelKind kind) {
  const long double pi = std::numbers::pi_v<long double>;
  const int p = th.p();

  // dimension pmf
  long double lp;
  if (cfg.p_prior == PPrior::Uniform) {
    lp = -std::log(static_cast<long double>(cfg.p_max));
  } else {
    long double c = 0.0L, term = 1.0L;
    for (int k = 1; k <= cfg.p_max; ++k) {
      term *= static_cast<long double>(cfg.rate) / k;
      c += term;
    }
    long double tp = 1.0L;
    for (int k = 1; k <= p; ++k) tp *= static_cast<long double>(cfg.rate) / k;
    lp = std::log(tp / c);
  }

  for (int j = 0; j < p; ++j) {
    const long double b = th.beta[j];
    if (kind == ModelKind::Linear) {
      const long double eta2 = cfg.eta2;
      lp += -0.5L * std::log(2.0L * pi * eta2) - b * b / (2.0L * eta2);
    } else {
      // Student t5(0, 2.5) via the gamma-function form
      const long double s = 2.5L, nu = 5.0L;
      lp += std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5L * std::log(nu * pi) -
            std::log(s) - 3.0L * std::log(1.0L + (b / s) * (b / s) / nu);
    }
  }
  if (kind == ModelKind::Linear) {
    lp += -2.0L * static_cast<long double>(th.log_sigma);
  } else {
    const long double a = th.alpha0;
    lp += -std::log(pi * 10.0L) - std::log(1.0L + (a / 10.0L) * (a / 10.0L));
  }

  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    long double eta = th.alpha0;
    for (int j = 0; j < p; ++j)
      eta += static_cast<long double>(th.beta[j]) *
             ds.X(i, static_cast<Eigen::Index>(ds.grid.nearest_index(th.tau[j])));
    if (kind == ModelKind::Linear) {
      const long double sigma = std::exp(static_cast<long double>(th.log_sigma));
      const long double r = ds.y[i] - eta;
      lp += -0.5L * std::log(2.0L * pi) - std::log(sigma) - r * r / (2.0L * sigma * sigma);
    } else {
      lp += ds.y[i] * eta - std::log(1.0L + std::exp(eta));
    }
  }
  return lp;
}

}  // namespace

TEST_CASE("linear_predictor: zero coefficient, snapping, generating-model arithmetic") {
  FunctionalDataset ds;
  ds.grid = Grid::equispaced(100);
  ds.X = Eigen::MatrixXd::Zero(1, 100);
  ds.y = Eigen::VectorXd::Zero(1);

  ParamState th;
  th.beta = Eigen::VectorXd::Zero(1);
  th.tau = Eigen::VectorXd::Constant(1, 0.42);
  th.alpha0 = 3.25;
  for (Eigen::Index j = 0; j < 100; ++j) ds.X(0, j) = static_cast<double>(j);
  CHECK(linear_predictor(th, ds, 0) == 3.25);

  th.beta[0] = 1.0;
  th.tau[0] = 0.1001;
  CHECK(linear_predictor(th, ds, 0) == 3.25 + 10.0);  // column 10, not 9

  ParamState gen;
  gen.beta.resize(3);
  gen.tau.resize(3);
  gen.beta << -5.0, 5.0, 10.0;
  gen.tau << 0.1, 0.6, 0.8;
  gen.alpha0 = 5.0;
  ds.X.setZero();
  ds.X(0, static_cast<Eigen::Index>(ds.grid.nearest_index(0.1))) = 1.0;
  ds.X(0, static_cast<Eigen::Index>(ds.grid.nearest_index(0.6))) = 2.0;
  ds.X(0, static_cast<Eigen::Index>(ds.grid.nearest_index(0.8))) = -1.0;
  CHECK(linear_predictor(gen, ds, 0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("log_prior: closed-form pieces") {
  PriorConfig cfg;

  // truncated Poisson(3) normalization against a high-precision summation
  long double c = 0.0L, term = 1.0L;
  for (int k = 1; k <= 10; ++k) {
    term *= 3.0L / k;
    c += term;
  }
  const auto pmf = cfg.log_pmf();
  CHECK(pmf[0] == doctest::Approx(static_cast<double>(std::log(3.0L / c))).epsilon(1e-12));
  double total = 0.0;
  for (double v : pmf) total += std::exp(v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // linear beta term at the mode: -0.5 log(2 pi eta2) with eta2 = 25
  ParamState th;
  th.beta = Eigen::VectorXd::Zero(1);
  th.tau = Eigen::VectorXd::Constant(1, 0.5);
  th.alpha0 = 0.7;
  th.log_sigma = 0.0;
  const double lp = log_prior(th, cfg, ModelKind::Linear);
  CHECK(lp - pmf[0] == doctest::Approx(-0.5 * std::log(50.0 * std::numbers::pi)).epsilon(1e-12));

  // logistic alpha0 term: -log(100 + alpha0^2) + constant
  ParamState a0 = th, a2 = th;
  a0.alpha0 = 0.0;
  a2.alpha0 = 2.0;
  const double diff = log_prior(a0, cfg, ModelKind::Logistic) -
                      log_prior(a2, cfg, ModelKind::Logistic);
  CHECK(diff == doctest::Approx(-std::log(100.0) + std::log(104.0)).epsilon(1e-12));

  // logistic beta contribution at beta = 0: -3 log(125) + constant
  ParamState b0 = th, b1 = th;
  b0.beta[0] = 0.0;
  b1.beta[0] = 1.5;
  const double bdiff = log_prior(b0, cfg, ModelKind::Logistic) -
                       log_prior(b1, cfg, ModelKind::Logistic);
  CHECK(bdiff ==
        doctest::Approx(-3.0 * std::log(125.0) + 3.0 * std::log(4.0 * 2.25 + 125.0))
            .epsilon(1e-12));

  // out-of-support states
  ParamState bad = th;
  bad.tau[0] = -0.01;
  CHECK(log_prior(bad, cfg, ModelKind::Linear) == -std::numeric_limits<double>::infinity());
  ParamState big;
  big.beta = Eigen::VectorXd::Zero(cfg.p_max + 1);
  big.tau = Eigen::VectorXd::Constant(cfg.p_max + 1, 0.5);
  CHECK(log_prior(big, cfg, ModelKind::Linear) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log_likelihood: empty product, eta = 0 case, density-product oracle") {
  PriorConfig cfg;
  FunctionalDataset empty;
  empty.grid = Grid::equispaced(5);
  empty.X.resize(0, 5);
  empty.y.resize(0);

  ParamState th;
  th.beta = Eigen::VectorXd::Zero(1);
  th.tau = Eigen::VectorXd::Constant(1, 0.5);
  th.alpha0 = 1.0;
  th.log_sigma = 0.3;
  CHECK(log_likelihood(th, empty, ModelKind::Linear) == 0.0);

  RngStream rng(17);
  FunctionalDataset logi = random_dataset(23, 10, Problem::Logistic, rng);
  ParamState zero = th;
  zero.alpha0 = 0.0;
  CHECK(log_likelihood(zero, logi, ModelKind::Logistic) ==
        doctest::Approx(-23.0 * std::log(2.0)).epsilon(1e-13));

  FunctionalDataset five = random_dataset(5, 10, Problem::Linear, rng);
  ParamState th5 = random_state(3, ModelKind::Linear, rng);
  const double engine = log_likelihood(th5, five, ModelKind::Linear);
  long double oracle = 0.0L;
  const long double pi = std::numbers::pi_v<long double>;
  const long double sigma = std::exp(static_cast<long double>(th5.log_sigma));
  for (Eigen::Index i = 0; i < 5; ++i) {
    const long double r = five.y[i] - linear_predictor(th5, five, i);
    oracle += -0.5L * std::log(2.0L * pi * sigma * sigma) - r * r / (2.0L * sigma * sigma);
  }
  CHECK(engine == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));
}

TEST_CASE("log_posterior equals the brute-force composition up to one shared constant") {
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Logistic}) {
    PriorConfig cfg;
    RngStream rng(kind == ModelKind::Linear ? 100 : 200);
    double shared = std::numeric_limits<double>::quiet_NaN();
    for (int trial = 0; trial < 100; ++trial) {
      FunctionalDataset ds = random_dataset(12, 15,
                                            kind == ModelKind::Linear ? Problem::Linear
                                                                      : Problem::Logistic,
                                            rng);
      ParamState th = random_state(1 + static_cast<int>(rng.index(10)), kind, rng);
      const double engine = log_posterior(th, ds, cfg, kind);
      const double oracle = static_cast<double>(oracle_log_posterior(th, ds, cfg, kind));
      const double diff = engine - oracle;
      if (std::isnan(shared)) shared = diff;
      CHECK(std::abs(diff - shared) <= 1e-10);
    }
  }
}

TEST_CASE("log_posterior: empty dataset reduces to the prior") {
  PriorConfig cfg;
  FunctionalDataset empty;
  empty.grid = Grid::equispaced(5);
  empty.X.resize(0, 5);
  empty.y.resize(0);
  RngStream rng(3);
  const ParamState th = random_state(4, ModelKind::Logistic, rng);
  CHECK(log_posterior(th, empty, cfg, ModelKind::Logistic) ==
        log_prior(th, cfg, ModelKind::Logistic));
}

TEST_CASE("tempered_log_posterior: identity, halving, prior limit") {
  PriorConfig cfg;
  RngStream rng(5);
  FunctionalDataset ds = random_dataset(20, 12, Problem::Linear, rng);
  const ParamState th = random_state(3, ModelKind::Linear, rng);

  CHECK(tempered_log_posterior(th, ds, cfg, ModelKind::Linear, 1.0) ==
        log_posterior(th, ds, cfg, ModelKind::Linear));
  CHECK(tempered_log_posterior(th, ds, cfg, ModelKind::Linear, 2.0) ==
        doctest::Approx(log_prior(th, cfg, ModelKind::Linear) +
                        0.5 * log_likelihood(th, ds, ModelKind::Linear))
            .epsilon(1e-14));
  CHECK(tempered_log_posterior(th, ds, cfg, ModelKind::Linear, 1e15) ==
        doctest::Approx(log_prior(th, cfg, ModelKind::Linear)).epsilon(1e-10));
  CHECK_THROWS_AS(tempered_log_posterior(th, ds, cfg, ModelKind::Linear, 0.5),
                  std::invalid_argument);
}

TEST_CASE("label symmetry: posterior invariant under component permutation") {
  PriorConfig cfg;
  RngStream rng(7);
  FunctionalDataset ds = random_dataset(15, 10, Problem::Linear, rng);
  for (int trial = 0; trial < 20; ++trial) {
    ParamState th = random_state(4, ModelKind::Linear, rng);
    ParamState perm = th;
    std::vector<int> idx = {2, 0, 3, 1};
    for (int j = 0; j < 4; ++j) {
      perm.beta[j] = th.beta[idx[static_cast<std::size_t>(j)]];
      perm.tau[j] = th.tau[idx[static_cast<std::size_t>(j)]];
    }
    CHECK(log_posterior(th, ds, cfg, ModelKind::Linear) ==
          doctest::Approx(log_posterior(perm, ds, cfg, ModelKind::Linear)).epsilon(1e-10));
  }
}

TEST_CASE("linear posterior decreases without bound as the coefficients blow up") {
  PriorConfig cfg;
  RngStream rng(9);
  FunctionalDataset ds = random_dataset(25, 10, Problem::Linear, rng);
  ParamState th = random_state(2, ModelKind::Linear, rng);
  double prev = log_posterior(th, ds, cfg, ModelKind::Linear);
  bool decreasing = true;
  for (int k = 0; k < 6; ++k) {
    th.beta *= 10.0;
    const double cur = log_posterior(th, ds, cfg, ModelKind::Linear);
    if (k >= 1 && cur >= prev) decreasing = false;
    prev = cur;
  }
  CHECK(decreasing);
}

TEST_CASE("logistic log-likelihood is concave in (alpha0, beta) for fixed tau") {
  PriorConfig cfg;
  RngStream rng(13);
  FunctionalDataset ds = random_dataset(30, 10, Problem::Logistic, rng);
  for (int trial = 0; trial < 30; ++trial) {
    ParamState a = random_state(3, ModelKind::Logistic, rng);
    ParamState b = a;
    for (int j = 0; j < 3; ++j) b.beta[j] = rng.normal(0.0, 3.0);
    b.alpha0 = rng.normal(0.0, 2.0);
    ParamState mid = a;
    mid.beta = 0.5 * (a.beta + b.beta);
    mid.alpha0 = 0.5 * (a.alpha0 + b.alpha0);
    const double la = log_likelihood(a, ds, ModelKind::Logistic);
    const double lb = log_likelihood(b, ds, ModelKind::Logistic);
    const double lm = log_likelihood(mid, ds, ModelKind::Logistic);
    CHECK(lm >= 0.5 * (la + lb) - 1e-9);
  }
}

TEST_CASE("numerical stability at extreme linear predictors") {
  CHECK(log1p_exp(700.0) == 700.0);
  CHECK(log1p_exp(-700.0) >= 0.0);
  CHECK(log1p_exp(-700.0) < 1e-300);
  CHECK(log1p_exp(-800.0) == 0.0);
  CHECK(std::isfinite(log1p_exp(35.0)));

  PriorConfig cfg;
  FunctionalDataset ds;
  ds.grid = Grid::equispaced(4);
  ds.problem = Problem::Logistic;
  ds.X = Eigen::MatrixXd::Ones(2, 4);
  ds.y.resize(2);
  ds.y << 0.0, 1.0;
  ParamState th;
  th.beta = Eigen::VectorXd::Zero(1);
  th.tau = Eigen::VectorXd::Constant(1, 0.5);
  for (double a0 : {700.0, -700.0}) {
    th.alpha0 = a0;
    const double v = log_posterior(th, ds, cfg, ModelKind::Logistic);
    CHECK(!std::isnan(v));
    CHECK(std::isfinite(v));
  }
}
