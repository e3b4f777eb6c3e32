#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <map>

#include "rjfr/postprocess.hpp"

using namespace rjfr;

namespace {

ChainStore make_chains(const std::vector<ParamState>& thetas) {
  ChainStore cs;
  cs.n_iters = static_cast<int>(thetas.size());
  cs.n_burn = 0;
  cs.n_temps = 1;
  cs.n_walkers = 1;
  cs.inv_temps = {1.0};
  for (std::size_t i = 0; i < thetas.size(); ++i)
    cs.samples.push_back({static_cast<int>(i), 0, thetas[i]});
  cs.stats.resize(1);
  return cs;
}

ParamState make_state(std::initializer_list<double> beta, std::initializer_list<double> tau,
                      double alpha0 = 0.0, double log_sigma = 0.0) {
  ParamState th;
  th.beta.resize(static_cast<Eigen::Index>(beta.size()));
  th.tau.resize(static_cast<Eigen::Index>(tau.size()));
  Eigen::Index i = 0;
  for (double b : beta) th.beta[i++] = b;
  i = 0;
  for (double t : tau) th.tau[i++] = t;
  th.alpha0 = alpha0;
  th.log_sigma = log_sigma;
  return th;
}

std::multiset<std::pair<double, double>> pair_multiset(const ParamState& th) {
  std::multiset<std::pair<double, double>> ms;
  for (int j = 0; j < th.p(); ++j) ms.insert({th.beta[j], th.tau[j]});
  return ms;
}

}  // namespace

TEST_CASE("relabel: trivial cases and ordering-variable selection") {
  // all samples one-dimensional: nothing to order
  std::vector<ParamState> ones = {make_state({1.0}, {0.3}), make_state({-2.0}, {0.9})};
  const RelabeledChains r1 = relabel(make_chains(ones));
  CHECK(r1.ordering_variable == OrderingVariable::ByTau);
  CHECK(r1.samples.samples[0].theta.beta[0] == 1.0);
  CHECK(r1.samples.samples[1].theta.tau[0] == 0.9);

  // tau separation dominates: sort by tau
  std::vector<ParamState> two;
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const double b1 = rng.normal(0.0, 1.0), b2 = b1 + rng.normal(0.0, 0.05);
    const double t1 = 0.1 + 0.01 * rng.normal(), t2 = 0.8 + 0.01 * rng.normal();
    // store deliberately swapped half the time
    if (i % 2 == 0)
      two.push_back(make_state({b1, b2}, {t1, t2}));
    else
      two.push_back(make_state({b2, b1}, {t2, t1}));
  }
  const RelabeledChains r2 = relabel(make_chains(two));
  CHECK(r2.ordering_variable == OrderingVariable::ByTau);
  CHECK(r2.separation_tau > r2.separation_beta);
  for (const auto& s : r2.samples.samples) CHECK(s.theta.tau[0] < s.theta.tau[1]);

  // the spec's two-pair example
  std::vector<ParamState> pairs = {make_state({5.0, -5.0}, {0.8, 0.1})};
  for (int i = 0; i < 50; ++i)
    pairs.push_back(make_state({5.0 + 0.01 * i, -5.0}, {0.8, 0.1}));
  const RelabeledChains r3 = relabel(make_chains(pairs));
  CHECK(r3.ordering_variable == OrderingVariable::ByTau);
  CHECK(r3.samples.samples[0].theta.beta[0] == -5.0);
  CHECK(r3.samples.samples[0].theta.tau[0] == 0.1);
  CHECK(r3.samples.samples[0].theta.beta[1] == 5.0);

  // beta separation dominates when taus are entangled
  std::vector<ParamState> byb;
  for (int i = 0; i < 200; ++i) {
    const double t1 = rng.uniform(), t2 = rng.uniform();
    byb.push_back(make_state({-4.0 + 0.05 * rng.normal(), 4.0 + 0.05 * rng.normal()},
                             {t1, t2}));
  }
  const RelabeledChains r4 = relabel(make_chains(byb));
  CHECK(r4.ordering_variable == OrderingVariable::ByBeta);

  CHECK_THROWS_AS(relabel(ChainStore{}), std::invalid_argument);
}

TEST_CASE("relabel: idempotence and multiset preservation on randomized chains") {
  RngStream rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ParamState> thetas;
    const int n = 1 + static_cast<int>(rng.index(8));
    for (int i = 0; i < n; ++i) {
      const int p = 1 + static_cast<int>(rng.index(5));
      ParamState th;
      th.beta.resize(p);
      th.tau.resize(p);
      for (int j = 0; j < p; ++j) {
        th.beta[j] = rng.normal(0.0, 3.0);
        th.tau[j] = rng.uniform();
      }
      th.alpha0 = rng.normal();
      thetas.push_back(th);
    }
    const ChainStore cs = make_chains(thetas);
    const RelabeledChains once = relabel(cs);
    const RelabeledChains twice = relabel(once.samples);

    CHECK(once.ordering_variable == twice.ordering_variable);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      CHECK(pair_multiset(once.samples.samples[i].theta) ==
            pair_multiset(cs.samples[i].theta));
      CHECK(once.samples.samples[i].theta.beta == twice.samples.samples[i].theta.beta);
      CHECK(once.samples.samples[i].theta.tau == twice.samples.samples[i].theta.tau);
    }
  }
}

TEST_CASE("gelman_rubin: formula limits and affine invariance") {
  std::vector<double> base(200);
  RngStream rng(5);
  for (auto& v : base) v = rng.normal();

  // identical chains: B = 0 so r_hat = sqrt((n-1)/n)
  const GelmanRubinResult same = gelman_rubin({base, base, base});
  CHECK(same.r_hat == doctest::Approx(std::sqrt(199.0 / 200.0)).epsilon(1e-12));
  CHECK(!same.degenerate);

  // two long chains from the same normal: r_hat within [0.99, 1.01]
  std::vector<double> c1(10000), c2(10000);
  for (auto& v : c1) v = rng.normal(3.0, 2.0);
  for (auto& v : c2) v = rng.normal(3.0, 2.0);
  const GelmanRubinResult ok = gelman_rubin({c1, c2});
  CHECK(ok.r_hat >= 0.99);
  CHECK(ok.r_hat <= 1.01);

  // disjoint supports: far above 1.1
  std::vector<double> lo(500), hi(500);
  for (auto& v : lo) v = rng.normal(-10.0, 0.5);
  for (auto& v : hi) v = rng.normal(10.0, 0.5);
  CHECK(gelman_rubin({lo, hi}).r_hat > 1.5);

  // invariance under a common affine map
  auto mapped = [&](const std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = -3.0 * xs[i] + 7.0;
    return out;
  };
  const double before = gelman_rubin({c1, c2}).r_hat;
  const double after = gelman_rubin({mapped(c1), mapped(c2)}).r_hat;
  CHECK(before == doctest::Approx(after).epsilon(1e-10));

  // zero within-chain variance is flagged
  std::vector<double> flat(50, 2.0);
  const GelmanRubinResult deg = gelman_rubin({flat, flat});
  CHECK(deg.r_hat == 1.0);
  CHECK(deg.degenerate);

  CHECK_THROWS_AS(gelman_rubin({base}), std::invalid_argument);
  CHECK_THROWS_AS(gelman_rubin({{1.0, 2.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("p_posterior: frequencies, invariance under relabel, map dimension") {
  std::vector<ParamState> all3;
  for (int i = 0; i < 7; ++i) all3.push_back(make_state({1.0, 2.0, 3.0}, {0.1, 0.5, 0.9}));
  const auto f3 = p_posterior(make_chains(all3));
  CHECK(f3.size() == 1);
  CHECK(f3.at(3) == 1.0);

  std::vector<ParamState> split;
  for (int i = 0; i < 5; ++i) split.push_back(make_state({1.0, 2.0}, {0.2, 0.4}));
  for (int i = 0; i < 5; ++i)
    split.push_back(make_state({1.0, 2.0, 3.0, 4.0}, {0.1, 0.3, 0.5, 0.7}));
  const ChainStore cs = make_chains(split);
  const auto f = p_posterior(cs);
  CHECK(f.at(2) == 0.5);
  CHECK(f.at(4) == 0.5);
  CHECK(map_dimension(f) == 2);  // ties break toward the smaller dimension

  const auto relabeled = relabel(cs);
  CHECK(p_posterior(relabeled.samples) == f);

  double total = 0.0;
  for (const auto& [p, v] : f) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(p_posterior(ChainStore{}), std::invalid_argument);
}

TEST_CASE("posterior_predictive: means and probabilities") {
  FunctionalDataset ds;
  ds.grid = Grid::equispaced(10);
  ds.X.resize(3, 10);
  RngStream rng(9);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) ds.X(i, j) = rng.normal();
  ds.y = Eigen::VectorXd::Zero(3);

  // many copies of one linear state: column means approach the predictor
  const ParamState th = make_state({2.0, -1.0}, {0.2, 0.8}, 0.5, std::log(0.7));
  std::vector<ParamState> reps(4000, th);
  const ChainStore chains = make_chains(reps);
  RngStream pp_rng(1);
  const Eigen::MatrixXd pp = posterior_predictive(chains, ds, ModelKind::Linear, pp_rng);
  REQUIRE(pp.rows() == 4000);
  REQUIRE(pp.cols() == 3);
  for (Eigen::Index r = 0; r < 3; ++r) {
    const double expect = linear_predictor(th, ds, r);
    CHECK(pp.col(r).mean() == doctest::Approx(expect).epsilon(0.05));
  }

  // logistic at eta = 0 gives probability one half exactly
  const ParamState zero = make_state({0.0}, {0.5}, 0.0);
  const ChainStore zc = make_chains({zero});
  RngStream pp2(2);
  ds.problem = Problem::Logistic;
  const Eigen::MatrixXd probs = posterior_predictive(zc, ds, ModelKind::Logistic, pp2);
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(probs(0, r) == 0.5);

  // stride accounting
  RngStream pp3(3);
  const Eigen::MatrixXd thin = posterior_predictive(chains, ds, ModelKind::Linear, pp3, 7);
  CHECK(thin.rows() == (4000 + 6) / 7);
}

TEST_CASE("diagnostics report serializes its key quantities") {
  std::vector<ParamState> thetas;
  RngStream rng(21);
  for (int i = 0; i < 40; ++i)
    thetas.push_back(make_state({rng.normal()}, {rng.uniform()}, rng.normal(), 0.1));
  ChainStore cs = make_chains(thetas);
  // reshape into 2 walkers x 20 iterations for the walker-chain split
  cs.n_walkers = 2;
  for (std::size_t i = 0; i < cs.samples.size(); ++i) {
    cs.samples[i].walker = static_cast<int>(i % 2);
    cs.samples[i].iter = static_cast<int>(i / 2);
  }
  cs.n_iters = 20;
  cs.n_temps = 1;
  cs.p_trace.assign(static_cast<std::size_t>(20 * 1 * 2), 1);
  cs.stats.resize(1);

  const DiagnosticsReport rep = diagnostics(cs, ModelKind::Linear, 10);
  const std::string csv = rep.to_csv();
  CHECK(csv.find("gelman_rubin_alpha0") != std::string::npos);
  CHECK(csv.find("p_posterior,1,1") != std::string::npos);
  CHECK(csv.find("tempered_p_posterior_t0,1,1") != std::string::npos);
  double total = 0.0;
  for (const auto& [p, v] : rep.p_post) total += v;
  CHECK(total == doctest::Approx(1.0));
}
