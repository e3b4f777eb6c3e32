#include "rjfr/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rjfr {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}  // namespace

std::vector<double> PriorConfig::log_pmf() const {
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
  std::vector<double> lp(static_cast<std::size_t>(p_max));
  if (p_prior == PPrior::Uniform) {
    for (auto& v : lp) v = -std::log(static_cast<double>(p_max));
    return lp;
  }
  if (!(rate > 0.0)) throw std::invalid_argument("Poisson rate must be positive");
  // pi(p) = rate^p / (C p!),  C = sum_k rate^k / k!
  double log_term = 0.0;
  std::vector<double> log_terms(static_cast<std::size_t>(p_max));
  for (int k = 1; k <= p_max; ++k) {
    log_term += std::log(rate) - std::log(static_cast<double>(k));
    log_terms[static_cast<std::size_t>(k - 1)] = log_term;
  }
  double max_term = *std::max_element(log_terms.begin(), log_terms.end());
  double sum = 0.0;
  for (double t : log_terms) sum += std::exp(t - max_term);
  const double log_c = max_term + std::log(sum);
  for (int k = 1; k <= p_max; ++k)
    lp[static_cast<std::size_t>(k - 1)] = log_terms[static_cast<std::size_t>(k - 1)] - log_c;
  return lp;
}

double log1p_exp(double eta) {
  if (eta > 35.0) return eta;  // exp(-eta) below double epsilon relevance
  if (eta < -700.0) return 0.0;
  return std::log1p(std::exp(eta));
}

Eigen::VectorXd linear_predictor_all(const ParamState& theta,
                                     const FunctionalDataset& dataset) {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(dataset.n(), theta.alpha0);
  for (int j = 0; j < theta.p(); ++j) {
    const auto col = static_cast<Eigen::Index>(dataset.grid.nearest_index(theta.tau[j]));
    eta += theta.beta[j] * dataset.X.col(col);
  }
  return eta;
}

double linear_predictor(const ParamState& theta, const FunctionalDataset& dataset,
                        Eigen::Index row) {
  double eta = theta.alpha0;
  for (int j = 0; j < theta.p(); ++j) {
    const auto col = static_cast<Eigen::Index>(dataset.grid.nearest_index(theta.tau[j]));
    eta += theta.beta[j] * dataset.X(row, col);
  }
  return eta;
}

double log_beta_component_prior(double beta, const PriorConfig& cfg, ModelKind kind) {
  if (kind == ModelKind::Linear) {
    return -0.5 * std::log(2.0 * std::numbers::pi * cfg.eta2) - beta * beta / (2.0 * cfg.eta2);
  }
  // Student t_5(0, 2.5); expanding the density gives
  // log f = (15/2) log 5 + 4 log 2 - log(3 pi) - 3 log(4 b^2 + 125).
  static const double t5_const =
      7.5 * std::log(5.0) + 4.0 * std::log(2.0) - std::log(3.0 * std::numbers::pi);
  return t5_const - 3.0 * std::log(4.0 * beta * beta + 125.0);
}

double log_prior(const ParamState& theta, const PriorConfig& cfg, ModelKind kind) {
  return detail::log_prior_with_pmf(theta, cfg, kind, cfg.log_pmf());
}

double detail::log_prior_with_pmf(const ParamState& theta, const PriorConfig& cfg,
                                  ModelKind kind, const std::vector<double>& log_pmf) {
  const int p = theta.p();
  if (p < 1 || p > cfg.p_max) return kNegInf;
  if (theta.tau.size() != theta.beta.size())
    throw std::invalid_argument("beta/tau length mismatch");
  for (int j = 0; j < p; ++j)
    if (!(theta.tau[j] >= 0.0 && theta.tau[j] <= 1.0)) return kNegInf;

  double lp = log_pmf[static_cast<std::size_t>(p - 1)];
  for (int j = 0; j < p; ++j) lp += log_beta_component_prior(theta.beta[j], cfg, kind);
  // times are uniform on [0,1]: zero contribution inside the support

  if (kind == ModelKind::Linear) {
    // Jeffreys prior on (alpha0, sigma^2), flat in alpha0 and 1/sigma^2 in
    // sigma^2, written in the log(sigma) coordinate the sampler uses.
    lp += -2.0 * theta.log_sigma;
  } else {
    // Cauchy(0, 10): log f = log(10/pi) - log(100 + alpha0^2)
    lp += std::log(10.0 / std::numbers::pi) - std::log(100.0 + theta.alpha0 * theta.alpha0);
  }
  return lp;
}

double log_likelihood(const ParamState& theta, const FunctionalDataset& dataset,
                      ModelKind kind) {
  const Eigen::Index n = dataset.n();
  if (n == 0) return 0.0;
  const Eigen::VectorXd eta = linear_predictor_all(theta, dataset);
  if (kind == ModelKind::Linear) {
    const double sigma2 = std::exp(2.0 * theta.log_sigma);
    const double ssr = (dataset.y - eta).squaredNorm();
    return -0.5 * static_cast<double>(n) * (kLog2Pi + 2.0 * theta.log_sigma) -
           ssr / (2.0 * sigma2);
  }
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    ll += dataset.y[i] * eta[i] - log1p_exp(eta[i]);
  return ll;
}

double log_posterior(const ParamState& theta, const FunctionalDataset& dataset,
                     const PriorConfig& cfg, ModelKind kind) {
  const double lp = log_prior(theta, cfg, kind);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(theta, dataset, kind);
}

double tempered_log_posterior(const ParamState& theta, const FunctionalDataset& dataset,
                              const PriorConfig& cfg, ModelKind kind, double temperature) {
  if (!(temperature >= 1.0)) throw std::invalid_argument("temperature must be >= 1");
  const double lp = log_prior(theta, cfg, kind);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(theta, dataset, kind) / temperature;
}

}  // namespace rjfr
