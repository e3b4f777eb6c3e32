#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rjfr/kernels.hpp"

namespace rjfr {

enum class ModelKind { Linear, Logistic };

// One variable-dimension parameter point. The linear model carries log(sigma);
// logistic states ignore that field.
struct ParamState {
  Eigen::VectorXd beta;  // length p
  Eigen::VectorXd tau;   // length p, each in [0,1]
  double alpha0 = 0.0;
  double log_sigma = 0.0;

  int p() const { return static_cast<int>(beta.size()); }
};

enum class PPrior { TruncatedPoisson, Uniform };

struct PriorConfig {
  PPrior p_prior = PPrior::TruncatedPoisson;
  double rate = 3.0;  // truncated Poisson only
  int p_max = 10;
  double eta2 = 25.0;  // Gaussian beta prior variance, linear model only

  // log pmf of the dimension prior over {1, ..., p_max}
  std::vector<double> log_pmf() const;
};

double linear_predictor(const ParamState& theta, const FunctionalDataset& dataset,
                        Eigen::Index row);

// All rows at once; equals alpha0 + sum_j beta_j * X(:, nearest(tau_j)).
Eigen::VectorXd linear_predictor_all(const ParamState& theta,
                                     const FunctionalDataset& dataset);

// Returns -inf when tau leaves [0,1] or p leaves {1,...,p_max}.
double log_prior(const ParamState& theta, const PriorConfig& cfg, ModelKind kind);

double log_likelihood(const ParamState& theta, const FunctionalDataset& dataset,
                      ModelKind kind);

double log_posterior(const ParamState& theta, const FunctionalDataset& dataset,
                     const PriorConfig& cfg, ModelKind kind);

// likelihood^(1/T) * prior; T >= 1.
double tempered_log_posterior(const ParamState& theta, const FunctionalDataset& dataset,
                              const PriorConfig& cfg, ModelKind kind, double temperature);

// Component prior log-densities, shared by the prior and the birth moves.
double log_beta_component_prior(double beta, const PriorConfig& cfg, ModelKind kind);

namespace detail {
// Hot-path variant taking a precomputed dimension log-pmf (see PriorConfig::log_pmf).
double log_prior_with_pmf(const ParamState& theta, const PriorConfig& cfg, ModelKind kind,
                          const std::vector<double>& log_pmf);
}  // namespace detail

// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta);

}  // namespace rjfr
