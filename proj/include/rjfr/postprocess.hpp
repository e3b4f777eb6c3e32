#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "rjfr/sampler.hpp"

namespace rjfr {

enum class OrderingVariable { ByBeta, ByTau };

struct RelabeledChains {
  ChainStore samples;
  OrderingVariable ordering_variable = OrderingVariable::ByTau;
  double separation_beta = 0.0;  // mean standardized minimal pairwise gap
  double separation_tau = 0.0;
};

// Sorts every sample's (beta_j, t_j) pairs by whichever variable shows the
// larger standardized separation across the chain.
RelabeledChains relabel(const ChainStore& chains);

struct GelmanRubinResult {
  double r_hat = 1.0;
  bool degenerate = false;  // zero within-chain variance
};

// Classical potential-scale-reduction over per-walker chains of one
// dimension-invariant coordinate.
GelmanRubinResult gelman_rubin(const std::vector<std::vector<double>>& chains_by_walker);

// Relative frequency of each dimension among cold-chain samples; sums to 1.
std::map<int, double> p_posterior(const ChainStore& chains);

int map_dimension(const std::map<int, double>& freq);  // ties break toward smaller p

// One predictive response vector per (strided) posterior sample: Normal draws
// for the linear model, class-1 probabilities for the logistic one.
Eigen::MatrixXd posterior_predictive(const ChainStore& chains, const FunctionalDataset& dataset,
                                     ModelKind kind, RngStream& rng, int stride = 1);

struct DiagnosticsReport {
  GelmanRubinResult gr_alpha0;
  GelmanRubinResult gr_log_sigma;  // linear only
  bool has_log_sigma = false;
  double in_model_acceptance = 0.0;  // cold chain, post burn-in
  double birth_acceptance = 0.0;
  double death_acceptance = 0.0;
  double swap_acceptance = 0.0;
  std::map<int, double> p_post;
  std::vector<std::vector<double>> tempered_p_hist;  // [temp][p-1]
  std::vector<double> inv_temps;
  double final_scale = 2.0;

  std::string to_csv() const;
};

DiagnosticsReport diagnostics(const ChainStore& chains, ModelKind kind, int p_max);

}  // namespace rjfr
