#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rjfr/postprocess.hpp"

namespace rjfr {

struct SummaryStat {
  enum class Kind { TrimmedMean, Median, Mode };
  Kind kind = Kind::Median;
  double trim_frac = 0.10;  // per tail

  std::string name() const;
  static SummaryStat parse(const std::string& name);
};

// Discards floor(frac * n) values from each tail and averages the rest.
double trimmed_mean(const std::vector<double>& xs, double frac);

// Robust mode: recursively keeps the shortest window holding ceil(n/2)
// sorted points.
double half_sample_mode(const std::vector<double>& xs);

// Applies g to values (sorted in place).
double apply_summary(const SummaryStat& g, std::vector<double>& values);

// Maps each tau to its nearest grid index; collisions push the later-listed
// tau outward to the nearest unused index. Result is duplicate-free, in input
// order.
std::vector<std::size_t> snap_to_grid(const std::vector<double>& taus, const Grid& grid);

struct SecondStageModel {
  Eigen::VectorXd coefficients;  // intercept first, then one slope per feature
  double lambda = 0.0;
  std::vector<std::size_t> feature_indices;  // strictly increasing grid columns
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_sd;
  bool logistic = false;

  double predict_features(const Eigen::VectorXd& features) const;  // raw features
  double predict_trajectory(const Eigen::VectorXd& x, const Grid& grid) const;
};

std::vector<double> default_lambda_grid();  // 20 log-spaced values in [1e-4, 1e4]

SecondStageModel fit_ridge_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                              int folds = 10,
                              const std::vector<double>& lambda_grid = default_lambda_grid());

SecondStageModel fit_logistic_l2_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                                    int folds = 10,
                                    const std::vector<double>& lambda_grid = default_lambda_grid());

// Ridge solve at a fixed penalty on standardized features (used by the CV
// driver and the normal-equation checks).
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& xs_std, const Eigen::VectorXd& y_centered,
                            double lambda);

// Penalized logistic fit at a fixed penalty; returns (intercept, slopes) and
// reports the final gradient norm.
Eigen::VectorXd logistic_l2_solve(const Eigen::MatrixXd& xs_std, const Eigen::VectorXd& y,
                                  double lambda, double* grad_norm = nullptr,
                                  int max_iter = 100, double tol = 1e-8);

// --- one-stage (posterior predictive) strategies

// One predictive response per posterior sample and test row: a Normal draw for
// the linear model, the class-1 probability for the logistic one. map_only
// restricts aggregation to the most frequent dimension; the draws themselves
// do not depend on that flag.
Eigen::VectorXd predict_pp_batch(const RelabeledChains& chains, const FunctionalDataset& test,
                                 const SummaryStat& g, ModelKind kind, bool map_only,
                                 RngStream& rng);

double predict_w_pp(const RelabeledChains& chains, const Eigen::VectorXd& x_test,
                    const Grid& grid, const SummaryStat& g, ModelKind kind, RngStream& rng);
double predict_map_pp(const RelabeledChains& chains, const Eigen::VectorXd& x_test,
                      const Grid& grid, const SummaryStat& g, ModelKind kind, RngStream& rng);

// --- two-stage (variable selection) strategies

Eigen::VectorXd predict_vs_batch(const RelabeledChains& chains, const FunctionalDataset& train,
                                 const FunctionalDataset& test, const SummaryStat& g,
                                 ModelKind kind, bool map_only);

double predict_w_vs(const RelabeledChains& chains, const FunctionalDataset& train,
                    const Eigen::VectorXd& x_test, const SummaryStat& g, ModelKind kind);
double predict_map_vs(const RelabeledChains& chains, const FunctionalDataset& train,
                      const Eigen::VectorXd& x_test, const SummaryStat& g, ModelKind kind);

// Component-wise summary of the impact times for one dimension block.
std::vector<double> summarize_taus(const RelabeledChains& chains, int p, const SummaryStat& g);

// RMSE for the linear problem, accuracy for the logistic one.
double metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, ModelKind kind);

Eigen::VectorXd threshold_labels(const Eigen::VectorXd& probs, double cut = 0.5);

}  // namespace rjfr
