#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rjfr/predict.hpp"

namespace rjfr {

struct ScalingState {
  Eigen::VectorXd column_scale;  // per-column multiplier for the regressors
  double response_scale = 1.0;   // multiplier for y (linear problems only)
  double target_sd = 1.0;        // 1.0 linear, 0.5 logistic

  double to_original_response(double y_scaled) const { return y_scaled / response_scale; }
};

struct ScaledSplit {
  FunctionalDataset train;
  FunctionalDataset test;
  ScalingState scaling;
};

// Scale factors are fit on the training data only and applied to both sets.
ScaledSplit scale_fit_apply(const FunctionalDataset& train, const FunctionalDataset& test,
                            Problem problem);

// CSV dataset format: header "y,t_1,...,t_m" with the grid values as decimal
// literals; each row is a response followed by m trajectory values. The grid
// is affinely normalized to [0,1] on load.
FunctionalDataset load_csv_dataset(const std::string& path, Problem problem);
void save_csv_dataset(const FunctionalDataset& dataset, const std::string& path);

struct ExperimentConfig {
  Problem problem = Problem::Linear;
  std::string csv_path;  // non-empty: external data with a 66/33 split
  ScenarioSpec scenario;
  std::size_t grid_size = 100;
  int n_train = 200;
  int n_test = 100;
  int reps = 10;
  SamplerConfig sampler;
  PriorConfig prior;
  std::vector<std::string> methods = {"w-pp", "map-pp", "w-vs", "map-vs"};
  std::vector<SummaryStat> summaries;
  std::string out_path;
  std::uint64_t master_seed = 2024;
  std::string dataset_label = "dataset";
  bool emit_plots = false;
  int threads = 0;  // 0 = hardware concurrency

  ModelKind kind() const {
    return problem == Problem::Linear ? ModelKind::Linear : ModelKind::Logistic;
  }
};

struct ResultsRow {
  std::string dataset;
  std::string method;
  std::string summary;
  int rep = 0;  // -1 marks the mean/sd summary rows
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct RepetitionOutcome {
  int rep = 0;
  bool failed = false;
  std::string error;
  std::vector<ResultsRow> rows;
  DiagnosticsReport diag;
  std::map<int, double> p_post;
};

struct ExperimentResult {
  std::vector<ResultsRow> rows;  // ordered by (rep, method, summary), then summaries
  std::vector<RepetitionOutcome> reps;
  int failures = 0;
};

std::uint64_t repetition_seed(std::uint64_t master_seed, int rep);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string results_to_csv(const std::vector<ResultsRow>& rows);
void write_file(const std::string& path, const std::string& content);

// Plain CSV files sufficient to regenerate the usual posterior plots: pooled
// samples with p labels, the cold-chain p trace, per-temperature p histograms,
// relabeled tau samples, and posterior-predictive draws.
void emit_plot_data(const RelabeledChains& chains, const DiagnosticsReport& diag,
                    const FunctionalDataset& train, ModelKind kind, RngStream& rng,
                    const std::string& out_dir);

}  // namespace rjfr
