#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rjfr/rng.hpp"

namespace rjfr {

enum class KernelKind { BrownianMotion, FractionalBM, OrnsteinUhlenbeck, SquaredExponential };

struct KernelSpec {
  KernelKind kind = KernelKind::BrownianMotion;
  double hurst = 0.8;         // fractional BM only
  double length_scale = 0.2;  // squared exponential only
  double variance = 1.0;      // multiplier; 2.0 gives the rate-2 BM used in mixtures
};

// Strictly increasing observation points in [0, 1].
struct Grid {
  std::vector<double> points;

  static Grid equispaced(std::size_t m);  // m points covering [0, 1]
  std::size_t size() const { return points.size(); }
  // Index of the grid point nearest to t; ties break toward the lower index.
  std::size_t nearest_index(double t) const;
  void validate() const;
};

enum class Problem { Linear, Logistic };

struct FunctionalDataset {
  Grid grid;
  Eigen::MatrixXd X;  // n x m trajectory values
  Eigen::VectorXd y;  // length n
  Problem problem = Problem::Linear;

  Eigen::Index n() const { return X.rows(); }
  void validate() const;
};

enum class Scenario {
  RkhsResponse,
  L2Response,
  GbmRkhs,
  GbmL2,
  MixtureHomoscedastic,
  MixtureHeteroscedastic,
};

struct ScenarioSpec {
  Scenario scenario = Scenario::RkhsResponse;
  KernelSpec kernel;
  std::size_t n = 200;
  double noise_sd = 0.7071067811865476;  // sqrt(0.5), linear scenarios only
  Problem problem = Problem::Linear;
  std::uint64_t seed = 0;
};

double kernel_eval(const KernelSpec& spec, double t, double s);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Grid& grid);

// Rows are independent centered GP draws on the grid, via lower-triangular
// factorization with escalating diagonal jitter (1e-10 .. 1e-6).
Eigen::MatrixXd sample_gp(const KernelSpec& spec, const Grid& grid, std::size_t n,
                          RngStream& rng);

// Mean function added on top of a centered GP draw (mixture scenarios).
Eigen::MatrixXd sample_gp_with_mean(const KernelSpec& spec, const Grid& grid,
                                    std::size_t n, const Eigen::VectorXd& mean,
                                    RngStream& rng);

Eigen::MatrixXd sample_gbm(const Grid& grid, std::size_t n, RngStream& rng);

FunctionalDataset generate_dataset(const ScenarioSpec& spec, const Grid& grid,
                                   RngStream& rng);

// Trapezoidal quadrature of f sampled on the grid.
double trapezoid(const Grid& grid, const Eigen::VectorXd& values);

}  // namespace rjfr
