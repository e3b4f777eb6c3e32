#include "rjfr/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rjfr {

Grid Grid::equispaced(std::size_t m) {
  if (m < 2) throw std::invalid_argument("grid needs at least 2 points");
  Grid g;
  g.points.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    g.points[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  return g;
}

void Grid::validate() const {
  if (points.empty()) throw std::invalid_argument("empty grid");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 0.0 || points[i] > 1.0)
      throw std::invalid_argument("grid point outside [0,1]");
    if (i > 0 && points[i] <= points[i - 1])
      throw std::invalid_argument("grid points must be strictly increasing");
  }
}

std::size_t Grid::nearest_index(double t) const {
  auto it = std::lower_bound(points.begin(), points.end(), t);
  if (it == points.begin()) return 0;
  if (it == points.end()) return points.size() - 1;
  std::size_t hi = static_cast<std::size_t>(it - points.begin());
  std::size_t lo = hi - 1;
  // strict inequality: ties go to the lower index
  return (t - points[lo] <= points[hi] - t) ? lo : hi;
}

void FunctionalDataset::validate() const {
  grid.validate();
  if (X.rows() != y.size())
    throw std::invalid_argument("trajectory row count != response length");
  if (X.cols() != static_cast<Eigen::Index>(grid.size()))
    throw std::invalid_argument("trajectory column count != grid size");
  if (problem == Problem::Logistic) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw std::invalid_argument("logistic responses must be 0 or 1");
  }
}

double kernel_eval(const KernelSpec& spec, double t, double s) {
  double k = 0.0;
  switch (spec.kind) {
    case KernelKind::BrownianMotion:
      k = std::min(t, s);
      break;
    case KernelKind::FractionalBM: {
      if (!(spec.hurst > 0.0 && spec.hurst < 1.0))
        throw std::invalid_argument("hurst parameter must lie in (0,1)");
      const double h2 = 2.0 * spec.hurst;
      k = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
      break;
    }
    case KernelKind::OrnsteinUhlenbeck:
      k = std::exp(-std::abs(t - s));
      break;
    case KernelKind::SquaredExponential: {
      if (!(spec.length_scale > 0.0))
        throw std::invalid_argument("length scale must be positive");
      const double d = t - s;
      k = std::exp(-d * d / (2.0 * spec.length_scale * spec.length_scale));
      break;
    }
  }
  return spec.variance * k;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Grid& grid) {
  grid.validate();
  const Eigen::Index m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = kernel_eval(spec, grid.points[i], grid.points[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

namespace {

// Lower-triangular factor of G + jitter*I, escalating jitter from 1e-10 by
// factors of 10 up to 1e-6 before giving up.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& gram, const KernelSpec& spec,
                                  const Grid& grid) {
  for (double jitter = 1e-10; jitter <= 1e-6 * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error("GP covariance factorization failed after jitter escalation (kernel kind " +
                           std::to_string(static_cast<int>(spec.kind)) + ", grid size " +
                           std::to_string(grid.size()) + ")");
}

}  // namespace

Eigen::MatrixXd sample_gp(const KernelSpec& spec, const Grid& grid, std::size_t n,
                          RngStream& rng) {
  if (n < 1) throw std::invalid_argument("need at least one draw");
  const Eigen::MatrixXd gram = gram_matrix(spec, grid);
  const Eigen::Index m = gram.rows();

  // Grid points with zero marginal variance (BM at t = 0) are almost surely
  // zero; factor only the positive-variance block.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i)
    if (gram(i, i) > 0.0) active.push_back(i);
  const Eigen::Index ma = static_cast<Eigen::Index>(active.size());

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
  if (ma == 0) return out;
  Eigen::MatrixXd sub(ma, ma);
  for (Eigen::Index i = 0; i < ma; ++i)
    for (Eigen::Index j = 0; j < ma; ++j) sub(i, j) = gram(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
  const Eigen::MatrixXd chol = jittered_cholesky(sub, spec, grid);

  Eigen::VectorXd z(ma), x(ma);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma; ++j) z[j] = rng.normal();
    x = chol * z;
    for (Eigen::Index j = 0; j < ma; ++j) out(i, active[static_cast<std::size_t>(j)]) = x[j];
  }
  return out;
}

Eigen::MatrixXd sample_gp_with_mean(const KernelSpec& spec, const Grid& grid,
                                    std::size_t n, const Eigen::VectorXd& mean,
                                    RngStream& rng) {
  Eigen::MatrixXd out = sample_gp(spec, grid, n, rng);
  out.rowwise() += mean.transpose();
  return out;
}

Eigen::MatrixXd sample_gbm(const Grid& grid, std::size_t n, RngStream& rng) {
  KernelSpec bm;
  bm.kind = KernelKind::BrownianMotion;
  return sample_gp(bm, grid, n, rng).array().exp();
}

double trapezoid(const Grid& grid, const Eigen::VectorXd& values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    acc += 0.5 * (grid.points[i] - grid.points[i - 1]) *
           (values[static_cast<Eigen::Index>(i)] + values[static_cast<Eigen::Index>(i - 1)]);
  return acc;
}

namespace {

constexpr double kRkhsIntercept = 5.0;
constexpr double kLogisticIntercept = -0.5;
constexpr double kRkhsCoef[3] = {-5.0, 5.0, 10.0};
constexpr double kRkhsTime[3] = {0.1, 0.6, 0.8};

double rkhs_predictor(const Grid& grid, const Eigen::MatrixXd& X, Eigen::Index row) {
  double acc = 0.0;
  for (int j = 0; j < 3; ++j)
    acc += kRkhsCoef[j] * X(row, static_cast<Eigen::Index>(grid.nearest_index(kRkhsTime[j])));
  return acc;
}

double l2_predictor(const Grid& grid, const Eigen::MatrixXd& X, Eigen::Index row) {
  Eigen::VectorXd integrand(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    integrand[j] = X(row, j) * std::log1p(4.0 * grid.points[static_cast<std::size_t>(j)]);
  return trapezoid(grid, integrand);
}

double sigmoid(double eta) {
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

}  // namespace

FunctionalDataset generate_dataset(const ScenarioSpec& spec, const Grid& grid,
                                   RngStream& rng) {
  grid.validate();
  const bool mixture = spec.scenario == Scenario::MixtureHomoscedastic ||
                       spec.scenario == Scenario::MixtureHeteroscedastic;
  if (mixture && spec.problem != Problem::Logistic)
    throw std::invalid_argument("mixture scenarios are logistic classification problems");

  FunctionalDataset ds;
  ds.grid = grid;
  ds.problem = spec.problem;
  const Eigen::Index n = static_cast<Eigen::Index>(spec.n);

  if (mixture) {
    // Equal-probability mix of standard BM and an alternative BM; the label
    // records the component of origin.
    KernelSpec bm;
    bm.kind = KernelKind::BrownianMotion;
    ds.y.resize(n);
    std::vector<int> label(spec.n);
    Eigen::Index n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      label[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 1 : 0;
      n1 += label[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd base = sample_gp(bm, grid, spec.n, rng);
    Eigen::MatrixXd alt;
    if (spec.scenario == Scenario::MixtureHomoscedastic) {
      Eigen::VectorXd mean(static_cast<Eigen::Index>(grid.size()));
      for (std::size_t j = 0; j < grid.size(); ++j)
        mean[static_cast<Eigen::Index>(j)] =
            grid.points[j] > 0.5 ? 0.75 * grid.points[j] : 0.0;
      alt = sample_gp_with_mean(bm, grid, spec.n, mean, rng);
    } else {
      KernelSpec bm2 = bm;
      bm2.variance = 2.0;
      alt = sample_gp(bm2, grid, spec.n, rng);
    }
    ds.X.resize(n, static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
      ds.y[i] = label[static_cast<std::size_t>(i)];
      ds.X.row(i) = label[static_cast<std::size_t>(i)] ? alt.row(i) : base.row(i);
    }
    ds.validate();
    return ds;
  }

  const bool gbm = spec.scenario == Scenario::GbmRkhs || spec.scenario == Scenario::GbmL2;
  const bool rkhs = spec.scenario == Scenario::RkhsResponse || spec.scenario == Scenario::GbmRkhs;
  ds.X = gbm ? sample_gbm(grid, spec.n, rng) : sample_gp(spec.kernel, grid, spec.n, rng);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lin = rkhs ? rkhs_predictor(grid, ds.X, i) : l2_predictor(grid, ds.X, i);
    if (spec.problem == Problem::Linear) {
      if (!(spec.noise_sd > 0.0)) throw std::invalid_argument("noise sd must be positive");
      ds.y[i] = kRkhsIntercept + lin + rng.normal(0.0, spec.noise_sd);
    } else {
      const double prob = sigmoid(kLogisticIntercept + lin);
      ds.y[i] = rng.uniform() < prob ? 1.0 : 0.0;
    }
  }
  ds.validate();
  return ds;
}

}  // namespace rjfr
