#include "rjfr/predict.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace rjfr {

std::string SummaryStat::name() const {
  switch (kind) {
    case Kind::TrimmedMean: return "tmean";
    case Kind::Median: return "median";
    case Kind::Mode: return "mode";
  }
  return "?";
}

SummaryStat SummaryStat::parse(const std::string& name) {
  SummaryStat g;
  if (name == "tmean") g.kind = Kind::TrimmedMean;
  else if (name == "median") g.kind = Kind::Median;
  else if (name == "mode") g.kind = Kind::Mode;
  else throw std::invalid_argument("unknown summary statistic: " + name);
  return g;
}

double trimmed_mean(const std::vector<double>& xs, double frac) {
  if (xs.empty()) throw std::invalid_argument("trimmed_mean: empty input");
  if (!(frac >= 0.0 && frac < 0.5)) throw std::invalid_argument("trim fraction must be in [0, 0.5)");
  std::vector<double> v = xs;
  std::sort(v.begin(), v.end());
  const std::size_t k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(v.size())));
  double acc = 0.0;
  for (std::size_t i = k; i < v.size() - k; ++i) acc += v[i];
  return acc / static_cast<double>(v.size() - 2 * k);
}

namespace {

double half_sample_mode_sorted(const double* xs, std::size_t n) {
  while (n > 3) {
    const std::size_t h = (n + 1) / 2;
    std::size_t best = 0;
    double best_width = xs[h - 1] - xs[0];
    for (std::size_t i = 1; i + h <= n; ++i) {
      const double width = xs[i + h - 1] - xs[i];
      if (width < best_width) {
        best_width = width;
        best = i;
      }
    }
    xs += best;
    n = h;
  }
  if (n == 1) return xs[0];
  if (n == 2) return 0.5 * (xs[0] + xs[1]);
  const double left = xs[1] - xs[0], right = xs[2] - xs[1];
  if (left < right) return 0.5 * (xs[0] + xs[1]);
  if (right < left) return 0.5 * (xs[1] + xs[2]);
  return xs[1];
}

double median_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double half_sample_mode(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("half_sample_mode: empty input");
  std::vector<double> v = xs;
  std::sort(v.begin(), v.end());
  return half_sample_mode_sorted(v.data(), v.size());
}

double apply_summary(const SummaryStat& g, std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summary of empty value set");
  std::sort(values.begin(), values.end());
  switch (g.kind) {
    case SummaryStat::Kind::Median:
      return median_sorted(values);
    case SummaryStat::Kind::Mode:
      return half_sample_mode_sorted(values.data(), values.size());
    case SummaryStat::Kind::TrimmedMean: {
      const std::size_t k =
          static_cast<std::size_t>(std::floor(g.trim_frac * static_cast<double>(values.size())));
      double acc = 0.0;
      for (std::size_t i = k; i < values.size() - k; ++i) acc += values[i];
      return acc / static_cast<double>(values.size() - 2 * k);
    }
  }
  return 0.0;
}

std::vector<std::size_t> snap_to_grid(const std::vector<double>& taus, const Grid& grid) {
  const std::size_t m = grid.size();
  if (taus.size() > m)
    throw std::invalid_argument("more impact times than grid points");
  std::vector<bool> used(m, false);
  std::vector<std::size_t> out;
  out.reserve(taus.size());
  for (double t : taus) {
    std::size_t idx = grid.nearest_index(t);
    if (used[idx]) {
      bool found = false;
      for (std::size_t d = 1; d < m && !found; ++d) {
        const bool has_lo = idx >= d && !used[idx - d];
        const bool has_hi = idx + d < m && !used[idx + d];
        if (has_lo && has_hi) {
          const double dist_lo = std::abs(grid.points[idx - d] - t);
          const double dist_hi = std::abs(grid.points[idx + d] - t);
          idx = dist_hi < dist_lo ? idx + d : idx - d;
          found = true;
        } else if (has_lo) {
          idx -= d;
          found = true;
        } else if (has_hi) {
          idx += d;
          found = true;
        }
      }
      if (!found) throw std::runtime_error("snap_to_grid: no free grid index left");
    }
    used[idx] = true;
    out.push_back(idx);
  }
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g(20);
  for (int i = 0; i < 20; ++i)
    g[static_cast<std::size_t>(i)] = std::pow(10.0, -4.0 + 8.0 * i / 19.0);
  return g;
}

namespace {

struct Standardized {
  Eigen::MatrixXd xs;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

Standardized standardize(const Eigen::MatrixXd& x) {
  Standardized s;
  s.mean = x.colwise().mean();
  s.xs = x.rowwise() - s.mean.transpose();
  s.sd.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double v = s.xs.col(j).squaredNorm() / static_cast<double>(x.rows());
    s.sd[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    s.xs.col(j) /= s.sd[j];
  }
  return s;
}

std::vector<int> fold_of(Eigen::Index n, int folds) {
  std::vector<int> f(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = static_cast<int>(i % folds);
  return f;
}

}  // namespace

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& xs_std, const Eigen::VectorXd& y_centered,
                            double lambda) {
  const Eigen::Index k = xs_std.cols();
  Eigen::MatrixXd gram = xs_std.transpose() * xs_std;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(xs_std.transpose() * y_centered);
}

SecondStageModel fit_ridge_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                              int folds, const std::vector<double>& lambda_grid) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (n != y.size()) throw std::invalid_argument("feature/response length mismatch");
  if (k < 1) throw std::invalid_argument("need at least one feature");
  if (n < folds) throw std::invalid_argument("fewer rows than folds");

  Standardized s = standardize(features);
  const std::vector<int> fold = fold_of(n, folds);

  double best_err = std::numeric_limits<double>::infinity();
  double best_lambda = lambda_grid.front();
  for (double lambda : lambda_grid) {
    double err = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (Eigen::Index i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      Eigen::MatrixXd xtr(static_cast<Eigen::Index>(tr.size()), k);
      Eigen::VectorXd ytr(static_cast<Eigen::Index>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        xtr.row(static_cast<Eigen::Index>(i)) = s.xs.row(tr[i]);
        ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
      }
      const double intercept = ytr.mean();
      const Eigen::VectorXd beta = ridge_solve(xtr, ytr.array() - intercept, lambda);
      for (Eigen::Index i : te) {
        const double pred = intercept + s.xs.row(i).dot(beta);
        err += (y[i] - pred) * (y[i] - pred);
      }
    }
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }

  SecondStageModel model;
  model.lambda = best_lambda;
  model.feature_mean = s.mean;
  model.feature_sd = s.sd;
  const double intercept = y.mean();
  const Eigen::VectorXd beta = ridge_solve(s.xs, y.array() - intercept, best_lambda);
  model.coefficients.resize(k + 1);
  model.coefficients[0] = intercept;
  model.coefficients.tail(k) = beta;
  return model;
}

Eigen::VectorXd logistic_l2_solve(const Eigen::MatrixXd& xs_std, const Eigen::VectorXd& y,
                                  double lambda, double* grad_norm, int max_iter, double tol) {
  const Eigen::Index n = xs_std.rows();
  const Eigen::Index k = xs_std.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k + 1);  // intercept first

  auto objective = [&](const Eigen::VectorXd& wv) {
    double obj = 0.5 * lambda * wv.tail(k).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double eta = wv[0] + xs_std.row(i).dot(wv.tail(k));
      obj += log1p_exp(eta) - y[i] * eta;
    }
    return obj;
  };

  double gnorm = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, w[0]);
    eta += xs_std * w.tail(k);
    Eigen::VectorXd prob(n), wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = eta[i];
      prob[i] = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
      wt[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
    }
    Eigen::VectorXd grad(k + 1);
    grad[0] = (prob - y).sum();
    grad.tail(k) = xs_std.transpose() * (prob - y) + lambda * w.tail(k);
    gnorm = grad.norm();
    if (gnorm < tol) break;

    Eigen::MatrixXd hess(k + 1, k + 1);
    hess(0, 0) = wt.sum();
    hess.block(0, 1, 1, k) = (wt.transpose() * xs_std);
    hess.block(1, 0, k, 1) = hess.block(0, 1, 1, k).transpose();
    hess.block(1, 1, k, k) = xs_std.transpose() * wt.asDiagonal() * xs_std;
    hess.block(1, 1, k, k).diagonal().array() += lambda;

    Eigen::VectorXd step = hess.ldlt().solve(grad);
    double obj0 = objective(w);
    double scale = 1.0;
    Eigen::VectorXd w_new = w - step;
    for (int h = 0; h < 30 && objective(w_new) > obj0; ++h) {
      scale *= 0.5;
      w_new = w - scale * step;
    }
    w = w_new;
  }
  if (grad_norm) *grad_norm = gnorm;
  return w;
}

SecondStageModel fit_logistic_l2_cv(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                                    int folds, const std::vector<double>& lambda_grid) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (n != y.size()) throw std::invalid_argument("feature/response length mismatch");
  if (n < folds) throw std::invalid_argument("fewer rows than folds");
  const double ymean = y.mean();
  if (!(ymean > 0.0 && ymean < 1.0))
    throw std::invalid_argument("logistic fit needs both classes present");

  Standardized s = standardize(features);
  const std::vector<int> fold = fold_of(n, folds);

  double best_acc = -1.0;
  double best_lambda = lambda_grid.front();
  for (double lambda : lambda_grid) {
    double correct = 0.0;
    double scored = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (Eigen::Index i = 0; i < n; ++i)
        (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      Eigen::MatrixXd xtr(static_cast<Eigen::Index>(tr.size()), k);
      Eigen::VectorXd ytr(static_cast<Eigen::Index>(tr.size()));
      for (std::size_t i = 0; i < tr.size(); ++i) {
        xtr.row(static_cast<Eigen::Index>(i)) = s.xs.row(tr[i]);
        ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
      }
      const double m = ytr.mean();
      if (!(m > 0.0 && m < 1.0)) {
        std::cerr << "fit_logistic_l2_cv: skipping single-class training fold " << f << "\n";
        continue;
      }
      const Eigen::VectorXd w = logistic_l2_solve(xtr, ytr, lambda);
      for (Eigen::Index i : te) {
        const double eta = w[0] + s.xs.row(i).dot(w.tail(k));
        const double label = eta >= 0.0 ? 1.0 : 0.0;
        correct += label == y[i] ? 1.0 : 0.0;
        scored += 1.0;
      }
    }
    if (scored == 0.0) throw std::runtime_error("all cross-validation folds were single-class");
    const double acc = correct / scored;
    if (acc > best_acc) {
      best_acc = acc;
      best_lambda = lambda;
    }
  }

  SecondStageModel model;
  model.logistic = true;
  model.lambda = best_lambda;
  model.feature_mean = s.mean;
  model.feature_sd = s.sd;
  model.coefficients = logistic_l2_solve(s.xs, y, best_lambda);
  return model;
}

double SecondStageModel::predict_features(const Eigen::VectorXd& features) const {
  const Eigen::Index k = features.size();
  double eta = coefficients[0];
  for (Eigen::Index j = 0; j < k; ++j)
    eta += coefficients[j + 1] * (features[j] - feature_mean[j]) / feature_sd[j];
  if (!logistic) return eta;
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

double SecondStageModel::predict_trajectory(const Eigen::VectorXd& x, const Grid& grid) const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(feature_indices.size()));
  for (std::size_t j = 0; j < feature_indices.size(); ++j)
    f[static_cast<Eigen::Index>(j)] = x[static_cast<Eigen::Index>(feature_indices[j])];
  (void)grid;
  return predict_features(f);
}

namespace {

struct SampleView {
  const ParamState* theta;
  std::vector<Eigen::Index> cols;  // snapped columns, duplicates allowed
};

struct PpContext {
  std::vector<SampleView> views;
  std::map<int, std::vector<std::size_t>> by_p;  // p -> sample indices
  std::map<int, double> freq;
  int map_p = 0;
};

PpContext build_pp_context(const RelabeledChains& chains, const Grid& grid) {
  PpContext ctx;
  const auto& samples = chains.samples.samples;
  if (samples.empty()) throw std::invalid_argument("prediction from empty chains");
  ctx.views.reserve(samples.size());
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const ParamState& th = samples[m].theta;
    SampleView v{&th, {}};
    v.cols.reserve(static_cast<std::size_t>(th.p()));
    for (int j = 0; j < th.p(); ++j)
      v.cols.push_back(static_cast<Eigen::Index>(grid.nearest_index(th.tau[j])));
    ctx.views.push_back(std::move(v));
    ctx.by_p[th.p()].push_back(m);
  }
  for (const auto& [p, idx] : ctx.by_p)
    ctx.freq[p] = static_cast<double>(idx.size()) / static_cast<double>(samples.size());
  ctx.map_p = map_dimension(ctx.freq);
  return ctx;
}

}  // namespace

Eigen::VectorXd predict_pp_batch(const RelabeledChains& chains, const FunctionalDataset& test,
                                 const SummaryStat& g, ModelKind kind, bool map_only,
                                 RngStream& rng) {
  PpContext ctx = build_pp_context(chains, test.grid);
  const Eigen::Index n_rows = test.X.rows();
  const std::size_t M = ctx.views.size();
  Eigen::VectorXd out(n_rows);

  std::vector<double> f_row(M);
  std::vector<double> block;
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (std::size_t m = 0; m < M; ++m) {
      const SampleView& v = ctx.views[m];
      double eta = v.theta->alpha0;
      for (std::size_t j = 0; j < v.cols.size(); ++j)
        eta += v.theta->beta[static_cast<Eigen::Index>(j)] * test.X(r, v.cols[j]);
      if (kind == ModelKind::Linear)
        eta += rng.normal(0.0, std::exp(v.theta->log_sigma));
      else
        eta = eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
      f_row[m] = eta;
    }
    double pred = 0.0;
    for (const auto& [p, idx] : ctx.by_p) {
      if (map_only && p != ctx.map_p) continue;
      block.clear();
      block.reserve(idx.size());
      for (std::size_t m : idx) block.push_back(f_row[m]);
      const double gp = apply_summary(g, block);
      pred += map_only ? gp : ctx.freq.at(p) * gp;
    }
    out[r] = pred;
  }
  return out;
}

namespace {

FunctionalDataset single_row_dataset(const Eigen::VectorXd& x, const Grid& grid,
                                     Problem problem) {
  FunctionalDataset d;
  d.grid = grid;
  d.X = x.transpose();
  d.y = Eigen::VectorXd::Zero(1);
  d.problem = problem;
  return d;
}

}  // namespace

double predict_w_pp(const RelabeledChains& chains, const Eigen::VectorXd& x_test,
                    const Grid& grid, const SummaryStat& g, ModelKind kind, RngStream& rng) {
  const auto test = single_row_dataset(x_test, grid,
                                       kind == ModelKind::Linear ? Problem::Linear : Problem::Logistic);
  return predict_pp_batch(chains, test, g, kind, false, rng)[0];
}

double predict_map_pp(const RelabeledChains& chains, const Eigen::VectorXd& x_test,
                      const Grid& grid, const SummaryStat& g, ModelKind kind, RngStream& rng) {
  const auto test = single_row_dataset(x_test, grid,
                                       kind == ModelKind::Linear ? Problem::Linear : Problem::Logistic);
  return predict_pp_batch(chains, test, g, kind, true, rng)[0];
}

std::vector<double> summarize_taus(const RelabeledChains& chains, int p, const SummaryStat& g) {
  std::vector<std::vector<double>> comp(static_cast<std::size_t>(p));
  for (const auto& s : chains.samples.samples) {
    if (s.theta.p() != p) continue;
    for (int j = 0; j < p; ++j) comp[static_cast<std::size_t>(j)].push_back(s.theta.tau[j]);
  }
  if (comp[0].empty()) throw std::invalid_argument("no samples of the requested dimension");
  std::vector<double> out(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) out[static_cast<std::size_t>(j)] = apply_summary(g, comp[static_cast<std::size_t>(j)]);
  return out;
}

Eigen::VectorXd predict_vs_batch(const RelabeledChains& chains, const FunctionalDataset& train,
                                 const FunctionalDataset& test, const SummaryStat& g,
                                 ModelKind kind, bool map_only) {
  PpContext ctx = build_pp_context(chains, train.grid);
  const Eigen::Index n_rows = test.X.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_rows);

  for (const auto& [p, idx] : ctx.by_p) {
    if (map_only && p != ctx.map_p) continue;
    const std::vector<double> tau_hat = summarize_taus(chains, p, g);
    std::vector<std::size_t> cols = snap_to_grid(tau_hat, train.grid);
    std::sort(cols.begin(), cols.end());

    Eigen::MatrixXd feats(train.X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      feats.col(static_cast<Eigen::Index>(j)) = train.X.col(static_cast<Eigen::Index>(cols[j]));
    SecondStageModel model = kind == ModelKind::Linear ? fit_ridge_cv(feats, train.y)
                                                       : fit_logistic_l2_cv(feats, train.y);
    model.feature_indices = cols;

    const double weight = map_only ? 1.0 : ctx.freq.at(p);
    for (Eigen::Index r = 0; r < n_rows; ++r)
      out[r] += weight * model.predict_trajectory(test.X.row(r), test.grid);
  }
  return out;
}

double predict_w_vs(const RelabeledChains& chains, const FunctionalDataset& train,
                    const Eigen::VectorXd& x_test, const SummaryStat& g, ModelKind kind) {
  const auto test = single_row_dataset(x_test, train.grid, train.problem);
  return predict_vs_batch(chains, train, test, g, kind, false)[0];
}

double predict_map_vs(const RelabeledChains& chains, const FunctionalDataset& train,
                      const Eigen::VectorXd& x_test, const SummaryStat& g, ModelKind kind) {
  const auto test = single_row_dataset(x_test, train.grid, train.problem);
  return predict_vs_batch(chains, train, test, g, kind, true)[0];
}

double metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, ModelKind kind) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("metrics: length mismatch");
  if (y_true.size() == 0) throw std::invalid_argument("metrics: empty input");
  if (kind == ModelKind::Linear)
    return std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
  double correct = 0.0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i)
    correct += y_true[i] == y_pred[i] ? 1.0 : 0.0;
  return correct / static_cast<double>(y_true.size());
}

Eigen::VectorXd threshold_labels(const Eigen::VectorXd& probs, double cut) {
  Eigen::VectorXd out(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) out[i] = probs[i] >= cut ? 1.0 : 0.0;
  return out;
}

}  // namespace rjfr
