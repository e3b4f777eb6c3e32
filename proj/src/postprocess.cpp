#include "rjfr/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rjfr {

namespace {

double pooled_sd(const ChainStore& chains, bool use_beta) {
  double sum = 0.0, sum2 = 0.0;
  std::int64_t count = 0;
  for (const auto& s : chains.samples) {
    const Eigen::VectorXd& v = use_beta ? s.theta.beta : s.theta.tau;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      sum += v[j];
      sum2 += v[j] * v[j];
      ++count;
    }
  }
  if (count == 0) return 0.0;
  const double mean = sum / static_cast<double>(count);
  const double var = sum2 / static_cast<double>(count) - mean * mean;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

// Mean over samples of the minimal pairwise gap of one variable, in pooled
// standard-deviation units. Samples with p = 1 contribute nothing.
double separation_score(const ChainStore& chains, bool use_beta) {
  const double sd = pooled_sd(chains, use_beta);
  if (sd <= 0.0) return 0.0;
  double acc = 0.0;
  std::int64_t count = 0;
  for (const auto& s : chains.samples) {
    const Eigen::VectorXd& v = use_beta ? s.theta.beta : s.theta.tau;
    const Eigen::Index p = v.size();
    if (p < 2) continue;
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index k = j + 1; k < p; ++k)
        min_gap = std::min(min_gap, std::abs(v[j] - v[k]));
    acc += min_gap / sd;
    ++count;
  }
  return count > 0 ? acc / static_cast<double>(count) : 0.0;
}

void sort_sample(ParamState& theta, OrderingVariable by) {
  const int p = theta.p();
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  const Eigen::VectorXd& key = by == OrderingVariable::ByBeta ? theta.beta : theta.tau;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return key[a] < key[b]; });
  Eigen::VectorXd nb(p), nt(p);
  for (int j = 0; j < p; ++j) {
    nb[j] = theta.beta[idx[static_cast<std::size_t>(j)]];
    nt[j] = theta.tau[idx[static_cast<std::size_t>(j)]];
  }
  theta.beta = std::move(nb);
  theta.tau = std::move(nt);
}

}  // namespace

RelabeledChains relabel(const ChainStore& chains) {
  if (chains.samples.empty()) throw std::invalid_argument("relabel: empty chains");
  RelabeledChains out;
  out.separation_beta = separation_score(chains, true);
  out.separation_tau = separation_score(chains, false);
  out.ordering_variable = out.separation_beta > out.separation_tau
                              ? OrderingVariable::ByBeta
                              : OrderingVariable::ByTau;
  out.samples = chains;
  for (auto& s : out.samples.samples) sort_sample(s.theta, out.ordering_variable);
  return out;
}

GelmanRubinResult gelman_rubin(const std::vector<std::vector<double>>& chains_by_walker) {
  const std::size_t m = chains_by_walker.size();
  if (m < 2) throw std::invalid_argument("gelman_rubin needs at least two chains");
  const std::size_t n = chains_by_walker.front().size();
  if (n < 10) throw std::invalid_argument("gelman_rubin needs at least 10 samples per chain");
  for (const auto& c : chains_by_walker)
    if (c.size() != n) throw std::invalid_argument("gelman_rubin: ragged chains");

  std::vector<double> means(m);
  double w_acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& c = chains_by_walker[j];
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
    means[j] = mean;
    double ss = 0.0;
    for (double x : c) ss += (x - mean) * (x - mean);
    w_acc += ss / static_cast<double>(n - 1);
  }
  const double w = w_acc / static_cast<double>(m);
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= static_cast<double>(m - 1);

  GelmanRubinResult res;
  if (!(w > 0.0)) {
    res.r_hat = 1.0;
    res.degenerate = true;
    return res;
  }
  const double nn = static_cast<double>(n);
  res.r_hat = std::sqrt(((nn - 1.0) / nn * w + b_over_n) / w);
  return res;
}

std::map<int, double> p_posterior(const ChainStore& chains) {
  if (chains.samples.empty()) throw std::invalid_argument("p_posterior: empty chains");
  std::map<int, double> freq;
  for (const auto& s : chains.samples) freq[s.theta.p()] += 1.0;
  const double total = static_cast<double>(chains.samples.size());
  for (auto& [p, v] : freq) v /= total;
  return freq;
}

int map_dimension(const std::map<int, double>& freq) {
  int best = 0;
  double best_f = -1.0;
  for (const auto& [p, f] : freq)  // map iterates in increasing p: ties keep the smaller
    if (f > best_f) {
      best = p;
      best_f = f;
    }
  return best;
}

Eigen::MatrixXd posterior_predictive(const ChainStore& chains, const FunctionalDataset& dataset,
                                     ModelKind kind, RngStream& rng, int stride) {
  if (stride < 1) stride = 1;
  const Eigen::Index n_rows = dataset.n();
  const std::size_t n_out = (chains.samples.size() + static_cast<std::size_t>(stride) - 1) /
                            static_cast<std::size_t>(stride);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_out), n_rows);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < chains.samples.size(); i += static_cast<std::size_t>(stride), ++r) {
    const ParamState& th = chains.samples[i].theta;
    Eigen::VectorXd eta = linear_predictor_all(th, dataset);
    if (kind == ModelKind::Linear) {
      const double sd = std::exp(th.log_sigma);
      for (Eigen::Index c = 0; c < n_rows; ++c) eta[c] += rng.normal(0.0, sd);
    } else {
      for (Eigen::Index c = 0; c < n_rows; ++c)
        eta[c] = 1.0 / (1.0 + std::exp(-eta[c]));
    }
    out.row(r) = eta.transpose();
  }
  return out;
}

DiagnosticsReport diagnostics(const ChainStore& chains, ModelKind kind, int p_max) {
  DiagnosticsReport rep;
  rep.inv_temps = chains.inv_temps;
  rep.final_scale = chains.final_scale;

  // per-walker chains of the dimension-invariant coordinates
  std::vector<std::vector<double>> a0(static_cast<std::size_t>(chains.n_walkers));
  std::vector<std::vector<double>> ls(static_cast<std::size_t>(chains.n_walkers));
  for (const auto& s : chains.samples) {
    a0[static_cast<std::size_t>(s.walker)].push_back(s.theta.alpha0);
    ls[static_cast<std::size_t>(s.walker)].push_back(s.theta.log_sigma);
  }
  rep.gr_alpha0 = gelman_rubin(a0);
  if (kind == ModelKind::Linear) {
    rep.gr_log_sigma = gelman_rubin(ls);
    rep.has_log_sigma = true;
  }

  rep.in_model_acceptance = chains.stats.in_model_rate(0, 1);
  rep.birth_acceptance = chains.stats.rate(0, MoveKind::Birth, 1);
  rep.death_acceptance = chains.stats.rate(0, MoveKind::Death, 1);
  rep.swap_acceptance = chains.n_temps >= 2 ? chains.stats.rate(0, MoveKind::Swap, 1) : 0.0;
  rep.p_post = p_posterior(chains);
  for (int t = 0; t < chains.n_temps; ++t)
    rep.tempered_p_hist.push_back(chains.p_histogram(t, p_max));
  return rep;
}

std::string DiagnosticsReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "quantity,index,value\n";
  os << "gelman_rubin_alpha0,," << gr_alpha0.r_hat << "\n";
  if (has_log_sigma) os << "gelman_rubin_log_sigma,," << gr_log_sigma.r_hat << "\n";
  os << "in_model_acceptance,," << in_model_acceptance << "\n";
  os << "birth_acceptance,," << birth_acceptance << "\n";
  os << "death_acceptance,," << death_acceptance << "\n";
  os << "swap_acceptance,," << swap_acceptance << "\n";
  os << "final_stretch_scale,," << final_scale << "\n";
  for (const auto& [p, f] : p_post) os << "p_posterior," << p << "," << f << "\n";
  for (std::size_t t = 0; t < tempered_p_hist.size(); ++t)
    for (std::size_t p = 0; p < tempered_p_hist[t].size(); ++p)
      if (tempered_p_hist[t][p] > 0.0)
        os << "tempered_p_posterior_t" << t << "," << (p + 1) << "," << tempered_p_hist[t][p]
           << "\n";
  return os.str();
}

}  // namespace rjfr
