#include "rjfr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rjfr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kInitTag = 0x696e6974;  // stream tags
constexpr std::uint64_t kLoopTag = 0x6c6f6f70;
constexpr std::uint64_t kSwapTag = 0x73776170;

bool accept_log_ratio(double log_ratio, RngStream& rng) {
  const double u = rng.uniform();
  return std::log(u) < log_ratio;  // NaN compares false: treated as reject
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void draw_component(const TargetContext& ctx, RngStream& rng, double& beta, double& tau) {
  if (ctx.kind == ModelKind::Linear)
    beta = rng.normal(0.0, std::sqrt(ctx.prior->eta2));
  else
    beta = 2.5 * rng.student_t(5.0);
  tau = rng.uniform();
}

double birth_proposal_prob(int p, int p_max) {
  if (p >= p_max) return 0.0;
  return p == 1 ? 1.0 : 0.5;
}

}  // namespace

ParamState with_component(const ParamState& th, double beta, double tau) {
  ParamState out = th;
  const int p = th.p();
  out.beta.conservativeResize(p + 1);
  out.tau.conservativeResize(p + 1);
  out.beta[p] = beta;
  out.tau[p] = tau;
  return out;
}

ParamState without_component(const ParamState& th, int k) {
  const int p = th.p();
  ParamState out = th;
  out.beta.resize(p - 1);
  out.tau.resize(p - 1);
  for (int j = 0, i = 0; j < p; ++j) {
    if (j == k) continue;
    out.beta[i] = th.beta[j];
    out.tau[i] = th.tau[j];
    ++i;
  }
  return out;
}

void SamplerConfig::validate(int p_max) const {
  if (n_walkers < 2 || n_walkers % 2 != 0)
    throw std::invalid_argument("n_walkers must be even and >= 2");
  if (n_temps < 1) throw std::invalid_argument("n_temps must be >= 1");
  if (n_iters < 1 || n_burn < 0 || n_burn >= n_iters)
    throw std::invalid_argument("need 0 <= n_burn < n_iters");
  if (!(stretch_scale > 1.0)) throw std::invalid_argument("stretch scale must exceed 1");
  if (multiple_try < 1) throw std::invalid_argument("multiple_try must be >= 1");
  if (adapt_window < 1 || group_refresh < 1)
    throw std::invalid_argument("window lengths must be positive");
  if (!(beta_min > 0.0 && beta_min <= 1.0))
    throw std::invalid_argument("beta_min must lie in (0, 1]");
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
  if (!temp_ladder.empty()) {
    if (temp_ladder.front() != 1.0)
      throw std::invalid_argument("temperature ladder must start at inverse temperature 1");
    for (std::size_t i = 1; i < temp_ladder.size(); ++i)
      if (!(temp_ladder[i] < temp_ladder[i - 1]) || !(temp_ladder[i] > 0.0))
        throw std::invalid_argument("inverse temperatures must be strictly decreasing and positive");
  }
}

std::vector<double> geometric_inverse_temps(int n_temps, double beta_min) {
  std::vector<double> out(static_cast<std::size_t>(n_temps));
  out[0] = 1.0;
  if (n_temps == 1) return out;
  const double step = std::log(beta_min) / static_cast<double>(n_temps - 1);
  for (int k = 1; k < n_temps; ++k) out[static_cast<std::size_t>(k)] = std::exp(step * k);
  return out;
}

void MoveStats::resize(int n_temps) {
  proposed.assign(static_cast<std::size_t>(n_temps), {});
  accepted.assign(static_cast<std::size_t>(n_temps), {});
}

void MoveStats::record(int temp, MoveKind move, bool post_burn, bool accept) {
  const int phase = post_burn ? 1 : 0;
  proposed[static_cast<std::size_t>(temp)][static_cast<std::size_t>(move)][phase] += 1;
  if (accept)
    accepted[static_cast<std::size_t>(temp)][static_cast<std::size_t>(move)][phase] += 1;
}

double MoveStats::rate(int temp, MoveKind move, int phase) const {
  const auto p = proposed[static_cast<std::size_t>(temp)][static_cast<std::size_t>(move)][phase];
  const auto a = accepted[static_cast<std::size_t>(temp)][static_cast<std::size_t>(move)][phase];
  return p > 0 ? static_cast<double>(a) / static_cast<double>(p) : 0.0;
}

double MoveStats::in_model_rate(int temp, int phase) const {
  std::int64_t p = 0, a = 0;
  for (MoveKind m : {MoveKind::Stretch, MoveKind::GroupStretch, MoveKind::RwFallback}) {
    p += proposed[static_cast<std::size_t>(temp)][static_cast<std::size_t>(m)][phase];
    a += accepted[static_cast<std::size_t>(temp)][static_cast<std::size_t>(m)][phase];
  }
  return p > 0 ? static_cast<double>(a) / static_cast<double>(p) : 0.0;
}

std::vector<double> ChainStore::p_histogram(int temp, int p_max) const {
  std::vector<double> h(static_cast<std::size_t>(p_max), 0.0);
  std::int64_t total = 0;
  for (int it = n_burn; it < n_iters; ++it)
    for (int w = 0; w < n_walkers; ++w) {
      const int p = p_at(it, temp, w);
      if (p >= 1 && p <= p_max) {
        h[static_cast<std::size_t>(p - 1)] += 1.0;
        ++total;
      }
    }
  if (total > 0)
    for (auto& v : h) v /= static_cast<double>(total);
  return h;
}

double draw_stretch_z(double a, RngStream& rng) {
  const double u = rng.uniform();
  const double r = (a - 1.0) * u + 1.0;
  return r * r / a;
}

VecMoveResult stretch_move(const Eigen::VectorXd& walker,
                           const Eigen::VectorXd& complement_sample, double a,
                           const LogTargetFn& log_target, RngStream& rng) {
  VecMoveResult res;
  res.z = draw_stretch_z(a, rng);
  res.proposal = complement_sample + res.z * (walker - complement_sample);
  const double d = static_cast<double>(walker.size());
  const double lr =
      (d - 1.0) * std::log(res.z) + log_target(res.proposal) - log_target(walker);
  res.accepted = accept_log_ratio(lr, rng);
  return res;
}

VecMoveResult group_stretch_move(const Eigen::VectorXd& walker,
                                 const std::vector<Eigen::VectorXd>& stationary_group,
                                 double a, double rw_scale, const LogTargetFn& log_target,
                                 RngStream& rng, bool* used_fallback) {
  VecMoveResult res;
  if (stationary_group.empty()) {
    if (used_fallback) *used_fallback = true;
    res.proposal = walker;
    for (Eigen::Index i = 0; i < walker.size(); ++i)
      res.proposal[i] += rw_scale * rng.normal();
    const double lr = log_target(res.proposal) - log_target(walker);
    res.accepted = accept_log_ratio(lr, rng);
    return res;
  }
  if (used_fallback) *used_fallback = false;
  const Eigen::VectorXd& partner = stationary_group[rng.index(stationary_group.size())];
  res.z = draw_stretch_z(a, rng);
  res.proposal = partner + res.z * (walker - partner);
  const double d = static_cast<double>(walker.size());
  const double lr =
      (d - 1.0) * std::log(res.z) + log_target(res.proposal) - log_target(walker);
  res.accepted = accept_log_ratio(lr, rng);
  return res;
}

double log_birth_prob(int p, int p_max) {
  if (p >= p_max || p < 1) return kNegInf;
  return p == 1 ? 0.0 : std::log(0.5);
}

double log_death_prob(int p, int p_max) {
  if (p <= 1 || p > p_max) return kNegInf;
  return p == p_max ? 0.0 : std::log(0.5);
}

double birth_log_ratio(int p_from, double ll_old, double ll_new, double inv_temp,
                       const std::vector<double>& log_pmf, int p_max) {
  return inv_temp * (ll_new - ll_old) +
         log_pmf[static_cast<std::size_t>(p_from)] -
         log_pmf[static_cast<std::size_t>(p_from - 1)] +
         log_death_prob(p_from + 1, p_max) - log_birth_prob(p_from, p_max);
}

RjOutcome birth_move(const WalkerSlot& cur, const TargetContext& ctx, double inv_temp,
                     RngStream& rng) {
  const int p = cur.theta.p();
  double beta = 0.0, tau = 0.0;
  draw_component(ctx, rng, beta, tau);
  RjOutcome out;
  out.proposal = ctx.evaluate(with_component(cur.theta, beta, tau));
  out.log_ratio = birth_log_ratio(p, cur.log_lik, out.proposal.log_lik, inv_temp,
                                  ctx.log_pmf, ctx.prior->p_max);
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  return out;
}

RjOutcome death_move(const WalkerSlot& cur, const TargetContext& ctx, double inv_temp,
                     RngStream& rng) {
  const int p = cur.theta.p();
  const int victim = static_cast<int>(rng.index(static_cast<std::size_t>(p)));
  RjOutcome out;
  out.proposal = ctx.evaluate(without_component(cur.theta, victim));
  // exact negation of the matched birth's ratio (detailed-balance pair)
  out.log_ratio = -birth_log_ratio(p - 1, out.proposal.log_lik, cur.log_lik, inv_temp,
                                   ctx.log_pmf, ctx.prior->p_max);
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  return out;
}

// Generalized multiple-try pair. Candidate birth weights are the single-try
// acceptance ratios (tempered posterior over proposal density); with the
// symmetric weight normalization 1/(pi(lower) T(up|low) T(low|up)), the
// reverse-set weights of a birth collapse to constants, so the correction is
// min(1, mean of the candidate ratios). The death mirror keeps a genuine
// reference set: fresh re-birth candidates plus the removed component.
RjOutcome multiple_try_birth(const WalkerSlot& cur, int n_try, const TargetContext& ctx,
                             double inv_temp, RngStream& rng) {
  if (n_try <= 1) return birth_move(cur, ctx, inv_temp, rng);
  const int p = cur.theta.p();
  const int p_max = ctx.prior->p_max;

  std::vector<WalkerSlot> candidates(static_cast<std::size_t>(n_try));
  std::vector<double> blr(static_cast<std::size_t>(n_try));
  for (int i = 0; i < n_try; ++i) {
    double beta = 0.0, tau = 0.0;
    draw_component(ctx, rng, beta, tau);
    candidates[static_cast<std::size_t>(i)] = ctx.evaluate(with_component(cur.theta, beta, tau));
    blr[static_cast<std::size_t>(i)] =
        birth_log_ratio(p, cur.log_lik, candidates[static_cast<std::size_t>(i)].log_lik,
                        inv_temp, ctx.log_pmf, p_max);
  }
  RjOutcome out;
  const double mx = *std::max_element(blr.begin(), blr.end());
  if (mx == kNegInf) {  // every candidate out of support: auto-reject
    out.proposal = candidates.back();
    out.log_ratio = kNegInf;
    return out;
  }
  double total = 0.0;
  for (double v : blr) total += std::exp(v - mx);
  double u = rng.uniform() * total;
  int sel = n_try - 1;
  for (int i = 0; i < n_try; ++i) {
    u -= std::exp(blr[static_cast<std::size_t>(i)] - mx);
    if (u <= 0.0) {
      sel = i;
      break;
    }
  }
  out.proposal = candidates[static_cast<std::size_t>(sel)];
  out.log_ratio = log_sum_exp(blr) - std::log(static_cast<double>(n_try));
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  return out;
}

RjOutcome multiple_try_death(const WalkerSlot& cur, int n_try, const TargetContext& ctx,
                             double inv_temp, RngStream& rng) {
  if (n_try <= 1) return death_move(cur, ctx, inv_temp, rng);
  const int q = cur.theta.p();
  const int p_max = ctx.prior->p_max;

  // victim selection weights are constant, so this is a uniform choice
  const int victim = static_cast<int>(rng.index(static_cast<std::size_t>(q)));
  RjOutcome out;
  out.proposal = ctx.evaluate(without_component(cur.theta, victim));

  std::vector<double> ref(static_cast<std::size_t>(n_try));
  for (int i = 0; i + 1 < n_try; ++i) {
    double beta = 0.0, tau = 0.0;
    draw_component(ctx, rng, beta, tau);
    const WalkerSlot y = ctx.evaluate(with_component(out.proposal.theta, beta, tau));
    ref[static_cast<std::size_t>(i)] =
        birth_log_ratio(q - 1, out.proposal.log_lik, y.log_lik, inv_temp, ctx.log_pmf, p_max);
  }
  ref[static_cast<std::size_t>(n_try - 1)] =
      birth_log_ratio(q - 1, out.proposal.log_lik, cur.log_lik, inv_temp, ctx.log_pmf, p_max);

  out.log_ratio = std::log(static_cast<double>(n_try)) - log_sum_exp(ref);
  out.accepted = accept_log_ratio(out.log_ratio, rng);
  return out;
}

void temperature_swap(EnsembleState& state, const std::vector<double>& inv_temps,
                      int parity, bool post_burn, RngStream& rng) {
  const int n_temps = static_cast<int>(inv_temps.size());
  const int n_walkers = static_cast<int>(state.slots.empty() ? 0 : state.slots[0].size());
  for (int t = parity; t + 1 < n_temps; t += 2) {
    const double bi = inv_temps[static_cast<std::size_t>(t)];
    const double bj = inv_temps[static_cast<std::size_t>(t + 1)];
    for (int w = 0; w < n_walkers; ++w) {
      WalkerSlot& cold = state.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)];
      WalkerSlot& hot = state.slots[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(w)];
      const double lr = (bi - bj) * (hot.log_lik - cold.log_lik);
      const bool acc = accept_log_ratio(lr, rng);
      state.stats.record(t, MoveKind::Swap, post_burn, acc);
      if (acc) std::swap(cold, hot);
    }
  }
}

double adapt_scale(double window_rate, double a, double low, double high) {
  if (window_rate > high)
    a *= 1.1;
  else if (window_rate < low)
    a /= 1.1;
  return std::clamp(a, 1.01, 10.0);
}

EnsembleState init_ensemble(const SamplerConfig& cfg, const FunctionalDataset& dataset,
                            const PriorConfig& prior_cfg, ModelKind kind) {
  cfg.validate(prior_cfg.p_max);
  const TargetContext ctx(dataset, prior_cfg, kind);
  const int n_temps = cfg.temp_ladder.empty() ? cfg.n_temps
                                              : static_cast<int>(cfg.temp_ladder.size());

  double ybar = 0.0, yvar = 0.0;
  if (kind == ModelKind::Linear) {
    const Eigen::Index n = dataset.n();
    if (n == 0) throw std::runtime_error("cannot initialize linear sampler on an empty dataset");
    ybar = dataset.y.mean();
    yvar = (dataset.y.array() - ybar).square().mean();
    if (!(yvar > 0.0)) throw std::runtime_error("degenerate dataset: zero-variance response");
  }

  // cumulative pmf for the initial dimension draw
  std::vector<double> cdf(ctx.log_pmf.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    acc += std::exp(ctx.log_pmf[k]);
    cdf[k] = acc;
  }

  EnsembleState st;
  st.scale_a = cfg.stretch_scale;
  st.stats.resize(n_temps);
  st.slots.resize(static_cast<std::size_t>(n_temps));
  for (int t = 0; t < n_temps; ++t) {
    st.slots[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(cfg.n_walkers));
    for (int w = 0; w < cfg.n_walkers; ++w) {
      RngStream rs(cfg.seed, kInitTag, static_cast<std::uint64_t>(t),
                   static_cast<std::uint64_t>(w));
      const double u = rs.uniform() * cdf.back();
      int p = prior_cfg.p_max;
      for (std::size_t k = 0; k < cdf.size(); ++k)
        if (u <= cdf[k]) {
          p = static_cast<int>(k) + 1;
          break;
        }
      ParamState th;
      th.beta.resize(p);
      th.tau.resize(p);
      for (int j = 0; j < p; ++j) draw_component(ctx, rs, th.beta[j], th.tau[j]);
      if (kind == ModelKind::Linear) {
        const double a0_sd = std::abs(ybar) > 0.0 ? 10.0 * std::abs(ybar) : 1.0;
        th.alpha0 = rs.normal(0.0, a0_sd);
        // Appendix-style weakly informative start: sigma_hat = |ybar| / 100,
        // inverse-gamma(2, sigma_hat^2 / Var(y)), stored as log sigma.
        double scale = (ybar * ybar * 1e-4) / yvar;
        if (!(scale > 0.0)) scale = 1e-4;
        const double sigma2 = rs.inverse_gamma(2.0, scale);
        th.log_sigma = 0.5 * std::log(sigma2);
      } else {
        th.alpha0 = rs.cauchy(0.0, 10.0);
        th.log_sigma = 0.0;
      }
      WalkerSlot slot = ctx.evaluate(th);
      if (!std::isfinite(slot.log_prior))
        throw std::runtime_error("non-finite prior during ensemble initialization");
      st.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)] = std::move(slot);
    }
  }
  return st;
}

namespace {

struct GroupSnapshot {
  // buckets[p-1] holds concatenated (beta, tau) vectors of that dimension
  std::vector<std::vector<Eigen::VectorXd>> buckets;

  void refresh(const std::vector<WalkerSlot>& walkers, int p_max) {
    buckets.assign(static_cast<std::size_t>(p_max), {});
    for (const auto& slot : walkers) {
      const int p = slot.theta.p();
      Eigen::VectorXd v(2 * p);
      v.head(p) = slot.theta.beta;
      v.tail(p) = slot.theta.tau;
      buckets[static_cast<std::size_t>(p - 1)].push_back(std::move(v));
    }
  }
};

}  // namespace

ChainStore run_sampler(const FunctionalDataset& dataset, const PriorConfig& prior_cfg,
                       ModelKind kind, const SamplerConfig& cfg) {
  cfg.validate(prior_cfg.p_max);
  const TargetContext ctx(dataset, prior_cfg, kind);
  const std::vector<double> inv_temps = cfg.temp_ladder.empty()
                                            ? geometric_inverse_temps(cfg.n_temps, cfg.beta_min)
                                            : cfg.temp_ladder;
  const int n_temps = static_cast<int>(inv_temps.size());
  const int n_walkers = cfg.n_walkers;
  const int half = n_walkers / 2;
  const int p_max = prior_cfg.p_max;

  EnsembleState st = init_ensemble(cfg, dataset, prior_cfg, kind);

  std::vector<std::vector<RngStream>> streams;
  streams.reserve(static_cast<std::size_t>(n_temps));
  for (int t = 0; t < n_temps; ++t) {
    std::vector<RngStream> row;
    row.reserve(static_cast<std::size_t>(n_walkers));
    for (int w = 0; w < n_walkers; ++w)
      row.emplace_back(cfg.seed, kLoopTag, static_cast<std::uint64_t>(t),
                       static_cast<std::uint64_t>(w));
    streams.push_back(std::move(row));
  }
  RngStream swap_rng(cfg.seed, kSwapTag);

  std::vector<GroupSnapshot> groups(static_cast<std::size_t>(n_temps));

  ChainStore out;
  out.n_iters = cfg.n_iters;
  out.n_burn = cfg.n_burn;
  out.n_temps = n_temps;
  out.n_walkers = n_walkers;
  out.inv_temps = inv_temps;
  out.kind = kind;
  out.p_trace.resize(static_cast<std::size_t>(cfg.n_iters) * static_cast<std::size_t>(n_temps) *
                     static_cast<std::size_t>(n_walkers));
  out.samples.reserve(static_cast<std::size_t>(cfg.n_iters - cfg.n_burn) *
                      static_cast<std::size_t>(n_walkers));

  std::int64_t window_proposed = 0, window_accepted = 0;

  for (int iter = 0; iter < cfg.n_iters; ++iter) {
    const bool post_burn = iter >= cfg.n_burn;
    if (iter % cfg.group_refresh == 0)
      for (int t = 0; t < n_temps; ++t)
        groups[static_cast<std::size_t>(t)].refresh(st.slots[static_cast<std::size_t>(t)], p_max);

    for (int t = 0; t < n_temps; ++t) {
      const double inv_temp = inv_temps[static_cast<std::size_t>(t)];
      auto& walkers = st.slots[static_cast<std::size_t>(t)];

      for (int half_id = 0; half_id < 2; ++half_id) {
        const int lo = half_id == 0 ? 0 : half;
        for (int w = lo; w < lo + half; ++w) {
          RngStream& rs = streams[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)];
          WalkerSlot& cur = walkers[static_cast<std::size_t>(w)];

          // stretch move on the shared block (alpha0 [, log sigma])
          {
            const int pidx = half_id == 0 ? half + static_cast<int>(rs.index(static_cast<std::size_t>(half)))
                                          : static_cast<int>(rs.index(static_cast<std::size_t>(half)));
            const WalkerSlot& partner = walkers[static_cast<std::size_t>(pidx)];
            const double z = draw_stretch_z(st.scale_a, rs);
            ParamState cand = cur.theta;
            cand.alpha0 = partner.theta.alpha0 + z * (cur.theta.alpha0 - partner.theta.alpha0);
            double dim = 1.0;
            if (kind == ModelKind::Linear) {
              cand.log_sigma =
                  partner.theta.log_sigma + z * (cur.theta.log_sigma - partner.theta.log_sigma);
              dim = 2.0;
            }
            const WalkerSlot prop = ctx.evaluate(cand);
            const double lr =
                (dim - 1.0) * std::log(z) + prop.tempered(inv_temp) - cur.tempered(inv_temp);
            const bool acc = accept_log_ratio(lr, rs);
            st.stats.record(t, MoveKind::Stretch, post_burn, acc);
            if (t == 0) {
              ++window_proposed;
              window_accepted += acc;
            }
            if (acc) cur = prop;
          }

          // group stretch move on (beta, tau)
          {
            const int p = cur.theta.p();
            const auto& bucket = groups[static_cast<std::size_t>(t)].buckets[static_cast<std::size_t>(p - 1)];
            Eigen::VectorXd v(2 * p);
            v.head(p) = cur.theta.beta;
            v.tail(p) = cur.theta.tau;

            Eigen::VectorXd proposal;
            double lr_geom = 0.0;
            MoveKind mk = MoveKind::GroupStretch;
            if (!bucket.empty()) {
              const Eigen::VectorXd& partner = bucket[rs.index(bucket.size())];
              const double z = draw_stretch_z(st.scale_a, rs);
              proposal = partner + z * (v - partner);
              lr_geom = (2.0 * p - 1.0) * std::log(z);
            } else {
              mk = MoveKind::RwFallback;
              proposal = v;
              for (Eigen::Index i = 0; i < proposal.size(); ++i)
                proposal[i] += cfg.rw_fallback_scale * rs.normal();
            }
            ParamState cand = cur.theta;
            cand.beta = proposal.head(p);
            cand.tau = proposal.tail(p);
            const WalkerSlot prop = ctx.evaluate(cand);
            const double lr = lr_geom + prop.tempered(inv_temp) - cur.tempered(inv_temp);
            const bool acc = accept_log_ratio(lr, rs);
            st.stats.record(t, mk, post_burn, acc);
            if (t == 0) {
              ++window_proposed;
              window_accepted += acc;
            }
            if (acc) cur = prop;
          }
        }
      }

      // trans-dimensional move per walker
      if (p_max > 1) {
        for (int w = 0; w < n_walkers; ++w) {
          RngStream& rs = streams[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)];
          WalkerSlot& cur = walkers[static_cast<std::size_t>(w)];
          const int p = cur.theta.p();
          const bool do_birth = rs.uniform() < birth_proposal_prob(p, p_max);
          RjOutcome outc;
          if (do_birth)
            outc = cfg.multiple_try >= 2
                       ? multiple_try_birth(cur, cfg.multiple_try, ctx, inv_temp, rs)
                       : birth_move(cur, ctx, inv_temp, rs);
          else
            outc = cfg.multiple_try >= 2
                       ? multiple_try_death(cur, cfg.multiple_try, ctx, inv_temp, rs)
                       : death_move(cur, ctx, inv_temp, rs);
          st.stats.record(t, do_birth ? MoveKind::Birth : MoveKind::Death, post_burn,
                          outc.accepted);
          if (outc.accepted) cur = std::move(outc.proposal);
        }
      }
    }

    if (n_temps >= 2) temperature_swap(st, inv_temps, iter % 2, post_burn, swap_rng);

    for (int t = 0; t < n_temps; ++t)
      for (int w = 0; w < n_walkers; ++w)
        out.p_trace[static_cast<std::size_t>((iter * n_temps + t) * n_walkers + w)] =
            static_cast<std::uint8_t>(
                st.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)].theta.p());
    if (post_burn)
      for (int w = 0; w < n_walkers; ++w)
        out.samples.push_back(
            {iter, w, st.slots[0][static_cast<std::size_t>(w)].theta});

    if (!post_burn && (iter + 1) % cfg.adapt_window == 0) {
      if (window_proposed > 0)
        st.scale_a = adapt_scale(static_cast<double>(window_accepted) /
                                     static_cast<double>(window_proposed),
                                 st.scale_a, cfg.adapt_low, cfg.adapt_high);
      window_proposed = window_accepted = 0;
    }

    if (cfg.cache_check_every > 0 && (iter + 1) % cfg.cache_check_every == 0) {
      for (int t = 0; t < n_temps; ++t) {
        const double inv_temp = inv_temps[static_cast<std::size_t>(t)];
        for (int w = 0; w < n_walkers; ++w) {
          const WalkerSlot& slot = st.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(w)];
          const WalkerSlot fresh = ctx.evaluate(slot.theta);
          const double drift = std::abs(fresh.tempered(inv_temp) - slot.tempered(inv_temp));
          if (!std::isfinite(slot.tempered(inv_temp)) || !(drift <= 1e-9)) {
            std::ostringstream msg;
            msg << "sampler invariant violation at iteration " << iter << ", temperature " << t
                << ", walker " << w << ": cached tempered log-posterior "
                << slot.tempered(inv_temp) << " vs fresh " << fresh.tempered(inv_temp);
            throw std::runtime_error(msg.str());
          }
        }
      }
    }
  }

  out.stats = st.stats;
  out.final_scale = st.scale_a;
  return out;
}

}  // namespace rjfr
