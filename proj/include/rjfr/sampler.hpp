#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "rjfr/model.hpp"
#include "rjfr/rng.hpp"

namespace rjfr {

struct SamplerConfig {
  int n_walkers = 64;  // must be even; the ensemble splits into two halves
  int n_temps = 10;
  int n_iters = 5000;
  int n_burn = 4000;
  double stretch_scale = 2.0;  // initial a
  int multiple_try = 1;        // 1 = off
  std::vector<double> temp_ladder;  // inverse temperatures, first entry 1; empty -> geometric
  double beta_min = 1e-4;  // floor of the geometric ladder; hottest rungs must let
                           // prior-drawn births survive or dimensions never mix
  std::uint64_t seed = 0;
  double adapt_low = 0.20;
  double adapt_high = 0.30;
  int adapt_window = 100;   // iterations per scale-adaptation window (burn-in only)
  int group_refresh = 100;  // iterations between stationary-group refreshes
  double rw_fallback_scale = 0.1;
  int cache_check_every = 100;  // recompute cached posteriors and compare

  void validate(int p_max) const;
};

// Geometric ladder of inverse temperatures from 1 down to beta_min.
std::vector<double> geometric_inverse_temps(int n_temps, double beta_min = 1e-2);

enum class MoveKind : int { Stretch = 0, GroupStretch, RwFallback, Birth, Death, Swap };
constexpr int kNumMoveKinds = 6;

struct MoveStats {
  // [temp][move][phase]; phase 0 = burn-in, 1 = post burn-in
  std::vector<std::array<std::array<std::int64_t, 2>, kNumMoveKinds>> proposed;
  std::vector<std::array<std::array<std::int64_t, 2>, kNumMoveKinds>> accepted;

  void resize(int n_temps);
  void record(int temp, MoveKind move, bool post_burn, bool accept);
  double rate(int temp, MoveKind move, int phase) const;
  // Pooled stretch + group-stretch + fallback rate at one temperature.
  double in_model_rate(int temp, int phase) const;
};

struct WalkerSlot {
  ParamState theta;
  double log_lik = 0.0;
  double log_prior = 0.0;

  double tempered(double inv_temp) const { return log_prior + inv_temp * log_lik; }
};

struct EnsembleState {
  std::vector<std::vector<WalkerSlot>> slots;  // [temp][walker]
  double scale_a = 2.0;
  MoveStats stats;
};

struct ChainSample {
  int iter = 0;
  int walker = 0;
  ParamState theta;
};

struct ChainStore {
  std::vector<ChainSample> samples;  // cold chain, post burn-in
  std::vector<std::uint8_t> p_trace; // [iter][temp][walker]
  int n_iters = 0;
  int n_burn = 0;
  int n_temps = 0;
  int n_walkers = 0;
  std::vector<double> inv_temps;
  ModelKind kind = ModelKind::Linear;
  MoveStats stats;
  double final_scale = 2.0;

  std::uint8_t p_at(int iter, int temp, int walker) const {
    return p_trace[static_cast<std::size_t>((iter * n_temps + temp) * n_walkers + walker)];
  }
  // Post-burn-in dimension histogram at one temperature, normalized.
  std::vector<double> p_histogram(int temp, int p_max) const;
  double in_model_acceptance_post_burn(int temp = 0) const {
    return stats.in_model_rate(temp, 1);
  }
};

// Bundles everything a move needs to evaluate its target.
struct TargetContext {
  const FunctionalDataset* dataset = nullptr;
  const PriorConfig* prior = nullptr;
  ModelKind kind = ModelKind::Linear;
  std::vector<double> log_pmf;

  TargetContext(const FunctionalDataset& d, const PriorConfig& pc, ModelKind k)
      : dataset(&d), prior(&pc), kind(k), log_pmf(pc.log_pmf()) {}

  double log_lik(const ParamState& th) const { return log_likelihood(th, *dataset, kind); }
  double log_prior_of(const ParamState& th) const {
    return detail::log_prior_with_pmf(th, *prior, kind, log_pmf);
  }
  WalkerSlot evaluate(const ParamState& th) const {
    return {th, log_lik(th), log_prior_of(th)};
  }
};

// --- generic affine-invariant moves over plain vectors (used in tests and
// --- by the in-model updates)

double draw_stretch_z(double a, RngStream& rng);

struct VecMoveResult {
  Eigen::VectorXd proposal;
  double z = 1.0;
  bool accepted = false;
};

using LogTargetFn = std::function<double(const Eigen::VectorXd&)>;

VecMoveResult stretch_move(const Eigen::VectorXd& walker,
                           const Eigen::VectorXd& complement_sample, double a,
                           const LogTargetFn& log_target, RngStream& rng);

// Partner drawn from a frozen same-dimension group; an empty group falls back
// to a symmetric Gaussian random walk. `used_fallback` reports which path ran.
VecMoveResult group_stretch_move(const Eigen::VectorXd& walker,
                                 const std::vector<Eigen::VectorXd>& stationary_group,
                                 double a, double rw_scale, const LogTargetFn& log_target,
                                 RngStream& rng, bool* used_fallback = nullptr);

// --- trans-dimensional moves

double log_birth_prob(int p, int p_max);  // log b_{p,p+1}
double log_death_prob(int p, int p_max);  // log d_{p,p-1}

// Component append/remove, shared by the trans-dimensional moves.
ParamState with_component(const ParamState& th, double beta, double tau);
ParamState without_component(const ParamState& th, int k);

// Acceptance log-ratio of the birth p_from -> p_from+1 taking the log-likelihood
// from ll_old to ll_new at inverse temperature inv_temp. The matched death
// ratio is the exact negation.
double birth_log_ratio(int p_from, double ll_old, double ll_new, double inv_temp,
                       const std::vector<double>& log_pmf, int p_max);

struct RjOutcome {
  bool accepted = false;
  WalkerSlot proposal;  // meaningful also when rejected (the candidate)
  double log_ratio = 0.0;
};

RjOutcome birth_move(const WalkerSlot& cur, const TargetContext& ctx, double inv_temp,
                     RngStream& rng);
RjOutcome death_move(const WalkerSlot& cur, const TargetContext& ctx, double inv_temp,
                     RngStream& rng);
// Multiple-try birth/death pair; n_try >= 2 (n_try == 1 delegates to the
// single-try moves).
RjOutcome multiple_try_birth(const WalkerSlot& cur, int n_try, const TargetContext& ctx,
                             double inv_temp, RngStream& rng);
RjOutcome multiple_try_death(const WalkerSlot& cur, int n_try, const TargetContext& ctx,
                             double inv_temp, RngStream& rng);

// One adjacent-pair swap sweep; parity alternates between rounds.
void temperature_swap(EnsembleState& state, const std::vector<double>& inv_temps,
                      int parity, bool post_burn, RngStream& rng);

// Multiplies/divides a by 1.1 to steer the windowed in-model acceptance rate
// into [low, high]; clamped to [1.01, 10].
double adapt_scale(double window_rate, double a, double low = 0.20, double high = 0.30);

EnsembleState init_ensemble(const SamplerConfig& cfg, const FunctionalDataset& dataset,
                            const PriorConfig& prior_cfg, ModelKind kind);

ChainStore run_sampler(const FunctionalDataset& dataset, const PriorConfig& prior_cfg,
                       ModelKind kind, const SamplerConfig& cfg);

}  // namespace rjfr
