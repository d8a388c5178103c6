#pragma once

#include <cstdint>
#include <vector>

#include "shiftlab/curve.hpp"
#include "shiftlab/dqn.hpp"
#include "shiftlab/environments.hpp"
#include "shiftlab/mlp.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

struct RrsConfig {
  std::vector<double> shifts{-0.5, 0.0, 0.5};  // one critic per entry
  std::vector<int> critic_hidden{64, 64};
  std::vector<int> policy_hidden{64, 64};
  double gamma = 0.99;
  double tau = 0.005;
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  double noise_sigma = 0.1;  // exploration noise, fraction of the action bound
  double action_bound = 1.0;
  int batch_size = 128;
  int warmup_steps = 1000;
  std::size_t buffer_capacity = 100000;
  int eval_every = 10;     // episodes between noiseless evaluations
  int eval_rollouts = 1;
  bool identical_critic_init = false;  // copy one init across critics
};

// K critics with their own shift constants and targets, trained on one
// shared buffer; a single deterministic policy follows one uniformly
// resampled critic per episode.
struct RrsEnsemble {
  RrsConfig cfg;
  std::vector<MlpParams> critics;
  std::vector<MlpParams> critic_targets;
  std::vector<OptimizerState> critic_opts;
  MlpParams policy;
  MlpParams policy_target;
  OptimizerState policy_opt;
  int active_index = 0;

  int num_critics() const { return static_cast<int>(critics.size()); }
};

RrsEnsemble make_rrs_ensemble(int obs_dim, int action_dim, const RrsConfig& cfg,
                              Rng& rng);

// Uniform over the K critics; call at episode boundaries.
int sample_active_q(RrsEnsemble& ens, Rng& rng);

// One MSE step per critic toward y_k = (r + b_k) + gamma * Q'_k(s', mu'(s'))
// (bootstrap dropped on Terminal samples); every critic consumes the same
// batch. Returns the per-critic losses.
std::vector<double> rrs_critic_step(RrsEnsemble& ens,
                                    const std::vector<const Transition*>& batch);

// One gradient-ascent step on mean_s Q_active(s, mu(s)).
void rrs_actor_step(RrsEnsemble& ens,
                    const std::vector<const std::vector<double>*>& states);

void rrs_soft_update(RrsEnsemble& ens);

std::vector<double> policy_action(const MlpParams& policy,
                                  const std::vector<double>& obs);

double critic_value(const MlpParams& critic, const std::vector<double>& obs,
                    const std::vector<double>& action);

// Metrics: per episode return (raw) and active_k; eval_return every
// eval_every episodes from a noiseless rollout.
std::vector<CurvePoint> run_rrs(PointMass& env, const RrsConfig& cfg,
                                std::uint64_t seed, int episodes);

}  // namespace shiftlab
