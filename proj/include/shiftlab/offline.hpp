#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shiftlab/curve.hpp"
#include "shiftlab/environments.hpp"
#include "shiftlab/mlp.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/shift_algebra.hpp"

namespace shiftlab {

struct DatasetHeader {
  int version = 1;
  std::string env;       // canonical env tag, e.g. grid_maze_s7
  std::string behavior;  // logging-policy tag
  std::size_t count = 0;
  double gamma = 0.99;
};

struct OfflineDataset {
  DatasetHeader header;
  std::vector<Transition> transitions;
};

using LoggingPolicy = std::function<int(const std::vector<double>& obs, Rng& rng)>;

// Rolls episodes under the logging policy until n raw-reward transitions are
// collected.
OfflineDataset generate_dataset(DiscreteEnv& env, const LoggingPolicy& policy,
                                const std::string& behavior_tag, std::size_t n,
                                std::uint64_t seed, double gamma);

// JSON-lines: line 1 is the header object, each following line one
// transition {s, a, r, s2, term}; floats carry 17 significant digits.
void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

// State -> action-logits net giving the discrete behavior-likelihood
// constraint: actions below tau_bcq times the most likely action are
// excluded from argmax.
struct BehaviorModel {
  MlpParams net;
  double tau_bcq = 0.3;
};

struct BehaviorTrainConfig {
  std::vector<int> hidden{64, 64};
  int epochs = 5;
  int batch_size = 128;
  double lr = 1e-3;
};

BehaviorModel train_behavior_model(const OfflineDataset& ds,
                                   const BehaviorTrainConfig& cfg, double tau_bcq,
                                   std::uint64_t seed);

std::vector<double> behavior_probs(const BehaviorModel& model,
                                   const std::vector<double>& obs);

std::vector<int> allowed_actions(const BehaviorModel& model,
                                 const std::vector<double>& obs);

// Constrained greedy action of q under the behavior model.
int offline_policy_action(const MlpParams& q, const BehaviorModel& behavior,
                          const std::vector<double>& obs, Rng& rng);

struct OfflineConfig {
  std::vector<int> hidden{64, 64};
  double gamma = 0.9;
  int epochs = 60;  // one epoch = count/batch_size gradient steps
  int batch_size = 128;
  double lr = 1e-3;
  int target_sync_steps = 100;  // hard sync period
};

struct OfflineResult {
  MlpParams q;
  std::vector<CurvePoint> curve;  // per-epoch td_loss
};

// Batched TD on relabeled rewards r + b with behavior-constrained bootstrap
// argmax; never touches an environment.
OfflineResult train_offline(const OfflineDataset& ds, const ShiftSpec& shift,
                            const BehaviorModel& behavior, const OfflineConfig& cfg,
                            std::uint64_t seed);

struct GapReport {
  double estimate = 0.0;   // mean debiased Q(s, pi(s)) over sampled dataset states
  double mc_return = 0.0;  // mean discounted raw return of pi from those states
  double gap = 0.0;        // estimate - mc_return
};

GapReport evaluate_gap(DiscreteEnv& env, const MlpParams& q,
                       const BehaviorModel& behavior, const OfflineDataset& ds,
                       const ShiftSpec& shift, double gamma, int n_rollouts,
                       std::uint64_t seed);

// Mean discounted raw return of the constrained greedy policy from the
// environment's start state.
double evaluate_policy_return(DiscreteEnv& env, const MlpParams& q,
                              const BehaviorModel& behavior, double gamma,
                              int n_rollouts, std::uint64_t seed);

}  // namespace shiftlab
