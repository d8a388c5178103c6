#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shiftlab/curve.hpp"
#include "shiftlab/environments.hpp"
#include "shiftlab/mlp.hpp"
#include "shiftlab/rnd.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/schedule.hpp"
#include "shiftlab/shift_algebra.hpp"

namespace shiftlab {

// Fixed-capacity ring with FIFO eviction; sampling is uniform with
// replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }
  const Transition& at(std::size_t i) const { return ring_[i]; }
  const Transition& sample(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t write_ = 0;
  std::uint64_t inserted_ = 0;
};

struct DqnConfig {
  std::vector<int> hidden{64, 64};
  double gamma = 0.99;
  ShiftSpec shift;
  EpsilonSchedule epsilon;
  double tau = 0.005;        // soft target sync
  int hard_sync_period = 0;  // > 0 switches to periodic hard sync
  int batch_size = 128;
  double lr = 1e-3;
  int warmup_steps = 500;
  int train_every = 1;
  std::size_t buffer_capacity = 100000;
  std::optional<RndConfig> rnd;  // intrinsic source
};

struct DqnAgent {
  MlpParams qnet;
  MlpParams target;
  OptimizerState opt;
};

DqnAgent make_dqn_agent(int obs_dim, int num_actions, const DqnConfig& cfg, Rng& rng);

int greedy_action(const MlpParams& qnet, const std::vector<double>& obs, Rng& rng);

// Effective training reward of one sampled transition: raw reward plus the
// configured shift plus the intrinsic contribution, if a source is attached.
double effective_reward(const Transition& t, const DqnConfig& cfg, const RndPair* rnd);

// One TD step on a uniformly sampled batch; also distills the attached RND
// predictor on that batch. Returns nullopt while the buffer is smaller than
// the batch.
std::optional<double> dqn_train_step(DqnAgent& agent, const ReplayBuffer& buffer,
                                     const DqnConfig& cfg, Rng& rng, RndPair* rnd);

// Metrics per episode: success, return (raw), epsilon; per train step: none.
std::vector<CurvePoint> run_dqn(DiscreteEnv& env, const DqnConfig& cfg,
                                std::uint64_t seed, int episodes);

}  // namespace shiftlab
