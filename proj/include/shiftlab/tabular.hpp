#pragma once

#include <cstdint>
#include <vector>

#include "shiftlab/curve.hpp"
#include "shiftlab/environments.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/schedule.hpp"
#include "shiftlab/shift_algebra.hpp"

namespace shiftlab {

struct QTable {
  QTable(int num_states, int num_actions, double q0);

  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
  double at(int s, int a) const {
    return values[static_cast<std::size_t>(s) * num_actions + a];
  }
  double max_at(int s) const;
  std::vector<std::size_t> argmax_set_at(int s) const;
  double mean() const;

  int num_states = 0;
  int num_actions = 0;
  double q0 = 0.0;
  std::vector<double> values;
};

struct VisitCounts {
  VisitCounts(int num_states, int num_actions);

  long& at(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
  long at(int s, int a) const {
    return values[static_cast<std::size_t>(s) * num_actions + a];
  }
  long total() const;

  int num_states = 0;
  int num_actions = 0;
  std::vector<long> values;
};

enum class ExplorationKind { None, EpsilonGreedy, CountBonus };

struct ExplorationSpec {
  ExplorationKind kind = ExplorationKind::EpsilonGreedy;
  EpsilonSchedule epsilon;  // EpsilonGreedy
  double kappa = 1.0;       // CountBonus
};

struct TabularConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  ShiftSpec shift;
  ExplorationSpec exploration;
  int episodes = 100;
  double q0 = 0.0;
  // When set, Terminal transitions bootstrap through the next state exactly
  // like Continuing ones; required for the exact offset equivalence.
  bool continuing_bootstrap = false;
};

struct TabularTransition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  Termination termination = Termination::Continuing;
};

// target = (r + b) + gamma * max_a Q(s', a), with the bootstrap term dropped
// on Terminal transitions unless continuing_bootstrap is set.
void td_update(QTable& table, const TabularTransition& t, const ShiftSpec& shift,
               double alpha, double gamma, bool continuing_bootstrap);

// progress in [0,1] drives the epsilon schedule; counts may be null unless
// kind == CountBonus. Ties break uniformly under rng.
int select_action(const QTable& table, int state, const ExplorationSpec& exploration,
                  double progress, const VisitCounts* counts, Rng& rng);

// Metrics per episode: success, return (raw reward scale), mean_q.
std::vector<CurvePoint> run_tabular(GridMaze& env, const TabularConfig& cfg,
                                    std::uint64_t seed);

struct EquivalenceReport {
  double max_discrepancy = 0.0;
  long long fail_step = -1;  // first step where |Q1 - (Q2 + offset)| > 1e-9
  bool greedy_sets_matched = true;
  long long steps = 0;
};

// Runs two lock-stepped learners on identical trajectories: L1 with shift
// probe_b and q0 = 0, L2 unshifted initialized at -probe_b/(1-gamma). L1's
// table must equal L2's plus probe_b/(1-gamma) after every update.
EquivalenceReport offset_equivalence_check(const GridMazeSpec& spec,
                                           const TabularConfig& cfg,
                                           std::uint64_t seed, double probe_b);

}  // namespace shiftlab
