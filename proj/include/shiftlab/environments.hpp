#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shiftlab/rng.hpp"

namespace shiftlab {

// Terminal: absorbing state, the bootstrap target excludes the next-state
// value. Truncated: a time-limit cut, the bootstrap target keeps it.
enum class Termination { Continuing, Terminal, Truncated };

char termination_code(Termination t);
Termination termination_from_code(char c);

struct Transition {
  std::vector<double> state;
  int action = -1;                 // discrete index
  std::vector<double> action_vec;  // continuous action
  double reward = 0.0;
  std::vector<double> next_state;
  Termination termination = Termination::Continuing;
};

class DiscreteEnv {
 public:
  virtual ~DiscreteEnv() = default;
  virtual int obs_dim() const = 0;
  virtual int num_actions() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual Transition step(int action) = 0;
  virtual bool episode_over() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<DiscreteEnv> clone_spec() const = 0;  // fresh copy, unreset
  virtual long long total_steps() const = 0;
  // Restart an episode at the state encoded by obs; throws if unsupported.
  virtual std::vector<double> reset_to(const std::vector<double>& obs);
};

struct GridMazeSpec {
  int size = 5;
  int max_steps = 0;                // 0 picks 4 * size * size
  std::vector<std::uint8_t> walls;  // optional size*size mask, 1 = blocked
};

// Open square grid; the agent starts in the upper-left cell, the goal is the
// lower-right cell. Reward 1 exactly on the goal-entering transition, 0
// otherwise. Actions: 0 up, 1 down, 2 left, 3 right; blocked moves stay put.
// Observations are one-hot over the size*size cells.
class GridMaze : public DiscreteEnv {
 public:
  explicit GridMaze(const GridMazeSpec& spec);

  int obs_dim() const override { return spec_.size * spec_.size; }
  int num_actions() const override { return 4; }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(int action) override;
  bool episode_over() const override { return done_; }
  std::string name() const override;
  std::unique_ptr<DiscreteEnv> clone_spec() const override;
  long long total_steps() const override { return total_steps_; }
  std::vector<double> reset_to(const std::vector<double>& obs) override;

  const GridMazeSpec& spec() const { return spec_; }
  int num_states() const { return spec_.size * spec_.size; }
  int state_index() const { return row_ * spec_.size + col_; }
  int goal_index() const { return num_states() - 1; }
  int max_steps() const { return max_steps_; }
  std::vector<double> observation() const;

 private:
  GridMazeSpec spec_;
  int max_steps_ = 0;
  int row_ = 0;
  int col_ = 0;
  int steps_ = 0;
  bool done_ = true;
  long long total_steps_ = 0;
};

// Row-major cell ids of a tabular env; throws std::invalid_argument for
// environments without an enumerable state space.
std::vector<int> enumerate_states(const DiscreteEnv& env);

struct MountainCarSpec {
  int max_steps = 200;
};

// Classic underpowered car, recast as sparse success: reward 1 and Terminal
// at the flag, 0 per step otherwise. The traditional -1-per-step variant is
// expressible as a ShiftSpec with b = -1.
class MountainCar : public DiscreteEnv {
 public:
  explicit MountainCar(const MountainCarSpec& spec);

  int obs_dim() const override { return 2; }
  int num_actions() const override { return 3; }
  std::vector<double> reset(std::uint64_t seed) override;
  Transition step(int action) override;
  bool episode_over() const override { return done_; }
  std::string name() const override { return "mountain_car"; }
  std::unique_ptr<DiscreteEnv> clone_spec() const override;
  long long total_steps() const override { return total_steps_; }

  double position() const { return pos_; }
  double velocity() const { return vel_; }

 private:
  std::vector<double> observation() const;

  MountainCarSpec spec_;
  double pos_ = -0.5;
  double vel_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  long long total_steps_ = 0;
};

enum class PointMassReward { Sparse, Dense };

struct PointMassSpec {
  double half_width = 1.0;
  std::array<double, 2> goal_center{0.7, 0.7};
  double goal_radius = 0.1;
  double dt = 0.05;
  int max_steps = 100;
  PointMassReward reward = PointMassReward::Dense;
  double damping = 0.95;
};

// Double integrator on a square arena, actions clipped to [-1,1]^2,
// positions clipped at the walls. Dense mode: reward -distance per step,
// episodes always end Truncated. Sparse mode: reward 1 and Terminal inside
// the goal region.
class PointMass {
 public:
  explicit PointMass(const PointMassSpec& spec);

  int obs_dim() const { return 4; }
  int action_dim() const { return 2; }
  std::vector<double> reset(std::uint64_t seed);
  Transition step(const std::array<double, 2>& action);
  bool episode_over() const { return done_; }
  std::string name() const;
  const PointMassSpec& spec() const { return spec_; }
  long long total_steps() const { return total_steps_; }

 private:
  std::vector<double> observation() const;
  double distance_to_goal() const;

  PointMassSpec spec_;
  std::array<double, 2> pos_{0.0, 0.0};
  std::array<double, 2> vel_{0.0, 0.0};
  int steps_ = 0;
  bool done_ = true;
  long long total_steps_ = 0;
};

}  // namespace shiftlab
