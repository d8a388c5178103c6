#include "shiftlab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftlab {

char termination_code(Termination t) {
  switch (t) {
    case Termination::Continuing: return 'C';
    case Termination::Terminal: return 'T';
    case Termination::Truncated: return 'U';
  }
  return 'C';
}

Termination termination_from_code(char c) {
  switch (c) {
    case 'C': return Termination::Continuing;
    case 'T': return Termination::Terminal;
    case 'U': return Termination::Truncated;
  }
  throw std::invalid_argument("unknown termination code");
}

std::vector<double> DiscreteEnv::reset_to(const std::vector<double>&) {
  throw std::invalid_argument(name() + ": reset_to is not supported");
}

GridMaze::GridMaze(const GridMazeSpec& spec) : spec_(spec) {
  if (spec_.size < 2 || spec_.size > 64)
    throw std::invalid_argument("grid maze: size must be in [2, 64]");
  max_steps_ = spec_.max_steps > 0 ? spec_.max_steps : 4 * spec_.size * spec_.size;
  if (!spec_.walls.empty()) {
    if (static_cast<int>(spec_.walls.size()) != num_states())
      throw std::invalid_argument("grid maze: wall mask size mismatch");
    if (spec_.walls.front() || spec_.walls.back())
      throw std::invalid_argument("grid maze: start and goal cells must be open");
  }
}

std::string GridMaze::name() const {
  return "grid_maze_s" + std::to_string(spec_.size);
}

std::unique_ptr<DiscreteEnv> GridMaze::clone_spec() const {
  return std::make_unique<GridMaze>(spec_);
}

std::vector<double> GridMaze::observation() const {
  std::vector<double> obs(num_states(), 0.0);
  obs[state_index()] = 1.0;
  return obs;
}

std::vector<double> GridMaze::reset(std::uint64_t) {
  row_ = 0;
  col_ = 0;
  steps_ = 0;
  done_ = false;
  return observation();
}

std::vector<double> GridMaze::reset_to(const std::vector<double>& obs) {
  if (static_cast<int>(obs.size()) != num_states())
    throw std::invalid_argument("grid maze: observation width mismatch");
  int cell = -1;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] > 0.5) {
      if (cell >= 0) throw std::invalid_argument("grid maze: not a one-hot observation");
      cell = static_cast<int>(i);
    }
  }
  if (cell < 0) throw std::invalid_argument("grid maze: not a one-hot observation");
  row_ = cell / spec_.size;
  col_ = cell % spec_.size;
  steps_ = 0;
  done_ = cell == goal_index();
  return observation();
}

Transition GridMaze::step(int action) {
  if (done_) throw std::logic_error("grid maze: step on a finished episode");
  if (action < 0 || action >= 4) throw std::invalid_argument("grid maze: bad action");

  Transition t;
  t.state = observation();
  t.action = action;

  static constexpr int dr[4] = {-1, 1, 0, 0};
  static constexpr int dc[4] = {0, 0, -1, 1};
  const int nr = row_ + dr[action];
  const int nc = col_ + dc[action];
  const bool inside = nr >= 0 && nr < spec_.size && nc >= 0 && nc < spec_.size;
  const bool blocked =
      !inside || (!spec_.walls.empty() && spec_.walls[nr * spec_.size + nc] != 0);
  if (!blocked) {
    row_ = nr;
    col_ = nc;
  }
  ++steps_;
  ++total_steps_;

  const bool at_goal = state_index() == goal_index();
  t.reward = at_goal ? 1.0 : 0.0;
  if (at_goal)
    t.termination = Termination::Terminal;
  else if (steps_ >= max_steps_)
    t.termination = Termination::Truncated;
  else
    t.termination = Termination::Continuing;
  done_ = t.termination != Termination::Continuing;
  t.next_state = observation();
  return t;
}

std::vector<int> enumerate_states(const DiscreteEnv& env) {
  const auto* maze = dynamic_cast<const GridMaze*>(&env);
  if (!maze)
    throw std::invalid_argument(env.name() + ": state enumeration is not supported");
  std::vector<int> ids(maze->num_states());
  for (int i = 0; i < maze->num_states(); ++i) ids[i] = i;
  return ids;
}

MountainCar::MountainCar(const MountainCarSpec& spec) : spec_(spec) {
  if (spec_.max_steps < 1) throw std::invalid_argument("mountain car: max_steps >= 1");
}

std::unique_ptr<DiscreteEnv> MountainCar::clone_spec() const {
  return std::make_unique<MountainCar>(spec_);
}

std::vector<double> MountainCar::observation() const {
  // scaled to roughly [-1, 1]
  return {(pos_ + 0.3) / 0.9, vel_ / 0.07};
}

std::vector<double> MountainCar::reset(std::uint64_t seed) {
  Rng rng = Rng::for_stream(seed, RngStream::Env);
  pos_ = rng.uniform(-0.6, -0.4);
  vel_ = 0.0;
  steps_ = 0;
  done_ = false;
  return observation();
}

Transition MountainCar::step(int action) {
  if (done_) throw std::logic_error("mountain car: step on a finished episode");
  if (action < 0 || action >= 3) throw std::invalid_argument("mountain car: bad action");

  Transition t;
  t.state = observation();
  t.action = action;

  vel_ += (action - 1) * 0.001 - std::cos(3.0 * pos_) * 0.0025;
  vel_ = std::clamp(vel_, -0.07, 0.07);
  pos_ += vel_;
  if (pos_ < -1.2) {
    pos_ = -1.2;
    vel_ = 0.0;
  }
  ++steps_;
  ++total_steps_;

  const bool at_flag = pos_ >= 0.5;
  t.reward = at_flag ? 1.0 : 0.0;
  if (at_flag)
    t.termination = Termination::Terminal;
  else if (steps_ >= spec_.max_steps)
    t.termination = Termination::Truncated;
  else
    t.termination = Termination::Continuing;
  done_ = t.termination != Termination::Continuing;
  t.next_state = observation();
  return t;
}

PointMass::PointMass(const PointMassSpec& spec) : spec_(spec) {
  if (!(spec_.dt > 0.0)) throw std::invalid_argument("point mass: dt must be positive");
  if (!(spec_.goal_radius > 0.0))
    throw std::invalid_argument("point mass: goal radius must be positive");
  if (spec_.max_steps < 1) throw std::invalid_argument("point mass: max_steps >= 1");
}

std::string PointMass::name() const {
  return spec_.reward == PointMassReward::Dense ? "point_mass_dense" : "point_mass_sparse";
}

std::vector<double> PointMass::observation() const {
  return {pos_[0], pos_[1], vel_[0], vel_[1]};
}

double PointMass::distance_to_goal() const {
  const double dx = pos_[0] - spec_.goal_center[0];
  const double dy = pos_[1] - spec_.goal_center[1];
  return std::sqrt(dx * dx + dy * dy);
}

std::vector<double> PointMass::reset(std::uint64_t seed) {
  Rng rng = Rng::for_stream(seed, RngStream::Env);
  // small jitter around the corner opposite the goal
  pos_[0] = -0.8 + 0.1 * rng.uniform();
  pos_[1] = -0.8 + 0.1 * rng.uniform();
  vel_ = {0.0, 0.0};
  steps_ = 0;
  done_ = false;
  return observation();
}

Transition PointMass::step(const std::array<double, 2>& action) {
  if (done_) throw std::logic_error("point mass: step on a finished episode");

  Transition t;
  t.state = observation();
  t.action_vec = {std::clamp(action[0], -1.0, 1.0), std::clamp(action[1], -1.0, 1.0)};

  for (int i = 0; i < 2; ++i) {
    vel_[i] = spec_.damping * vel_[i] + t.action_vec[i] * spec_.dt;
    pos_[i] += vel_[i] * spec_.dt;
    if (pos_[i] < -spec_.half_width) {
      pos_[i] = -spec_.half_width;
      vel_[i] = 0.0;
    } else if (pos_[i] > spec_.half_width) {
      pos_[i] = spec_.half_width;
      vel_[i] = 0.0;
    }
  }
  ++steps_;
  ++total_steps_;

  const bool in_goal = distance_to_goal() <= spec_.goal_radius;
  if (spec_.reward == PointMassReward::Sparse) {
    t.reward = in_goal ? 1.0 : 0.0;
    if (in_goal)
      t.termination = Termination::Terminal;
    else if (steps_ >= spec_.max_steps)
      t.termination = Termination::Truncated;
    else
      t.termination = Termination::Continuing;
  } else {
    t.reward = -distance_to_goal();
    t.termination =
        steps_ >= spec_.max_steps ? Termination::Truncated : Termination::Continuing;
  }
  done_ = t.termination != Termination::Continuing;
  t.next_state = observation();
  return t;
}

}  // namespace shiftlab
