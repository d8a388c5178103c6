#include "shiftlab/tabular.hpp"

#include <cmath>
#include <stdexcept>

namespace shiftlab {

QTable::QTable(int ns, int na, double q0_)
    : num_states(ns), num_actions(na), q0(q0_) {
  if (ns < 1 || na < 1) throw std::invalid_argument("q table: empty shape");
  values.assign(static_cast<std::size_t>(ns) * na, q0_);
}

double QTable::max_at(int s) const {
  double m = at(s, 0);
  for (int a = 1; a < num_actions; ++a)
    if (at(s, a) > m) m = at(s, a);
  return m;
}

std::vector<std::size_t> QTable::argmax_set_at(int s) const {
  const double m = max_at(s);
  std::vector<std::size_t> best;
  for (int a = 0; a < num_actions; ++a)
    if (at(s, a) == m) best.push_back(static_cast<std::size_t>(a));
  return best;
}

double QTable::mean() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

VisitCounts::VisitCounts(int ns, int na) : num_states(ns), num_actions(na) {
  values.assign(static_cast<std::size_t>(ns) * na, 0);
}

long VisitCounts::total() const {
  long sum = 0;
  for (long v : values) sum += v;
  return sum;
}

void td_update(QTable& table, const TabularTransition& t, const ShiftSpec& shift,
               double alpha, double gamma, bool continuing_bootstrap) {
  const double r = t.reward + shift.b;
  const bool bootstrap =
      t.termination != Termination::Terminal || continuing_bootstrap;
  const double target = bootstrap ? r + gamma * table.max_at(t.next_state) : r;
  double& q = table.at(t.state, t.action);
  q += alpha * (target - q);
}

namespace {

int pick_uniformly(const std::vector<std::size_t>& set, Rng& rng) {
  return static_cast<int>(set[rng.uniform_int(static_cast<int>(set.size()))]);
}

int argmax_with_bonus(const QTable& table, int state, const VisitCounts& counts,
                      double kappa, Rng& rng) {
  std::vector<double> scored(table.num_actions);
  for (int a = 0; a < table.num_actions; ++a)
    scored[a] = table.at(state, a) +
                kappa / std::sqrt(static_cast<double>(counts.at(state, a)) + 1.0);
  return pick_uniformly(argmax_set(scored), rng);
}

}  // namespace

int select_action(const QTable& table, int state, const ExplorationSpec& exploration,
                  double progress, const VisitCounts* counts, Rng& rng) {
  switch (exploration.kind) {
    case ExplorationKind::None:
      return pick_uniformly(table.argmax_set_at(state), rng);
    case ExplorationKind::EpsilonGreedy: {
      const double eps = epsilon_at(exploration.epsilon, progress);
      if (rng.uniform() < eps) return rng.uniform_int(table.num_actions);
      return pick_uniformly(table.argmax_set_at(state), rng);
    }
    case ExplorationKind::CountBonus: {
      if (!counts)
        throw std::invalid_argument("select_action: count bonus needs visit counts");
      return argmax_with_bonus(table, state, *counts, exploration.kappa, rng);
    }
  }
  throw std::logic_error("select_action: unknown exploration kind");
}

std::vector<CurvePoint> run_tabular(GridMaze& env, const TabularConfig& cfg,
                                    std::uint64_t seed) {
  QTable table(env.num_states(), env.num_actions(), cfg.q0);
  VisitCounts counts(env.num_states(), env.num_actions());
  Rng env_rng = Rng::for_stream(seed, RngStream::Env);
  Rng action_rng = Rng::for_stream(seed, RngStream::ActionNoise);

  std::vector<CurvePoint> curve;
  long long steps = 0;
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    const double progress = static_cast<double>(episode) / cfg.episodes;
    env.reset(env_rng.next_u64());
    bool success = false;
    double ret = 0.0;
    while (!env.episode_over()) {
      const int s = env.state_index();
      const int a = select_action(table, s, cfg.exploration, progress, &counts,
                                  action_rng);
      const Transition tr = env.step(a);
      ++counts.at(s, a);
      ++steps;
      ret += tr.reward;
      td_update(table,
                TabularTransition{s, a, tr.reward, env.state_index(), tr.termination},
                cfg.shift, cfg.alpha, cfg.gamma, cfg.continuing_bootstrap);
      if (tr.termination == Termination::Terminal) success = true;
    }
    curve.push_back({steps, episode + 1, "success", success ? 1.0 : 0.0});
    curve.push_back({steps, episode + 1, "return", ret});
    curve.push_back({steps, episode + 1, "mean_q", table.mean()});
  }
  return curve;
}

EquivalenceReport offset_equivalence_check(const GridMazeSpec& spec,
                                           const TabularConfig& cfg,
                                           std::uint64_t seed, double probe_b) {
  if (!cfg.continuing_bootstrap)
    throw std::invalid_argument(
        "offset_equivalence_check: continuing-mode bootstrapping must be enabled");
  if (cfg.exploration.kind == ExplorationKind::CountBonus)
    throw std::invalid_argument(
        "offset_equivalence_check: needs greedy or epsilon-greedy selection");

  GridMaze env(spec);
  const double offset = offset_of(make_shift(probe_b), cfg.gamma);
  QTable shifted(env.num_states(), env.num_actions(), 0.0);
  QTable plain(env.num_states(), env.num_actions(), -offset);
  const ShiftSpec probe = make_shift(probe_b);
  const ShiftSpec none = make_shift(0.0);

  Rng env_rng = Rng::for_stream(seed, RngStream::Env);
  Rng action_rng = Rng::for_stream(seed, RngStream::ActionNoise);

  EquivalenceReport report;
  const auto record = [&](double q1, double q2) {
    const double d = std::fabs(q1 - (q2 + offset));
    if (d > report.max_discrepancy) report.max_discrepancy = d;
    if (d > 1e-9 && report.fail_step < 0) report.fail_step = report.steps;
  };
  for (std::size_t i = 0; i < shifted.values.size(); ++i)
    record(shifted.values[i], plain.values[i]);

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    const double progress = static_cast<double>(episode) / cfg.episodes;
    env.reset(env_rng.next_u64());
    while (!env.episode_over()) {
      const int s = env.state_index();
      if (shifted.argmax_set_at(s) != plain.argmax_set_at(s))
        report.greedy_sets_matched = false;
      // one shared draw sequence keeps the two trajectories coincident
      const int a =
          select_action(shifted, s, cfg.exploration, progress, nullptr, action_rng);
      const Transition tr = env.step(a);
      ++report.steps;
      const TabularTransition ts{s, a, tr.reward, env.state_index(), tr.termination};
      td_update(shifted, ts, probe, cfg.alpha, cfg.gamma, true);
      td_update(plain, ts, none, cfg.alpha, cfg.gamma, true);
      record(shifted.at(s, a), plain.at(s, a));
    }
  }
  for (std::size_t i = 0; i < shifted.values.size(); ++i)
    record(shifted.values[i], plain.values[i]);
  return report;
}

}  // namespace shiftlab
