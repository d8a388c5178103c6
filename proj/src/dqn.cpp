#include "shiftlab/dqn.hpp"

#include <stdexcept>
#include <utility>

namespace shiftlab {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("replay buffer: capacity >= 1");
  ring_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[write_] = std::move(t);
  }
  write_ = (write_ + 1) % capacity_;
  ++inserted_;
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
  if (ring_.empty()) throw std::logic_error("replay buffer: sample from empty buffer");
  return ring_[rng.uniform_int(static_cast<int>(ring_.size()))];
}

DqnAgent make_dqn_agent(int obs_dim, int num_actions, const DqnConfig& cfg, Rng& rng) {
  std::vector<int> widths;
  widths.push_back(obs_dim);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(num_actions);
  const MlpSpec spec = mlp_spec(std::move(widths));
  DqnAgent agent;
  agent.qnet = init_mlp(spec, rng);
  agent.target = agent.qnet;
  agent.opt = adam(cfg.lr);
  return agent;
}

int greedy_action(const MlpParams& qnet, const std::vector<double>& obs, Rng& rng) {
  const std::vector<double> q = forward(qnet, obs);
  const std::vector<std::size_t> best = argmax_set(q);
  return static_cast<int>(best[rng.uniform_int(static_cast<int>(best.size()))]);
}

double effective_reward(const Transition& t, const DqnConfig& cfg, const RndPair* rnd) {
  double r = t.reward + cfg.shift.b;
  if (rnd) r += rnd->contribution(t.state, t.action);
  return r;
}

std::optional<double> dqn_train_step(DqnAgent& agent, const ReplayBuffer& buffer,
                                     const DqnConfig& cfg, Rng& rng, RndPair* rnd) {
  if (buffer.size() < static_cast<std::size_t>(cfg.batch_size)) return std::nullopt;

  std::vector<const Transition*> batch(cfg.batch_size);
  for (int n = 0; n < cfg.batch_size; ++n) batch[n] = &buffer.sample(rng);

  std::vector<double> grad(agent.qnet.values.size(), 0.0);
  double loss = 0.0;
  ForwardCache cache;
  const int num_actions = agent.qnet.spec.widths.back();
  std::vector<double> gout(num_actions);
  for (const Transition* t : batch) {
    double y = effective_reward(*t, cfg, rnd);
    if (t->termination != Termination::Terminal) {
      const std::vector<double> qn = forward(agent.target, t->next_state);
      double best = qn[0];
      for (double v : qn)
        if (v > best) best = v;
      y += cfg.gamma * best;
    }
    const std::vector<double> q = forward(agent.qnet, t->state, cache);
    const double diff = q[t->action] - y;
    loss += diff * diff;
    for (int a = 0; a < num_actions; ++a) gout[a] = 0.0;
    gout[t->action] = 2.0 * diff / cfg.batch_size;
    backprop(agent.qnet, cache, gout, grad);
  }
  loss /= cfg.batch_size;
  apply_update(agent.qnet, grad, agent.opt);

  if (rnd) {
    std::vector<std::vector<double>> states;
    std::vector<int> actions;
    states.reserve(batch.size());
    actions.reserve(batch.size());
    for (const Transition* t : batch) {
      states.push_back(t->state);
      actions.push_back(t->action);
    }
    rnd->update(states, actions);
  }
  return loss;
}

std::vector<CurvePoint> run_dqn(DiscreteEnv& env, const DqnConfig& cfg,
                                std::uint64_t seed, int episodes) {
  Rng init_rng = Rng::for_stream(seed, RngStream::AgentInit);
  Rng env_rng = Rng::for_stream(seed, RngStream::Env);
  Rng action_rng = Rng::for_stream(seed, RngStream::ActionNoise);
  Rng batch_rng = Rng::for_stream(seed, RngStream::Data);

  DqnAgent agent = make_dqn_agent(env.obs_dim(), env.num_actions(), cfg, init_rng);
  std::optional<RndPair> rnd;
  if (cfg.rnd) rnd.emplace(env.obs_dim(), env.num_actions(), *cfg.rnd, init_rng);

  ReplayBuffer buffer(cfg.buffer_capacity);
  std::vector<CurvePoint> curve;
  long long steps = 0;
  long long train_steps = 0;
  for (int episode = 0; episode < episodes; ++episode) {
    const double progress = static_cast<double>(episode) / episodes;
    const double eps = epsilon_at(cfg.epsilon, progress);
    std::vector<double> obs = env.reset(env_rng.next_u64());
    bool success = false;
    double ret = 0.0;
    double loss_sum = 0.0;
    long loss_count = 0;
    while (!env.episode_over()) {
      int a;
      if (action_rng.uniform() < eps)
        a = action_rng.uniform_int(env.num_actions());
      else
        a = greedy_action(agent.qnet, obs, action_rng);
      Transition t = env.step(a);
      ret += t.reward;
      if (t.termination == Termination::Terminal) success = true;
      obs = t.next_state;
      buffer.push(std::move(t));
      ++steps;
      if (steps >= cfg.warmup_steps && steps % cfg.train_every == 0) {
        const std::optional<double> loss =
            dqn_train_step(agent, buffer, cfg, batch_rng, rnd ? &*rnd : nullptr);
        if (loss) {
          loss_sum += *loss;
          ++loss_count;
          ++train_steps;
          if (cfg.hard_sync_period > 0) {
            if (train_steps % cfg.hard_sync_period == 0) agent.target = agent.qnet;
          } else {
            soft_update(agent.target, agent.qnet, cfg.tau);
          }
        }
      }
    }
    curve.push_back({steps, episode + 1, "success", success ? 1.0 : 0.0});
    curve.push_back({steps, episode + 1, "return", ret});
    if (loss_count > 0)
      curve.push_back({steps, episode + 1, "loss", loss_sum / loss_count});
  }
  return curve;
}

}  // namespace shiftlab
