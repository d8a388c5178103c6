#include "shiftlab/rrs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftlab {

namespace {

MlpSpec critic_spec(int obs_dim, int action_dim, const RrsConfig& cfg) {
  std::vector<int> widths;
  widths.push_back(obs_dim + action_dim);
  widths.insert(widths.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  widths.push_back(1);
  return mlp_spec(std::move(widths));
}

MlpSpec policy_spec(int obs_dim, int action_dim, const RrsConfig& cfg) {
  std::vector<int> widths;
  widths.push_back(obs_dim);
  widths.insert(widths.end(), cfg.policy_hidden.begin(), cfg.policy_hidden.end());
  widths.push_back(action_dim);
  return mlp_spec(std::move(widths), HiddenActivation::Relu,
                  OutputActivation::ScaledTanh, 1.0, cfg.action_bound);
}

std::vector<double> critic_input(const std::vector<double>& obs,
                                 const std::vector<double>& action) {
  std::vector<double> x = obs;
  x.insert(x.end(), action.begin(), action.end());
  return x;
}

}  // namespace

RrsEnsemble make_rrs_ensemble(int obs_dim, int action_dim, const RrsConfig& cfg,
                              Rng& rng) {
  if (cfg.shifts.empty()) throw std::invalid_argument("rrs: need at least one shift");
  RrsEnsemble ens;
  ens.cfg = cfg;
  const MlpSpec cspec = critic_spec(obs_dim, action_dim, cfg);
  for (std::size_t k = 0; k < cfg.shifts.size(); ++k) {
    if (cfg.identical_critic_init && k > 0)
      ens.critics.push_back(ens.critics.front());
    else
      ens.critics.push_back(init_mlp(cspec, rng));
    ens.critic_targets.push_back(ens.critics.back());
    ens.critic_opts.push_back(adam(cfg.critic_lr));
  }
  ens.policy = init_mlp(policy_spec(obs_dim, action_dim, cfg), rng);
  ens.policy_target = ens.policy;
  ens.policy_opt = adam(cfg.actor_lr);
  return ens;
}

int sample_active_q(RrsEnsemble& ens, Rng& rng) {
  ens.active_index = rng.uniform_int(ens.num_critics());
  return ens.active_index;
}

std::vector<double> policy_action(const MlpParams& policy,
                                  const std::vector<double>& obs) {
  return forward(policy, obs);
}

double critic_value(const MlpParams& critic, const std::vector<double>& obs,
                    const std::vector<double>& action) {
  return forward(critic, critic_input(obs, action))[0];
}

std::vector<double> rrs_critic_step(RrsEnsemble& ens,
                                    const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("rrs critic step: empty batch");
  const int K = ens.num_critics();
  const std::size_t N = batch.size();

  // target policy actions are shared across critics
  std::vector<std::vector<double>> next_inputs(N);
  for (std::size_t n = 0; n < N; ++n) {
    const Transition& t = *batch[n];
    next_inputs[n] = critic_input(t.next_state, policy_action(ens.policy_target, t.next_state));
  }

  std::vector<double> losses(K, 0.0);
  Batch critic_batch;
  critic_batch.inputs.resize(N);
  critic_batch.targets.assign(N, std::vector<double>(1, 0.0));
  for (std::size_t n = 0; n < N; ++n)
    critic_batch.inputs[n] = critic_input(batch[n]->state, batch[n]->action_vec);

  for (int k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const Transition& t = *batch[n];
      double y = t.reward + ens.cfg.shifts[k];
      if (t.termination != Termination::Terminal)
        y += ens.cfg.gamma * forward(ens.critic_targets[k], next_inputs[n])[0];
      critic_batch.targets[n][0] = y;
    }
    GradResult res = mse_backward(ens.critics[k], critic_batch);
    apply_update(ens.critics[k], res.grad, ens.critic_opts[k]);
    losses[k] = res.loss;
  }
  return losses;
}

void rrs_actor_step(RrsEnsemble& ens,
                    const std::vector<const std::vector<double>*>& states) {
  if (states.empty()) throw std::invalid_argument("rrs actor step: empty batch");
  const MlpParams& critic = ens.critics[ens.active_index];
  std::vector<double> policy_grad(ens.policy.values.size(), 0.0);
  std::vector<double> critic_grad_scratch(critic.values.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(states.size());
  ForwardCache pcache, ccache;
  for (const std::vector<double>* s : states) {
    const std::vector<double> a = forward(ens.policy, *s, pcache);
    forward(critic, critic_input(*s, a), ccache);
    // dQ/da via the critic's input gradient, then through the policy;
    // ascend by accumulating the negated gradient
    std::vector<double> dq_dx;
    backprop(critic, ccache, {1.0}, critic_grad_scratch, &dq_dx);
    std::vector<double> dq_da(dq_dx.end() - a.size(), dq_dx.end());
    for (double& g : dq_da) g *= -scale;
    backprop(ens.policy, pcache, dq_da, policy_grad);
  }
  apply_update(ens.policy, policy_grad, ens.policy_opt);
}

void rrs_soft_update(RrsEnsemble& ens) {
  for (int k = 0; k < ens.num_critics(); ++k)
    soft_update(ens.critic_targets[k], ens.critics[k], ens.cfg.tau);
  soft_update(ens.policy_target, ens.policy, ens.cfg.tau);
}

namespace {

double eval_rollout(PointMass& env, const RrsEnsemble& ens, std::uint64_t seed) {
  PointMass eval_env(env.spec());
  std::vector<double> obs = eval_env.reset(seed);
  double ret = 0.0;
  while (!eval_env.episode_over()) {
    const std::vector<double> a = policy_action(ens.policy, obs);
    const Transition t = eval_env.step({a[0], a[1]});
    ret += t.reward;
    obs = t.next_state;
  }
  return ret;
}

}  // namespace

std::vector<CurvePoint> run_rrs(PointMass& env, const RrsConfig& cfg,
                                std::uint64_t seed, int episodes) {
  Rng init_rng = Rng::for_stream(seed, RngStream::AgentInit);
  Rng env_rng = Rng::for_stream(seed, RngStream::Env);
  Rng noise_rng = Rng::for_stream(seed, RngStream::ActionNoise);
  Rng active_rng = Rng::for_stream(seed, RngStream::ActiveIndex);
  Rng batch_rng = Rng::for_stream(seed, RngStream::Data);

  RrsEnsemble ens = make_rrs_ensemble(env.obs_dim(), env.action_dim(), cfg, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity);
  std::vector<CurvePoint> curve;
  long long steps = 0;
  const double sigma = cfg.noise_sigma * cfg.action_bound;

  for (int episode = 0; episode < episodes; ++episode) {
    sample_active_q(ens, active_rng);
    std::vector<double> obs = env.reset(env_rng.next_u64());
    double ret = 0.0;
    while (!env.episode_over()) {
      std::vector<double> a = policy_action(ens.policy, obs);
      for (double& ai : a)
        ai = std::clamp(ai + sigma * noise_rng.normal(), -cfg.action_bound,
                        cfg.action_bound);
      Transition t = env.step({a[0], a[1]});
      ret += t.reward;
      obs = t.next_state;
      buffer.push(std::move(t));
      ++steps;
      if (steps >= cfg.warmup_steps &&
          buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        std::vector<const Transition*> batch(cfg.batch_size);
        for (int n = 0; n < cfg.batch_size; ++n) batch[n] = &buffer.sample(batch_rng);
        rrs_critic_step(ens, batch);
        std::vector<const std::vector<double>*> states(batch.size());
        for (std::size_t n = 0; n < batch.size(); ++n) states[n] = &batch[n]->state;
        rrs_actor_step(ens, states);
        rrs_soft_update(ens);
      }
    }
    curve.push_back({steps, episode + 1, "return", ret});
    curve.push_back({steps, episode + 1, "active_k",
                     static_cast<double>(ens.active_index)});
    if ((episode + 1) % cfg.eval_every == 0) {
      double sum = 0.0;
      for (int r = 0; r < cfg.eval_rollouts; ++r)
        sum += eval_rollout(env, ens, splitmix64(seed * 7919 + r));
      curve.push_back({steps, episode + 1, "eval_return", sum / cfg.eval_rollouts});
    }
  }
  return curve;
}

}  // namespace shiftlab
