#include "shiftlab/offline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace shiftlab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void append_vector(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt17(v[i]);
  }
  out += ']';
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double m = logits[0];
  for (double v : logits)
    if (v > m) m = v;
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

OfflineDataset generate_dataset(DiscreteEnv& env, const LoggingPolicy& policy,
                                const std::string& behavior_tag, std::size_t n,
                                std::uint64_t seed, double gamma) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n >= 1");
  OfflineDataset ds;
  ds.header.env = env.name();
  ds.header.behavior = behavior_tag;
  ds.header.gamma = gamma;
  ds.transitions.reserve(n);

  Rng env_rng = Rng::for_stream(seed, RngStream::Env);
  Rng policy_rng = Rng::for_stream(seed, RngStream::Data);
  std::vector<double> obs;
  bool need_reset = true;
  while (ds.transitions.size() < n) {
    if (need_reset) {
      obs = env.reset(env_rng.next_u64());
      need_reset = false;
    }
    const int a = policy(obs, policy_rng);
    Transition t = env.step(a);
    obs = t.next_state;
    need_reset = env.episode_over();
    ds.transitions.push_back(std::move(t));
  }
  ds.header.count = ds.transitions.size();
  return ds;
}

void save_dataset(const OfflineDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  std::string line = "{\"version\":" + std::to_string(ds.header.version) +
                     ",\"env\":\"" + ds.header.env + "\",\"behavior\":\"" +
                     ds.header.behavior + "\",\"count\":" +
                     std::to_string(ds.header.count) +
                     ",\"gamma\":" + fmt17(ds.header.gamma) + "}\n";
  out << line;
  for (const Transition& t : ds.transitions) {
    line = "{\"s\":";
    append_vector(line, t.state);
    line += ",\"a\":" + std::to_string(t.action) + ",\"r\":" + fmt17(t.reward) +
            ",\"s2\":";
    append_vector(line, t.next_state);
    line += ",\"term\":\"";
    line += termination_code(t.termination);
    line += "\"}\n";
    out << line;
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_dataset: empty file " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  OfflineDataset ds;
  ds.header.version = header.at("version").get<int>();
  if (ds.header.version != 1)
    throw std::runtime_error("load_dataset: unsupported version");
  ds.header.env = header.at("env").get<std::string>();
  ds.header.behavior = header.at("behavior").get<std::string>();
  ds.header.count = header.at("count").get<std::size_t>();
  ds.header.gamma = header.at("gamma").get<double>();
  ds.transitions.reserve(ds.header.count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line);
    Transition t;
    t.state = row.at("s").get<std::vector<double>>();
    t.action = row.at("a").get<int>();
    t.reward = row.at("r").get<double>();
    t.next_state = row.at("s2").get<std::vector<double>>();
    const std::string term = row.at("term").get<std::string>();
    if (term.size() != 1) throw std::runtime_error("load_dataset: bad term code");
    t.termination = termination_from_code(term[0]);
    ds.transitions.push_back(std::move(t));
  }
  if (ds.transitions.size() != ds.header.count)
    throw std::runtime_error("load_dataset: transition count mismatch in " + path);
  return ds;
}

BehaviorModel train_behavior_model(const OfflineDataset& ds,
                                   const BehaviorTrainConfig& cfg, double tau_bcq,
                                   std::uint64_t seed) {
  if (ds.transitions.empty())
    throw std::invalid_argument("train_behavior_model: empty dataset");
  if (!(tau_bcq >= 0.0 && tau_bcq <= 1.0))
    throw std::invalid_argument("train_behavior_model: tau_bcq in [0, 1]");
  int num_actions = 0;
  for (const Transition& t : ds.transitions)
    num_actions = std::max(num_actions, t.action + 1);
  const int obs_dim = static_cast<int>(ds.transitions.front().state.size());

  std::vector<int> widths;
  widths.push_back(obs_dim);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(num_actions);

  Rng init_rng = Rng::for_stream(seed, RngStream::AgentInit);
  Rng batch_rng = Rng::for_stream(seed, RngStream::Data);
  BehaviorModel model;
  model.tau_bcq = tau_bcq;
  model.net = init_mlp(mlp_spec(std::move(widths)), init_rng);
  OptimizerState opt = adam(cfg.lr);

  const long steps_per_epoch =
      std::max<long>(1, static_cast<long>(ds.transitions.size()) / cfg.batch_size);
  std::vector<double> grad(model.net.values.size());
  ForwardCache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (long s = 0; s < steps_per_epoch; ++s) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (int n = 0; n < cfg.batch_size; ++n) {
        const Transition& t = ds.transitions[batch_rng.uniform_int(
            static_cast<int>(ds.transitions.size()))];
        const std::vector<double> logits = forward(model.net, t.state, cache);
        std::vector<double> gout = softmax(logits);
        gout[t.action] -= 1.0;
        for (double& g : gout) g /= cfg.batch_size;
        backprop(model.net, cache, gout, grad);
      }
      apply_update(model.net, grad, opt);
    }
  }
  return model;
}

std::vector<double> behavior_probs(const BehaviorModel& model,
                                   const std::vector<double>& obs) {
  return softmax(forward(model.net, obs));
}

std::vector<int> allowed_actions(const BehaviorModel& model,
                                 const std::vector<double>& obs) {
  const std::vector<double> p = behavior_probs(model, obs);
  double pmax = p[0];
  for (double v : p)
    if (v > pmax) pmax = v;
  std::vector<int> allowed;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (p[a] >= model.tau_bcq * pmax) allowed.push_back(static_cast<int>(a));
  return allowed;
}

namespace {

// max Q over the allowed set; falls back to the unconstrained max when the
// set comes back empty
double constrained_max(const MlpParams& q, const BehaviorModel& behavior,
                       const std::vector<double>& obs) {
  const std::vector<double> values = forward(q, obs);
  const std::vector<int> allowed = allowed_actions(behavior, obs);
  if (allowed.empty()) {
    std::cerr << "offline: empty candidate action set, using unconstrained argmax\n";
    double best = values[0];
    for (double v : values)
      if (v > best) best = v;
    return best;
  }
  double best = values[allowed[0]];
  for (int a : allowed) best = std::max(best, values[a]);
  return best;
}

}  // namespace

int offline_policy_action(const MlpParams& q, const BehaviorModel& behavior,
                          const std::vector<double>& obs, Rng& rng) {
  const std::vector<double> values = forward(q, obs);
  std::vector<int> allowed = allowed_actions(behavior, obs);
  if (allowed.empty()) {
    std::cerr << "offline: empty candidate action set, using unconstrained argmax\n";
    allowed.resize(values.size());
    for (std::size_t a = 0; a < values.size(); ++a) allowed[a] = static_cast<int>(a);
  }
  double best = values[allowed[0]];
  for (int a : allowed) best = std::max(best, values[a]);
  std::vector<int> ties;
  for (int a : allowed)
    if (values[a] == best) ties.push_back(a);
  return ties[rng.uniform_int(static_cast<int>(ties.size()))];
}

OfflineResult train_offline(const OfflineDataset& ds, const ShiftSpec& shift,
                            const BehaviorModel& behavior, const OfflineConfig& cfg,
                            std::uint64_t seed) {
  if (ds.transitions.empty()) throw std::invalid_argument("train_offline: empty dataset");
  int num_actions = 0;
  for (const Transition& t : ds.transitions)
    num_actions = std::max(num_actions, t.action + 1);
  const int obs_dim = static_cast<int>(ds.transitions.front().state.size());

  std::vector<int> widths;
  widths.push_back(obs_dim);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(num_actions);

  Rng init_rng = Rng::for_stream(seed, RngStream::AgentInit);
  Rng batch_rng = Rng::for_stream(seed, RngStream::Data);
  OfflineResult result;
  result.q = init_mlp(mlp_spec(std::move(widths)), init_rng);
  MlpParams target = result.q;
  OptimizerState opt = adam(cfg.lr);

  const long steps_per_epoch =
      std::max<long>(1, static_cast<long>(ds.transitions.size()) / cfg.batch_size);
  std::vector<double> grad(result.q.values.size());
  std::vector<double> gout(num_actions);
  ForwardCache cache;
  long long train_steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (long s = 0; s < steps_per_epoch; ++s) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (int n = 0; n < cfg.batch_size; ++n) {
        const Transition& t = ds.transitions[batch_rng.uniform_int(
            static_cast<int>(ds.transitions.size()))];
        double y = t.reward + shift.b;
        if (t.termination != Termination::Terminal)
          y += cfg.gamma * constrained_max(target, behavior, t.next_state);
        const std::vector<double> q = forward(result.q, t.state, cache);
        const double diff = q[t.action] - y;
        loss += diff * diff;
        std::fill(gout.begin(), gout.end(), 0.0);
        gout[t.action] = 2.0 * diff / cfg.batch_size;
        backprop(result.q, cache, gout, grad);
      }
      apply_update(result.q, grad, opt);
      loss_sum += loss / cfg.batch_size;
      ++train_steps;
      if (train_steps % cfg.target_sync_steps == 0) target = result.q;
    }
    result.curve.push_back(
        {train_steps, epoch + 1, "td_loss", loss_sum / steps_per_epoch});
  }
  return result;
}

GapReport evaluate_gap(DiscreteEnv& env, const MlpParams& q,
                       const BehaviorModel& behavior, const OfflineDataset& ds,
                       const ShiftSpec& shift, double gamma, int n_rollouts,
                       std::uint64_t seed) {
  if (n_rollouts < 1) throw std::invalid_argument("evaluate_gap: n_rollouts >= 1");
  Rng rng = Rng::for_stream(seed, RngStream::Data);
  double estimate_sum = 0.0;
  double mc_sum = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    const Transition& start = ds.transitions[rng.uniform_int(
        static_cast<int>(ds.transitions.size()))];
    std::vector<double> obs = env.reset_to(start.state);
    const int first = offline_policy_action(q, behavior, obs, rng);
    estimate_sum += debias_lower(forward(q, obs)[first], shift, gamma);
    double mc = 0.0;
    double discount = 1.0;
    bool first_step = true;
    while (!env.episode_over()) {
      const int a = first_step ? first : offline_policy_action(q, behavior, obs, rng);
      first_step = false;
      const Transition t = env.step(a);
      mc += discount * t.reward;
      discount *= gamma;
      obs = t.next_state;
    }
    mc_sum += mc;
  }
  GapReport report;
  report.estimate = estimate_sum / n_rollouts;
  report.mc_return = mc_sum / n_rollouts;
  report.gap = report.estimate - report.mc_return;
  return report;
}

double evaluate_policy_return(DiscreteEnv& env, const MlpParams& q,
                              const BehaviorModel& behavior, double gamma,
                              int n_rollouts, std::uint64_t seed) {
  if (n_rollouts < 1)
    throw std::invalid_argument("evaluate_policy_return: n_rollouts >= 1");
  Rng rng = Rng::for_stream(seed, RngStream::Data);
  double sum = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    std::vector<double> obs = env.reset(rng.next_u64());
    double ret = 0.0;
    double discount = 1.0;
    while (!env.episode_over()) {
      const int a = offline_policy_action(q, behavior, obs, rng);
      const Transition t = env.step(a);
      ret += discount * t.reward;
      discount *= gamma;
      obs = t.next_state;
    }
    sum += ret;
  }
  return sum / n_rollouts;
}

}  // namespace shiftlab
