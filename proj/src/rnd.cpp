#include "shiftlab/rnd.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace shiftlab {

namespace {

MlpSpec rnd_net_spec(int input_dim, const RndConfig& cfg) {
  std::vector<int> widths;
  widths.push_back(input_dim);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(cfg.output_dim);
  return mlp_spec(std::move(widths), HiddenActivation::Relu, OutputActivation::Sigmoid);
}

}  // namespace

RndPair::RndPair(int state_dim, int num_actions, const RndConfig& cfg, Rng& rng)
    : cfg_(cfg), state_dim_(state_dim), num_actions_(num_actions) {
  if (cfg_.shift < 0.0) throw std::invalid_argument("rnd: shift I must be >= 0");
  const int input_dim =
      cfg_.mode == RndInputMode::State ? state_dim : state_dim + num_actions;
  const MlpSpec spec = rnd_net_spec(input_dim, cfg_);
  target_ = init_mlp(spec, rng);
  predictor_ = init_mlp(spec, rng);
  opt_ = adam(cfg_.lr);
}

std::vector<double> RndPair::make_input(const std::vector<double>& state,
                                        int action) const {
  if (cfg_.mode == RndInputMode::State) return state;
  if (action < 0 || action >= num_actions_)
    throw std::invalid_argument("rnd: state-action mode needs a valid action");
  std::vector<double> x = state;
  x.resize(state.size() + num_actions_, 0.0);
  x[state.size() + action] = 1.0;
  return x;
}

double RndPair::intrinsic_raw(const std::vector<double>& state, int action) const {
  const std::vector<double> x = make_input(state, action);
  const std::vector<double> yt = forward(target_, x);
  const std::vector<double> yp = forward(predictor_, x);
  double gap = 0.0;
  for (std::size_t i = 0; i < yt.size(); ++i) {
    const double d = yt[i] - yp[i];
    gap += d * d;
  }
  return std::min(gap, 1.0);
}

double RndPair::intrinsic_shifted(const std::vector<double>& state, int action) const {
  if (cfg_.shift < 1.0 && !warned_) {
    std::cerr << "rnd: shift I < 1 does not guarantee a non-positive intrinsic\n";
    warned_ = true;
  }
  return intrinsic_raw(state, action) - cfg_.shift;
}

double RndPair::contribution(const std::vector<double>& state, int action) const {
  if (cfg_.variant == RndVariant::Vanilla) return intrinsic_raw(state, action);
  return intrinsic_shifted(state, action);
}

double RndPair::update(const std::vector<std::vector<double>>& states,
                       const std::vector<int>& actions) {
  if (states.empty()) throw std::invalid_argument("rnd update: empty batch");
  if (cfg_.mode == RndInputMode::StateAction && actions.size() != states.size())
    throw std::invalid_argument("rnd update: actions must match states");
  Batch batch;
  batch.inputs.reserve(states.size());
  batch.targets.reserve(states.size());
  for (std::size_t n = 0; n < states.size(); ++n) {
    std::vector<double> x = make_input(
        states[n], cfg_.mode == RndInputMode::StateAction ? actions[n] : -1);
    batch.targets.push_back(forward(target_, x));
    batch.inputs.push_back(std::move(x));
  }
  GradResult res = mse_backward(predictor_, batch);
  apply_update(predictor_, res.grad, opt_);
  // report the summed-per-sample gap, matching the intrinsic definition
  return res.loss * cfg_.output_dim;
}

}  // namespace shiftlab
