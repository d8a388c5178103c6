#pragma once

#include <vector>

#include "shiftlab/mlp.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab {

enum class RndInputMode { State, StateAction };
enum class RndVariant { Vanilla, Shifted };

struct RndConfig {
  std::vector<int> hidden{512, 512, 512};
  int output_dim = 32;
  RndInputMode mode = RndInputMode::State;
  RndVariant variant = RndVariant::Shifted;
  double shift = 1.0;  // the constant I, >= 0; >= 1 keeps r_int - I <= 0
  double lr = 1e-4;
};

// Frozen random target network plus a trainable predictor distilling it.
// The raw intrinsic signal is the squared output gap, capped at 1.
class RndPair {
 public:
  RndPair(int state_dim, int num_actions, const RndConfig& cfg, Rng& rng);

  // min(||target(x) - predictor(x)||^2, 1), in [0, 1]
  double intrinsic_raw(const std::vector<double>& state, int action = -1) const;

  // intrinsic_raw - I, in [-I, 1-I]; warns once when I < 1 since
  // non-positivity is then not guaranteed
  double intrinsic_shifted(const std::vector<double>& state, int action = -1) const;

  // the additive training-time reward contribution for the configured
  // variant: raw for vanilla, raw - I for shifted
  double contribution(const std::vector<double>& state, int action = -1) const;

  // one Adam step on the predictor toward the frozen target; returns the
  // mean squared output gap over the batch
  double update(const std::vector<std::vector<double>>& states,
                const std::vector<int>& actions = {});

  const MlpParams& target_params() const { return target_; }
  const MlpParams& predictor_params() const { return predictor_; }
  const RndConfig& config() const { return cfg_; }

 private:
  std::vector<double> make_input(const std::vector<double>& state, int action) const;

  RndConfig cfg_;
  int state_dim_ = 0;
  int num_actions_ = 0;
  MlpParams target_;
  MlpParams predictor_;
  OptimizerState opt_;
  mutable bool warned_ = false;
};

}  // namespace shiftlab
