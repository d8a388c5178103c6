#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shiftlab/rng.hpp"

namespace shiftlab {

enum class HiddenActivation { Relu, Tanh };
enum class OutputActivation { Linear, Sigmoid, ScaledTanh };

struct MlpSpec {
  std::vector<int> widths;  // input, hidden..., output; at least one hidden
  HiddenActivation hidden = HiddenActivation::Relu;
  OutputActivation output = OutputActivation::Linear;
  double init_scale = 1.0;
  double output_scale = 1.0;  // bound for ScaledTanh heads
};

MlpSpec mlp_spec(std::vector<int> widths,
                 HiddenActivation hidden = HiddenActivation::Relu,
                 OutputActivation output = OutputActivation::Linear,
                 double init_scale = 1.0, double output_scale = 1.0);

std::size_t param_count(const MlpSpec& spec);

// Flat parameter vector; per layer the row-major weight matrix [out][in]
// followed by the bias vector.
struct MlpParams {
  MlpSpec spec;
  std::vector<double> values;
};

// Fan-in-scaled symmetric uniform init. The final layer is additionally
// scaled by 1e-2 so a fresh network outputs values near zero.
MlpParams init_mlp(const MlpSpec& spec, Rng& rng);

struct ForwardCache {
  std::vector<std::vector<double>> inputs;    // input of each affine layer
  std::vector<double> pre_output;             // affine output of final layer
};

std::vector<double> forward(const MlpParams& p, const std::vector<double>& input);
std::vector<double> forward(const MlpParams& p, const std::vector<double>& input,
                            ForwardCache& cache);

// Backpropagates dL/dy through a cached forward pass, accumulating into
// param_grad (must be param_count-sized); optionally also yields dL/dx.
void backprop(const MlpParams& p, const ForwardCache& cache,
              const std::vector<double>& output_grad,
              std::vector<double>& param_grad,
              std::vector<double>* input_grad = nullptr);

struct Batch {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
};

struct GradResult {
  std::vector<double> grad;
  double loss = 0.0;
};

// Mean squared error over batch and output dims, with its exact gradient.
GradResult mse_backward(const MlpParams& p, const Batch& batch);

double mse_loss(const MlpParams& p, const Batch& batch);

struct OptimizerState {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

OptimizerState sgd(double lr);
OptimizerState adam(double lr);

void apply_update(MlpParams& params, const std::vector<double>& grad,
                  OptimizerState& opt);

// theta_target <- tau * theta + (1 - tau) * theta_target
void soft_update(MlpParams& target, const MlpParams& source, double tau);

// Checkpoint format: "MLP1" magic, little-endian u64 header length, JSON
// layout header, raw little-endian float64 parameter blob.
void save_params(const MlpParams& p, const std::string& path);
MlpParams load_params(const std::string& path);

}  // namespace shiftlab
