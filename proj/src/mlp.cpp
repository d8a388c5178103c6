#include "shiftlab/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace shiftlab {

namespace {

void check_spec(const MlpSpec& spec) {
  if (spec.widths.size() < 3)
    throw std::invalid_argument("mlp: need input, at least one hidden, and output width");
  for (int w : spec.widths)
    if (w < 1) throw std::invalid_argument("mlp: widths must be >= 1");
  if (!(spec.init_scale > 0.0))
    throw std::invalid_argument("mlp: init scale must be positive");
}

double activate_hidden(HiddenActivation h, double x) {
  switch (h) {
    case HiddenActivation::Relu: return x > 0.0 ? x : 0.0;
    case HiddenActivation::Tanh: return std::tanh(x);
  }
  return x;
}

double activate_hidden_grad(HiddenActivation h, double pre, double post) {
  switch (h) {
    case HiddenActivation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case HiddenActivation::Tanh: return 1.0 - post * post;
  }
  return 1.0;
}

std::string hidden_name(HiddenActivation h) {
  return h == HiddenActivation::Relu ? "relu" : "tanh";
}

std::string output_name(OutputActivation o) {
  switch (o) {
    case OutputActivation::Linear: return "linear";
    case OutputActivation::Sigmoid: return "sigmoid";
    case OutputActivation::ScaledTanh: return "scaled_tanh";
  }
  return "linear";
}

HiddenActivation hidden_from_name(const std::string& s) {
  if (s == "relu") return HiddenActivation::Relu;
  if (s == "tanh") return HiddenActivation::Tanh;
  throw std::invalid_argument("mlp: unknown hidden activation " + s);
}

OutputActivation output_from_name(const std::string& s) {
  if (s == "linear") return OutputActivation::Linear;
  if (s == "sigmoid") return OutputActivation::Sigmoid;
  if (s == "scaled_tanh") return OutputActivation::ScaledTanh;
  throw std::invalid_argument("mlp: unknown output activation " + s);
}

}  // namespace

MlpSpec mlp_spec(std::vector<int> widths, HiddenActivation hidden,
                 OutputActivation output, double init_scale, double output_scale) {
  MlpSpec spec;
  spec.widths = std::move(widths);
  spec.hidden = hidden;
  spec.output = output;
  spec.init_scale = init_scale;
  spec.output_scale = output_scale;
  check_spec(spec);
  return spec;
}

std::size_t param_count(const MlpSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l)
    n += static_cast<std::size_t>(spec.widths[l]) * spec.widths[l + 1] + spec.widths[l + 1];
  return n;
}

MlpParams init_mlp(const MlpSpec& spec, Rng& rng) {
  check_spec(spec);
  MlpParams p;
  p.spec = spec;
  p.values.resize(param_count(spec));
  std::size_t idx = 0;
  const std::size_t layers = spec.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int fan_in = spec.widths[l];
    const int fan_out = spec.widths[l + 1];
    double bound = spec.init_scale / std::sqrt(static_cast<double>(fan_in));
    if (l + 1 == layers) bound *= 1e-2;  // near-zero head
    for (int i = 0; i < fan_out * fan_in + fan_out; ++i)
      p.values[idx++] = rng.uniform(-bound, bound);
  }
  return p;
}

std::vector<double> forward(const MlpParams& p, const std::vector<double>& input) {
  ForwardCache cache;
  return forward(p, input, cache);
}

std::vector<double> forward(const MlpParams& p, const std::vector<double>& input,
                            ForwardCache& cache) {
  const MlpSpec& spec = p.spec;
  if (static_cast<int>(input.size()) != spec.widths.front())
    throw std::invalid_argument("mlp forward: input width mismatch");
  const std::size_t layers = spec.widths.size() - 1;
  cache.inputs.assign(layers, {});
  std::vector<double> x = input;
  std::size_t idx = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in_w = spec.widths[l];
    const int out_w = spec.widths[l + 1];
    cache.inputs[l] = x;
    std::vector<double> z(out_w);
    const double* w = p.values.data() + idx;
    const double* b = w + static_cast<std::size_t>(out_w) * in_w;
    for (int o = 0; o < out_w; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) acc += row[i] * x[i];
      z[o] = acc;
    }
    idx += static_cast<std::size_t>(out_w) * in_w + out_w;
    if (l + 1 == layers) {
      cache.pre_output = z;
      for (int o = 0; o < out_w; ++o) {
        switch (spec.output) {
          case OutputActivation::Linear: break;
          case OutputActivation::Sigmoid: z[o] = 1.0 / (1.0 + std::exp(-z[o])); break;
          case OutputActivation::ScaledTanh: z[o] = spec.output_scale * std::tanh(z[o]); break;
        }
      }
    } else {
      for (int o = 0; o < out_w; ++o) z[o] = activate_hidden(spec.hidden, z[o]);
    }
    x = std::move(z);
  }
  return x;
}

void backprop(const MlpParams& p, const ForwardCache& cache,
              const std::vector<double>& output_grad,
              std::vector<double>& param_grad, std::vector<double>* input_grad) {
  const MlpSpec& spec = p.spec;
  const std::size_t layers = spec.widths.size() - 1;
  if (param_grad.size() != p.values.size())
    throw std::invalid_argument("mlp backprop: param_grad size mismatch");

  // offsets of each layer within the flat vector
  std::vector<std::size_t> offsets(layers);
  std::size_t idx = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = idx;
    idx += static_cast<std::size_t>(spec.widths[l]) * spec.widths[l + 1] + spec.widths[l + 1];
  }

  // delta on the final affine output
  std::vector<double> delta = output_grad;
  for (std::size_t o = 0; o < delta.size(); ++o) {
    switch (spec.output) {
      case OutputActivation::Linear: break;
      case OutputActivation::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-cache.pre_output[o]));
        delta[o] *= s * (1.0 - s);
        break;
      }
      case OutputActivation::ScaledTanh: {
        const double t = std::tanh(cache.pre_output[o]);
        delta[o] *= spec.output_scale * (1.0 - t * t);
        break;
      }
    }
  }

  for (std::size_t li = layers; li-- > 0;) {
    const int in_w = spec.widths[li];
    const int out_w = spec.widths[li + 1];
    const std::vector<double>& x = cache.inputs[li];
    const double* w = p.values.data() + offsets[li];
    double* gw = param_grad.data() + offsets[li];
    double* gb = gw + static_cast<std::size_t>(out_w) * in_w;
    std::vector<double> prev(in_w, 0.0);
    for (int o = 0; o < out_w; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* grow = gw + static_cast<std::size_t>(o) * in_w;
      const double* wrow = w + static_cast<std::size_t>(o) * in_w;
      for (int i = 0; i < in_w; ++i) {
        grow[i] += d * x[i];
        prev[i] += d * wrow[i];
      }
    }
    if (li == 0) {
      if (input_grad) *input_grad = std::move(prev);
      break;
    }
    // through the hidden activation of layer li-1; its post-activation is x
    for (int i = 0; i < in_w; ++i) {
      const double post = x[i];
      // for relu, post > 0 iff pre > 0, so post is enough for both kinds
      prev[i] *= activate_hidden_grad(spec.hidden, post, post);
    }
    delta = std::move(prev);
  }
}

GradResult mse_backward(const MlpParams& p, const Batch& batch) {
  if (batch.inputs.empty())
    throw std::invalid_argument("mse_backward: empty batch");
  if (batch.inputs.size() != batch.targets.size())
    throw std::invalid_argument("mse_backward: inputs/targets size mismatch");
  GradResult res;
  res.grad.assign(p.values.size(), 0.0);
  const int out_w = p.spec.widths.back();
  const double denom = static_cast<double>(batch.inputs.size()) * out_w;
  double loss = 0.0;
  ForwardCache cache;
  std::vector<double> gout(out_w);
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    const std::vector<double> y = forward(p, batch.inputs[n], cache);
    const std::vector<double>& t = batch.targets[n];
    if (t.size() != static_cast<std::size_t>(out_w))
      throw std::invalid_argument("mse_backward: target width mismatch");
    for (int o = 0; o < out_w; ++o) {
      const double diff = y[o] - t[o];
      loss += diff * diff;
      gout[o] = 2.0 * diff / denom;
    }
    backprop(p, cache, gout, res.grad);
  }
  res.loss = loss / denom;
  return res;
}

double mse_loss(const MlpParams& p, const Batch& batch) {
  const int out_w = p.spec.widths.back();
  double loss = 0.0;
  for (std::size_t n = 0; n < batch.inputs.size(); ++n) {
    const std::vector<double> y = forward(p, batch.inputs[n]);
    for (int o = 0; o < out_w; ++o) {
      const double diff = y[o] - batch.targets[n][o];
      loss += diff * diff;
    }
  }
  return loss / (static_cast<double>(batch.inputs.size()) * out_w);
}

OptimizerState sgd(double lr) {
  OptimizerState s;
  s.kind = OptimizerState::Kind::Sgd;
  s.lr = lr;
  return s;
}

OptimizerState adam(double lr) {
  OptimizerState s;
  s.kind = OptimizerState::Kind::Adam;
  s.lr = lr;
  return s;
}

void apply_update(MlpParams& params, const std::vector<double>& grad,
                  OptimizerState& opt) {
  if (grad.size() != params.values.size())
    throw std::invalid_argument("apply_update: gradient size mismatch");
  if (opt.kind == OptimizerState::Kind::Sgd) {
    ++opt.step;
    for (std::size_t i = 0; i < grad.size(); ++i)
      params.values[i] -= opt.lr * grad[i];
    return;
  }
  if (opt.m.size() != grad.size()) {
    opt.m.assign(grad.size(), 0.0);
    opt.v.assign(grad.size(), 0.0);
  }
  ++opt.step;
  const double b1t = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double b2t = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grad[i];
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
    const double mhat = opt.m[i] / b1t;
    const double vhat = opt.v[i] / b2t;
    params.values[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

void soft_update(MlpParams& target, const MlpParams& source, double tau) {
  if (target.values.size() != source.values.size())
    throw std::invalid_argument("soft_update: shape mismatch");
  for (std::size_t i = 0; i < target.values.size(); ++i)
    target.values[i] = tau * source.values[i] + (1.0 - tau) * target.values[i];
}

void save_params(const MlpParams& p, const std::string& path) {
  nlohmann::json header;
  header["widths"] = p.spec.widths;
  header["hidden"] = hidden_name(p.spec.hidden);
  header["output"] = output_name(p.spec.output);
  header["init_scale"] = p.spec.init_scale;
  header["output_scale"] = p.spec.output_scale;
  header["count"] = p.values.size();
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_params: cannot open " + path);
  out.write("MLP1", 4);
  const std::uint64_t hlen = htext.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((hlen >> (8 * i)) & 0xff);
  out.write(lenbuf, 8);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  static_assert(sizeof(double) == 8);
  for (double v : p.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, 8);
  }
  if (!out) throw std::runtime_error("save_params: write failed for " + path);
}

MlpParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_params: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MLP1", 4) != 0)
    throw std::runtime_error("load_params: bad magic in " + path);
  char lenbuf[8];
  in.read(lenbuf, 8);
  std::uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i)
    hlen |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  const nlohmann::json header = nlohmann::json::parse(htext);

  MlpParams p;
  p.spec.widths = header.at("widths").get<std::vector<int>>();
  p.spec.hidden = hidden_from_name(header.at("hidden").get<std::string>());
  p.spec.output = output_from_name(header.at("output").get<std::string>());
  p.spec.init_scale = header.at("init_scale").get<double>();
  p.spec.output_scale = header.at("output_scale").get<double>();
  const std::size_t count = header.at("count").get<std::size_t>();
  if (count != param_count(p.spec))
    throw std::runtime_error("load_params: count does not match layout");
  p.values.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw std::runtime_error("load_params: truncated blob in " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    std::memcpy(&p.values[n], &bits, 8);
  }
  return p;
}

}  // namespace shiftlab
