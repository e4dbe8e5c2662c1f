#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "acnmp/rng.hpp"

namespace acnmp {

enum class Activation { identity, relu, softplus };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::softplus: return "softplus";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "softplus") return Activation::softplus;
  throw std::invalid_argument("unknown activation: " + name);
}

/// One fully connected layer: output = activation(W * input + b).
struct LayerSpec {
  int input_width = 0;
  int output_width = 0;
  Activation activation = Activation::identity;

  bool operator==(const LayerSpec&) const = default;
};

/// An MLP is an ordered chain of layers; layer k's output feeds layer k+1.
using MlpSpec = std::vector<LayerSpec>;

/// Flat parameter storage. Layout: per layer, the weight matrix in row-major
/// order (output_width x input_width) followed by the bias vector.
using ParameterVector = std::vector<double>;
using GradientVector = std::vector<double>;

inline std::size_t layer_param_count(const LayerSpec& l) {
  return static_cast<std::size_t>(l.input_width) * l.output_width + l.output_width;
}

inline std::size_t param_count(const MlpSpec& spec) {
  std::size_t n = 0;
  for (const LayerSpec& l : spec) n += layer_param_count(l);
  return n;
}

inline void validate_spec(const MlpSpec& spec) {
  if (spec.empty()) throw std::invalid_argument("mlp spec: no layers");
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (spec[k].input_width < 1 || spec[k].output_width < 1)
      throw std::invalid_argument("mlp spec: widths must be >= 1");
    if (k > 0 && spec[k].input_width != spec[k - 1].output_width)
      throw std::invalid_argument("mlp spec: layer widths do not chain at layer " +
                                  std::to_string(k));
  }
}

/// Builds the standard chain used throughout: relu on hidden layers,
/// identity on the final layer.
inline MlpSpec mlp_chain(int input_width, const std::vector<int>& widths) {
  if (widths.empty()) throw std::invalid_argument("mlp_chain: empty width list");
  MlpSpec spec;
  int in = input_width;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    const bool last = (k + 1 == widths.size());
    spec.push_back({in, widths[k], last ? Activation::identity : Activation::relu});
    in = widths[k];
  }
  validate_spec(spec);
  return spec;
}

/// Overflow-safe ln(1 + e^x). Strictly positive on all finite inputs.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::softplus: return softplus(x);
  }
  return x;
}

// Derivative with respect to the pre-activation value.
inline double activation_grad(Activation a, double pre) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::softplus: return sigmoid(pre);
  }
  return 1.0;
}

/// Recorded intermediates of one forward pass, consumed by mlp_backward.
struct MlpTape {
  std::vector<std::vector<double>> inputs;  // inputs[l]: input fed to layer l
  std::vector<std::vector<double>> pre;     // pre[l]: pre-activation of layer l
  bool recorded = false;

  void clear() {
    inputs.clear();
    pre.clear();
    recorded = false;
  }
};

/// Deterministic forward pass. Records intermediates when tape is non-null.
inline std::vector<double> mlp_forward(const MlpSpec& spec, const ParameterVector& params,
                                       std::vector<double> input, MlpTape* tape = nullptr) {
  validate_spec(spec);
  if (input.size() != static_cast<std::size_t>(spec.front().input_width))
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.size()) +
                                ", expected " + std::to_string(spec.front().input_width));
  if (params.size() != param_count(spec))
    throw std::invalid_argument("mlp_forward: parameter count mismatch");
  for (double v : input)
    if (!std::isfinite(v)) throw std::domain_error("mlp_forward: non-finite input");

  if (tape) tape->clear();
  std::vector<double> cur = std::move(input);
  std::size_t off = 0;
  for (const LayerSpec& layer : spec) {
    const int in = layer.input_width;
    const int out = layer.output_width;
    const double* w = params.data() + off;
    const double* b = w + static_cast<std::size_t>(in) * out;

    const std::vector<double>* src = &cur;
    if (tape) {
      tape->inputs.push_back(std::move(cur));
      src = &tape->inputs.back();
    }
    std::vector<double> pre(out);
    for (int i = 0; i < out; ++i) {
      const double* row = w + static_cast<std::size_t>(i) * in;
      double s = b[i];
      for (int j = 0; j < in; ++j) s += row[j] * (*src)[j];
      pre[i] = s;
    }
    std::vector<double> nxt(out);
    for (int i = 0; i < out; ++i) nxt[i] = apply_activation(layer.activation, pre[i]);
    if (tape) tape->pre.push_back(std::move(pre));
    cur = std::move(nxt);
    off += layer_param_count(layer);
  }
  if (tape) tape->recorded = true;
  return cur;
}

/// Reverse-mode sweep over a recorded forward pass. Accumulates parameter
/// gradients into param_grad (resized and zeroed if empty) and returns the
/// gradient with respect to the network input.
inline std::vector<double> mlp_backward(const MlpSpec& spec, const ParameterVector& params,
                                        const MlpTape& tape,
                                        const std::vector<double>& output_grad,
                                        GradientVector& param_grad) {
  validate_spec(spec);
  if (!tape.recorded || tape.inputs.size() != spec.size() || tape.pre.size() != spec.size())
    throw std::logic_error("mlp_backward: no recorded forward pass for this spec");
  if (output_grad.size() != static_cast<std::size_t>(spec.back().output_width))
    throw std::invalid_argument("mlp_backward: output gradient width mismatch");
  const std::size_t n = param_count(spec);
  if (params.size() != n) throw std::invalid_argument("mlp_backward: parameter count mismatch");
  if (param_grad.empty()) param_grad.assign(n, 0.0);
  if (param_grad.size() != n)
    throw std::invalid_argument("mlp_backward: gradient accumulator size mismatch");

  std::vector<std::size_t> offsets(spec.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    offsets[l] = off;
    off += layer_param_count(spec[l]);
  }

  std::vector<double> up = output_grad;
  for (int l = static_cast<int>(spec.size()) - 1; l >= 0; --l) {
    const LayerSpec& layer = spec[l];
    const int in = layer.input_width;
    const int out = layer.output_width;
    const double* w = params.data() + offsets[l];
    double* gw = param_grad.data() + offsets[l];
    double* gb = gw + static_cast<std::size_t>(in) * out;
    const std::vector<double>& x = tape.inputs[l];
    const std::vector<double>& pre = tape.pre[l];

    std::vector<double> down(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double d = up[i] * activation_grad(layer.activation, pre[i]);
      if (d == 0.0) continue;
      gb[i] += d;
      const double* wrow = w + static_cast<std::size_t>(i) * in;
      double* grow = gw + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) {
        grow[j] += d * x[j];
        down[j] += wrow[j] * d;
      }
    }
    up = std::move(down);
  }
  return up;
}

/// Fan-in scaled uniform initialization: each layer's weights and biases are
/// drawn from U(-sqrt(1/input_width), +sqrt(1/input_width)).
inline ParameterVector init_params(const MlpSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  ParameterVector params;
  params.reserve(param_count(spec));
  Rng rng = make_rng(seed);
  for (const LayerSpec& layer : spec) {
    const double bound = std::sqrt(1.0 / layer.input_width);
    const std::size_t n = layer_param_count(layer);
    for (std::size_t k = 0; k < n; ++k) params.push_back(uniform(rng, -bound, bound));
  }
  return params;
}

}  // namespace acnmp
