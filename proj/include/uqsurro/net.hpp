#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/matrix.hpp"
#include "uqsurro/rng.hpp"

namespace uqsurro {

enum class Activation { relu, tanh, sigmoid, linear };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::linear: return "linear";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "linear") return Activation::linear;
    throw ConfigError("unknown activation '" + s + "'");
}

struct LayerSpec {
    std::size_t width = 0;
    Activation activation = Activation::linear;
};

// Dense feed-forward network. Weight matrix l has shape
// (fan_in x fan_out) so a row-vector input propagates as x * W + b.
struct Mlp {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> layers;          // hidden layers then output layer
    std::vector<Matrix> weights;            // one per layer
    std::vector<std::vector<double>> biases;

    std::size_t depth() const { return layers.size(); }
    std::size_t hidden_count() const { return layers.empty() ? 0 : layers.size() - 1; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().width; }

    std::size_t fan_in(std::size_t l) const {
        return l == 0 ? input_dim : layers[l - 1].width;
    }
};

// How masked hidden activations are rescaled during a dropout pass.
// Inverted keeps the expected activation unchanged (divide kept units by
// 1-p_d). SqrtWidth multiplies hidden layer l by sqrt(1/K_l) instead; it is
// provided as an alternate mode for fidelity experiments.
enum class DropoutScaling { inverted, sqrt_width };

// Per-hidden-layer binary keep vectors. The output layer is never masked.
struct DropoutMask {
    std::vector<std::vector<double>> keep;  // entries 0 or 1, one vector per hidden layer
    double p_d = 0.0;
    DropoutScaling scaling = DropoutScaling::inverted;

    double scale_for(const Mlp& mlp, std::size_t hidden_layer) const {
        if (scaling == DropoutScaling::inverted) return 1.0 / (1.0 - p_d);
        return std::sqrt(1.0 / static_cast<double>(mlp.layers[hidden_layer].width));
    }
};

inline void validate_architecture(std::size_t input_dim, const std::vector<LayerSpec>& layers) {
    if (input_dim < 1) throw ConfigError("invalid architecture: input_dim must be >= 1");
    if (layers.empty()) throw ConfigError("invalid architecture: layer list is empty");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].width < 1)
            throw ConfigError("invalid architecture: layer " + std::to_string(l) + " has width 0");
    }
}

// He-scaled normal init for relu layers, Glorot uniform otherwise.
// Biases start at zero. Deterministic in the seed.
inline Mlp init_mlp(std::size_t input_dim, const std::vector<LayerSpec>& layers,
                    std::uint64_t seed) {
    validate_architecture(input_dim, layers);
    Mlp mlp;
    mlp.input_dim = input_dim;
    mlp.layers = layers;
    RngStream rng = RngStream(seed).fork("init");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t nin = mlp.fan_in(l);
        const std::size_t nout = layers[l].width;
        Matrix w(nin, nout);
        if (layers[l].activation == Activation::relu) {
            const double stddev = std::sqrt(2.0 / static_cast<double>(nin));
            for (double& x : w.v) x = rng.normal_sample(0.0, stddev);
        } else {
            const double limit = std::sqrt(6.0 / static_cast<double>(nin + nout));
            for (double& x : w.v) x = rng.uniform(-limit, limit);
        }
        mlp.weights.push_back(std::move(w));
        mlp.biases.emplace_back(nout, 0.0);
    }
    return mlp;
}

// Initialization scale used for layer l under the init_mlp scheme; the BNN
// posterior reuses it to size its initial weight stddev.
inline double init_scale(const Mlp& mlp, std::size_t l) {
    const double nin = static_cast<double>(mlp.fan_in(l));
    const double nout = static_cast<double>(mlp.layers[l].width);
    if (mlp.layers[l].activation == Activation::relu) return std::sqrt(2.0 / nin);
    return std::sqrt(6.0 / (nin + nout));
}

inline double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::linear: return z;
    }
    return z;
}

// Derivative expressed through the activation value itself.
inline double activation_deriv(Activation a, double act) {
    switch (a) {
        case Activation::relu: return act > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - act * act;
        case Activation::sigmoid: return act * (1.0 - act);
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

// Each hidden unit is dropped independently with probability p_d.
// A fresh mask should be sampled per minibatch (training) or per
// forward pass (prediction).
inline DropoutMask sample_dropout_mask(const Mlp& mlp, double p_d, RngStream& rng,
                                       DropoutScaling scaling = DropoutScaling::inverted) {
    if (!(p_d > 0.0 && p_d < 1.0))
        throw ConfigError("dropout ratio must lie strictly inside (0, 1)");
    DropoutMask mask;
    mask.p_d = p_d;
    mask.scaling = scaling;
    mask.keep.resize(mlp.hidden_count());
    for (std::size_t l = 0; l < mlp.hidden_count(); ++l) {
        mask.keep[l].resize(mlp.layers[l].width);
        for (double& k : mask.keep[l]) k = rng.uniform01() <= p_d ? 0.0 : 1.0;
    }
    return mask;
}

inline void check_mask_shape(const Mlp& mlp, const DropoutMask& mask) {
    if (mask.keep.size() != mlp.hidden_count())
        throw DataError("dropout mask has wrong number of layers");
    for (std::size_t l = 0; l < mask.keep.size(); ++l)
        if (mask.keep[l].size() != mlp.layers[l].width)
            throw DataError("dropout mask layer " + std::to_string(l) + " has wrong width");
}

// Intermediate state of a batched forward pass, kept for backprop.
// acts[0] is the input batch; acts[l+1] is the effective (post-mask)
// output of layer l. raw[l] is layer l's activation before masking,
// needed to evaluate activation derivatives under a mask.
struct ForwardTrace {
    std::vector<Matrix> acts;
    std::vector<Matrix> raw;
};

inline void forward_batch(const Mlp& mlp, const Matrix& x, const DropoutMask* mask,
                          ForwardTrace& trace) {
    if (x.cols != mlp.input_dim) throw DataError("forward: input has wrong dimension");
    for (double v : x.v)
        if (!std::isfinite(v)) throw DataError("forward: non-finite input");
    if (mask) check_mask_shape(mlp, *mask);

    const std::size_t depth = mlp.depth();
    trace.acts.assign(depth + 1, Matrix());
    trace.raw.assign(depth, Matrix());
    trace.acts[0] = x;

    for (std::size_t l = 0; l < depth; ++l) {
        const Matrix& in = trace.acts[l];
        const std::size_t width = mlp.layers[l].width;
        Matrix z(x.rows, width);
        for (std::size_t b = 0; b < x.rows; ++b) {
            double* zrow = z.row_ptr(b);
            for (std::size_t j = 0; j < width; ++j) zrow[j] = mlp.biases[l][j];
        }
        gemm_acc(in, mlp.weights[l], z);

        const Activation act = mlp.layers[l].activation;
        for (double& val : z.v) val = apply_activation(act, val);

        const bool hidden = l + 1 < depth;
        if (hidden && mask) {
            trace.raw[l] = z;
            const double scale = mask->scale_for(mlp, l);
            const std::vector<double>& keep = mask->keep[l];
            for (std::size_t b = 0; b < z.rows; ++b) {
                double* row = z.row_ptr(b);
                for (std::size_t j = 0; j < width; ++j) row[j] *= keep[j] * scale;
            }
        } else {
            trace.raw[l] = z;
        }
        trace.acts[l + 1] = std::move(z);
    }
}

// Single-input forward pass; implements the plain layered evaluation when
// mask is null and the masked/rescaled variant otherwise.
inline std::vector<double> forward(const Mlp& mlp, const std::vector<double>& x,
                                   const DropoutMask* mask = nullptr) {
    Matrix xm(1, x.size());
    xm.v = x;
    ForwardTrace trace;
    forward_batch(mlp, xm, mask, trace);
    return trace.acts.back().row(0);
}

// Per-layer parameter gradients.
struct Gradients {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;

    static Gradients zeros_like(const Mlp& mlp) {
        Gradients g;
        for (std::size_t l = 0; l < mlp.depth(); ++l) {
            g.dw.emplace_back(mlp.fan_in(l), mlp.layers[l].width);
            g.db.emplace_back(mlp.layers[l].width, 0.0);
        }
        return g;
    }
};

// Reverse pass given dL/d(output activations). Adds parameter gradients
// into `grads`; `dout` is clobbered.
inline void backward_from_output(const Mlp& mlp, const ForwardTrace& trace,
                                 const DropoutMask* mask, Matrix& dout, Gradients& grads) {
    const std::size_t depth = mlp.depth();
    for (std::size_t li = depth; li-- > 0;) {
        const Activation act = mlp.layers[li].activation;
        const bool hidden = li + 1 < depth;

        // chain through the mask first on hidden layers, then the activation
        if (hidden && mask) {
            const double scale = mask->scale_for(mlp, li);
            const std::vector<double>& keep = mask->keep[li];
            for (std::size_t b = 0; b < dout.rows; ++b) {
                double* row = dout.row_ptr(b);
                for (std::size_t j = 0; j < dout.cols; ++j) row[j] *= keep[j] * scale;
            }
        }
        const Matrix& raw = trace.raw[li];
        for (std::size_t i = 0; i < dout.v.size(); ++i)
            dout.v[i] *= activation_deriv(act, raw.v[i]);

        gemm_at_b_acc(trace.acts[li], dout, grads.dw[li]);
        std::vector<double>& db = grads.db[li];
        for (std::size_t b = 0; b < dout.rows; ++b) {
            const double* row = dout.row_ptr(b);
            for (std::size_t j = 0; j < dout.cols; ++j) db[j] += row[j];
        }

        if (li > 0) {
            Matrix dprev(dout.rows, mlp.fan_in(li));
            gemm_a_bt_acc(dout, mlp.weights[li], dprev);
            dout = std::move(dprev);
        }
    }
}

} // namespace uqsurro
