#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/net.hpp"

namespace uqsurro {

constexpr double variance_floor = 1e-6;
constexpr double half_log_two_pi = 0.91893853320467274178;

inline double softplus(double x) {
    // max(x,0) + log1p(exp(-|x|)) is overflow-safe
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double softplus_deriv(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double inv_softplus(double y) { return std::log(std::expm1(y)); }

// One (mean, variance) pair read off a distribution-head output. The
// variance goes through softplus plus a floor so the NLL can never see a
// non-positive value.
struct GaussianHeadOutput {
    double mean = 0.0;
    double raw_variance = 0.0;

    double variance() const { return softplus(raw_variance) + variance_floor; }
};

// Head networks emit interleaved (mean, raw_variance) pairs, one pair per
// scalar response.
inline std::vector<GaussianHeadOutput> read_heads(const std::vector<double>& outputs) {
    if (outputs.size() % 2 != 0)
        throw DataError("head network output width must be even");
    std::vector<GaussianHeadOutput> heads(outputs.size() / 2);
    for (std::size_t i = 0; i < heads.size(); ++i)
        heads[i] = {outputs[2 * i], outputs[2 * i + 1]};
    return heads;
}

inline double mse(const std::vector<double>& preds, const std::vector<double>& targets) {
    if (preds.size() != targets.size()) throw DataError("mse: length mismatch");
    if (preds.empty()) throw DataError("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double r = preds[i] - targets[i];
        acc += r * r;
    }
    return acc / static_cast<double>(preds.size());
}

// Sum over layers of p_d * ||W||^2 + ||b||^2.
inline double weight_decay_term(const Mlp& mlp, double p_d) {
    double acc = 0.0;
    for (std::size_t l = 0; l < mlp.depth(); ++l) {
        double wsq = 0.0;
        for (double w : mlp.weights[l].v) wsq += w * w;
        double bsq = 0.0;
        for (double b : mlp.biases[l]) bsq += b * b;
        acc += p_d * wsq + bsq;
    }
    return acc;
}

// MSE plus the dropout-weighted L2 regularizer.
inline double mcd_loss(const std::vector<double>& preds, const std::vector<double>& targets,
                       const Mlp& mlp, double lambda, double p_d) {
    if (lambda < 0.0) throw ConfigError("mcd_loss: lambda must be nonnegative");
    if (!(p_d > 0.0 && p_d < 1.0)) throw ConfigError("mcd_loss: p_d must lie in (0, 1)");
    double loss = mse(preds, targets);
    if (lambda > 0.0) loss += lambda * weight_decay_term(mlp, p_d);
    return loss;
}

inline double gaussian_nll(double y, const GaussianHeadOutput& head) {
    const double var = head.variance();
    if (!(var > 0.0)) throw DataError("gaussian_nll: variance must be positive");
    const double r = y - head.mean;
    return 0.5 * std::log(var) + r * r / (2.0 * var) + half_log_two_pi;
}

// Direct (mean, variance) form for callers that already hold a variance.
inline double gaussian_nll_direct(double y, double mean, double variance) {
    if (!(variance > 0.0)) throw DataError("gaussian_nll: variance must be positive");
    const double r = y - mean;
    return 0.5 * std::log(variance) + r * r / (2.0 * variance) + half_log_two_pi;
}

inline double mnll(const std::vector<double>& ys, const std::vector<GaussianHeadOutput>& heads) {
    if (ys.size() != heads.size()) throw DataError("mnll: length mismatch");
    if (ys.empty()) throw DataError("mnll: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) acc += gaussian_nll(ys[i], heads[i]);
    return acc / static_cast<double>(ys.size());
}

enum class ObjectiveKind { mse, nll };

inline const char* to_string(ObjectiveKind k) {
    return k == ObjectiveKind::mse ? "mse" : "nll";
}

inline ObjectiveKind objective_from_string(const std::string& s) {
    if (s == "mse") return ObjectiveKind::mse;
    if (s == "nll") return ObjectiveKind::nll;
    throw ConfigError("unknown objective '" + s + "'");
}

// Training objective. lambda > 0 adds the dropout-weighted L2 regularizer
// (p_d must then be set); it applies to both objective kinds but is only
// used by the MCD configuration in practice.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::mse;
    double lambda = 0.0;
    double p_d = 0.5;   // regularizer weight on ||W||^2, only read when lambda > 0

    // Output width the network must have for q scalar responses.
    std::size_t output_width(std::size_t q) const {
        return kind == ObjectiveKind::nll ? 2 * q : q;
    }
};

// Batch data loss (no regularizer) and its gradient w.r.t. the network
// outputs. MSE averages over all entries; NLL averages per sample.
inline double output_loss_and_grad(const ObjectiveSpec& obj, const Matrix& outputs,
                                   const Matrix& targets, Matrix& dout) {
    const std::size_t batch = outputs.rows;
    if (batch == 0) throw DataError("loss: empty batch");
    dout = Matrix(outputs.rows, outputs.cols);
    if (obj.kind == ObjectiveKind::mse) {
        if (!outputs.same_shape(targets)) throw DataError("loss: target shape mismatch");
        const double n = static_cast<double>(outputs.v.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < outputs.v.size(); ++i) {
            const double r = outputs.v[i] - targets.v[i];
            acc += r * r;
            dout.v[i] = 2.0 * r / n;
        }
        return acc / n;
    }

    // NLL: outputs hold interleaved (mean, raw_variance) pairs
    if (outputs.cols != 2 * targets.cols || outputs.rows != targets.rows)
        throw DataError("loss: head network needs width 2 per response");
    const double bn = static_cast<double>(batch);
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* orow = outputs.row_ptr(b);
        const double* trow = targets.row_ptr(b);
        double* drow = dout.row_ptr(b);
        for (std::size_t q = 0; q < targets.cols; ++q) {
            const double mean = orow[2 * q];
            const double raw = orow[2 * q + 1];
            const double var = softplus(raw) + variance_floor;
            const double r = trow[q] - mean;
            acc += 0.5 * std::log(var) + r * r / (2.0 * var) + half_log_two_pi;
            drow[2 * q] = -r / var / bn;
            drow[2 * q + 1] = (0.5 / var - r * r / (2.0 * var * var)) * softplus_deriv(raw) / bn;
        }
    }
    return acc / bn;
}

// Adds the gradient of lambda * sum_l (p_d ||W_l||^2 + ||b_l||^2).
inline void add_weight_decay_grad(const ObjectiveSpec& obj, const Mlp& mlp, Gradients& grads) {
    if (obj.lambda <= 0.0) return;
    for (std::size_t l = 0; l < mlp.depth(); ++l) {
        const double wf = 2.0 * obj.lambda * obj.p_d;
        for (std::size_t i = 0; i < grads.dw[l].v.size(); ++i)
            grads.dw[l].v[i] += wf * mlp.weights[l].v[i];
        for (std::size_t j = 0; j < grads.db[l].size(); ++j)
            grads.db[l][j] += 2.0 * obj.lambda * mlp.biases[l][j];
    }
}

// Full objective on a batch: data term plus regularizer.
inline double batch_loss(const ObjectiveSpec& obj, const Mlp& mlp, const Matrix& outputs,
                         const Matrix& targets) {
    Matrix scratch;
    double loss = output_loss_and_grad(obj, outputs, targets, scratch);
    if (obj.lambda > 0.0) loss += obj.lambda * weight_decay_term(mlp, obj.p_d);
    return loss;
}

// Exact reverse-mode gradients of the objective over a batch. Returns the
// loss value (including regularizer).
inline double backward(const Mlp& mlp, const Matrix& inputs, const Matrix& targets,
                       const ObjectiveSpec& obj, const DropoutMask* mask, Gradients& grads) {
    if (inputs.rows == 0) throw DataError("backward: empty batch");
    ForwardTrace trace;
    forward_batch(mlp, inputs, mask, trace);
    Matrix dout;
    double loss = output_loss_and_grad(obj, trace.acts.back(), targets, dout);
    grads = Gradients::zeros_like(mlp);
    backward_from_output(mlp, trace, mask, dout, grads);
    if (obj.lambda > 0.0) {
        loss += obj.lambda * weight_decay_term(mlp, obj.p_d);
        add_weight_decay_grad(obj, mlp, grads);
    }
    return loss;
}

} // namespace uqsurro
