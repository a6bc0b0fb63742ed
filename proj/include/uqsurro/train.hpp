#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "uqsurro/data.hpp"
#include "uqsurro/errors.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/objectives.hpp"

namespace uqsurro {

enum class Optimizer { sgd, adam };

inline const char* to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

inline Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer '" + s + "'");
}

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    Optimizer optimizer = Optimizer::adam;
    double l2_lambda = 0.0;
    std::uint64_t seed = 0;
    SplitFractions split;
};

inline void validate_train_config(const TrainConfig& cfg, std::size_t n_train) {
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw ConfigError("learning_rate must be a finite nonnegative value");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.batch_size > n_train)
        throw ConfigError("batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds training-set size " + std::to_string(n_train));
    if (cfg.l2_lambda < 0.0) throw ConfigError("l2_lambda must be nonnegative");
}

struct TrainLog {
    std::vector<double> train_loss;  // one entry per epoch
    std::vector<double> val_loss;
};

// Dropout sampling during training; a fresh mask per minibatch.
struct DropoutTraining {
    double p_d = 0.4;
    DropoutScaling scaling = DropoutScaling::inverted;
};

namespace detail {

// Adam/SGD over a flat list of parameter tensors.
class ParamOptimizer {
public:
    ParamOptimizer(Optimizer kind, double lr, std::size_t n_params)
        : kind_(kind), lr_(lr), m_(n_params, 0.0), v_(n_params, 0.0) {}

    void apply(double* p, const double* g, std::size_t n, std::size_t offset) {
        if (kind_ == Optimizer::sgd) {
            for (std::size_t i = 0; i < n; ++i) p[i] -= lr_ * g[i];
            return;
        }
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        double* m = m_.data() + offset;
        double* v = v_.data() + offset;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
        }
    }

    void begin_step() { ++t_; }

private:
    Optimizer kind_;
    double lr_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

inline std::size_t param_count(const Mlp& mlp) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < mlp.depth(); ++l)
        n += mlp.weights[l].v.size() + mlp.biases[l].size();
    return n;
}

inline void apply_gradients(ParamOptimizer& opt, Mlp& mlp, const Gradients& grads) {
    opt.begin_step();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < mlp.depth(); ++l) {
        opt.apply(mlp.weights[l].v.data(), grads.dw[l].v.data(), grads.dw[l].v.size(), offset);
        offset += grads.dw[l].v.size();
        opt.apply(mlp.biases[l].data(), grads.db[l].data(), grads.db[l].size(), offset);
        offset += grads.db[l].size();
    }
}

} // namespace detail

struct TrainResult {
    Mlp model;
    TrainLog log;
};

// Minibatch training loop: shuffled batches each epoch, optional per-batch
// dropout masks, divergence guard on the loss. The validation entry is the
// pure data term on the val partition (falls back to the epoch's training
// loss when the dataset has no val rows).
inline TrainResult train(Mlp mlp, const Dataset& data, const TrainConfig& cfg,
                         const ObjectiveSpec& obj, RngStream& rng,
                         const DropoutTraining* dropout = nullptr) {
    const std::vector<std::size_t> train_rows = data.rows_in(Partition::train);
    const std::vector<std::size_t> val_rows = data.rows_in(Partition::val);
    if (train_rows.empty()) throw DataError("train: empty training partition");
    validate_train_config(cfg, train_rows.size());

    const Matrix x_train = data.gather_inputs(train_rows);
    const Matrix y_train = data.gather_outputs(train_rows);
    const Matrix x_val = data.gather_inputs(val_rows);
    const Matrix y_val = data.gather_outputs(val_rows);

    if (mlp.output_dim() != obj.output_width(data.outputs.cols))
        throw ConfigError("train: network output width " + std::to_string(mlp.output_dim()) +
                          " does not match objective (" +
                          std::to_string(obj.output_width(data.outputs.cols)) + " expected)");

    detail::ParamOptimizer opt(cfg.optimizer, cfg.learning_rate, detail::param_count(mlp));
    TrainLog log;
    std::vector<std::size_t> order(train_rows.size());
    std::iota(order.begin(), order.end(), 0);

    ObjectiveSpec train_obj = obj;
    if (cfg.l2_lambda > 0.0) {
        train_obj.lambda = cfg.l2_lambda;
        if (dropout) train_obj.p_d = dropout->p_d;
    }
    ObjectiveSpec data_obj = obj;
    data_obj.lambda = 0.0;

    Gradients grads;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            Matrix xb(stop - start, x_train.cols), yb(stop - start, y_train.cols);
            for (std::size_t i = start; i < stop; ++i) {
                std::copy(x_train.row_ptr(order[i]), x_train.row_ptr(order[i]) + x_train.cols,
                          xb.row_ptr(i - start));
                std::copy(y_train.row_ptr(order[i]), y_train.row_ptr(order[i]) + y_train.cols,
                          yb.row_ptr(i - start));
            }

            DropoutMask mask;
            const DropoutMask* mask_ptr = nullptr;
            if (dropout) {
                mask = sample_dropout_mask(mlp, dropout->p_d, rng, dropout->scaling);
                mask_ptr = &mask;
            }

            const double loss = backward(mlp, xb, yb, train_obj, mask_ptr, grads);
            if (!std::isfinite(loss))
                throw TrainingDivergence(
                    "training loss became non-finite in epoch " + std::to_string(epoch + 1),
                    static_cast<int>(epoch));
            detail::apply_gradients(opt, mlp, grads);
            epoch_loss += loss;
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);
        log.train_loss.push_back(epoch_loss);

        double vloss = epoch_loss;
        if (!val_rows.empty()) {
            ForwardTrace trace;
            forward_batch(mlp, x_val, nullptr, trace);
            vloss = batch_loss(data_obj, mlp, trace.acts.back(), y_val);
        }
        if (!std::isfinite(vloss))
            throw TrainingDivergence(
                "validation loss became non-finite in epoch " + std::to_string(epoch + 1),
                static_cast<int>(epoch));
        log.val_loss.push_back(vloss);
    }
    return {std::move(mlp), std::move(log)};
}

} // namespace uqsurro
