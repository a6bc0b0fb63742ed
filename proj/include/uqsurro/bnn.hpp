#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uqsurro/data.hpp"
#include "uqsurro/ensemble.hpp"
#include "uqsurro/errors.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/objectives.hpp"
#include "uqsurro/predictive.hpp"
#include "uqsurro/train.hpp"

namespace uqsurro {

enum class PriorKind { gaussian, scale_mixture };

struct PriorSpec {
    PriorKind kind = PriorKind::gaussian;
    double sigma = 1.0;        // gaussian
    double pi = 0.5;           // scale mixture: mixing weight of sigma1
    double sigma1 = 1.0;
    double sigma2 = 0.1;

    void validate() const {
        if (kind == PriorKind::gaussian) {
            if (!(sigma > 0.0)) throw ConfigError("prior: sigma must be positive");
        } else {
            if (!(sigma1 > 0.0 && sigma2 > 0.0))
                throw ConfigError("prior: mixture sigmas must be positive");
            if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("prior: pi must lie in (0, 1)");
        }
    }
};

// Mean-field Gaussian over every weight; sigma_w = softplus(rho_w).
// Shapes mirror the Mlp weight matrices.
struct VariationalPosterior {
    std::vector<Matrix> mu;
    std::vector<Matrix> rho;
};

// Variational BNN: Gaussian posterior over weights, deterministic biases.
struct Bnn {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> layers;
    VariationalPosterior posterior;
    std::vector<std::vector<double>> biases;
    PriorSpec prior;

    std::size_t depth() const { return layers.size(); }

    std::size_t fan_in(std::size_t l) const {
        return l == 0 ? input_dim : layers[l - 1].width;
    }

    // Network at the posterior means (the eps = 0 realization).
    Mlp mean_network() const {
        Mlp mlp;
        mlp.input_dim = input_dim;
        mlp.layers = layers;
        mlp.weights = posterior.mu;
        mlp.biases = biases;
        return mlp;
    }
};

// Posterior means use the same He/Glorot scheme as init_mlp; rho starts at
// inv_softplus(0.05 * init scale) so the initial weight stddev is small
// relative to the weight magnitudes.
inline Bnn init_bnn(std::size_t input_dim, const std::vector<LayerSpec>& layers,
                    const PriorSpec& prior, std::uint64_t seed) {
    prior.validate();
    Mlp proto = init_mlp(input_dim, layers, seed);
    Bnn bnn;
    bnn.input_dim = input_dim;
    bnn.layers = layers;
    bnn.prior = prior;
    bnn.posterior.mu = std::move(proto.weights);
    bnn.biases = std::move(proto.biases);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const double rho0 = inv_softplus(0.05 * init_scale(proto, l));
        bnn.posterior.rho.emplace_back(bnn.fan_in(l), layers[l].width, rho0);
    }
    return bnn;
}

// Standard-normal noise, one matrix per weight layer.
using WeightNoise = std::vector<Matrix>;

inline WeightNoise draw_weight_noise(const Bnn& bnn, RngStream& rng) {
    WeightNoise noise;
    for (const Matrix& mu : bnn.posterior.mu) {
        Matrix e(mu.rows, mu.cols);
        for (double& v : e.v) v = rng.normal_sample();
        noise.push_back(std::move(e));
    }
    return noise;
}

// w = mu + softplus(rho) * eps, elementwise.
inline Mlp realize_weights(const Bnn& bnn, const WeightNoise& noise) {
    if (noise.size() != bnn.depth()) throw DataError("realize_weights: noise shape mismatch");
    Mlp mlp;
    mlp.input_dim = bnn.input_dim;
    mlp.layers = bnn.layers;
    mlp.biases = bnn.biases;
    for (std::size_t l = 0; l < bnn.depth(); ++l) {
        const Matrix& mu = bnn.posterior.mu[l];
        const Matrix& rho = bnn.posterior.rho[l];
        if (!noise[l].same_shape(mu)) throw DataError("realize_weights: noise shape mismatch");
        Matrix w(mu.rows, mu.cols);
        for (std::size_t i = 0; i < w.v.size(); ++i)
            w.v[i] = mu.v[i] + softplus(rho.v[i]) * noise[l].v[i];
        mlp.weights.push_back(std::move(w));
    }
    return mlp;
}

inline Mlp sample_weights(const Bnn& bnn, RngStream& rng) {
    return realize_weights(bnn, draw_weight_noise(bnn, rng));
}

// Closed-form KL(q || p) for a factorized Gaussian posterior against an
// isotropic Gaussian prior: sum over weights of
// log(sp/sq) + (sq^2 + mu^2) / (2 sp^2) - 1/2.
inline double kl_gaussians(const VariationalPosterior& post, const PriorSpec& prior) {
    if (prior.kind != PriorKind::gaussian)
        throw ConfigError("kl_gaussians: closed form requires a gaussian prior");
    const double sp = prior.sigma;
    double kl = 0.0;
    for (std::size_t l = 0; l < post.mu.size(); ++l) {
        for (std::size_t i = 0; i < post.mu[l].v.size(); ++i) {
            const double mu = post.mu[l].v[i];
            const double sq = softplus(post.rho[l].v[i]);
            kl += std::log(sp / sq) + (sq * sq + mu * mu) / (2.0 * sp * sp) - 0.5;
        }
    }
    return kl;
}

namespace detail {

inline double log_normal_density(double w, double sigma) {
    return -0.5 * std::log(2.0 * std::acos(-1.0)) - std::log(sigma) -
           w * w / (2.0 * sigma * sigma);
}

// log p(w) and dlogp/dw for the prior at a realized weight.
inline void prior_log_density(const PriorSpec& prior, double w, double& logp, double& dlogp_dw) {
    if (prior.kind == PriorKind::gaussian) {
        logp = log_normal_density(w, prior.sigma);
        dlogp_dw = -w / (prior.sigma * prior.sigma);
        return;
    }
    const double n1 = std::exp(log_normal_density(w, prior.sigma1));
    const double n2 = std::exp(log_normal_density(w, prior.sigma2));
    const double p = prior.pi * n1 + (1.0 - prior.pi) * n2;
    logp = std::log(p);
    dlogp_dw = -w *
               (prior.pi * n1 / (prior.sigma1 * prior.sigma1) +
                (1.0 - prior.pi) * n2 / (prior.sigma2 * prior.sigma2)) /
               p;
}

} // namespace detail

struct BnnGradients {
    std::vector<Matrix> dmu;
    std::vector<Matrix> drho;
    std::vector<std::vector<double>> dbias;

    static BnnGradients zeros_like(const Bnn& bnn) {
        BnnGradients g;
        for (std::size_t l = 0; l < bnn.depth(); ++l) {
            g.dmu.emplace_back(bnn.fan_in(l), bnn.layers[l].width);
            g.drho.emplace_back(bnn.fan_in(l), bnn.layers[l].width);
            g.dbias.emplace_back(bnn.layers[l].width, 0.0);
        }
        return g;
    }
};

// Minibatch variational free energy
//   KL(q || prior) / n_batches + sum over the batch of Gaussian NLL,
// averaged over the supplied Monte Carlo weight noises. Summing over an
// epoch's n_batches minibatches reproduces the full KL once. With a
// gaussian prior the KL term is closed form; a scale-mixture prior uses the
// Monte Carlo estimate log q(w) - log p(w) at the sampled weights.
// Gradients (accumulated into `grads` when non-null) flow to mu and rho
// through the reparameterization w = mu + softplus(rho) * eps.
inline double elbo_with_noise(const Bnn& bnn, const Matrix& x, const Matrix& y,
                              std::size_t n_batches, const std::vector<WeightNoise>& noises,
                              BnnGradients* grads) {
    if (n_batches < 1) throw ConfigError("elbo: n_batches must be >= 1");
    if (noises.empty()) throw ConfigError("elbo: need at least one Monte Carlo sample");
    const double n_mc = static_cast<double>(noises.size());
    const double batch = static_cast<double>(x.rows);
    const double kl_w = 1.0 / static_cast<double>(n_batches);
    const ObjectiveSpec nll_obj{ObjectiveKind::nll, 0.0, 0.5};

    if (grads) *grads = BnnGradients::zeros_like(bnn);
    double loss = 0.0;

    for (const WeightNoise& eps : noises) {
        const Mlp realized = realize_weights(bnn, eps);

        ForwardTrace trace;
        forward_batch(realized, x, nullptr, trace);
        Matrix dout;
        const double mean_nll = output_loss_and_grad(nll_obj, trace.acts.back(), y, dout);
        loss += batch * mean_nll / n_mc;

        double kl_mc = 0.0;
        Gradients wgrads;
        if (grads) {
            // scale d(mean nll) to d(summed nll), averaged over MC samples
            for (double& v : dout.v) v *= batch / n_mc;
            wgrads = Gradients::zeros_like(realized);
            backward_from_output(realized, trace, nullptr, dout, wgrads);
        }

        for (std::size_t l = 0; l < bnn.depth(); ++l) {
            const Matrix& mu = bnn.posterior.mu[l];
            const Matrix& rho = bnn.posterior.rho[l];
            const Matrix& w = realized.weights[l];
            for (std::size_t i = 0; i < mu.v.size(); ++i) {
                const double sq = softplus(rho.v[i]);
                const double dsq = softplus_deriv(rho.v[i]);
                const double e = eps[l].v[i];

                if (grads) {
                    // likelihood pathway through w
                    grads->dmu[l].v[i] += wgrads.dw[l].v[i];
                    grads->drho[l].v[i] += wgrads.dw[l].v[i] * e * dsq;
                }
                if (bnn.prior.kind == PriorKind::scale_mixture) {
                    double logp, dlogp_dw;
                    detail::prior_log_density(bnn.prior, w.v[i], logp, dlogp_dw);
                    const double logq =
                        detail::log_normal_density(w.v[i] - mu.v[i], sq);
                    kl_mc += logq - logp;
                    if (grads) {
                        // d(log q - log p)/dmu reduces to -dlogp/dw; the rho
                        // pathway keeps the entropy term -softplus'(rho)/sq
                        grads->dmu[l].v[i] += kl_w * (-dlogp_dw) / n_mc;
                        grads->drho[l].v[i] +=
                            kl_w * (-dsq / sq - dlogp_dw * e * dsq) / n_mc;
                    }
                }
            }
            if (grads)
                for (std::size_t j = 0; j < wgrads.db[l].size(); ++j)
                    grads->dbias[l][j] += wgrads.db[l][j];
        }
        if (bnn.prior.kind == PriorKind::scale_mixture) loss += kl_w * kl_mc / n_mc;
    }

    if (bnn.prior.kind == PriorKind::gaussian) {
        loss += kl_w * kl_gaussians(bnn.posterior, bnn.prior);
        if (grads) {
            const double sp2 = bnn.prior.sigma * bnn.prior.sigma;
            for (std::size_t l = 0; l < bnn.depth(); ++l) {
                const Matrix& mu = bnn.posterior.mu[l];
                const Matrix& rho = bnn.posterior.rho[l];
                for (std::size_t i = 0; i < mu.v.size(); ++i) {
                    const double sq = softplus(rho.v[i]);
                    const double dsq = softplus_deriv(rho.v[i]);
                    grads->dmu[l].v[i] += kl_w * mu.v[i] / sp2;
                    grads->drho[l].v[i] += kl_w * (-1.0 / sq + sq / sp2) * dsq;
                }
            }
        }
    }
    return loss;
}

inline double elbo_loss(const Bnn& bnn, const Matrix& x, const Matrix& y, std::size_t n_batches,
                        std::size_t n_mc, RngStream& rng) {
    if (n_mc < 1) throw ConfigError("elbo: n_mc must be >= 1");
    std::vector<WeightNoise> noises;
    for (std::size_t s = 0; s < n_mc; ++s) noises.push_back(draw_weight_noise(bnn, rng));
    const double loss = elbo_with_noise(bnn, x, y, n_batches, noises, nullptr);
    if (!std::isfinite(loss)) throw TrainingDivergence("elbo became non-finite", -1);
    return loss;
}

struct BnnTrainResult {
    Bnn model;
    TrainLog log;
};

namespace detail {

inline std::size_t bnn_param_count(const Bnn& bnn) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < bnn.depth(); ++l)
        n += 2 * bnn.posterior.mu[l].v.size() + bnn.biases[l].size();
    return n;
}

inline void apply_bnn_gradients(ParamOptimizer& opt, Bnn& bnn, const BnnGradients& g) {
    opt.begin_step();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < bnn.depth(); ++l) {
        auto& mu = bnn.posterior.mu[l].v;
        auto& rho = bnn.posterior.rho[l].v;
        opt.apply(mu.data(), g.dmu[l].v.data(), mu.size(), offset);
        offset += mu.size();
        opt.apply(rho.data(), g.drho[l].v.data(), rho.size(), offset);
        offset += rho.size();
        opt.apply(bnn.biases[l].data(), g.dbias[l].data(), bnn.biases[l].size(), offset);
        offset += bnn.biases[l].size();
    }
}

} // namespace detail

// Minibatch gradient descent on the variational free energy. One Monte
// Carlo weight sample per step by default.
inline BnnTrainResult train_bnn(const Dataset& data, const std::vector<LayerSpec>& arch,
                                const TrainConfig& cfg, const PriorSpec& prior, RngStream& rng,
                                std::size_t n_mc = 1) {
    prior.validate();
    if (n_mc < 1) throw ConfigError("train_bnn: n_mc must be >= 1");
    const std::vector<std::size_t> train_rows = data.rows_in(Partition::train);
    const std::vector<std::size_t> val_rows = data.rows_in(Partition::val);
    if (train_rows.empty()) throw DataError("train_bnn: empty training partition");
    validate_train_config(cfg, train_rows.size());

    Bnn bnn = init_bnn(data.inputs.cols, arch, prior, rng.fork("bnn-init").next_u64());
    if (bnn.layers.back().width != 2 * data.outputs.cols)
        throw ConfigError("train_bnn: output layer needs width 2 per response");

    const Matrix x_train = data.gather_inputs(train_rows);
    const Matrix y_train = data.gather_outputs(train_rows);
    const Matrix x_val = data.gather_inputs(val_rows);
    const Matrix y_val = data.gather_outputs(val_rows);
    const std::size_t n_batches =
        (train_rows.size() + cfg.batch_size - 1) / cfg.batch_size;

    detail::ParamOptimizer opt(cfg.optimizer, cfg.learning_rate, detail::bnn_param_count(bnn));
    TrainLog log;
    std::vector<std::size_t> order(train_rows.size());
    std::iota(order.begin(), order.end(), 0);
    const ObjectiveSpec nll_obj{ObjectiveKind::nll, 0.0, 0.5};

    BnnGradients grads;
    std::vector<WeightNoise> noises(n_mc);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches_seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            Matrix xb(stop - start, x_train.cols), yb(stop - start, y_train.cols);
            for (std::size_t i = start; i < stop; ++i) {
                std::copy(x_train.row_ptr(order[i]), x_train.row_ptr(order[i]) + x_train.cols,
                          xb.row_ptr(i - start));
                std::copy(y_train.row_ptr(order[i]), y_train.row_ptr(order[i]) + y_train.cols,
                          yb.row_ptr(i - start));
            }
            for (std::size_t s = 0; s < n_mc; ++s) noises[s] = draw_weight_noise(bnn, rng);
            const double loss = elbo_with_noise(bnn, xb, yb, n_batches, noises, &grads);
            if (!std::isfinite(loss))
                throw TrainingDivergence(
                    "ELBO became non-finite in epoch " + std::to_string(epoch + 1),
                    static_cast<int>(epoch));
            detail::apply_bnn_gradients(opt, bnn, grads);
            epoch_loss += loss;
            ++batches_seen;
        }
        epoch_loss /= static_cast<double>(batches_seen);
        log.train_loss.push_back(epoch_loss);

        double vloss = epoch_loss;
        if (!val_rows.empty()) {
            const Mlp mean_net = bnn.mean_network();
            ForwardTrace trace;
            forward_batch(mean_net, x_val, nullptr, trace);
            vloss = batch_loss(nll_obj, mean_net, trace.acts.back(), y_val);
        }
        if (!std::isfinite(vloss))
            throw TrainingDivergence(
                "validation loss became non-finite in epoch " + std::to_string(epoch + 1),
                static_cast<int>(epoch));
        log.val_loss.push_back(vloss);
    }
    return {std::move(bnn), std::move(log)};
}

// Posterior predictive via T weight draws combined with the same mixture
// rule as a deep ensemble (M := T). Raw draws are retained as interleaved
// (mean, variance) pairs per response.
inline PredictiveDistribution bnn_predict(const Bnn& bnn, const std::vector<double>& x,
                                          std::size_t t_samples, const RngStream& rng,
                                          bool retain_samples = true) {
    if (t_samples < 2) throw ConfigError("bnn_predict: need T >= 2 samples");
    std::vector<std::vector<MeanVar>> draws;
    draws.reserve(t_samples);
    const bool retain = retain_samples && t_samples <= max_retained_samples;

    PredictiveDistribution dist;
    const std::size_t q = bnn.layers.back().width / 2;
    if (retain) dist.raw_samples = Matrix(t_samples, 2 * q);
    for (std::size_t i = 0; i < t_samples; ++i) {
        RngStream pass_rng = rng.fork("bnn-pass", i);
        const Mlp realized = sample_weights(bnn, pass_rng);
        std::vector<MeanVar> heads = heads_to_meanvar(read_heads(forward(realized, x)));
        if (retain)
            for (std::size_t r = 0; r < q; ++r) {
                dist.raw_samples(i, 2 * r) = heads[r].mean;
                dist.raw_samples(i, 2 * r + 1) = heads[r].variance;
            }
        draws.push_back(std::move(heads));
    }
    mixture_moments(draws, dist.mean, dist.variance);
    dist.samples_used = t_samples;
    dist.source = UqSource::bnn;
    return dist;
}

} // namespace uqsurro
