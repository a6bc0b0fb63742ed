#pragma once

#include <cstddef>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/predictive.hpp"

namespace uqsurro {

struct McdOptions {
    double p_d = 0.4;
    DropoutScaling scaling = DropoutScaling::inverted;
    bool retain_samples = true;
};

// Monte Carlo Dropout prediction: T independently masked forward passes,
// reduced in pass order to the empirical mean and unbiased variance per
// response. Each pass draws its mask from a pre-split substream, so the
// result does not depend on evaluation schedule.
inline PredictiveDistribution mcd_predict(const Mlp& mlp, const std::vector<double>& x,
                                          std::size_t t_samples, const McdOptions& opts,
                                          const RngStream& rng) {
    if (t_samples < 2)
        throw ConfigError("mcd_predict: need T >= 2 samples for a variance estimate");
    const std::size_t q = mlp.output_dim();
    const bool retain = opts.retain_samples && t_samples <= max_retained_samples;

    MomentAccumulator acc(q);
    PredictiveDistribution dist;
    if (retain) dist.raw_samples = Matrix(t_samples, q);
    for (std::size_t i = 0; i < t_samples; ++i) {
        RngStream pass_rng = rng.fork("mcd-pass", i);
        const DropoutMask mask = sample_dropout_mask(mlp, opts.p_d, pass_rng, opts.scaling);
        const std::vector<double> y = forward(mlp, x, &mask);
        acc.add(y);
        if (retain) std::copy(y.begin(), y.end(), dist.raw_samples.row_ptr(i));
    }
    dist.mean = acc.mean();
    dist.variance = acc.variance();
    dist.samples_used = t_samples;
    dist.source = UqSource::mcd;
    return dist;
}

} // namespace uqsurro
