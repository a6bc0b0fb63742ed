#pragma once

#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/objectives.hpp"
#include "uqsurro/predictive.hpp"
#include "uqsurro/train.hpp"

namespace uqsurro {

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;
};

inline std::vector<MeanVar> heads_to_meanvar(const std::vector<GaussianHeadOutput>& heads) {
    std::vector<MeanVar> mv(heads.size());
    for (std::size_t i = 0; i < heads.size(); ++i) mv[i] = {heads[i].mean, heads[i].variance()};
    return mv;
}

// Equal-weight Gaussian mixture moments: mean of means, and
// mean(var_i + mean_i^2) - mixture_mean^2 per response. Tiny negative
// variances from cancellation are clamped to zero; anything beyond the
// rounding tolerance is clamped too but reported.
inline void mixture_moments(const std::vector<std::vector<MeanVar>>& members,
                            std::vector<double>& mean, std::vector<double>& variance) {
    if (members.empty()) throw DataError("mixture_moments: no members");
    const std::size_t q = members.front().size();
    const double m = static_cast<double>(members.size());
    mean.assign(q, 0.0);
    variance.assign(q, 0.0);
    for (const auto& heads : members) {
        if (heads.size() != q) throw DataError("mixture_moments: inconsistent response count");
        for (std::size_t r = 0; r < q; ++r) {
            mean[r] += heads[r].mean;
            variance[r] += heads[r].variance + heads[r].mean * heads[r].mean;
        }
    }
    for (std::size_t r = 0; r < q; ++r) {
        mean[r] /= m;
        const double second_moment = variance[r] / m;
        double var = second_moment - mean[r] * mean[r];
        if (var < 0.0) {
            if (var < -1e-12 * std::max(1.0, second_moment))
                std::cerr << "warning: mixture variance " << var
                          << " clamped to 0 (response " << r << ")\n";
            var = 0.0;
        }
        variance[r] = var;
    }
}

// M networks with identical architecture and objective, trained from
// distinct initializations on the same data. Immutable once trained.
struct Ensemble {
    std::vector<Mlp> members;
    std::vector<std::uint64_t> member_seeds;
    std::vector<TrainLog> logs;

    std::size_t size() const { return members.size(); }
};

inline Ensemble train_ensemble(const Dataset& data, const std::vector<LayerSpec>& arch,
                               const TrainConfig& cfg, std::size_t m_members,
                               const RngStream& rng) {
    if (m_members < 2) throw ConfigError("train_ensemble: need M >= 2 members");
    const ObjectiveSpec obj{ObjectiveKind::nll, 0.0, 0.5};
    Ensemble ens;
    for (std::size_t i = 0; i < m_members; ++i) {
        RngStream member_rng = rng.fork("member", i);
        const std::uint64_t init_seed = member_rng.next_u64();
        Mlp mlp = init_mlp(data.inputs.cols, arch, init_seed);
        try {
            TrainResult result = train(std::move(mlp), data, cfg, obj, member_rng);
            ens.members.push_back(std::move(result.model));
            ens.logs.push_back(std::move(result.log));
            ens.member_seeds.push_back(init_seed);
        } catch (const TrainingDivergence& e) {
            throw TrainingDivergence("ensemble member " + std::to_string(i) + ": " + e.what(),
                                     e.last_finite_epoch());
        }
    }
    return ens;
}

// Mixture-moment prediction over the member heads.
inline PredictiveDistribution ensemble_predict(const Ensemble& ens, const std::vector<double>& x) {
    if (ens.members.empty()) throw DataError("ensemble_predict: ensemble has no members");
    std::vector<std::vector<MeanVar>> heads;
    heads.reserve(ens.size());
    for (const Mlp& member : ens.members)
        heads.push_back(heads_to_meanvar(read_heads(forward(member, x))));

    PredictiveDistribution dist;
    mixture_moments(heads, dist.mean, dist.variance);
    dist.samples_used = ens.size();
    dist.source = UqSource::de;
    return dist;
}

} // namespace uqsurro
