#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/matrix.hpp"

namespace uqsurro {

enum class UqSource { mcd, de, bnn };

// Raw per-pass samples are kept in prediction results up to this many passes.
constexpr std::size_t max_retained_samples = 10000;

inline const char* to_string(UqSource s) {
    switch (s) {
        case UqSource::mcd: return "mcd";
        case UqSource::de: return "de";
        case UqSource::bnn: return "bnn";
    }
    return "?";
}

// Two-sided normal CI half-width multiplier. The 68.27% and 95% levels are
// pinned to 1 and 1.96; other levels fall back to a bisection on the
// normal CDF.
inline double z_for_level(double level) {
    if (std::abs(level - 0.6827) < 1e-12) return 1.0;
    if (std::abs(level - 0.95) < 1e-12) return 1.96;
    if (!(level > 0.0 && level < 1.0)) throw DataError("ci level must lie in (0, 1)");
    const double target = 0.5 * (1.0 + level);
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct CiBounds {
    double lo = 0.0;
    double hi = 0.0;
};

// Per-response predictive mean and variance with CI derivation. For MCD and
// BNN the raw per-pass samples may be retained (one row per pass) for
// downstream score sampling and audits.
struct PredictiveDistribution {
    std::vector<double> mean;
    std::vector<double> variance;
    std::size_t samples_used = 0;  // T for sampling methods, M for ensembles
    UqSource source = UqSource::mcd;
    Matrix raw_samples;  // samples x responses; empty unless retained

    std::size_t responses() const { return mean.size(); }

    double std_dev(std::size_t r) const { return std::sqrt(variance[r]); }

    CiBounds ci(std::size_t r, double level) const {
        const double z = z_for_level(level);
        const double s = std_dev(r);
        return {mean[r] - z * s, mean[r] + z * s};
    }
};

// Streaming (Welford) moment accumulator over fixed-order sample vectors.
// Produces the unbiased (n-1) variance.
class MomentAccumulator {
public:
    explicit MomentAccumulator(std::size_t dims) : mean_(dims, 0.0), m2_(dims, 0.0) {}

    void add(const std::vector<double>& x) {
        if (x.size() != mean_.size()) throw DataError("moment accumulator: dimension mismatch");
        ++n_;
        const double n = static_cast<double>(n_);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - mean_[i];
            mean_[i] += delta / n;
            m2_[i] += delta * (x[i] - mean_[i]);
        }
    }

    std::size_t count() const { return n_; }
    const std::vector<double>& mean() const { return mean_; }

    std::vector<double> variance() const {
        if (n_ < 2) throw DataError("moment accumulator: variance needs at least 2 samples");
        std::vector<double> var(m2_.size());
        for (std::size_t i = 0; i < var.size(); ++i)
            var[i] = m2_[i] / static_cast<double>(n_ - 1);
        return var;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> mean_, m2_;
};

} // namespace uqsurro
