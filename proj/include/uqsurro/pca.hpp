#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstddef>
#include <vector>

#include "uqsurro/errors.hpp"
#include "uqsurro/matrix.hpp"
#include "uqsurro/predictive.hpp"
#include "uqsurro/rng.hpp"

namespace uqsurro {

// Principal-component model of a p x N data matrix whose rows are
// responses (e.g. time points) and whose columns are samples.
struct PcaModel {
    std::vector<double> row_mean;      // length p
    Matrix components;                 // p* x p, orthonormal rows
    std::vector<double> pc_variances;  // length p, descending, zero-padded
    std::size_t p = 0;
    std::size_t p_star = 0;
    double explained_fraction = 0.0;
    double threshold = 0.0;

    std::vector<double> explained_fractions() const {
        double total = 0.0;
        for (double v : pc_variances) total += v;
        std::vector<double> f(pc_variances.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = pc_variances[i] / total;
        return f;
    }
};

// Centers rows, takes the SVD of the centered matrix and keeps the smallest
// leading set of components whose variances reach the explained-variance
// threshold. PC variances carry the 1/(N-1) sample-covariance scaling.
// Component signs are fixed by flipping each row so its largest-magnitude
// entry is positive.
inline PcaModel fit_pca(const Matrix& data, double threshold) {
    const std::size_t p = data.rows, n = data.cols;
    if (n < 2) throw DataError("fit_pca: need at least 2 samples");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ConfigError("fit_pca: threshold must lie in (0, 1]");

    PcaModel model;
    model.p = p;
    model.threshold = threshold;
    model.row_mean.assign(p, 0.0);

    Eigen::MatrixXd centered(p, n);
    for (std::size_t r = 0; r < p; ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < n; ++c) mean += data(r, c);
        mean /= static_cast<double>(n);
        model.row_mean[r] = mean;
        for (std::size_t c = 0; c < n; ++c) centered(r, c) = data(r, c) - mean;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    const std::size_t rank_max = static_cast<std::size_t>(sv.size());

    model.pc_variances.assign(p, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < rank_max; ++k) {
        model.pc_variances[k] = sv(k) * sv(k) / static_cast<double>(n - 1);
        total += model.pc_variances[k];
    }
    if (!(total > 0.0)) throw DataError("fit_pca: data matrix has zero variance");

    std::size_t p_star = rank_max;
    if (threshold < 1.0) {
        double cum = 0.0;
        for (std::size_t k = 0; k < rank_max; ++k) {
            cum += model.pc_variances[k];
            if (cum / total >= threshold) {
                p_star = k + 1;
                break;
            }
        }
    }
    model.p_star = p_star;
    double kept = 0.0;
    for (std::size_t k = 0; k < p_star; ++k) kept += model.pc_variances[k];
    model.explained_fraction = kept / total;

    model.components = Matrix(p_star, p);
    for (std::size_t k = 0; k < p_star; ++k) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t r = 0; r < p; ++r) {
            const double mag = std::abs(svd.matrixU()(r, k));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        const double sign = svd.matrixU()(arg, k) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < p; ++r)
            model.components(k, r) = sign * svd.matrixU()(r, k);
    }
    return model;
}

// PC scores of a response vector: P* (a - u).
inline std::vector<double> project(const PcaModel& m, const std::vector<double>& a) {
    if (a.size() != m.p) throw DataError("project: vector has wrong length");
    std::vector<double> scores(m.p_star, 0.0);
    for (std::size_t k = 0; k < m.p_star; ++k) {
        const double* comp = m.components.row_ptr(k);
        double acc = 0.0;
        for (std::size_t r = 0; r < m.p; ++r) acc += comp[r] * (a[r] - m.row_mean[r]);
        scores[k] = acc;
    }
    return scores;
}

// Reverse PCA: P*^T b* + u.
inline std::vector<double> reconstruct(const PcaModel& m, const std::vector<double>& scores) {
    if (scores.size() != m.p_star) throw DataError("reconstruct: score vector has wrong length");
    std::vector<double> a = m.row_mean;
    for (std::size_t k = 0; k < m.p_star; ++k) {
        const double* comp = m.components.row_ptr(k);
        for (std::size_t r = 0; r < m.p; ++r) a[r] += comp[r] * scores[k];
    }
    return a;
}

struct ScoreGaussian {
    double mean = 0.0;
    double variance = 0.0;
};

// Mean/std curves in the original response space.
struct CurveBand {
    std::vector<double> mean;
    std::vector<double> std_dev;
    std::vector<std::vector<double>> samples;  // optional retained curves
};

// Monte Carlo propagation of independent per-PC Gaussians through the
// reverse map: draw score vectors, reconstruct, reduce per response in
// sample order.
inline CurveBand propagate_uncertainty(const PcaModel& m,
                                       const std::vector<ScoreGaussian>& scores,
                                       std::size_t n_samples, const RngStream& rng,
                                       bool retain_samples = false) {
    if (scores.size() != m.p_star)
        throw DataError("propagate_uncertainty: need one Gaussian per retained PC");
    for (const ScoreGaussian& s : scores)
        if (s.variance < 0.0) throw DataError("propagate_uncertainty: negative score variance");
    if (n_samples < 2) throw ConfigError("propagate_uncertainty: need at least 2 samples");

    MomentAccumulator acc(m.p);
    CurveBand band;
    std::vector<double> draw(m.p_star);
    for (std::size_t s = 0; s < n_samples; ++s) {
        RngStream sample_rng = rng.fork("prop", s);
        for (std::size_t k = 0; k < m.p_star; ++k)
            draw[k] = scores[k].mean + std::sqrt(scores[k].variance) * sample_rng.normal_sample();
        std::vector<double> curve = reconstruct(m, draw);
        acc.add(curve);
        if (retain_samples) band.samples.push_back(std::move(curve));
    }
    band.mean = acc.mean();
    band.std_dev = acc.variance();
    for (double& v : band.std_dev) v = std::sqrt(v);
    return band;
}

// Exact propagation using the linearity of the reverse map:
// mean = P*^T mu + u, var_r = sum_k components(k,r)^2 var_k.
inline CurveBand propagate_closed_form(const PcaModel& m,
                                       const std::vector<ScoreGaussian>& scores) {
    if (scores.size() != m.p_star)
        throw DataError("propagate_closed_form: need one Gaussian per retained PC");
    std::vector<double> mu(m.p_star);
    for (std::size_t k = 0; k < m.p_star; ++k) {
        if (scores[k].variance < 0.0)
            throw DataError("propagate_closed_form: negative score variance");
        mu[k] = scores[k].mean;
    }
    CurveBand band;
    band.mean = reconstruct(m, mu);
    band.std_dev.assign(m.p, 0.0);
    for (std::size_t k = 0; k < m.p_star; ++k) {
        const double* comp = m.components.row_ptr(k);
        for (std::size_t r = 0; r < m.p; ++r)
            band.std_dev[r] += comp[r] * comp[r] * scores[k].variance;
    }
    for (double& v : band.std_dev) v = std::sqrt(v);
    return band;
}

} // namespace uqsurro
