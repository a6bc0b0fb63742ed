#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uqsurro/bnn.hpp"
#include "uqsurro/data.hpp"
#include "uqsurro/ensemble.hpp"
#include "uqsurro/json_io.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/pca.hpp"
#include "uqsurro/train.hpp"

namespace uqsurro {

constexpr int artifact_schema_version = 1;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DataError("artifact: expected a nested array");
    Matrix m(j.size(), j[0].size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (j[r].size() != m.cols) throw DataError("artifact: ragged weight matrix");
        for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline json layers_to_json(const std::vector<LayerSpec>& layers) {
    json arr = json::array();
    for (const LayerSpec& l : layers)
        arr.push_back({{"width", l.width}, {"activation", to_string(l.activation)}});
    return arr;
}

inline std::vector<LayerSpec> layers_from_json(const json& j) {
    std::vector<LayerSpec> layers;
    for (const auto& l : j)
        layers.push_back(
            {l.at("width").get<std::size_t>(), activation_from_string(l.at("activation"))});
    return layers;
}

inline json train_config_to_json(const TrainConfig& cfg) {
    return {{"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"optimizer", to_string(cfg.optimizer)},
            {"l2_lambda", cfg.l2_lambda},
            {"seed", cfg.seed},
            {"split", {cfg.split.train, cfg.split.val, cfg.split.test}}};
}

inline TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.optimizer = optimizer_from_string(j.at("optimizer"));
    cfg.l2_lambda = j.at("l2_lambda").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    const auto split = j.at("split").get<std::vector<double>>();
    cfg.split = {split.at(0), split.at(1), split.at(2)};
    return cfg;
}

inline json mlp_to_json(const Mlp& mlp, const TrainConfig& cfg, ObjectiveKind objective) {
    json j;
    j["schema_version"] = artifact_schema_version;
    j["input_dim"] = mlp.input_dim;
    j["layers"] = layers_to_json(mlp.layers);
    json weights = json::array();
    for (const Matrix& w : mlp.weights) weights.push_back(matrix_to_json(w));
    j["weights"] = std::move(weights);
    json biases = json::array();
    for (const auto& b : mlp.biases) biases.push_back(b);
    j["biases"] = std::move(biases);
    j["training_config"] = train_config_to_json(cfg);
    j["objective"] = to_string(objective);
    return j;
}

inline Mlp mlp_from_json(const json& j) {
    Mlp mlp;
    mlp.input_dim = j.at("input_dim").get<std::size_t>();
    mlp.layers = layers_from_json(j.at("layers"));
    for (const auto& w : j.at("weights")) mlp.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) mlp.biases.push_back(b.get<std::vector<double>>());
    if (mlp.weights.size() != mlp.layers.size() || mlp.biases.size() != mlp.layers.size())
        throw DataError("artifact: layer/weight count mismatch");
    for (std::size_t l = 0; l < mlp.depth(); ++l)
        if (mlp.weights[l].rows != mlp.fan_in(l) || mlp.weights[l].cols != mlp.layers[l].width ||
            mlp.biases[l].size() != mlp.layers[l].width)
            throw DataError("artifact: weight shapes do not chain");
    return mlp;
}

inline json prior_to_json(const PriorSpec& prior) {
    if (prior.kind == PriorKind::gaussian)
        return {{"kind", "gaussian"}, {"sigma", prior.sigma}};
    return {{"kind", "scale_mixture"},
            {"pi", prior.pi},
            {"sigma1", prior.sigma1},
            {"sigma2", prior.sigma2}};
}

inline PriorSpec prior_from_json(const json& j) {
    PriorSpec prior;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        prior.kind = PriorKind::gaussian;
        prior.sigma = j.at("sigma").get<double>();
    } else if (kind == "scale_mixture") {
        prior.kind = PriorKind::scale_mixture;
        prior.pi = j.at("pi").get<double>();
        prior.sigma1 = j.at("sigma1").get<double>();
        prior.sigma2 = j.at("sigma2").get<double>();
    } else {
        throw DataError("artifact: unknown prior kind '" + kind + "'");
    }
    prior.validate();
    return prior;
}

inline json bnn_to_json(const Bnn& bnn, const TrainConfig& cfg) {
    json j;
    j["schema_version"] = artifact_schema_version;
    j["input_dim"] = bnn.input_dim;
    j["arch"] = layers_to_json(bnn.layers);
    j["prior"] = prior_to_json(bnn.prior);
    json mu = json::array(), rho = json::array(), biases = json::array();
    for (const Matrix& m : bnn.posterior.mu) mu.push_back(matrix_to_json(m));
    for (const Matrix& r : bnn.posterior.rho) rho.push_back(matrix_to_json(r));
    for (const auto& b : bnn.biases) biases.push_back(b);
    j["mu"] = std::move(mu);
    j["rho"] = std::move(rho);
    j["biases"] = std::move(biases);
    j["training_config"] = train_config_to_json(cfg);
    return j;
}

inline Bnn bnn_from_json(const json& j) {
    Bnn bnn;
    bnn.input_dim = j.at("input_dim").get<std::size_t>();
    bnn.layers = layers_from_json(j.at("arch"));
    bnn.prior = prior_from_json(j.at("prior"));
    for (const auto& m : j.at("mu")) bnn.posterior.mu.push_back(matrix_from_json(m));
    for (const auto& r : j.at("rho")) bnn.posterior.rho.push_back(matrix_from_json(r));
    for (const auto& b : j.at("biases")) bnn.biases.push_back(b.get<std::vector<double>>());
    if (bnn.posterior.mu.size() != bnn.layers.size() ||
        bnn.posterior.rho.size() != bnn.layers.size() || bnn.biases.size() != bnn.layers.size())
        throw DataError("artifact: posterior/layer count mismatch");
    return bnn;
}

inline json pca_to_json(const PcaModel& m) {
    json j;
    j["schema_version"] = artifact_schema_version;
    j["u"] = m.row_mean;
    j["components"] = matrix_to_json(m.components);
    j["pc_variances"] = m.pc_variances;
    j["explained_fraction"] = m.explained_fraction;
    j["threshold"] = m.threshold;
    return j;
}

inline PcaModel pca_from_json(const json& j) {
    PcaModel m;
    m.row_mean = j.at("u").get<std::vector<double>>();
    m.components = matrix_from_json(j.at("components"));
    m.pc_variances = j.at("pc_variances").get<std::vector<double>>();
    m.explained_fraction = j.at("explained_fraction").get<double>();
    m.threshold = j.at("threshold").get<double>();
    m.p = m.row_mean.size();
    m.p_star = m.components.rows;
    if (m.components.cols != m.p) throw DataError("artifact: PCA component shape mismatch");
    return m;
}

// Per-response preprocessing: the input scaler plus the affine transform
// applied to this response's training target.
struct ResponseScaler {
    std::vector<double> input_shift, input_scale;
    double target_shift = 0.0;
    double target_scale = 1.0;

    std::vector<double> transform_input(std::vector<double> x) const {
        for (std::size_t c = 0; c < x.size(); ++c)
            x[c] = (x[c] - input_shift[c]) / input_scale[c];
        return x;
    }
};

inline json scaler_to_json(const ResponseScaler& s) {
    return {{"input_shift", s.input_shift},
            {"input_scale", s.input_scale},
            {"target_shift", s.target_shift},
            {"target_scale", s.target_scale}};
}

inline ResponseScaler scaler_from_json(const json& j) {
    ResponseScaler s;
    s.input_shift = j.at("input_shift").get<std::vector<double>>();
    s.input_scale = j.at("input_scale").get<std::vector<double>>();
    s.target_shift = j.at("target_shift").get<double>();
    s.target_scale = j.at("target_scale").get<double>();
    return s;
}

} // namespace uqsurro
