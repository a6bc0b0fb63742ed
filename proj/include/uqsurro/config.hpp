#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uqsurro/bnn.hpp"
#include "uqsurro/data.hpp"
#include "uqsurro/json_io.hpp"
#include "uqsurro/net.hpp"
#include "uqsurro/objectives.hpp"
#include "uqsurro/train.hpp"

namespace uqsurro {

enum class ProblemKind { synth_fgr, synth_void, csv };

inline const char* to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::synth_fgr: return "synth_fgr";
        case ProblemKind::synth_void: return "synth_void";
        case ProblemKind::csv: return "csv";
    }
    return "?";
}

struct ProblemConfig {
    ProblemKind kind = ProblemKind::synth_fgr;
    std::size_t n_samples = 200;
    std::size_t time_points = 100;      // synth_fgr
    std::size_t lhs_iterations = 1000;
    std::string path;                   // csv
    std::vector<std::string> inputs;    // csv
    std::vector<std::string> outputs;   // csv
};

struct McdConfig {
    double dropout = 0.4;
    double predict_dropout = 0.4;  // defaults to the training ratio
    bool predict_dropout_overridden = false;
    std::size_t samples = 200;
    DropoutScaling scaling = DropoutScaling::inverted;
};

struct DeConfig {
    std::size_t members = 5;
};

struct BnnConfig {
    PriorSpec prior;
    std::size_t samples = 200;
    std::size_t n_mc = 1;
};

// Per-response hyperparameter exceptions (e.g. a different learning rate
// or hidden activation for one response).
struct ResponseOverride {
    std::optional<double> learning_rate;
    std::optional<Activation> activation;
};

struct PcaConfig {
    bool enabled = false;
    double threshold = 0.99;
    std::size_t propagation_samples = 500;
};

struct RunConfig {
    ProblemConfig problem;
    UqSource method = UqSource::mcd;
    std::vector<std::size_t> hidden;
    Activation activation = Activation::relu;
    ObjectiveKind objective = ObjectiveKind::mse;
    TrainConfig train;
    McdConfig mcd;
    DeConfig de;
    BnnConfig bnn;
    PcaConfig pca;
    bool standardize_outputs = true;
    std::map<std::string, ResponseOverride> overrides;
    std::uint64_t seed = 0;
    std::string out;

    std::vector<LayerSpec> architecture(std::size_t n_responses = 1) const {
        std::vector<LayerSpec> arch;
        for (std::size_t w : hidden) arch.push_back({w, activation});
        const std::size_t out_width =
            objective == ObjectiveKind::nll ? 2 * n_responses : n_responses;
        arch.push_back({out_width, Activation::linear});
        return arch;
    }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + scope + it.key() + "'");
}

inline const json& require_key(const json& obj, const std::string& key,
                               const std::string& scope) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("config: missing required key '" + scope + key + "'");
    return *it;
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& scope) {
    try {
        return require_key(obj, key, scope).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: key '" + scope + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& scope, T fallback) {
    if (!obj.contains(key)) return fallback;
    return get_as<T>(obj, key, scope);
}

inline PriorSpec parse_prior(const json& j, const std::string& scope) {
    if (!j.is_object()) throw ConfigError("config: '" + scope + "' must be an object");
    reject_unknown_keys(j, {"kind", "sigma", "pi", "sigma1", "sigma2"}, scope + ".");
    PriorSpec prior;
    const std::string kind = get_or<std::string>(j, "kind", scope + ".", "gaussian");
    if (kind == "gaussian") {
        prior.kind = PriorKind::gaussian;
        prior.sigma = get_or<double>(j, "sigma", scope + ".", 1.0);
    } else if (kind == "scale_mixture") {
        prior.kind = PriorKind::scale_mixture;
        prior.pi = get_or<double>(j, "pi", scope + ".", 0.5);
        prior.sigma1 = get_or<double>(j, "sigma1", scope + ".", 1.0);
        prior.sigma2 = get_or<double>(j, "sigma2", scope + ".", 0.1);
    } else {
        throw ConfigError("config: '" + scope + ".kind' must be gaussian or scale_mixture");
    }
    try {
        prior.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("config: '" + scope + "': " + e.what());
    }
    return prior;
}

} // namespace detail

// Parses and fully validates a run configuration; every failure names the
// offending key. Unknown keys are rejected.
inline RunConfig parse_run_config(const json& root) {
    using detail::get_as;
    using detail::get_or;
    using detail::reject_unknown_keys;
    using detail::require_key;

    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(root,
                        {"problem", "method", "architecture", "objective", "train", "mcd", "de",
                         "bnn", "pca", "standardize_outputs", "overrides", "seed", "out"},
                        "");

    RunConfig cfg;

    const json& problem = require_key(root, "problem", "");
    if (!problem.is_object()) throw ConfigError("config: 'problem' must be an object");
    reject_unknown_keys(problem,
                        {"kind", "n_samples", "time_points", "lhs_iterations", "path", "inputs",
                         "outputs"},
                        "problem.");
    const std::string kind = get_as<std::string>(problem, "kind", "problem.");
    if (kind == "synth_fgr")
        cfg.problem.kind = ProblemKind::synth_fgr;
    else if (kind == "synth_void")
        cfg.problem.kind = ProblemKind::synth_void;
    else if (kind == "csv")
        cfg.problem.kind = ProblemKind::csv;
    else
        throw ConfigError("config: 'problem.kind' must be synth_fgr, synth_void or csv");
    cfg.problem.n_samples = get_or<std::size_t>(problem, "n_samples", "problem.", 200);
    cfg.problem.time_points = get_or<std::size_t>(problem, "time_points", "problem.", 100);
    cfg.problem.lhs_iterations = get_or<std::size_t>(problem, "lhs_iterations", "problem.", 1000);
    if (cfg.problem.n_samples < 1)
        throw ConfigError("config: 'problem.n_samples' must be >= 1");
    if (cfg.problem.lhs_iterations < 1)
        throw ConfigError("config: 'problem.lhs_iterations' must be >= 1");
    if (cfg.problem.kind == ProblemKind::csv) {
        cfg.problem.path = get_as<std::string>(problem, "path", "problem.");
        cfg.problem.inputs = get_as<std::vector<std::string>>(problem, "inputs", "problem.");
        cfg.problem.outputs = get_as<std::vector<std::string>>(problem, "outputs", "problem.");
        if (cfg.problem.inputs.empty())
            throw ConfigError("config: 'problem.inputs' must not be empty");
        if (cfg.problem.outputs.empty())
            throw ConfigError("config: 'problem.outputs' must not be empty");
    }

    const std::string method = get_as<std::string>(root, "method", "");
    if (method == "mcd")
        cfg.method = UqSource::mcd;
    else if (method == "de")
        cfg.method = UqSource::de;
    else if (method == "bnn")
        cfg.method = UqSource::bnn;
    else
        throw ConfigError("config: 'method' must be mcd, de or bnn");

    const json& arch = require_key(root, "architecture", "");
    if (!arch.is_object()) throw ConfigError("config: 'architecture' must be an object");
    reject_unknown_keys(arch, {"hidden", "activation"}, "architecture.");
    cfg.hidden = get_as<std::vector<std::size_t>>(arch, "hidden", "architecture.");
    if (cfg.hidden.empty()) throw ConfigError("config: 'architecture.hidden' must not be empty");
    for (std::size_t w : cfg.hidden)
        if (w < 1) throw ConfigError("config: 'architecture.hidden' contains a zero width");
    try {
        cfg.activation =
            activation_from_string(get_as<std::string>(arch, "activation", "architecture."));
    } catch (const ConfigError&) {
        throw ConfigError("config: 'architecture.activation' must be relu, tanh, sigmoid or linear");
    }

    const std::string default_obj = cfg.method == UqSource::mcd ? "mse" : "nll";
    const std::string obj_name = get_or<std::string>(root, "objective", "", default_obj);
    try {
        cfg.objective = objective_from_string(obj_name);
    } catch (const ConfigError&) {
        throw ConfigError("config: 'objective' must be mse or nll");
    }
    if (cfg.method != UqSource::mcd && cfg.objective != ObjectiveKind::nll)
        throw ConfigError("config: 'objective' must be nll for method " + method);
    if (cfg.method == UqSource::mcd && cfg.objective != ObjectiveKind::mse)
        throw ConfigError("config: 'objective' must be mse for method mcd");

    const json& train = require_key(root, "train", "");
    if (!train.is_object()) throw ConfigError("config: 'train' must be an object");
    reject_unknown_keys(
        train, {"learning_rate", "epochs", "batch_size", "optimizer", "l2_lambda", "split"},
        "train.");
    cfg.train.learning_rate = get_as<double>(train, "learning_rate", "train.");
    if (!(cfg.train.learning_rate >= 0.0))
        throw ConfigError("config: 'train.learning_rate' must be nonnegative");
    cfg.train.epochs = get_as<std::size_t>(train, "epochs", "train.");
    if (cfg.train.epochs < 1) throw ConfigError("config: 'train.epochs' must be >= 1");
    cfg.train.batch_size = get_as<std::size_t>(train, "batch_size", "train.");
    if (cfg.train.batch_size < 1) throw ConfigError("config: 'train.batch_size' must be >= 1");
    try {
        cfg.train.optimizer =
            optimizer_from_string(get_or<std::string>(train, "optimizer", "train.", "adam"));
    } catch (const ConfigError&) {
        throw ConfigError("config: 'train.optimizer' must be sgd or adam");
    }
    cfg.train.l2_lambda = get_or<double>(train, "l2_lambda", "train.", 0.0);
    if (cfg.train.l2_lambda < 0.0)
        throw ConfigError("config: 'train.l2_lambda' must be nonnegative");
    const auto split = get_as<std::vector<double>>(train, "split", "train.");
    if (split.size() != 3)
        throw ConfigError("config: 'train.split' must list [train, val, test] fractions");
    cfg.train.split = {split[0], split[1], split[2]};
    for (double f : split)
        if (!(f > 0.0 && f < 1.0))
            throw ConfigError("config: 'train.split' fractions must lie in (0, 1)");
    if (std::abs(split[0] + split[1] + split[2] - 1.0) > 1e-9)
        throw ConfigError("config: 'train.split' fractions must sum to 1");

    if (cfg.method == UqSource::mcd) {
        const json& mcd = require_key(root, "mcd", "");
        reject_unknown_keys(mcd, {"dropout", "predict_dropout", "samples", "scaling"}, "mcd.");
        cfg.mcd.dropout = get_as<double>(mcd, "dropout", "mcd.");
        if (!(cfg.mcd.dropout > 0.0 && cfg.mcd.dropout < 1.0))
            throw ConfigError("config: 'mcd.dropout' must lie strictly inside (0, 1)");
        cfg.mcd.predict_dropout_overridden = mcd.contains("predict_dropout");
        cfg.mcd.predict_dropout =
            get_or<double>(mcd, "predict_dropout", "mcd.", cfg.mcd.dropout);
        if (!(cfg.mcd.predict_dropout > 0.0 && cfg.mcd.predict_dropout < 1.0))
            throw ConfigError("config: 'mcd.predict_dropout' must lie strictly inside (0, 1)");
        cfg.mcd.samples = get_or<std::size_t>(mcd, "samples", "mcd.", 200);
        if (cfg.mcd.samples < 2) throw ConfigError("config: 'mcd.samples' must be >= 2");
        const std::string scaling = get_or<std::string>(mcd, "scaling", "mcd.", "inverted");
        if (scaling == "inverted")
            cfg.mcd.scaling = DropoutScaling::inverted;
        else if (scaling == "sqrt_width")
            cfg.mcd.scaling = DropoutScaling::sqrt_width;
        else
            throw ConfigError("config: 'mcd.scaling' must be inverted or sqrt_width");
    }
    if (cfg.method == UqSource::de) {
        const json& de = require_key(root, "de", "");
        reject_unknown_keys(de, {"members"}, "de.");
        cfg.de.members = get_as<std::size_t>(de, "members", "de.");
        if (cfg.de.members < 2) throw ConfigError("config: 'de.members' must be >= 2");
    }
    if (cfg.method == UqSource::bnn) {
        const json& bnn = require_key(root, "bnn", "");
        reject_unknown_keys(bnn, {"prior", "samples", "n_mc"}, "bnn.");
        cfg.bnn.prior = detail::parse_prior(require_key(bnn, "prior", "bnn."), "bnn.prior");
        cfg.bnn.samples = get_or<std::size_t>(bnn, "samples", "bnn.", 200);
        if (cfg.bnn.samples < 2) throw ConfigError("config: 'bnn.samples' must be >= 2");
        cfg.bnn.n_mc = get_or<std::size_t>(bnn, "n_mc", "bnn.", 1);
        if (cfg.bnn.n_mc < 1) throw ConfigError("config: 'bnn.n_mc' must be >= 1");
    }

    if (root.contains("pca")) {
        const json& pca = root["pca"];
        if (!pca.is_object()) throw ConfigError("config: 'pca' must be an object");
        reject_unknown_keys(pca, {"enabled", "threshold", "propagation_samples"}, "pca.");
        cfg.pca.enabled = get_or<bool>(pca, "enabled", "pca.", false);
        cfg.pca.threshold = get_or<double>(pca, "threshold", "pca.", 0.99);
        if (!(cfg.pca.threshold > 0.0 && cfg.pca.threshold <= 1.0))
            throw ConfigError("config: 'pca.threshold' must lie in (0, 1]");
        cfg.pca.propagation_samples =
            get_or<std::size_t>(pca, "propagation_samples", "pca.", 500);
        if (cfg.pca.propagation_samples < 2)
            throw ConfigError("config: 'pca.propagation_samples' must be >= 2");
    }

    cfg.standardize_outputs = get_or<bool>(root, "standardize_outputs", "", true);

    if (root.contains("overrides")) {
        const json& overrides = root["overrides"];
        if (!overrides.is_object()) throw ConfigError("config: 'overrides' must be an object");
        for (auto it = overrides.begin(); it != overrides.end(); ++it) {
            const std::string scope = "overrides." + it.key() + ".";
            if (!it.value().is_object())
                throw ConfigError("config: 'overrides." + it.key() + "' must be an object");
            reject_unknown_keys(it.value(), {"learning_rate", "activation"}, scope);
            ResponseOverride ov;
            if (it.value().contains("learning_rate")) {
                ov.learning_rate = get_as<double>(it.value(), "learning_rate", scope);
                if (!(*ov.learning_rate >= 0.0))
                    throw ConfigError("config: '" + scope + "learning_rate' must be nonnegative");
            }
            if (it.value().contains("activation")) {
                try {
                    ov.activation = activation_from_string(
                        get_as<std::string>(it.value(), "activation", scope));
                } catch (const ConfigError&) {
                    throw ConfigError("config: '" + scope + "activation' is not a valid activation");
                }
            }
            cfg.overrides[it.key()] = ov;
        }
    }

    cfg.seed = get_as<std::uint64_t>(root, "seed", "");
    cfg.train.seed = cfg.seed;
    cfg.out = get_or<std::string>(root, "out", "", "");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_run_config(j);
}

} // namespace uqsurro
