#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "uqsurro/config.hpp"

using namespace uqsurro;

namespace {
const std::string bad_configs = std::string(UQSURRO_TEST_DIR) + "/fixtures/bad_configs";
const std::string shipped = std::string(UQSURRO_TEST_DIR) + "/../configs";
} // namespace

TEST_CASE("every malformed fixture is rejected with the offending key named", "[config]") {
    const std::pair<const char*, const char*> corpus[] = {
        {"missing_method.json", "method"},
        {"bad_split_sum.json", "train.split"},
        {"zero_width_layer.json", "architecture.hidden"},
        {"missing_mcd_block.json", "mcd"},
        {"bad_threshold.json", "pca.threshold"},
        {"unknown_key.json", "frobnicate"},
        {"bad_activation.json", "architecture.activation"},
        {"negative_lr.json", "train.learning_rate"},
        {"missing_problem_kind.json", "problem.kind"},
        {"m_too_small.json", "de.members"},
        {"bad_dropout.json", "mcd.dropout"},
        {"bad_method.json", "method"},
        {"csv_missing_columns.json", "problem.inputs"},
    };
    for (const auto& [file, key] : corpus) {
        INFO(file);
        try {
            load_run_config(bad_configs + "/" + file);
            FAIL("expected ConfigError for " << file);
        } catch (const ConfigError& e) {
            INFO(e.what());
            REQUIRE(std::string(e.what()).find(key) != std::string::npos);
        }
    }
}

TEST_CASE("shipped default configs parse and carry the published values", "[config]") {
    const RunConfig mcd = load_run_config(shipped + "/bison_mcd.json");
    REQUIRE(mcd.method == UqSource::mcd);
    REQUIRE(mcd.hidden == std::vector<std::size_t>{200, 500, 500, 200});
    REQUIRE(mcd.activation == Activation::relu);
    REQUIRE(mcd.objective == ObjectiveKind::mse);
    REQUIRE(mcd.train.learning_rate == 0.0002);
    REQUIRE(mcd.train.epochs == 2000);
    REQUIRE(mcd.train.batch_size == 20);
    REQUIRE(mcd.train.split.train == 0.85);
    REQUIRE(mcd.train.split.val == 0.05);
    REQUIRE(mcd.train.split.test == 0.10);
    REQUIRE(mcd.mcd.dropout == 0.4);
    REQUIRE(mcd.mcd.samples == 200);
    REQUIRE(mcd.problem.n_samples == 200);
    REQUIRE(mcd.problem.lhs_iterations == 1000);
    REQUIRE(mcd.pca.enabled);
    REQUIRE(mcd.pca.threshold == 0.99);
    REQUIRE(mcd.pca.propagation_samples == 500);

    const RunConfig de = load_run_config(shipped + "/bison_de.json");
    REQUIRE(de.hidden == std::vector<std::size_t>{50, 100, 100, 50});
    REQUIRE(de.activation == Activation::tanh);
    REQUIRE(de.objective == ObjectiveKind::nll);
    REQUIRE(de.de.members == 5);
    REQUIRE(de.train.learning_rate == 0.0004);
    REQUIRE(de.train.batch_size == 32);
    // the output layer has width 2 per scalar response for the NLL head
    REQUIRE(de.architecture(1).back().width == 2);

    const RunConfig bnn = load_run_config(shipped + "/bison_bnn.json");
    REQUIRE(bnn.hidden == std::vector<std::size_t>{10, 10, 10});
    REQUIRE(bnn.train.learning_rate == 0.001);
    REQUIRE(bnn.train.epochs == 1000);
    REQUIRE(bnn.train.batch_size == 5);
    REQUIRE(bnn.bnn.samples == 200);

    const RunConfig tmcd = load_run_config(shipped + "/trace_mcd.json");
    REQUIRE(tmcd.problem.n_samples == 2580);
    REQUIRE(tmcd.train.split.train == 0.70);
    REQUIRE(tmcd.overrides.at("VoidF1").learning_rate == 0.001);

    const RunConfig tde = load_run_config(shipped + "/trace_de.json");
    REQUIRE(tde.overrides.at("VoidF1").learning_rate == 0.00025);
    REQUIRE(tde.overrides.at("VoidF2").learning_rate == 0.00075);

    const RunConfig tbnn = load_run_config(shipped + "/trace_bnn.json");
    REQUIRE(tbnn.overrides.at("VoidF1").activation == Activation::tanh);
    REQUIRE(tbnn.overrides.at("VoidF3").activation == Activation::relu);
    REQUIRE(tbnn.overrides.at("VoidF3").learning_rate == 0.002);
}

TEST_CASE("objective defaults follow the method", "[config]") {
    json j = read_json_file(shipped + "/bison_de.json");
    j.erase("objective");
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.objective == ObjectiveKind::nll);

    // wrong pairing is rejected
    j["objective"] = "mse";
    REQUIRE_THROWS_AS(parse_run_config(j), ConfigError);
}

TEST_CASE("architecture builds the right output widths", "[config]") {
    const RunConfig mcd = load_run_config(shipped + "/bison_mcd.json");
    const auto arch = mcd.architecture(1);
    REQUIRE(arch.size() == 5);
    REQUIRE(arch.back().width == 1);
    REQUIRE(arch.back().activation == Activation::linear);
    for (std::size_t l = 0; l + 1 < arch.size(); ++l)
        REQUIRE(arch[l].activation == Activation::relu);
}
