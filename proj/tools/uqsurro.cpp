// uqsurro: batch harness for neural-surrogate uncertainty quantification.
//
// Subcommands drive the pipeline stage by stage:
//   generate  design-of-experiments sampling + synthetic oracle outputs
//   pca       dimensionality reduction of curve outputs, variance table, scores
//   train     one model (or ensemble) per response / PC score
//   uq        predictive distributions + coverage summary (+ curve bands)
//   report    tidy plot-ready tables, mergeable across method runs
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 training divergence.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "uqsurro/config.hpp"
#include "uqsurro/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

uqsurro::RunConfig load_config(const CommonOpts& opts) {
    uqsurro::RunConfig cfg = uqsurro::load_run_config(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.train.seed = *opts.seed;
    }
    if (!opts.out_dir.empty()) cfg.out = opts.out_dir;
    if (cfg.out.empty())
        throw uqsurro::ConfigError("config: no output directory (set 'out' or pass --out)");
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_force = false) {
    cmd->add_option("--config", opts.config_path, "run configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config 'out')");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config 'seed')");
    if (with_force) cmd->add_flag("--force", opts.force, "overwrite existing outputs");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural-surrogate uncertainty quantification harness"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string report_dir;

    CLI::App* generate = app.add_subcommand("generate", "sample a design and run the oracle");
    add_common(generate, opts, true);
    CLI::App* pca = app.add_subcommand("pca", "fit PCA on curve outputs and emit scores");
    add_common(pca, opts);
    CLI::App* train = app.add_subcommand("train", "train one model per response");
    add_common(train, opts);
    CLI::App* uq = app.add_subcommand("uq", "predictive distributions on the test partition");
    add_common(uq, opts);

    CLI::App* report = app.add_subcommand("report", "emit tidy report tables for a run");
    report->add_option("run_dir", report_dir, "run directory (or parent of several runs)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*generate) {
            const uqsurro::RunConfig cfg = load_config(opts);
            uqsurro::cmd_generate(cfg, cfg.out, opts.force);
            std::cout << "wrote dataset to " << cfg.out << "\n";
        } else if (*pca) {
            const uqsurro::RunConfig cfg = load_config(opts);
            uqsurro::cmd_pca(cfg, cfg.out);
            const uqsurro::PcaModel model = uqsurro::pca_from_json(
                uqsurro::read_json_file(uqsurro::RunPaths{cfg.out}.pca_model()));
            std::cout << "retained " << model.p_star << " of " << model.p
                      << " components (explained fraction "
                      << uqsurro::format_double(model.explained_fraction) << ")\n";
        } else if (*train) {
            const uqsurro::RunConfig cfg = load_config(opts);
            uqsurro::cmd_train(cfg, cfg.out);
            std::cout << "trained models under " << cfg.out << "/models\n";
        } else if (*uq) {
            const uqsurro::RunConfig cfg = load_config(opts);
            uqsurro::cmd_uq(cfg, cfg.out);
            std::cout << "wrote UQ report under " << cfg.out << "/uq\n";
        } else if (*report) {
            uqsurro::cmd_report(report_dir);
            std::cout << "wrote report tables under " << report_dir << "/report\n";
        }
    } catch (const uqsurro::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const uqsurro::TrainingDivergence& e) {
        std::cerr << "training divergence: " << e.what() << "\n";
        return 4;
    } catch (const uqsurro::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
