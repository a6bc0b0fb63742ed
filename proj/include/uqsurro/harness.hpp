#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "uqsurro/artifacts.hpp"
#include "uqsurro/bnn.hpp"
#include "uqsurro/config.hpp"
#include "uqsurro/data.hpp"
#include "uqsurro/ensemble.hpp"
#include "uqsurro/mcd.hpp"
#include "uqsurro/pca.hpp"
#include "uqsurro/report.hpp"
#include "uqsurro/train.hpp"

namespace uqsurro {

namespace fs = std::filesystem;

// File layout of a run directory.
struct RunPaths {
    fs::path root;

    fs::path dataset() const { return root / "dataset.csv"; }
    fs::path manifest() const { return root / "manifest.json"; }
    fs::path pca_dir() const { return root / "pca"; }
    fs::path pca_model() const { return pca_dir() / "pca.json"; }
    fs::path variance_decay() const { return pca_dir() / "variance_decay.csv"; }
    fs::path scores() const { return pca_dir() / "scores.csv"; }
    fs::path models_dir() const { return root / "models"; }
    fs::path partition_file() const { return models_dir() / "partition.csv"; }
    fs::path model_dir(const std::string& response) const { return models_dir() / response; }
    fs::path uq_dir() const { return root / "uq"; }
    fs::path report_rows() const { return uq_dir() / "report.csv"; }
    fs::path summary() const { return uq_dir() / "summary.json"; }
    fs::path curve_bands() const { return uq_dir() / "curve_bands.csv"; }
    fs::path report_dir() const { return root / "report"; }
};

namespace detail {

inline std::string padded_index(std::size_t i, std::size_t width) {
    std::string s = std::to_string(i);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
}

inline InputSchema schema_for(const ProblemConfig& problem) {
    switch (problem.kind) {
        case ProblemKind::synth_fgr: return fgr_input_schema();
        case ProblemKind::synth_void: return void_input_schema();
        case ProblemKind::csv:
            throw ConfigError("generate: problem kind 'csv' has no synthetic oracle");
    }
    throw ConfigError("generate: unknown problem kind");
}

inline std::vector<std::string> schema_names(const InputSchema& schema) {
    std::vector<std::string> names;
    for (const InputVar& v : schema) names.push_back(v.name);
    return names;
}

} // namespace detail

// ---------------------------------------------------------------------------
// generate: design of experiments + synthetic oracle evaluation

inline void cmd_generate(const RunConfig& cfg, const fs::path& out_dir, bool force) {
    RunPaths paths{out_dir};
    if (fs::exists(paths.dataset()) && !force)
        throw ConfigError("generate: '" + paths.dataset().string() +
                          "' already exists (use --force to overwrite)");
    const InputSchema schema = detail::schema_for(cfg.problem);
    fs::create_directories(out_dir);

    RngStream master(cfg.seed);
    RngStream design_rng = master.fork("design");
    const Matrix design =
        maximin_lhs(cfg.problem.n_samples, schema, cfg.problem.lhs_iterations, design_rng);

    Matrix outputs;
    std::vector<std::string> output_names;
    json manifest;
    manifest["schema_version"] = artifact_schema_version;
    manifest["seed"] = cfg.seed;
    manifest["problem"] = to_string(cfg.problem.kind);
    manifest["n_samples"] = cfg.problem.n_samples;
    manifest["lhs_iterations"] = cfg.problem.lhs_iterations;
    manifest["oracle_version"] = synth_oracle_version;

    if (cfg.problem.kind == ProblemKind::synth_fgr) {
        const std::vector<double> grid = fgr_time_grid(cfg.problem.time_points);
        outputs = synth_fgr(design, grid);
        for (std::size_t j = 0; j < grid.size(); ++j)
            output_names.push_back("fgr_t" + detail::padded_index(j, 3));
        manifest["time_grid"] = grid;
        manifest["curve_outputs"] = true;
    } else {
        outputs = synth_voidfraction(design);
        output_names = void_output_names();
        manifest["curve_outputs"] = false;
    }
    manifest["inputs"] = detail::schema_names(schema);
    manifest["outputs"] = output_names;

    const Dataset ds = make_dataset(detail::schema_names(schema), output_names, design, outputs);
    save_dataset(paths.dataset().string(), ds);
    write_json_file(paths.manifest(), manifest);
}

namespace detail {

inline json load_manifest(const RunPaths& paths) {
    if (!fs::exists(paths.manifest()))
        throw DataError("run is missing '" + paths.manifest().string() + "' (run generate first)");
    return read_json_file(paths.manifest());
}

inline Dataset load_run_dataset(const RunConfig& cfg, const RunPaths& paths,
                                const json& manifest) {
    if (cfg.problem.kind == ProblemKind::csv)
        return load_dataset(cfg.problem.path, cfg.problem.inputs, cfg.problem.outputs);
    return load_dataset(paths.dataset().string(),
                        manifest.at("inputs").get<std::vector<std::string>>(),
                        manifest.at("outputs").get<std::vector<std::string>>());
}

} // namespace detail

// ---------------------------------------------------------------------------
// pca: fit + variance table + scores (the new training targets)

inline void cmd_pca(const RunConfig& cfg, const fs::path& out_dir) {
    RunPaths paths{out_dir};
    json manifest;
    Dataset ds;
    if (cfg.problem.kind == ProblemKind::csv) {
        ds = detail::load_run_dataset(cfg, paths, manifest);
        fs::create_directories(out_dir);
    } else {
        manifest = detail::load_manifest(paths);
        if (!manifest.value("curve_outputs", false))
            throw ConfigError("pca: problem '" + manifest.at("problem").get<std::string>() +
                              "' does not produce curve outputs");
        ds = detail::load_run_dataset(cfg, paths, manifest);
    }

    // rows are responses (time points), columns are samples
    Matrix data(ds.outputs.cols, ds.outputs.rows);
    for (std::size_t r = 0; r < ds.outputs.rows; ++r)
        for (std::size_t c = 0; c < ds.outputs.cols; ++c) data(c, r) = ds.outputs(r, c);

    const PcaModel model = fit_pca(data, cfg.pca.threshold);
    fs::create_directories(paths.pca_dir());
    write_json_file(paths.pca_model(), pca_to_json(model));

    // variance decay table
    {
        std::string out = "pc_index,variance,fraction,cumulative_fraction\n";
        const std::vector<double> fractions = model.explained_fractions();
        double cum = 0.0;
        for (std::size_t k = 0; k < model.pc_variances.size(); ++k) {
            cum += fractions[k];
            out += std::to_string(k + 1) + ',' + format_double(model.pc_variances[k]) + ',' +
                   format_double(fractions[k]) + ',' + format_double(cum) + '\n';
        }
        atomic_write_file(paths.variance_decay(), out);
    }

    // per-sample PC scores
    {
        std::string out = "case_id";
        for (std::size_t k = 0; k < model.p_star; ++k) out += ",pc" + std::to_string(k + 1);
        out += '\n';
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::vector<double> scores = project(model, ds.outputs.row(i));
            out += std::to_string(i);
            for (double s : scores) out += ',' + format_double(s);
            out += '\n';
        }
        atomic_write_file(paths.scores(), out);
    }
}

namespace detail {

inline Matrix load_scores(const RunPaths& paths, std::size_t expected_rows,
                          std::vector<std::string>& names) {
    if (!fs::exists(paths.scores()))
        throw DataError("run is missing '" + paths.scores().string() + "' (run pca first)");
    std::ifstream in(paths.scores());
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    names.assign(header.begin() + 1, header.end());
    Matrix scores(expected_rows, names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (row >= expected_rows || cells.size() != names.size() + 1)
            throw DataError("scores file does not match the dataset");
        for (std::size_t k = 0; k < names.size(); ++k) scores(row, k) = std::stod(cells[k + 1]);
        ++row;
    }
    if (row != expected_rows) throw DataError("scores file does not match the dataset");
    return scores;
}

// responses to model: PC scores when PCA is enabled, raw outputs otherwise
struct ResponseSet {
    std::vector<std::string> names;
    Matrix values;  // N x n_responses
};

inline ResponseSet load_responses(const RunConfig& cfg, const RunPaths& paths,
                                  const Dataset& ds) {
    ResponseSet set;
    if (cfg.pca.enabled) {
        set.values = load_scores(paths, ds.size(), set.names);
    } else {
        set.names = ds.output_names;
        set.values = ds.outputs;
    }
    return set;
}

inline std::vector<Partition> compute_partition(const RunConfig& cfg, std::size_t n) {
    Matrix x(n, 1), y(n, 1);
    Dataset scratch = make_dataset({"__x"}, {"__y"}, std::move(x), std::move(y));
    RngStream split_rng = RngStream(cfg.seed).fork("split");
    split(scratch, cfg.train.split, split_rng);
    return scratch.partition;
}

inline void write_partition(const RunPaths& paths, const std::vector<Partition>& partition) {
    std::string out = "case_id,partition\n";
    for (std::size_t i = 0; i < partition.size(); ++i)
        out += std::to_string(i) + ',' + to_string(partition[i]) + '\n';
    atomic_write_file(paths.partition_file(), out);
}

inline std::vector<Partition> read_partition(const RunPaths& paths, std::size_t expected) {
    if (!fs::exists(paths.partition_file()))
        throw DataError("run is missing '" + paths.partition_file().string() +
                        "' (run train first)");
    std::ifstream in(paths.partition_file());
    std::string line;
    std::getline(in, line);
    std::vector<Partition> partition;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) throw DataError("malformed partition file");
        if (cells[1] == "train")
            partition.push_back(Partition::train);
        else if (cells[1] == "val")
            partition.push_back(Partition::val);
        else if (cells[1] == "test")
            partition.push_back(Partition::test);
        else
            throw DataError("malformed partition file: tag '" + cells[1] + "'");
    }
    if (partition.size() != expected)
        throw DataError("partition file does not match the dataset size");
    return partition;
}

inline void write_trainlog(const fs::path& path, const TrainLog& log) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < log.train_loss.size(); ++e)
        out += std::to_string(e + 1) + ',' + format_double(log.train_loss[e]) + ',' +
               format_double(log.val_loss[e]) + '\n';
    atomic_write_file(path, out);
}

// Per-response training view: standardized inputs, one standardized target
// column, shared partition.
inline Dataset response_dataset(const Dataset& ds, const ResponseSet& responses,
                                std::size_t r_idx, const std::vector<Partition>& partition,
                                bool scale_target, ResponseScaler& scaler) {
    Matrix y(ds.size(), 1);
    for (std::size_t i = 0; i < ds.size(); ++i) y(i, 0) = responses.values(i, r_idx);
    Dataset view = make_dataset(ds.input_names, {responses.names[r_idx]}, ds.inputs, std::move(y));
    view.partition = partition;

    const Scaler s = standardize(view, scale_target);
    scaler.input_shift = s.input_shift;
    scaler.input_scale = s.input_scale;
    if (scale_target) {
        scaler.target_shift = s.output_shift[0];
        scaler.target_scale = s.output_scale[0];
    } else {
        scaler.target_shift = 0.0;
        scaler.target_scale = 1.0;
    }
    return view;
}

inline TrainConfig train_config_for(const RunConfig& cfg, const std::string& response) {
    TrainConfig t = cfg.train;
    auto it = cfg.overrides.find(response);
    if (it != cfg.overrides.end() && it->second.learning_rate) {
        t.learning_rate = *it->second.learning_rate;
    }
    return t;
}

inline std::vector<LayerSpec> arch_for(const RunConfig& cfg, const std::string& response) {
    std::vector<LayerSpec> arch = cfg.architecture(1);
    auto it = cfg.overrides.find(response);
    if (it != cfg.overrides.end() && it->second.activation) {
        for (std::size_t l = 0; l + 1 < arch.size(); ++l)
            arch[l].activation = *it->second.activation;
    }
    return arch;
}

} // namespace detail

// ---------------------------------------------------------------------------
// train: one model (or ensemble) per response / PC score

inline void cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
    RunPaths paths{out_dir};
    json manifest;
    if (cfg.problem.kind != ProblemKind::csv) manifest = detail::load_manifest(paths);
    const Dataset ds = detail::load_run_dataset(cfg, paths, manifest);
    if (cfg.pca.enabled && !fs::exists(paths.pca_model()))
        throw DataError("train: pca is enabled but '" + paths.pca_model().string() +
                        "' is missing (run pca first)");
    const detail::ResponseSet responses = detail::load_responses(cfg, paths, ds);

    const std::vector<Partition> partition = detail::compute_partition(cfg, ds.size());
    fs::create_directories(paths.models_dir());
    detail::write_partition(paths, partition);

    const RngStream master(cfg.seed);
    for (std::size_t r = 0; r < responses.names.size(); ++r) {
        const std::string& name = responses.names[r];
        const fs::path dir = paths.model_dir(name);
        fs::create_directories(dir);

        ResponseScaler scaler;
        const Dataset view = detail::response_dataset(ds, responses, r, partition,
                                                      cfg.standardize_outputs, scaler);
        write_json_file(dir / "scaler.json", scaler_to_json(scaler));

        const TrainConfig tcfg = detail::train_config_for(cfg, name);
        const std::vector<LayerSpec> arch = detail::arch_for(cfg, name);

        try {
            switch (cfg.method) {
                case UqSource::mcd: {
                    RngStream rng = master.fork("train:" + name);
                    Mlp mlp = init_mlp(ds.inputs.cols, arch, rng.next_u64());
                    DropoutTraining dropout{cfg.mcd.dropout, cfg.mcd.scaling};
                    TrainResult result = train(std::move(mlp), view, tcfg,
                                               {cfg.objective, tcfg.l2_lambda, cfg.mcd.dropout},
                                               rng, &dropout);
                    write_json_file(dir / "model.json",
                                    mlp_to_json(result.model, tcfg, cfg.objective));
                    detail::write_trainlog(dir / "trainlog.csv", result.log);
                    break;
                }
                case UqSource::de: {
                    const Ensemble ens = train_ensemble(view, arch, tcfg, cfg.de.members,
                                                        master.fork("train:" + name));
                    json ens_manifest;
                    ens_manifest["schema_version"] = artifact_schema_version;
                    ens_manifest["M"] = ens.size();
                    ens_manifest["seeds"] = ens.member_seeds;
                    ens_manifest["arch"] = layers_to_json(arch);
                    ens_manifest["objective"] = to_string(cfg.objective);
                    write_json_file(dir / "ensemble.json", ens_manifest);
                    for (std::size_t m = 0; m < ens.size(); ++m) {
                        write_json_file(dir / ("member_" + std::to_string(m) + ".json"),
                                        mlp_to_json(ens.members[m], tcfg, cfg.objective));
                        detail::write_trainlog(
                            dir / ("trainlog_member" + std::to_string(m) + ".csv"),
                            ens.logs[m]);
                    }
                    break;
                }
                case UqSource::bnn: {
                    RngStream rng = master.fork("train:" + name);
                    BnnTrainResult result =
                        train_bnn(view, arch, tcfg, cfg.bnn.prior, rng, cfg.bnn.n_mc);
                    write_json_file(dir / "bnn.json", bnn_to_json(result.model, tcfg));
                    detail::write_trainlog(dir / "trainlog.csv", result.log);
                    break;
                }
            }
        } catch (const TrainingDivergence& e) {
            throw TrainingDivergence("response " + name + " (" + to_string(cfg.method) +
                                         "): " + e.what(),
                                     e.last_finite_epoch());
        }
    }
}

// ---------------------------------------------------------------------------
// uq: predictive distributions on the test partition (+ curve bands)

inline void cmd_uq(const RunConfig& cfg, const fs::path& out_dir) {
    RunPaths paths{out_dir};
    json manifest;
    if (cfg.problem.kind != ProblemKind::csv) manifest = detail::load_manifest(paths);
    const Dataset ds = detail::load_run_dataset(cfg, paths, manifest);
    const detail::ResponseSet responses = detail::load_responses(cfg, paths, ds);
    const std::vector<Partition> partition = detail::read_partition(paths, ds.size());

    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < partition.size(); ++i)
        if (partition[i] == Partition::test) test_rows.push_back(i);
    if (test_rows.empty()) throw DataError("uq: no test rows in the partition");

    const RngStream master(cfg.seed);
    std::vector<UqRow> rows;
    // per test case, per PC: predictive gaussians for the curve stage
    std::map<std::size_t, std::vector<ScoreGaussian>> case_scores;

    for (std::size_t r = 0; r < responses.names.size(); ++r) {
        const std::string& name = responses.names[r];
        const fs::path dir = paths.model_dir(name);
        if (!fs::exists(dir / "scaler.json"))
            throw DataError("uq: missing model artifacts for response '" + name +
                            "' (run train first)");
        const ResponseScaler scaler = scaler_from_json(read_json_file(dir / "scaler.json"));
        if (scaler.input_shift.size() != ds.inputs.cols)
            throw DataError("uq: scaler for '" + name + "' does not match the dataset inputs");

        Mlp mcd_model;
        Ensemble ens;
        Bnn bnn_model;
        switch (cfg.method) {
            case UqSource::mcd:
                mcd_model = mlp_from_json(read_json_file(dir / "model.json"));
                if (mcd_model.input_dim != ds.inputs.cols)
                    throw DataError("uq: model for '" + name + "' does not match the dataset");
                break;
            case UqSource::de: {
                const json ens_manifest = read_json_file(dir / "ensemble.json");
                const std::size_t m = ens_manifest.at("M").get<std::size_t>();
                for (std::size_t i = 0; i < m; ++i)
                    ens.members.push_back(mlp_from_json(
                        read_json_file(dir / ("member_" + std::to_string(i) + ".json"))));
                break;
            }
            case UqSource::bnn:
                bnn_model = bnn_from_json(read_json_file(dir / "bnn.json"));
                break;
        }

        for (std::size_t case_id : test_rows) {
            const std::vector<double> x = scaler.transform_input(ds.inputs.row(case_id));
            PredictiveDistribution dist;
            switch (cfg.method) {
                case UqSource::mcd: {
                    McdOptions opts;
                    opts.p_d = cfg.mcd.predict_dropout;
                    opts.scaling = cfg.mcd.scaling;
                    opts.retain_samples = false;
                    dist = mcd_predict(mcd_model, x, cfg.mcd.samples, opts,
                                       master.fork("uq:" + name, case_id));
                    break;
                }
                case UqSource::de:
                    dist = ensemble_predict(ens, x);
                    break;
                case UqSource::bnn:
                    dist = bnn_predict(bnn_model, x, cfg.bnn.samples,
                                       master.fork("uq:" + name, case_id), false);
                    break;
            }
            // back to raw response units
            const double mean = dist.mean[0] * scaler.target_scale + scaler.target_shift;
            const double variance =
                dist.variance[0] * scaler.target_scale * scaler.target_scale;
            const double reference = responses.values(case_id, r);
            rows.push_back(make_uq_row(case_id, name, to_string(cfg.method), mean, variance,
                                       reference));
            if (cfg.pca.enabled) case_scores[case_id].push_back({mean, variance});
        }
    }

    fs::create_directories(paths.uq_dir());
    write_uq_rows(paths.report_rows(), rows);

    json summary;
    summary["method"] = to_string(cfg.method);
    summary["seed"] = cfg.seed;
    summary["n_test_cases"] = test_rows.size();
    json meta;
    switch (cfg.method) {
        case UqSource::mcd:
            meta["samples"] = cfg.mcd.samples;
            meta["dropout_train"] = cfg.mcd.dropout;
            meta["dropout_predict"] = cfg.mcd.predict_dropout;
            meta["dropout_predict_overridden"] = cfg.mcd.predict_dropout_overridden;
            break;
        case UqSource::de:
            meta["members"] = cfg.de.members;
            break;
        case UqSource::bnn:
            meta["samples"] = cfg.bnn.samples;
            break;
    }
    summary["uq"] = meta;
    summary["responses"] = summaries_to_json(rows);
    write_json_file(paths.summary(), summary);

    // reverse-PCA curve bands: sample PC-score gaussians, reconstruct, reduce
    if (cfg.pca.enabled) {
        const PcaModel pca = pca_from_json(read_json_file(paths.pca_model()));
        std::string out = "case_id,method,t_index,mean,std,reference\n";
        for (std::size_t case_id : test_rows) {
            const CurveBand band =
                propagate_uncertainty(pca, case_scores.at(case_id), cfg.pca.propagation_samples,
                                      master.fork("uq-curve", case_id));
            for (std::size_t t = 0; t < band.mean.size(); ++t)
                out += std::to_string(case_id) + ',' + to_string(cfg.method) + ',' +
                       std::to_string(t) + ',' + format_double(band.mean[t]) + ',' +
                       format_double(band.std_dev[t]) + ',' +
                       format_double(ds.outputs(case_id, t)) + '\n';
        }
        atomic_write_file(paths.curve_bands(), out);
    }
}

// ---------------------------------------------------------------------------
// report: tidy plot-ready tables, merged over one run or a directory of runs

inline void cmd_report(const fs::path& run_dir) {
    RunPaths paths{run_dir};

    // collect report files from this run and any immediate child runs
    std::vector<fs::path> uq_files;
    if (fs::exists(paths.report_rows())) uq_files.push_back(paths.report_rows());
    std::vector<fs::path> children;
    if (fs::exists(run_dir))
        for (const auto& entry : fs::directory_iterator(run_dir))
            if (entry.is_directory() && fs::exists(entry.path() / "uq" / "report.csv"))
                children.push_back(entry.path());
    std::sort(children.begin(), children.end());
    for (const fs::path& child : children) uq_files.push_back(child / "uq" / "report.csv");

    if (uq_files.empty()) {
        std::string missing = paths.report_rows().string();
        throw DataError("report: incomplete run, missing artifacts: " + missing);
    }

    std::vector<UqRow> rows;
    for (const fs::path& f : uq_files) {
        const std::vector<UqRow> part = read_uq_rows(f);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const UqRow& a, const UqRow& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.response != b.response) return a.response < b.response;
        return a.case_id < b.case_id;
    });

    fs::create_directories(paths.report_dir());
    write_uq_rows(paths.report_dir() / "errorbars.csv", rows);

    // method-comparison summary: one row per (method, response) plus pools
    {
        std::map<std::pair<std::string, std::string>, std::vector<const UqRow*>> groups;
        for (const UqRow& r : rows) {
            groups[{r.method, r.response}].push_back(&r);
            groups[{r.method, "(all)"}].push_back(&r);
        }
        std::string out = "method,response,n,rmse,mean_std,coverage68,coverage95\n";
        for (const auto& [key, group] : groups) {
            const UqSummary s = summarize_rows(group);
            out += key.first + ',' + key.second + ',' + std::to_string(s.n) + ',' +
                   format_double(s.rmse) + ',' + format_double(s.mean_std) + ',' +
                   format_double(s.coverage68) + ',' + format_double(s.coverage95) + '\n';
        }
        atomic_write_file(paths.report_dir() / "summary.csv", out);
    }

    // copy through the variance-decay table and curve bands where present
    auto copy_if_exists = [&](const fs::path& src, const std::string& dst_name) {
        std::vector<fs::path> sources;
        if (fs::exists(src)) sources.push_back(src);
        for (const fs::path& child : children) {
            const fs::path candidate = child / fs::relative(src, run_dir);
            if (fs::exists(candidate)) sources.push_back(candidate);
        }
        if (sources.empty()) return;
        std::ifstream in(sources.front(), std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        atomic_write_file(paths.report_dir() / dst_name, content);
    };
    copy_if_exists(paths.variance_decay(), "variance_decay.csv");

    // curve bands merge across runs (they carry a method column)
    {
        std::vector<fs::path> band_files;
        if (fs::exists(paths.curve_bands())) band_files.push_back(paths.curve_bands());
        for (const fs::path& child : children)
            if (fs::exists(child / "uq" / "curve_bands.csv"))
                band_files.push_back(child / "uq" / "curve_bands.csv");
        if (!band_files.empty()) {
            std::string out = "case_id,method,t_index,mean,std,reference\n";
            for (const fs::path& f : band_files) {
                std::ifstream in(f);
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line))
                    if (!line.empty()) out += line + '\n';
            }
            atomic_write_file(paths.report_dir() / "curve_bands.csv", out);
        }
    }
}

// Convenience driver used by tests: the full stage sequence on one config.
inline void run_pipeline(const RunConfig& cfg, const fs::path& out_dir, bool force = true) {
    cmd_generate(cfg, out_dir, force);
    if (cfg.pca.enabled) cmd_pca(cfg, out_dir);
    cmd_train(cfg, out_dir);
    cmd_uq(cfg, out_dir);
    cmd_report(out_dir);
}

} // namespace uqsurro
