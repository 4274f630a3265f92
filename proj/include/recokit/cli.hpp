#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "recokit/config.hpp"
#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model_io.hpp"
#include "recokit/pipeline.hpp"
#include "recokit/splitters.hpp"
#include "recokit/synthetic.hpp"
#include "recokit/tuning.hpp"
#include "recokit/version.hpp"

namespace recokit {

namespace detail {

/// Translates library errors raised inside a stage into that stage's exit
/// code, mirroring run_pipeline's mapping.
template <typename F>
auto cli_stage(int code, const char* stage, F&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(code, stage, e.what());
    }
}

inline std::vector<std::string> read_user_list(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> users;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) users.push_back(line);
    }
    return users;
}

}  // namespace detail

/// argv-style entry point. Returns the process exit code; never throws.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"recokit: collaborative-filtering toolkit"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic interaction dataset CSV");
    SyntheticSpec synth_spec;
    std::vector<double> synth_range = {synth_spec.rating_min, synth_spec.rating_max};
    std::string synth_output;
    synth->add_option("--users", synth_spec.n_users, "Number of users");
    synth->add_option("--items", synth_spec.n_items, "Number of items");
    synth->add_option("--rank", synth_spec.rank, "Planted factor rank");
    synth->add_option("--density", synth_spec.density, "Observation probability per cell");
    synth->add_option("--noise-sigma", synth_spec.noise_sigma, "Gaussian rating noise");
    synth->add_option("--rating-range", synth_range, "Rating min and max")->expected(2);
    synth->add_option("--seed", synth_spec.seed, "Generator seed");
    synth->add_option("--output", synth_output, "Output CSV path")->required();

    // --- split ---
    auto* split_cmd = app.add_subcommand("split", "Split an interactions CSV into part CSVs");
    std::string split_config_path, split_input, split_output, split_method_name, split_group_name;
    std::vector<double> split_ratios;
    std::uint64_t split_seed = 0;
    std::size_t split_min_interactions = 1;
    auto* split_config_opt = split_cmd->add_option("--config", split_config_path, "Pipeline config JSON");
    auto* split_input_opt = split_cmd->add_option("--input", split_input, "Interactions CSV");
    auto* split_method_opt =
        split_cmd->add_option("--method", split_method_name, "random, chrono, or stratified");
    auto* split_ratios_opt =
        split_cmd->add_option("--ratios", split_ratios, "Part ratios, e.g. 0.8,0.2")->delimiter(',');
    auto* split_seed_opt = split_cmd->add_option("--seed", split_seed, "Base seed");
    auto* split_group_opt = split_cmd->add_option("--group-by", split_group_name, "user or item");
    auto* split_min_opt = split_cmd->add_option("--min-interactions", split_min_interactions,
                                                "Minimum group size kept out of part 0");
    std::string split_out_dir;
    split_cmd->add_option("--output", split_out_dir, "Output directory")->required();

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Fit a model on a training CSV");
    std::string train_config_path, train_input, train_algorithm, train_output;
    std::uint64_t train_seed = 0;
    auto* train_config_opt = train_cmd->add_option("--config", train_config_path, "Pipeline config JSON");
    train_cmd->add_option("--input", train_input, "Training interactions CSV")->required();
    auto* train_algo_opt =
        train_cmd->add_option("--algorithm", train_algorithm, "popularity, sar, als, or sgd_mf");
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Base seed");
    train_cmd->add_option("--output", train_output, "Output directory for model.bin")->required();

    // --- recommend ---
    auto* rec_cmd = app.add_subcommand("recommend", "Write top-k recommendations for users");
    std::string rec_model, rec_users_path, rec_output;
    int rec_k = 10;
    bool rec_include_seen = false;
    rec_cmd->add_option("--model", rec_model, "Model file")->required();
    rec_cmd->add_option("--k", rec_k, "List length");
    rec_cmd->add_flag("--include-seen", rec_include_seen, "Keep items seen in training");
    rec_cmd->add_option("--users", rec_users_path, "File with one user id per line (default: all)");
    rec_cmd->add_option("--output", rec_output, "Output recommendations CSV")->required();

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions/recommendations against truth");
    std::string eval_config_path, eval_truth, eval_preds, eval_recs, eval_model, eval_output;
    int eval_k = 10;
    double eval_threshold = 0.0;
    auto* eval_config_opt = eval_cmd->add_option("--config", eval_config_path, "Pipeline config JSON");
    eval_cmd->add_option("--truth", eval_truth, "Truth interactions CSV")->required();
    auto* eval_preds_opt = eval_cmd->add_option("--preds", eval_preds, "Predictions CSV");
    auto* eval_recs_opt = eval_cmd->add_option("--recs", eval_recs, "Recommendations CSV");
    auto* eval_model_opt =
        eval_cmd->add_option("--model", eval_model, "Model file; fills any table not given");
    auto* eval_k_opt = eval_cmd->add_option("--k", eval_k, "Ranking cutoff");
    auto* eval_thr_opt =
        eval_cmd->add_option("--relevance-threshold", eval_threshold, "Minimum relevant rating");
    eval_cmd->add_option("--output", eval_output, "Also write the metrics JSON here");

    // --- tune ---
    auto* tune_cmd = app.add_subcommand("tune", "Hyperparameter search over the config space");
    std::string tune_config_path, tune_output;
    std::uint64_t tune_seed = 0;
    unsigned tune_workers = 1;
    tune_cmd->add_option("--config", tune_config_path, "Pipeline config JSON")->required();
    auto* tune_seed_opt = tune_cmd->add_option("--seed", tune_seed, "Base seed override");
    tune_cmd->add_option("--workers", tune_workers, "Concurrent trials");
    tune_cmd->add_option("--output", tune_output, "Output directory")->required();

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "Full pipeline: data, split, train, tune, evaluate");
    std::string run_config_path, run_output;
    std::uint64_t run_seed = 0;
    unsigned run_workers = 1;
    run_cmd->add_option("--config", run_config_path, "Pipeline config JSON")->required();
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Base seed override");
    auto* run_output_opt = run_cmd->add_option("--output", run_output, "Output directory override");
    run_cmd->add_option("--workers", run_workers, "Concurrent tuning trials");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help() << std::flush;
        return 64;
    }

    try {
        if (app.got_subcommand(synth)) {
            detail::cli_stage(kStageData, "data", [&] {
                synth_spec.rating_min = synth_range[0];
                synth_spec.rating_max = synth_range[1];
                const auto data = generate_synthetic(synth_spec);
                write_interactions_csv(synth_output, data.interactions);
            });
            return 0;
        }

        if (app.got_subcommand(split_cmd)) {
            PipelineConfig cfg;
            if (split_config_opt->count()) {
                cfg = detail::cli_stage(kStageConfig, "config",
                                        [&] { return load_pipeline_config(split_config_path); });
            } else if (!split_input_opt->count()) {
                std::cerr << "split: provide --config or --input\n";
                return kStageConfig;
            }
            if (split_input_opt->count()) {
                cfg.data.path = split_input;
                cfg.data.synthetic.reset();
            }
            if (split_seed_opt->count()) cfg.seed = split_seed;
            if (split_method_opt->count()) {
                const auto m = parse_split_method(split_method_name);
                if (!m) {
                    std::cerr << "split: unknown method \"" << split_method_name << "\"\n";
                    return kStageConfig;
                }
                cfg.split.method = *m;
            }
            if (split_ratios_opt->count()) cfg.split.ratios = split_ratios;
            if (split_group_opt->count()) {
                const auto g = parse_group_by(split_group_name);
                if (!g) {
                    std::cerr << "split: unknown group-by \"" << split_group_name << "\"\n";
                    return kStageConfig;
                }
                cfg.split.group_by = *g;
            }
            if (split_min_opt->count()) cfg.split.min_interactions = split_min_interactions;
            detail::cli_stage(kStageConfig, "config", [&] {
                SplitSpec probe;
                probe.ratios = cfg.split.ratios;
                probe.min_interactions = cfg.split.min_interactions;
                validate_split_spec(probe);
            });

            const InteractionSet dataset =
                detail::cli_stage(kStageData, "data", [&]() -> InteractionSet {
                    if (cfg.data.path) return load_interactions(*cfg.data.path, cfg.data.schema);
                    return generate_synthetic(resolved_synthetic_spec(cfg)).interactions;
                });
            detail::cli_stage(kStageSplit, "split", [&] {
                std::filesystem::create_directories(split_out_dir);
                const Split split =
                    split_interactions(dataset, cfg.split.method, cfg.split.to_spec(cfg.seed));
                const auto names =
                    split.parts.size() == 2
                        ? std::vector<std::string>{"train.csv", "test.csv"}
                        : std::vector<std::string>{"train.csv", "validation.csv", "test.csv"};
                for (std::size_t p = 0; p < split.parts.size(); ++p)
                    write_interactions_csv(std::filesystem::path(split_out_dir) / names[p],
                                           split.parts[p]);
            });
            return 0;
        }

        if (app.got_subcommand(train_cmd)) {
            PipelineConfig cfg;
            if (train_config_opt->count())
                cfg = detail::cli_stage(kStageConfig, "config",
                                        [&] { return load_pipeline_config(train_config_path); });
            if (train_seed_opt->count()) cfg.seed = train_seed;
            if (train_algo_opt->count()) {
                cfg.model.algorithm = train_algorithm;
                cfg.model.params = nlohmann::json::object();
            }
            if (cfg.model.algorithm.empty()) {
                std::cerr << "train: provide --algorithm or --config with a model section\n";
                return kStageConfig;
            }
            const InteractionSet train = detail::cli_stage(kStageData, "data", [&] {
                return load_interactions(train_input, CsvSchema{});
            });
            detail::cli_stage(kStageTrain, "train", [&] {
                std::filesystem::create_directories(train_output);
                const auto model = fit_model(cfg.model.algorithm, train, cfg.model.params,
                                             derived_seed(cfg.seed, "model"));
                save_model(*model, (std::filesystem::path(train_output) / "model.bin").string());
            });
            return 0;
        }

        if (app.got_subcommand(rec_cmd)) {
            detail::cli_stage(kStageData, "data", [&] {
                const auto model = load_model(rec_model);
                std::vector<RecRow> rows;
                if (!rec_users_path.empty()) {
                    rows = recommend_rows(*model, detail::read_user_list(rec_users_path),
                                          static_cast<std::size_t>(rec_k), !rec_include_seen);
                } else {
                    rows = recommend_rows(*model, static_cast<std::size_t>(rec_k), !rec_include_seen);
                }
                write_recommendations_csv(rec_output, rows);
            });
            return 0;
        }

        if (app.got_subcommand(eval_cmd)) {
            PipelineConfig cfg;
            bool have_cfg = false;
            if (eval_config_opt->count()) {
                cfg = detail::cli_stage(kStageConfig, "config",
                                        [&] { return load_pipeline_config(eval_config_path); });
                have_cfg = true;
            }
            int k = eval_k_opt->count() ? eval_k : (have_cfg ? cfg.evaluate.k : 10);
            std::optional<double> threshold;
            if (eval_thr_opt->count())
                threshold = eval_threshold;
            else if (have_cfg)
                threshold = cfg.evaluate.relevance_threshold;
            if (!eval_preds_opt->count() && !eval_recs_opt->count() && !eval_model_opt->count()) {
                std::cerr << "evaluate: provide --preds, --recs, or --model\n";
                return kStageConfig;
            }
            const MetricReport report =
                detail::cli_stage(kStageEvaluate, "evaluate", [&]() -> MetricReport {
                    const InteractionSet truth = load_interactions(eval_truth, CsvSchema{});
                    std::optional<std::vector<ScoredPair>> preds;
                    std::optional<std::vector<RecRow>> recs;
                    if (eval_preds_opt->count()) preds = load_predictions_csv(eval_preds);
                    if (eval_recs_opt->count()) recs = load_recommendations_csv(eval_recs);
                    if (eval_model_opt->count() && (!preds || !recs)) {
                        const auto model = load_model(eval_model);
                        auto [gen_preds, gen_recs] = generate_eval_tables(*model, truth, k);
                        if (!preds) preds = std::move(gen_preds);
                        if (!recs) recs = std::move(gen_recs);
                    }
                    return evaluate_tables(truth, preds, recs, k, threshold);
                });
            const std::string text = report_to_json(report).dump(2) + "\n";
            std::cout << text << std::flush;
            if (!eval_output.empty())
                detail::cli_stage(kStageEvaluate, "evaluate",
                                  [&] { write_file_atomic(eval_output, text); });
            return 0;
        }

        if (app.got_subcommand(tune_cmd)) {
            PipelineConfig cfg = detail::cli_stage(
                kStageConfig, "config", [&] { return load_pipeline_config(tune_config_path); });
            if (tune_seed_opt->count()) cfg.seed = tune_seed;
            if (!cfg.tune) {
                std::cerr << "tune: config has no tune section\n";
                return kStageConfig;
            }
            const InteractionSet dataset =
                detail::cli_stage(kStageData, "data", [&]() -> InteractionSet {
                    if (cfg.data.path) return load_interactions(*cfg.data.path, cfg.data.schema);
                    return generate_synthetic(resolved_synthetic_spec(cfg)).interactions;
                });
            const Split split = detail::cli_stage(kStageSplit, "split", [&] {
                return split_interactions(dataset, cfg.split.method, cfg.split.to_spec(cfg.seed));
            });
            detail::cli_stage(kStageTune, "tune", [&] {
                std::filesystem::create_directories(tune_output);
                SearchOptions options;
                options.seed = cfg.tune->seed.value_or(derived_seed(cfg.seed, "tune"));
                options.budget_cap = cfg.tune->budget_cap;
                options.workers = tune_workers;
                const ParamSpace space{cfg.model.algorithm, cfg.tune->axes};
                const SearchResult result =
                    tune_model(space, cfg.tune->strategy, cfg.tune->budget, split.parts[0],
                               split.parts[1], cfg.tune->objective, options, cfg.model.params);
                std::string lines;
                for (const auto& trial : result.trials) lines += trial_to_json(trial).dump() + "\n";
                const auto dir = std::filesystem::path(tune_output);
                write_file_atomic(dir / "trials.jsonl", lines);
                const Trial& best = result.best();
                std::size_t n_failed = 0;
                for (const auto& trial : result.trials) n_failed += trial.failed ? 1 : 0;
                nlohmann::json summary;
                summary["best_trial_index"] = best.trial_index;
                summary["metric"] = best.metric;
                summary["direction"] = to_string(cfg.tune->objective.resolved_direction());
                summary["value"] = best.value;
                nlohmann::json bound = nlohmann::json::object();
                for (const auto& [name, v] : best.params) bound[name] = param_value_to_json(v);
                summary["params"] = bound;
                summary["n_trials"] = result.trials.size();
                summary["n_failed"] = n_failed;
                const std::string text = summary.dump(2) + "\n";
                write_file_atomic(dir / "tune_summary.json", text);
                std::cout << text << std::flush;
            });
            return 0;
        }

        if (app.got_subcommand(run_cmd)) {
            PipelineConfig cfg = detail::cli_stage(
                kStageConfig, "config", [&] { return load_pipeline_config(run_config_path); });
            if (run_seed_opt->count()) cfg.seed = run_seed;
            if (run_output_opt->count()) cfg.output_dir = run_output;
            const RunManifest manifest = run_pipeline(cfg, run_workers);
            std::cout << manifest_to_json(manifest).dump(2) << "\n" << std::flush;
            return 0;
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kStageConfig;
    }
    return 0;
}

/// Test-friendly wrapper: args exclude the program name.
inline int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("recokit");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace recokit
