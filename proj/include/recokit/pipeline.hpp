#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "recokit/config.hpp"
#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/io.hpp"
#include "recokit/metrics.hpp"
#include "recokit/model.hpp"
#include "recokit/model_io.hpp"
#include "recokit/models/factory.hpp"
#include "recokit/splitters.hpp"
#include "recokit/synthetic.hpp"
#include "recokit/tuning.hpp"
#include "recokit/version.hpp"

namespace recokit {

/// Stage exit codes surfaced by the CLI.
enum StageCode : int {
    kStageConfig = 1,
    kStageData = 2,
    kStageSplit = 3,
    kStageTrain = 4,
    kStageTune = 5,
    kStageEvaluate = 6,
};

/// An Error annotated with the failing stage and its process exit code.
class StageError : public Error {
public:
    StageError(int exit_code, std::string stage, const std::string& what)
        : Error(stage + " stage: " + what), exit_code_(exit_code), stage_(std::move(stage)) {}
    int exit_code() const { return exit_code_; }
    const std::string& stage() const { return stage_; }

private:
    int exit_code_;
    std::string stage_;
};

// ---- prediction / recommendation files ------------------------------------

inline void write_predictions_csv(const std::filesystem::path& path,
                                  const std::vector<ScoredPair>& predictions) {
    auto out = open_output(path);
    out << "user_id,item_id,score\n";
    for (const auto& p : predictions)
        out << p.user << ',' << p.item << ',' << format_double(p.score) << '\n';
}

inline std::vector<ScoredPair> load_predictions_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyDatasetError(path.string() + ": empty file");
    const auto header = split_line(line, ',');
    const auto column = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw SchemaError(path.string() + ": missing column \"" + name + "\"");
    };
    const std::size_t user_col = column("user_id");
    const std::size_t item_col = column("item_id");
    const std::size_t score_col = column("score");

    std::vector<ScoredPair> rows;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row_number;
        const auto fields = split_line(line, ',');
        if (fields.size() <= std::max({user_col, item_col, score_col}))
            throw MalformedRowError(row_number, "too few fields");
        const auto score = parse_double(fields[score_col]);
        if (!score) throw MalformedRowError(row_number, "bad score \"" + fields[score_col] + "\"");
        rows.push_back({fields[user_col], fields[item_col], *score});
    }
    return rows;
}

inline void write_recommendations_csv(const std::filesystem::path& path,
                                      const std::vector<RecRow>& rows) {
    auto out = open_output(path);
    out << "user_id,item_id,score,rank\n";
    for (const auto& r : rows)
        out << r.user << ',' << r.item << ',' << format_double(r.score) << ',' << r.rank << '\n';
}

inline std::vector<RecRow> load_recommendations_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyDatasetError(path.string() + ": empty file");
    const auto header = split_line(line, ',');
    const auto column = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw SchemaError(path.string() + ": missing column \"" + name + "\"");
    };
    const std::size_t user_col = column("user_id");
    const std::size_t item_col = column("item_id");
    const std::size_t score_col = column("score");
    const std::size_t rank_col = column("rank");

    std::vector<RecRow> rows;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row_number;
        const auto fields = split_line(line, ',');
        if (fields.size() <= std::max({user_col, item_col, score_col, rank_col}))
            throw MalformedRowError(row_number, "too few fields");
        const auto score = parse_double(fields[score_col]);
        if (!score) throw MalformedRowError(row_number, "bad score \"" + fields[score_col] + "\"");
        const auto rank = parse_int(fields[rank_col]);
        if (!rank || *rank < 1)
            throw MalformedRowError(row_number, "bad rank \"" + fields[rank_col] + "\"");
        rows.push_back({fields[user_col], fields[item_col], *score, static_cast<int>(*rank)});
    }
    return rows;
}

// ---- evaluation -----------------------------------------------------------

/// Metric report over optional prediction and recommendation tables. Either
/// family may be absent; its metrics come back undefined.
inline MetricReport evaluate_tables(const InteractionSet& truth,
                                    const std::optional<std::vector<ScoredPair>>& predictions,
                                    const std::optional<std::vector<RecRow>>& recommendations,
                                    int k, std::optional<double> relevance_threshold) {
    std::optional<MetricReport> rating;
    if (predictions) rating = evaluate_rating(join_rating_pairs(truth, *predictions));
    std::optional<MetricReport> ranking;
    if (recommendations) {
        const auto lists = build_ranked_lists(truth, *recommendations, relevance_threshold);
        ranking = evaluate_ranking(lists, k);
    }
    return merge_reports(rating, ranking, k);
}

/// The tables a model produces for evaluation against `truth`: one
/// prediction per truth row, and top-k lists for every training user.
inline std::pair<std::vector<ScoredPair>, std::vector<RecRow>> generate_eval_tables(
    const Model& model, const InteractionSet& truth, int k) {
    std::vector<ScoredPair> predictions;
    predictions.reserve(truth.size());
    for (const auto& inter : truth.interactions())
        predictions.push_back({inter.user, inter.item, model.predict_id(inter.user, inter.item)});
    auto recommendations = recommend_rows(model, static_cast<std::size_t>(k), true);
    return {std::move(predictions), std::move(recommendations)};
}

// ---- manifest -------------------------------------------------------------

struct RunManifest {
    std::string version;
    std::string config_hash;
    std::map<std::string, double> stage_seconds;
    std::vector<std::string> artifacts;  // file names inside the output directory
    MetricReport metrics;
};

inline nlohmann::json manifest_to_json(const RunManifest& manifest) {
    nlohmann::json j;
    j["version"] = manifest.version;
    j["config_hash"] = manifest.config_hash;
    j["stage_seconds"] = manifest.stage_seconds;
    j["artifacts"] = manifest.artifacts;
    j["metrics"] = report_to_json(manifest.metrics);
    return j;
}

// ---- pipeline -------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_part_names(std::size_t n_parts) {
    if (n_parts == 2) return {"train.csv", "test.csv"};
    return {"train.csv", "validation.csv", "test.csv"};
}

template <typename F>
auto timed_stage(RunManifest& manifest, int code, const std::string& stage, F&& body) {
    const auto started = std::chrono::steady_clock::now();
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            manifest.stage_seconds[stage] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        } else {
            auto result = body();
            manifest.stage_seconds[stage] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return result;
        }
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(code, stage, e.what());
    }
}

}  // namespace detail

/**
 * Figure-one workflow over real files: load or generate data, split to CSVs,
 * optionally tune on the written train/validation parts, train and serialize
 * the model, then evaluate the written model file against the written test
 * part. Every stage consumes the artifacts of the previous one from disk, so
 * running the split / train / evaluate subcommands by hand reproduces this
 * exact output. The manifest lands atomically as the final step.
 */
inline RunManifest run_pipeline(const PipelineConfig& config, unsigned workers = 1) {
    namespace fs = std::filesystem;
    RunManifest manifest;
    manifest.version = version_string();
    manifest.config_hash = config.config_hash;

    if (config.output_dir.empty())
        throw StageError(kStageConfig, "config", "output directory not set");
    const fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw StageError(kStageConfig, "config",
                         "cannot create output directory " + out_dir.string() + ": " + ec.message());

    // data
    const InteractionSet dataset =
        detail::timed_stage(manifest, kStageData, "data", [&]() -> InteractionSet {
            if (config.data.path) return load_interactions(*config.data.path, config.data.schema);
            return generate_synthetic(resolved_synthetic_spec(config)).interactions;
        });

    // split
    const auto part_names = detail::split_part_names(config.split.ratios.size());
    detail::timed_stage(manifest, kStageSplit, "split", [&]() {
        const SplitSpec spec = config.split.to_spec(config.seed);
        const Split split = split_interactions(dataset, config.split.method, spec);
        for (std::size_t p = 0; p < split.parts.size(); ++p)
            write_interactions_csv(out_dir / part_names[p], split.parts[p]);
    });
    for (const auto& name : part_names) manifest.artifacts.push_back(name);

    // tune
    nlohmann::json final_params = config.model.params;
    if (config.tune) {
        detail::timed_stage(manifest, kStageTune, "tune", [&]() {
            const InteractionSet train = load_interactions(out_dir / "train.csv", CsvSchema{});
            const InteractionSet validation =
                load_interactions(out_dir / "validation.csv", CsvSchema{});
            SearchOptions options;
            options.seed = config.tune->seed.value_or(derived_seed(config.seed, "tune"));
            options.budget_cap = config.tune->budget_cap;
            options.workers = workers;
            const ParamSpace space{config.model.algorithm, config.tune->axes};
            const SearchResult result =
                tune_model(space, config.tune->strategy, config.tune->budget, train, validation,
                           config.tune->objective, options, config.model.params);

            std::string lines;
            for (const auto& trial : result.trials) lines += trial_to_json(trial).dump() + "\n";
            write_file_atomic(out_dir / "trials.jsonl", lines);

            const Trial& best = result.best();
            std::size_t n_failed = 0;
            for (const auto& trial : result.trials) n_failed += trial.failed ? 1 : 0;
            nlohmann::json summary;
            summary["best_trial_index"] = best.trial_index;
            summary["metric"] = best.metric;
            summary["direction"] = to_string(config.tune->objective.resolved_direction());
            summary["value"] = best.value;
            nlohmann::json bound = nlohmann::json::object();
            for (const auto& [name, v] : best.params) bound[name] = param_value_to_json(v);
            summary["params"] = bound;
            summary["n_trials"] = result.trials.size();
            summary["n_failed"] = n_failed;
            write_file_atomic(out_dir / "tune_summary.json", summary.dump(2) + "\n");

            for (const auto& [name, v] : best.params) final_params[name] = param_value_to_json(v);
        });
        manifest.artifacts.push_back("trials.jsonl");
        manifest.artifacts.push_back("tune_summary.json");
    }

    // train
    detail::timed_stage(manifest, kStageTrain, "train", [&]() {
        InteractionSet train = load_interactions(out_dir / "train.csv", CsvSchema{});
        if (config.tune && config.tune->retrain_with_validation) {
            const InteractionSet validation =
                load_interactions(out_dir / "validation.csv", CsvSchema{});
            train = concat_build(train, validation);
        }
        const auto model = fit_model(config.model.algorithm, train, final_params,
                                     derived_seed(config.seed, "model"));
        save_model(*model, (out_dir / "model.bin").string());
    });
    manifest.artifacts.push_back("model.bin");

    // evaluate
    manifest.metrics =
        detail::timed_stage(manifest, kStageEvaluate, "evaluate", [&]() -> MetricReport {
            const auto model = load_model((out_dir / "model.bin").string());
            const InteractionSet truth =
                load_interactions(out_dir / part_names.back(), CsvSchema{});
            const auto [predictions, recommendations] =
                generate_eval_tables(*model, truth, config.evaluate.k);
            write_predictions_csv(out_dir / "predictions.csv", predictions);
            write_recommendations_csv(out_dir / "recommendations.csv", recommendations);
            const auto report = evaluate_tables(
                truth, load_predictions_csv(out_dir / "predictions.csv"),
                load_recommendations_csv(out_dir / "recommendations.csv"), config.evaluate.k,
                config.evaluate.relevance_threshold);
            write_file_atomic(out_dir / "metrics.json", report_to_json(report).dump(2) + "\n");
            return report;
        });
    manifest.artifacts.push_back("predictions.csv");
    manifest.artifacts.push_back("recommendations.csv");
    manifest.artifacts.push_back("metrics.json");

    write_file_atomic(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
    return manifest;
}

}  // namespace recokit
