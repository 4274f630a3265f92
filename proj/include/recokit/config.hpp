#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/io.hpp"
#include "recokit/models/factory.hpp"
#include "recokit/rng.hpp"
#include "recokit/splitters.hpp"
#include "recokit/synthetic.hpp"
#include "recokit/tuning.hpp"

namespace recokit {

/// Seed-stream keys: a stage with no explicit seed derives one from the
/// base seed so streams never collide across stages.
inline std::uint64_t derived_seed(std::uint64_t base, const char* stage) {
    return mix_seed(base, fnv1a64(stage));
}

struct DataConfig {
    std::optional<std::string> path;  // exactly one of path / synthetic
    CsvSchema schema;
    std::optional<SyntheticSpec> synthetic;
    bool synthetic_seed_set = false;  // explicit seed beats the derived one
};

struct SplitConfig {
    SplitMethod method = SplitMethod::random;
    std::vector<double> ratios = {0.8, 0.2};
    std::optional<std::uint64_t> seed;
    GroupBy group_by = GroupBy::user;
    std::size_t min_interactions = 1;

    SplitSpec to_spec(std::uint64_t base_seed) const {
        SplitSpec spec;
        spec.ratios = ratios;
        spec.seed = seed.value_or(derived_seed(base_seed, "split"));
        spec.group_by = group_by;
        spec.min_interactions = min_interactions;
        return spec;
    }
};

struct ModelConfig {
    std::string algorithm;
    nlohmann::json params = nlohmann::json::object();
};

struct TuneConfig {
    std::string strategy = "grid";
    std::map<std::string, ParamAxis> axes;
    std::size_t budget = 1;
    Objective objective;
    std::optional<std::uint64_t> seed;
    bool retrain_with_validation = true;
    std::size_t budget_cap = 10000;
};

struct EvaluateConfig {
    int k = 10;
    std::optional<double> relevance_threshold;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string output_dir;
    DataConfig data;
    SplitConfig split;
    ModelConfig model;
    std::optional<TuneConfig> tune;
    EvaluateConfig evaluate;
    std::string config_hash;  // canonical-form hash, key order invariant
};

namespace detail {

inline void require_object(const nlohmann::json& j, const std::string& context) {
    if (!j.is_object()) throw ConfigError("config: \"" + context + "\" must be an object");
}

inline void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                       const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("config: unknown key \"" + key + "\" in " + context);
    }
}

inline double config_double(const nlohmann::json& j, const char* key, double fallback,
                            const std::string& context) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("config: \"" + std::string(key) + "\" in " + context + " must be a number");
    return j.at(key).get<double>();
}

inline std::int64_t config_int(const nlohmann::json& j, const char* key, std::int64_t fallback,
                               const std::string& context) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError("config: \"" + std::string(key) + "\" in " + context +
                          " must be an integer");
    return v.get<std::int64_t>();
}

inline bool config_bool(const nlohmann::json& j, const char* key, bool fallback,
                        const std::string& context) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_boolean())
        throw ConfigError("config: \"" + std::string(key) + "\" in " + context + " must be a boolean");
    return j.at(key).get<bool>();
}

inline std::string config_string(const nlohmann::json& j, const char* key,
                                 const std::string& fallback, const std::string& context) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    if (!j.at(key).is_string())
        throw ConfigError("config: \"" + std::string(key) + "\" in " + context + " must be a string");
    return j.at(key).get<std::string>();
}

inline std::optional<std::uint64_t> config_seed(const nlohmann::json& j, const char* key,
                                                const std::string& context) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError("config: \"" + std::string(key) + "\" in " + context +
                          " must be an integer");
    return v.get<std::uint64_t>();
}

inline CsvSchema parse_schema(const nlohmann::json& j) {
    CsvSchema schema;
    if (j.is_null()) return schema;
    require_object(j, "data.schema");
    check_keys(j, {"user", "item", "rating", "timestamp", "delimiter"}, "data.schema");
    schema.user = config_string(j, "user", schema.user, "data.schema");
    schema.item = config_string(j, "item", schema.item, "data.schema");
    schema.rating = config_string(j, "rating", schema.rating, "data.schema");
    schema.timestamp = config_string(j, "timestamp", schema.timestamp, "data.schema");
    const std::string delim = config_string(j, "delimiter", std::string(1, schema.delimiter),
                                            "data.schema");
    if (delim.size() != 1)
        throw ConfigError("config: data.schema.delimiter must be a single character");
    schema.delimiter = delim[0];
    return schema;
}

inline SyntheticSpec parse_synthetic(const nlohmann::json& j, bool& seed_set) {
    require_object(j, "data.synthetic");
    check_keys(j, {"n_users", "n_items", "rank", "density", "noise_sigma", "rating_range", "seed"},
               "data.synthetic");
    SyntheticSpec spec;
    spec.n_users = static_cast<std::size_t>(config_int(j, "n_users",
                                                       static_cast<std::int64_t>(spec.n_users),
                                                       "data.synthetic"));
    spec.n_items = static_cast<std::size_t>(config_int(j, "n_items",
                                                       static_cast<std::int64_t>(spec.n_items),
                                                       "data.synthetic"));
    spec.rank = static_cast<std::size_t>(config_int(j, "rank", static_cast<std::int64_t>(spec.rank),
                                                    "data.synthetic"));
    spec.density = config_double(j, "density", spec.density, "data.synthetic");
    spec.noise_sigma = config_double(j, "noise_sigma", spec.noise_sigma, "data.synthetic");
    if (j.contains("rating_range") && !j.at("rating_range").is_null()) {
        const auto& r = j.at("rating_range");
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            throw ConfigError("config: data.synthetic.rating_range must be [min, max]");
        spec.rating_min = r[0].get<double>();
        spec.rating_max = r[1].get<double>();
    }
    if (const auto seed = config_seed(j, "seed", "data.synthetic")) {
        spec.seed = *seed;
        seed_set = true;
    }
    return spec;
}

inline DataConfig parse_data(const nlohmann::json& j) {
    require_object(j, "data");
    check_keys(j, {"path", "schema", "synthetic"}, "data");
    DataConfig data;
    if (j.contains("path") && !j.at("path").is_null())
        data.path = config_string(j, "path", "", "data");
    data.schema = parse_schema(j.contains("schema") ? j.at("schema") : nlohmann::json());
    if (j.contains("synthetic") && !j.at("synthetic").is_null())
        data.synthetic = parse_synthetic(j.at("synthetic"), data.synthetic_seed_set);
    if (data.path.has_value() == data.synthetic.has_value())
        throw ConfigError("config: data requires exactly one of \"path\" or \"synthetic\"");
    return data;
}

inline SplitConfig parse_split(const nlohmann::json& j) {
    require_object(j, "split");
    check_keys(j, {"method", "ratios", "seed", "group_by", "min_interactions"}, "split");
    SplitConfig split;
    const std::string method = config_string(j, "method", "random", "split");
    const auto m = parse_split_method(method);
    if (!m)
        throw ConfigError("config: split.method must be random, chrono, or stratified; got \"" +
                          method + "\"");
    split.method = *m;
    if (j.contains("ratios") && !j.at("ratios").is_null()) {
        const auto& r = j.at("ratios");
        if (!r.is_array()) throw ConfigError("config: split.ratios must be an array");
        split.ratios.clear();
        for (const auto& v : r) {
            if (!v.is_number()) throw ConfigError("config: split.ratios entries must be numbers");
            split.ratios.push_back(v.get<double>());
        }
    }
    split.seed = config_seed(j, "seed", "split");
    const std::string group = config_string(j, "group_by", "user", "split");
    const auto g = parse_group_by(group);
    if (!g) throw ConfigError("config: split.group_by must be user or item; got \"" + group + "\"");
    split.group_by = *g;
    split.min_interactions = static_cast<std::size_t>(
        config_int(j, "min_interactions", 1, "split"));

    SplitSpec probe;
    probe.ratios = split.ratios;
    probe.min_interactions = split.min_interactions;
    try {
        validate_split_spec(probe);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: split: ") + e.what());
    }
    return split;
}

inline ModelConfig parse_model(const nlohmann::json& j) {
    require_object(j, "model");
    check_keys(j, {"algorithm", "params"}, "model");
    ModelConfig model;
    model.algorithm = config_string(j, "algorithm", "", "model");
    if (model.algorithm.empty()) throw ConfigError("config: model.algorithm is required");
    const auto& algos = known_algorithms();
    if (std::find(algos.begin(), algos.end(), model.algorithm) == algos.end())
        throw ConfigError("config: unknown model.algorithm \"" + model.algorithm + "\"");
    if (j.contains("params") && !j.at("params").is_null()) {
        model.params = j.at("params");
        detail::reject_unknown_params(model.algorithm, model.params);
    }
    return model;
}

inline ParamAxis parse_axis(const std::string& name, const nlohmann::json& j) {
    require_object(j, "tune.space." + name);
    check_keys(j, {"values", "low", "high", "scale"}, "tune.space." + name);
    if (j.contains("values")) {
        if (j.contains("low") || j.contains("high") || j.contains("scale"))
            throw ConfigError("config: axis \"" + name + "\" mixes discrete and continuous fields");
        const auto& vals = j.at("values");
        if (!vals.is_array() || vals.empty())
            throw ConfigError("config: axis \"" + name + "\" values must be a non-empty array");
        std::vector<ParamValue> values;
        for (const auto& v : vals) {
            if (v.is_number())
                values.emplace_back(v.get<double>());
            else if (v.is_string())
                values.emplace_back(v.get<std::string>());
            else
                throw ConfigError("config: axis \"" + name + "\" values must be numbers or strings");
        }
        return ParamAxis::discrete(std::move(values));
    }
    if (!j.contains("low") || !j.contains("high"))
        throw ConfigError("config: axis \"" + name + "\" needs either values or low/high");
    const double low = config_double(j, "low", 0.0, "tune.space." + name);
    const double high = config_double(j, "high", 0.0, "tune.space." + name);
    const std::string scale = config_string(j, "scale", "linear", "tune.space." + name);
    ParamAxis::Scale s;
    if (scale == "linear")
        s = ParamAxis::Scale::linear;
    else if (scale == "log")
        s = ParamAxis::Scale::log;
    else
        throw ConfigError("config: axis \"" + name + "\" scale must be linear or log");
    return ParamAxis::range(low, high, s);
}

inline Objective parse_objective(const nlohmann::json& j, const EvaluateConfig& evaluate) {
    Objective objective;
    objective.k = evaluate.k;
    objective.relevance_threshold = evaluate.relevance_threshold;
    if (j.is_null()) return objective;
    require_object(j, "tune.objective");
    check_keys(j, {"metric", "direction", "k", "relevance_threshold"}, "tune.objective");
    objective.metric = config_string(j, "metric", objective.metric, "tune.objective");
    if (j.contains("direction") && !j.at("direction").is_null()) {
        const std::string d = config_string(j, "direction", "", "tune.objective");
        if (d == "minimize")
            objective.direction = Direction::minimize;
        else if (d == "maximize")
            objective.direction = Direction::maximize;
        else
            throw ConfigError("config: tune.objective.direction must be minimize or maximize");
    }
    objective.k = static_cast<int>(config_int(j, "k", objective.k, "tune.objective"));
    if (j.contains("relevance_threshold") && !j.at("relevance_threshold").is_null())
        objective.relevance_threshold =
            config_double(j, "relevance_threshold", 0.0, "tune.objective");
    try {
        validate_objective(objective);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: tune.objective: ") + e.what());
    }
    return objective;
}

inline TuneConfig parse_tune(const nlohmann::json& j, const std::string& algorithm,
                             const EvaluateConfig& evaluate) {
    require_object(j, "tune");
    check_keys(j, {"strategy", "space", "budget", "objective", "seed", "retrain_with_validation",
                   "budget_cap"},
               "tune");
    TuneConfig tune;
    tune.strategy = config_string(j, "strategy", "grid", "tune");
    if (tune.strategy != "grid" && tune.strategy != "random")
        throw ConfigError("config: tune.strategy must be grid or random; got \"" + tune.strategy +
                          "\"");
    if (!j.contains("space")) throw ConfigError("config: tune.space is required");
    require_object(j.at("space"), "tune.space");
    for (const auto& [name, axis] : j.at("space").items()) tune.axes[name] = parse_axis(name, axis);
    tune.budget = static_cast<std::size_t>(config_int(j, "budget", 1, "tune"));
    if (tune.strategy == "random" && tune.budget < 1)
        throw ConfigError("config: tune.budget must be >= 1");
    tune.objective = parse_objective(j.contains("objective") ? j.at("objective") : nlohmann::json(),
                                     evaluate);
    tune.seed = config_seed(j, "seed", "tune");
    tune.retrain_with_validation = config_bool(j, "retrain_with_validation", true, "tune");
    tune.budget_cap =
        static_cast<std::size_t>(config_int(j, "budget_cap", 10000, "tune"));

    ParamSpace space{algorithm, tune.axes};
    try {
        validate_param_space(space);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return tune;
}

inline EvaluateConfig parse_evaluate(const nlohmann::json& j) {
    EvaluateConfig evaluate;
    if (j.is_null()) return evaluate;
    require_object(j, "evaluate");
    check_keys(j, {"k", "relevance_threshold"}, "evaluate");
    evaluate.k = static_cast<int>(config_int(j, "k", evaluate.k, "evaluate"));
    if (evaluate.k < 1) throw ConfigError("config: evaluate.k must be >= 1");
    if (j.contains("relevance_threshold") && !j.at("relevance_threshold").is_null())
        evaluate.relevance_threshold = config_double(j, "relevance_threshold", 0.0, "evaluate");
    return evaluate;
}

}  // namespace detail

/// Strict parse: any unknown key at any level is an error, so a typo in a
/// hyperparameter name cannot silently run with defaults.
inline PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
    detail::require_object(j, "config");
    detail::check_keys(j, {"seed", "output_dir", "data", "split", "model", "tune", "evaluate"},
                       "config root");
    PipelineConfig config;
    config.seed = detail::config_seed(j, "seed", "config root").value_or(0);
    config.output_dir = detail::config_string(j, "output_dir", "", "config root");
    if (!j.contains("data")) throw ConfigError("config: \"data\" is required");
    config.data = detail::parse_data(j.at("data"));
    if (!j.contains("split")) throw ConfigError("config: \"split\" is required");
    config.split = detail::parse_split(j.at("split"));
    if (!j.contains("model")) throw ConfigError("config: \"model\" is required");
    config.model = detail::parse_model(j.at("model"));
    config.evaluate =
        detail::parse_evaluate(j.contains("evaluate") ? j.at("evaluate") : nlohmann::json());
    if (j.contains("tune") && !j.at("tune").is_null()) {
        config.tune = detail::parse_tune(j.at("tune"), config.model.algorithm, config.evaluate);
        if (config.split.ratios.size() != 3)
            throw ConfigError("config: tuning requires 3 split ratios (train/validation/test)");
    }
    config.config_hash = to_hex(fnv1a64(j.dump()));
    return config;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    auto in = open_input(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_pipeline_config(j);
}

/// The synthetic seed, like stage seeds, derives from the base seed when
/// the config does not pin one.
inline SyntheticSpec resolved_synthetic_spec(const PipelineConfig& config) {
    SyntheticSpec spec = *config.data.synthetic;
    if (!config.data.synthetic_seed_set) spec.seed = derived_seed(config.seed, "synthetic");
    return spec;
}

}  // namespace recokit
