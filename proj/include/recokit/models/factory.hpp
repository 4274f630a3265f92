#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/model.hpp"
#include "recokit/models/als.hpp"
#include "recokit/models/popularity.hpp"
#include "recokit/models/sar.hpp"
#include "recokit/models/sgd_mf.hpp"

namespace recokit {

inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> kAlgos = {"popularity", "sar", "als", "sgd_mf"};
    return kAlgos;
}

/// Parameter names each algorithm accepts in a params object or search space.
inline const std::vector<std::string>& known_param_names(const std::string& algorithm) {
    static const std::vector<std::string> kNone = {};
    static const std::vector<std::string> kSar = {"similarity", "half_life_seconds",
                                                  "reference_time", "rating_as_weight"};
    static const std::vector<std::string> kAls = {"factors", "regularization", "iterations",
                                                  "init_sigma", "seed"};
    static const std::vector<std::string> kSgd = {"factors", "learning_rate", "regularization",
                                                  "epochs", "init_sigma", "seed"};
    if (algorithm == "popularity") return kNone;
    if (algorithm == "sar") return kSar;
    if (algorithm == "als") return kAls;
    if (algorithm == "sgd_mf") return kSgd;
    throw ConfigError("unknown algorithm: " + algorithm);
}

namespace detail {

inline void reject_unknown_params(const std::string& algorithm, const nlohmann::json& params) {
    if (params.is_null()) return;
    if (!params.is_object()) throw ConfigError(algorithm + ": params must be an object");
    const auto& known = known_param_names(algorithm);
    for (const auto& [key, value] : params.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(algorithm + ": unknown parameter \"" + key + "\"");
    }
}

inline double param_double(const nlohmann::json& params, const char* key, double fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    const auto& v = params.at(key);
    if (!v.is_number()) throw ConfigError(std::string("parameter \"") + key + "\" must be a number");
    return v.get<double>();
}

inline int param_int(const nlohmann::json& params, const char* key, int fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    const auto& v = params.at(key);
    if (!v.is_number()) throw ConfigError(std::string("parameter \"") + key + "\" must be an integer");
    const double d = v.get<double>();
    const double r = std::nearbyint(d);
    if (d != r) throw ConfigError(std::string("parameter \"") + key + "\" must be an integer");
    return static_cast<int>(r);
}

inline bool param_bool(const nlohmann::json& params, const char* key, bool fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    const auto& v = params.at(key);
    if (!v.is_boolean()) throw ConfigError(std::string("parameter \"") + key + "\" must be a boolean");
    return v.get<bool>();
}

inline std::int64_t param_i64(const nlohmann::json& params, const char* key, std::int64_t fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    const auto& v = params.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(std::string("parameter \"") + key + "\" must be an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t param_seed(const nlohmann::json& params, std::uint64_t fallback) {
    if (!params.is_object() || !params.contains("seed")) return fallback;
    const auto& v = params.at("seed");
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError("parameter \"seed\" must be an integer");
    return v.get<std::uint64_t>();
}

}  // namespace detail

inline SarParams parse_sar_params(const nlohmann::json& params) {
    detail::reject_unknown_params("sar", params);
    SarParams p;
    if (params.is_object() && params.contains("similarity")) {
        const auto& v = params.at("similarity");
        if (!v.is_string()) throw ConfigError("sar: similarity must be a string");
        const auto s = parse_sar_similarity(v.get<std::string>());
        if (!s)
            throw ConfigError("sar: similarity must be one of count, jaccard, lift; got \"" +
                              v.get<std::string>() + "\"");
        p.similarity = *s;
    }
    if (params.is_object() && params.contains("half_life_seconds") &&
        !params.at("half_life_seconds").is_null())
        p.half_life_seconds = detail::param_double(params, "half_life_seconds", 0.0);
    if (params.is_object() && params.contains("reference_time"))
        p.reference_time = detail::param_i64(params, "reference_time", 0);
    p.rating_as_weight = detail::param_bool(params, "rating_as_weight", false);
    return p;
}

inline AlsParams parse_als_params(const nlohmann::json& params, std::uint64_t default_seed = 0) {
    detail::reject_unknown_params("als", params);
    AlsParams p;
    p.factors = detail::param_int(params, "factors", p.factors);
    p.regularization = detail::param_double(params, "regularization", p.regularization);
    p.iterations = detail::param_int(params, "iterations", p.iterations);
    p.init_sigma = detail::param_double(params, "init_sigma", p.init_sigma);
    p.seed = detail::param_seed(params, default_seed);
    return p;
}

inline SgdMfParams parse_sgd_mf_params(const nlohmann::json& params, std::uint64_t default_seed = 0) {
    detail::reject_unknown_params("sgd_mf", params);
    SgdMfParams p;
    p.factors = detail::param_int(params, "factors", p.factors);
    p.learning_rate = detail::param_double(params, "learning_rate", p.learning_rate);
    p.regularization = detail::param_double(params, "regularization", p.regularization);
    p.epochs = detail::param_int(params, "epochs", p.epochs);
    p.init_sigma = detail::param_double(params, "init_sigma", p.init_sigma);
    p.seed = detail::param_seed(params, default_seed);
    return p;
}

/**
 * Fits the named algorithm with JSON params. Unknown algorithm or parameter
 * names are rejected rather than ignored. `default_seed` applies when the
 * params carry no explicit seed; algorithms without RNG ignore it.
 */
inline std::unique_ptr<Model> fit_model(const std::string& algorithm, const InteractionSet& train,
                                        const nlohmann::json& params = nlohmann::json::object(),
                                        std::uint64_t default_seed = 0) {
    if (algorithm == "popularity") {
        detail::reject_unknown_params("popularity", params);
        return std::make_unique<PopularityModel>(PopularityModel::fit(train));
    }
    if (algorithm == "sar")
        return std::make_unique<SarModel>(SarModel::fit(train, parse_sar_params(params)));
    if (algorithm == "als")
        return std::make_unique<AlsModel>(AlsModel::fit(train, parse_als_params(params, default_seed)));
    if (algorithm == "sgd_mf")
        return std::make_unique<SgdMfModel>(
            SgdMfModel::fit(train, parse_sgd_mf_params(params, default_seed)));
    throw ConfigError("unknown algorithm: " + algorithm);
}

}  // namespace recokit
