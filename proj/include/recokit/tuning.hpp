#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "recokit/errors.hpp"
#include "recokit/interactions.hpp"
#include "recokit/metrics.hpp"
#include "recokit/model.hpp"
#include "recokit/models/factory.hpp"
#include "recokit/rng.hpp"

namespace recokit {

using ParamValue = std::variant<double, std::string>;

inline nlohmann::json param_value_to_json(const ParamValue& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    return std::get<std::string>(v);
}

/// Either a discrete value list or a continuous range.
struct ParamAxis {
    enum class Scale { linear, log };

    std::vector<ParamValue> values;  // non-empty iff discrete
    double low = 0.0;
    double high = 0.0;
    Scale scale = Scale::linear;
    bool continuous = false;

    static ParamAxis discrete(std::vector<ParamValue> values) {
        ParamAxis a;
        a.values = std::move(values);
        return a;
    }
    static ParamAxis range(double low, double high, Scale scale = Scale::linear) {
        ParamAxis a;
        a.continuous = true;
        a.low = low;
        a.high = high;
        a.scale = scale;
        return a;
    }
};

/// Search domain: axes keyed by parameter name (name order fixes the
/// enumeration order) plus the algorithm the bindings apply to.
struct ParamSpace {
    std::string algorithm;
    std::map<std::string, ParamAxis> axes;  // sorted by name
};

inline void validate_param_space(const ParamSpace& space) {
    known_param_names(space.algorithm);  // throws on unknown algorithm
    const auto& known = known_param_names(space.algorithm);
    for (const auto& [name, axis] : space.axes) {
        if (name == "seed") throw ConfigError("tuning: \"seed\" is derived per trial, not tunable");
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("tuning: " + space.algorithm + " has no parameter \"" + name + "\"");
        if (axis.continuous) {
            if (!(axis.low < axis.high))
                throw ConfigError("tuning: axis \"" + name + "\" requires low < high");
            if (axis.scale == ParamAxis::Scale::log && !(axis.low > 0.0))
                throw ConfigError("tuning: log-scale axis \"" + name + "\" requires low > 0");
        } else if (axis.values.empty()) {
            throw ConfigError("tuning: discrete axis \"" + name + "\" has no values");
        }
    }
}

enum class Direction { minimize, maximize };

inline const char* to_string(Direction d) {
    return d == Direction::minimize ? "minimize" : "maximize";
}

/// What a trial optimizes: one of the nine report metrics. Lower is better
/// for error metrics, higher for everything else, unless overridden.
struct Objective {
    std::string metric = "rmse";
    std::optional<Direction> direction;
    int k = 10;
    std::optional<double> relevance_threshold;

    Direction resolved_direction() const {
        if (direction) return *direction;
        return (metric == "rmse" || metric == "mae") ? Direction::minimize : Direction::maximize;
    }
};

inline void validate_objective(const Objective& objective) {
    if (!is_rating_metric(objective.metric) && !is_ranking_metric(objective.metric))
        throw ConfigError("objective metric \"" + objective.metric + "\" is not a report metric");
    if (objective.k < 1) throw ConfigError("objective k must be >= 1");
}

struct Trial {
    std::size_t trial_index = 0;
    std::map<std::string, ParamValue> params;
    std::string metric;
    double value = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string failure;
    double wall_time_seconds = 0.0;
};

inline nlohmann::json trial_to_json(const Trial& t) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, v] : t.params) params[name] = param_value_to_json(v);
    nlohmann::json j;
    j["trial_index"] = t.trial_index;
    j["params"] = std::move(params);
    j["metric"] = t.metric;
    if (t.failed)
        j["value"] = nullptr;
    else
        j["value"] = t.value;
    j["failed"] = t.failed;
    j["failure"] = t.failure;
    j["wall_time_seconds"] = t.wall_time_seconds;
    return j;
}

struct SearchOptions {
    std::uint64_t seed = 0;
    std::size_t budget_cap = 10000;  // grid product limit
    unsigned workers = 1;
};

struct SearchResult {
    std::vector<Trial> trials;
    std::size_t best_index = 0;

    const Trial& best() const { return trials[best_index]; }
};

/// Evaluates one parameter binding: fit with `fit_seed`, return the
/// objective value. Throwing Error marks the trial failed.
using TrialEvaluator =
    std::function<double(const std::map<std::string, ParamValue>&, std::uint64_t)>;

namespace detail {

/// Optimal trial among the non-failed, ties to the lowest index.
inline std::size_t select_best(const std::vector<Trial>& trials, Direction direction) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].failed) continue;
        if (!best) {
            best = i;
            continue;
        }
        const double cur = trials[i].value;
        const double inc = trials[*best].value;
        const bool better = direction == Direction::minimize ? cur < inc : cur > inc;
        if (better) best = i;
    }
    if (!best) throw NoSuccessfulTrialsError("every trial failed");
    return *best;
}

/// Runs bindings[i] as trial i, in parallel up to `workers`, collecting
/// results in trial_index order. Fit seeds derive per trial from the base
/// seed, so execution order cannot change any outcome.
inline std::vector<Trial> run_trials(const std::vector<std::map<std::string, ParamValue>>& bindings,
                                     const Objective& objective, const TrialEvaluator& evaluate,
                                     const SearchOptions& options) {
    std::vector<Trial> trials(bindings.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= bindings.size()) return;
            Trial& t = trials[i];
            t.trial_index = i;
            t.params = bindings[i];
            t.metric = objective.metric;
            const auto started = std::chrono::steady_clock::now();
            try {
                const double v = evaluate(bindings[i], mix_seed(options.seed, i));
                if (!std::isfinite(v)) throw Error("objective value is not finite");
                t.value = v;
            } catch (const Error& e) {
                t.failed = true;
                t.failure = e.what();
            }
            t.wall_time_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
    };
    const unsigned n_workers =
        std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(bindings.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return trials;
}

}  // namespace detail

/**
 * Exhaustive sweep of the Cartesian product of discrete axes, enumerated in
 * name-sorted axis order with the last axis varying fastest. Trial i fits
 * with seed mix_seed(options.seed, i). Best trial: optimal objective value,
 * ties to the lowest trial index.
 */
inline SearchResult grid_search(const ParamSpace& space, const Objective& objective,
                                const TrialEvaluator& evaluate, const SearchOptions& options = {}) {
    validate_param_space(space);
    validate_objective(objective);
    std::vector<std::string> names;
    std::vector<const ParamAxis*> axes;
    std::size_t total = 1;
    for (const auto& [name, axis] : space.axes) {
        if (axis.continuous)
            throw ContinuousAxisError("grid_search: axis \"" + name + "\" is continuous");
        names.push_back(name);
        axes.push_back(&axis);
        if (total > std::numeric_limits<std::size_t>::max() / axis.values.size())
            throw BudgetExceededError("grid exceeds budget cap " + std::to_string(options.budget_cap));
        total *= axis.values.size();
    }
    if (total > options.budget_cap)
        throw BudgetExceededError("grid of " + std::to_string(total) + " points exceeds budget cap " +
                                  std::to_string(options.budget_cap));

    std::vector<std::map<std::string, ParamValue>> bindings;
    bindings.reserve(total);
    std::vector<std::size_t> odometer(names.size(), 0);
    for (std::size_t t = 0; t < total; ++t) {
        std::map<std::string, ParamValue> bound;
        for (std::size_t a = 0; a < names.size(); ++a) bound[names[a]] = axes[a]->values[odometer[a]];
        bindings.push_back(std::move(bound));
        for (std::size_t a = names.size(); a-- > 0;) {
            if (++odometer[a] < axes[a]->values.size()) break;
            odometer[a] = 0;
        }
    }

    SearchResult result;
    result.trials = detail::run_trials(bindings, objective, evaluate, options);
    result.best_index = detail::select_best(result.trials, objective.resolved_direction());
    return result;
}

/**
 * `budget` independent draws. Each axis of each trial consumes its own RNG
 * stream keyed by (seed, trial index, axis name), so adding axes or raising
 * the budget never changes earlier draws. Discrete axes draw uniformly from
 * the list; continuous draw uniformly on [low, high], on the log scale via
 * exp(uniform(ln low, ln high)). Selection matches grid_search.
 */
inline SearchResult random_search(const ParamSpace& space, std::size_t budget,
                                  const Objective& objective, const TrialEvaluator& evaluate,
                                  const SearchOptions& options = {}) {
    validate_param_space(space);
    validate_objective(objective);
    if (budget < 1) throw InvalidSpecError("random_search: budget must be >= 1");

    std::vector<std::map<std::string, ParamValue>> bindings(budget);
    for (std::size_t t = 0; t < budget; ++t) {
        for (const auto& [name, axis] : space.axes) {
            Rng rng(mix_seed(mix_seed(options.seed, t), fnv1a64(name)));
            ParamValue v;
            if (!axis.continuous) {
                v = axis.values[rng.bounded(axis.values.size())];
            } else if (axis.scale == ParamAxis::Scale::log) {
                v = std::exp(rng.uniform(std::log(axis.low), std::log(axis.high)));
            } else {
                v = rng.uniform(axis.low, axis.high);
            }
            bindings[t][name] = std::move(v);
        }
    }

    SearchResult result;
    result.trials = detail::run_trials(bindings, objective, evaluate, options);
    result.best_index = detail::select_best(result.trials, objective.resolved_direction());
    return result;
}

// ---- model-backed objective ----------------------------------------------

/// Objective value of a fitted model against a validation set. Rating
/// metrics score the model's predictions on the validation pairs; ranking
/// metrics judge top-k lists for every training user. An undefined metric
/// value surfaces as an Error (the trial fails).
inline double evaluate_model_objective(const Model& model, const InteractionSet& validation,
                                       const Objective& objective) {
    if (is_rating_metric(objective.metric)) {
        std::vector<ScoredPair> preds;
        preds.reserve(validation.size());
        for (const auto& inter : validation.interactions())
            preds.push_back({inter.user, inter.item, model.predict_id(inter.user, inter.item)});
        const auto report = evaluate_rating(join_rating_pairs(validation, preds));
        const auto v = report.get(objective.metric);
        if (!v) throw Error("objective " + objective.metric + " undefined on validation set");
        return *v;
    }
    const auto rows = recommend_rows(model, static_cast<std::size_t>(objective.k), true);
    const auto lists = build_ranked_lists(validation, rows, objective.relevance_threshold);
    const auto report = evaluate_ranking(lists, objective.k);
    const auto v = report.get(objective.metric);
    if (!v) throw Error("objective " + objective.metric + " undefined on validation set");
    return *v;
}

/// Binds axis values over the algorithm's defaults, fits on train with the
/// per-trial seed, scores on validation.
inline TrialEvaluator make_model_evaluator(const std::string& algorithm,
                                           const InteractionSet& train,
                                           const InteractionSet& validation,
                                           const Objective& objective,
                                           nlohmann::json base_params = nlohmann::json::object()) {
    return [algorithm, &train, &validation, objective,
            base_params = std::move(base_params)](const std::map<std::string, ParamValue>& bound,
                                                  std::uint64_t fit_seed) {
        nlohmann::json params = base_params;
        for (const auto& [name, v] : bound) params[name] = param_value_to_json(v);
        const auto model = fit_model(algorithm, train, params, fit_seed);
        return evaluate_model_objective(*model, validation, objective);
    };
}

/// One-call search over a model space.
inline SearchResult tune_model(const ParamSpace& space, const std::string& strategy,
                               std::size_t budget, const InteractionSet& train,
                               const InteractionSet& validation, const Objective& objective,
                               const SearchOptions& options = {},
                               const nlohmann::json& base_params = nlohmann::json::object()) {
    const auto evaluate = make_model_evaluator(space.algorithm, train, validation, objective, base_params);
    if (strategy == "grid") return grid_search(space, objective, evaluate, options);
    if (strategy == "random") return random_search(space, budget, objective, evaluate, options);
    throw ConfigError("unknown tuning strategy \"" + strategy + "\" (grid or random)");
}

}  // namespace recokit
