#include "evofis/mcfis.hpp"

#include "evofis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evofis {

namespace {

// Raw firing strengths; empty vector for an empty model.
Eigen::VectorXd raw_firings(const FisModel& model, const Eigen::VectorXd& u) {
    if (model.rules.empty()) return Eigen::VectorXd();
    return fire(model, u).raw;
}

double nearest_center_distance(const FisModel& model, const Eigen::VectorXd& u) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& rule : model.rules)
        best = std::min(best, (u - rule.center).norm());
    return best;
}

void grow_rule(McfisState& state, const RegressorPair& pair) {
    auto& model = state.model;
    double width = model.rules.empty()
                       ? state.config.kappa
                       : state.config.kappa * nearest_center_distance(model, pair.u);
    if (width < state.config.ekf.width_floor) width = state.config.ekf.width_floor;

    FuzzyRule rule = make_rule_predicting(
        pair.u, Eigen::VectorXd::Constant(model.input_dim, width), pair.v);
    int dim = ekf_param_dim(model.input_dim, model.output_dim, state.config.ekf);
    rule.covariance = state.config.p0 *
                      Eigen::MatrixXd::Identity(dim, dim);
    model.rules.push_back(std::move(rule));
    state.low_firing_steps.push_back(0);
    state.grow_count += 1;
}

// Update prune counters from the normalized firing of this learning step and
// remove at most one rule that has stayed below the floor for a full window.
std::optional<std::size_t> prune_after_learning(McfisState& state,
                                                const Eigen::VectorXd& normalized) {
    auto& model = state.model;
    for (std::size_t i = 0; i < model.rules.size(); ++i) {
        if (normalized(static_cast<Eigen::Index>(i)) < state.config.e_prune)
            state.low_firing_steps[i] += 1;
        else
            state.low_firing_steps[i] = 0;
    }
    if (model.rules.size() <= 1) return std::nullopt;

    std::size_t victim = model.rules.size();
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.rules.size(); ++i) {
        if (state.low_firing_steps[i] < state.config.prune_window) continue;
        double strength = normalized(static_cast<Eigen::Index>(i));
        if (strength < weakest) {
            weakest = strength;
            victim = i;
        }
    }
    if (victim == model.rules.size()) return std::nullopt;
    model.rules.erase(model.rules.begin() + static_cast<std::ptrdiff_t>(victim));
    state.low_firing_steps.erase(state.low_firing_steps.begin() +
                                 static_cast<std::ptrdiff_t>(victim));
    return victim;
}

// Smooth a self-adaptive threshold toward the observed error magnitude and
// re-establish e_delete < e_learn <= e_add.
void adapt_thresholds(McfisState& state, MetaKind kind, double error) {
    if (!std::isfinite(error)) return;
    const double delta = state.config.delta;
    if (kind == MetaKind::Grow)
        state.e_add = delta * state.e_add + (1.0 - delta) * error;
    else if (kind == MetaKind::Update)
        state.e_learn = delta * state.e_learn + (1.0 - delta) * error;
    else
        return;

    double learn_floor = std::nextafter(state.config.e_delete,
                                        std::numeric_limits<double>::infinity());
    state.e_learn = std::max(state.e_learn, learn_floor);
    state.e_add = std::max(state.e_add, state.e_learn);
}

// One decide-and-apply pass over a sample; shared by the live stream and the
// reserve replay. Returns the decision taken plus any pruned rule index.
McfisStepResult apply_sample(McfisState& state, const RegressorPair& pair) {
    auto& model = state.model;
    McfisStepResult result;
    result.prediction = model.rules.empty()
                            ? Eigen::VectorXd::Zero(model.output_dim).eval()
                            : infer(model, pair.u);
    result.decision = mcfis_decide(state, pair);

    switch (result.decision.kind) {
    case MetaKind::Delete:
        state.delete_count += 1;
        break;
    case MetaKind::Grow:
        grow_rule(state, pair);
        break;
    case MetaKind::Update: {
        state.update_count += 1;
        Eigen::VectorXd raw = raw_firings(model, pair.u);
        Eigen::Index strongest = 0;
        raw.maxCoeff(&strongest);
        ekf_update_nearest(model, static_cast<std::size_t>(strongest), pair.u,
                           pair.v, state.config.ekf);
        break;
    }
    case MetaKind::Reserve:
        state.reserve_count += 1;
        state.reserve_queue.push_back(pair);
        break;
    }

    adapt_thresholds(state, result.decision.kind, result.decision.error);

    // Prune bookkeeping runs only on steps that touched the parameters or
    // structure; silent rules are judged against samples the model learned
    // from, not against discarded or deferred ones.
    if (result.decision.kind == MetaKind::Grow ||
        result.decision.kind == MetaKind::Update) {
        Eigen::VectorXd normalized = fire(model, pair.u).normalized;
        result.pruned_rule = prune_after_learning(state, normalized);
    }
    return result;
}

} // namespace

McfisState mcfis_init(const McfisConfig& cfg, int input_dim, int output_dim) {
    if (input_dim < 1 || output_dim < 1)
        throw DimensionError("mcfis_init: dimensions must be positive");
    if (!(cfg.e_delete < cfg.e_learn && cfg.e_learn <= cfg.e_add))
        throw ConfigError(
            "mcfis_init: thresholds must satisfy e_delete < e_learn <= e_add");
    McfisState state;
    state.model.input_dim = input_dim;
    state.model.output_dim = output_dim;
    state.config = cfg;
    state.e_add = cfg.e_add;
    state.e_learn = cfg.e_learn;
    return state;
}

MetaDecision mcfis_decide(const McfisState& state, const RegressorPair& pair) {
    MetaDecision decision;
    const auto& model = state.model;
    if (model.rules.empty()) {
        decision.kind = MetaKind::Grow;
        decision.error = std::numeric_limits<double>::infinity();
        decision.novelty = 0.0;
        return decision;
    }
    decision.error = (pair.v - infer(model, pair.u)).norm();
    decision.novelty = raw_firings(model, pair.u).maxCoeff();

    if (decision.error < state.config.e_delete)
        decision.kind = MetaKind::Delete;
    else if (decision.error > state.e_add &&
             decision.novelty < state.config.novelty_threshold)
        decision.kind = MetaKind::Grow;
    else if (decision.error >= state.e_learn)
        decision.kind = MetaKind::Update;
    else
        decision.kind = MetaKind::Reserve;
    return decision;
}

McfisStepResult mcfis_step(McfisState& state, const RegressorPair& pair) {
    if (pair.u.size() != state.model.input_dim ||
        pair.v.size() != state.model.output_dim)
        throw DimensionError("mcfis_step: sample does not match model dimensions");
    return apply_sample(state, pair);
}

void drain_reserve(McfisState& state) {
    for (int pass = 0; pass < state.config.max_reserve_passes; ++pass) {
        if (state.reserve_queue.empty()) return;
        const std::size_t pending = state.reserve_queue.size();
        for (std::size_t i = 0; i < pending; ++i) {
            RegressorPair pair = std::move(state.reserve_queue.front());
            state.reserve_queue.pop_front();
            apply_sample(state, pair); // reserve decisions re-queue the pair
        }
    }
}

nlohmann::json mcfis_state_to_json(const McfisState& state) {
    nlohmann::json j;
    j["algorithm"] = "mcfis";
    j["model"] = model_to_json(state.model);
    const auto& cfg = state.config;
    j["config"] = {
        {"e_delete", cfg.e_delete},
        {"e_learn", cfg.e_learn},
        {"e_add", cfg.e_add},
        {"novelty_threshold", cfg.novelty_threshold},
        {"delta", cfg.delta},
        {"e_prune", cfg.e_prune},
        {"prune_window", cfg.prune_window},
        {"kappa", cfg.kappa},
        {"max_reserve_passes", cfg.max_reserve_passes},
        {"p0", cfg.p0},
        {"observation_noise", cfg.ekf.observation_noise},
        {"consequent_only", cfg.ekf.consequent_only},
        {"width_floor", cfg.ekf.width_floor},
    };
    j["e_add_current"] = state.e_add;
    j["e_learn_current"] = state.e_learn;
    j["low_firing_steps"] = state.low_firing_steps;
    j["counters"] = {
        {"grow", state.grow_count},
        {"update", state.update_count},
        {"delete", state.delete_count},
        {"reserve", state.reserve_count},
    };
    auto pairs = nlohmann::json::array();
    for (const auto& pair : state.reserve_queue) {
        pairs.push_back({{"u", vector_to_json(pair.u)},
                         {"v", vector_to_json(pair.v)},
                         {"origin_index", pair.origin_index}});
    }
    j["reserve_queue"] = std::move(pairs);
    return j;
}

McfisState mcfis_state_from_json(const nlohmann::json& j) {
    if (j.value("algorithm", "") != "mcfis")
        throw SchemaError("mcfis state: expected algorithm \"mcfis\"");
    McfisState state;
    state.model = model_from_json(j.at("model"));
    const auto& cj = j.at("config");
    auto& cfg = state.config;
    cfg.e_delete = cj.at("e_delete").get<double>();
    cfg.e_learn = cj.at("e_learn").get<double>();
    cfg.e_add = cj.at("e_add").get<double>();
    cfg.novelty_threshold = cj.at("novelty_threshold").get<double>();
    cfg.delta = cj.at("delta").get<double>();
    cfg.e_prune = cj.at("e_prune").get<double>();
    cfg.prune_window = cj.at("prune_window").get<int>();
    cfg.kappa = cj.at("kappa").get<double>();
    cfg.max_reserve_passes = cj.at("max_reserve_passes").get<int>();
    cfg.p0 = cj.at("p0").get<double>();
    cfg.ekf.observation_noise = cj.at("observation_noise").get<double>();
    cfg.ekf.consequent_only = cj.at("consequent_only").get<bool>();
    cfg.ekf.width_floor = cj.at("width_floor").get<double>();
    state.e_add = j.at("e_add_current").get<double>();
    state.e_learn = j.at("e_learn_current").get<double>();
    state.low_firing_steps = j.at("low_firing_steps").get<std::vector<int>>();
    const auto& counters = j.at("counters");
    state.grow_count = counters.at("grow").get<std::int64_t>();
    state.update_count = counters.at("update").get<std::int64_t>();
    state.delete_count = counters.at("delete").get<std::int64_t>();
    state.reserve_count = counters.at("reserve").get<std::int64_t>();
    for (const auto& pj : j.at("reserve_queue")) {
        RegressorPair pair;
        pair.u = vector_from_json(pj.at("u"));
        pair.v = vector_from_json(pj.at("v"));
        pair.origin_index = pj.at("origin_index").get<std::int64_t>();
        state.reserve_queue.push_back(std::move(pair));
    }
    if (state.low_firing_steps.size() != state.model.rules.size())
        throw SchemaError("mcfis state: low_firing_steps does not match rule count");
    return state;
}

} // namespace evofis
