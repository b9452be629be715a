#include "evofis/safis.hpp"

#include "evofis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evofis {

SafisState safis_init(const RegressorPair& first_pair, const SafisConfig& cfg) {
    SafisState state;
    state.config = cfg;
    state.model.input_dim = static_cast<int>(first_pair.u.size());
    state.model.output_dim = static_cast<int>(first_pair.v.size());

    FuzzyRule rule = make_rule_predicting(
        first_pair.u, Eigen::VectorXd::Constant(first_pair.u.size(), cfg.kappa), first_pair.v);
    const int dim = ekf_param_dim(state.model.input_dim, state.model.output_dim, cfg.ekf);
    rule.covariance = cfg.p0 * Eigen::MatrixXd::Identity(dim, dim);
    state.model.rules.push_back(std::move(rule));
    state.low_influence_steps.push_back(0);
    state.step = 1;
    return state;
}

double current_distance_threshold(const SafisState& state) {
    const double decayed =
        state.config.epsilon_max * std::pow(state.config.decay, static_cast<double>(state.step - 1));
    return std::max(decayed, state.config.epsilon_min);
}

Eigen::VectorXd rule_influences(const FisModel& model, const Eigen::VectorXd& u) {
    const FiringVector firing = fire(model, u);
    Eigen::VectorXd influences(firing.raw.size());
    for (Eigen::Index i = 0; i < influences.size(); ++i) {
        const double magnitude = rule_output(model.rules[static_cast<std::size_t>(i)], u).norm();
        influences[i] = magnitude * firing.normalized[i];
    }
    return influences;
}

double candidate_influence(const FisModel& model, const Eigen::VectorXd& u, double error_norm) {
    const FiringVector firing = fire(model, u);
    return error_norm * 1.0 / (firing.raw.sum() + 1.0);
}

SafisStepResult safis_step(SafisState& state, const RegressorPair& pair) {
    SafisStepResult result;
    result.prediction = infer(state.model, pair.u);
    state.step += 1;

    std::size_t nearest = 0;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.model.rules.size(); ++i) {
        const double dist = (pair.u - state.model.rules[i].center).norm();
        if (dist < nearest_dist) {
            nearest_dist = dist;
            nearest = i;
        }
    }

    const double threshold = current_distance_threshold(state);
    const double error_norm = (pair.v - result.prediction).norm();
    const double cand = candidate_influence(state.model, pair.u, error_norm);

    if (nearest_dist > threshold && cand > state.config.e_grow) {
        FuzzyRule rule = make_rule_predicting(
            pair.u, Eigen::VectorXd::Constant(pair.u.size(), state.config.kappa * nearest_dist),
            pair.v);
        const int dim =
            ekf_param_dim(state.model.input_dim, state.model.output_dim, state.config.ekf);
        rule.covariance = state.config.p0 * Eigen::MatrixXd::Identity(dim, dim);
        state.model.rules.push_back(std::move(rule));
        state.low_influence_steps.push_back(0);
        result.action.kind = SafisActionKind::Grow;
    } else {
        ekf_update_nearest(state.model, nearest, pair.u, pair.v, state.config.ekf);
        result.action.kind = SafisActionKind::Update;
    }

    const Eigen::VectorXd influences = rule_influences(state.model, pair.u);
    for (Eigen::Index i = 0; i < influences.size(); ++i) {
        auto& counter = state.low_influence_steps[static_cast<std::size_t>(i)];
        counter = influences[i] < state.config.e_prune ? counter + 1 : 0;
    }

    if (state.model.rules.size() > 1) {
        std::optional<std::size_t> victim;
        double victim_influence = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < state.model.rules.size(); ++i) {
            if (state.low_influence_steps[i] >= state.config.prune_window &&
                influences[static_cast<Eigen::Index>(i)] < victim_influence) {
                victim_influence = influences[static_cast<Eigen::Index>(i)];
                victim = i;
            }
        }
        if (victim) {
            state.model.rules.erase(state.model.rules.begin() + static_cast<long>(*victim));
            state.low_influence_steps.erase(state.low_influence_steps.begin() +
                                            static_cast<long>(*victim));
            result.action.pruned_rule = *victim;
        }
    }
    return result;
}

nlohmann::json safis_state_to_json(const SafisState& state) {
    nlohmann::json j;
    j["algorithm"] = "safis";
    j["model"] = model_to_json(state.model);
    j["config"] = {
        {"epsilon_max", state.config.epsilon_max},
        {"epsilon_min", state.config.epsilon_min},
        {"decay", state.config.decay},
        {"e_grow", state.config.e_grow},
        {"e_prune", state.config.e_prune},
        {"kappa", state.config.kappa},
        {"prune_window", state.config.prune_window},
        {"p0", state.config.p0},
        {"observation_noise", state.config.ekf.observation_noise},
        {"consequent_only", state.config.ekf.consequent_only},
        {"width_floor", state.config.ekf.width_floor},
    };
    j["step"] = state.step;
    j["distance_threshold"] = current_distance_threshold(state);
    j["low_influence_steps"] = state.low_influence_steps;
    return j;
}

SafisState safis_state_from_json(const nlohmann::json& j) {
    SafisState state;
    state.model = model_from_json(j.at("model"));
    const auto& cfg = j.at("config");
    state.config.epsilon_max = cfg.at("epsilon_max").get<double>();
    state.config.epsilon_min = cfg.at("epsilon_min").get<double>();
    state.config.decay = cfg.at("decay").get<double>();
    state.config.e_grow = cfg.at("e_grow").get<double>();
    state.config.e_prune = cfg.at("e_prune").get<double>();
    state.config.kappa = cfg.at("kappa").get<double>();
    state.config.prune_window = cfg.at("prune_window").get<int>();
    state.config.p0 = cfg.at("p0").get<double>();
    state.config.ekf.observation_noise = cfg.at("observation_noise").get<double>();
    state.config.ekf.consequent_only = cfg.at("consequent_only").get<bool>();
    state.config.ekf.width_floor = cfg.at("width_floor").get<double>();
    state.step = j.at("step").get<std::int64_t>();
    state.low_influence_steps = j.at("low_influence_steps").get<std::vector<int>>();
    return state;
}

} // namespace evofis
