#include "evofis/ets.hpp"

#include "evofis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evofis {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

Eigen::VectorXd rule_width(const EtsConfig& cfg, int input_dim) {
    return Eigen::VectorXd::Constant(input_dim, cfg.radius / kSqrt2);
}

} // namespace

Eigen::VectorXd joint_vector(const RegressorPair& pair) {
    Eigen::VectorXd z(pair.u.size() + pair.v.size());
    z.head(pair.u.size()) = pair.u;
    z.tail(pair.v.size()) = pair.v;
    return z;
}

EtsState ets_init(const RegressorPair& first_pair, const EtsConfig& cfg) {
    EtsState state;
    state.config = cfg;
    state.model.input_dim = static_cast<int>(first_pair.u.size());
    state.model.output_dim = static_cast<int>(first_pair.v.size());

    FuzzyRule rule = make_rule_predicting(first_pair.u, rule_width(cfg, state.model.input_dim),
                                          first_pair.v);
    if (cfg.update_mode == ConsequentUpdate::LocalWrls) {
        rule.covariance =
            cfg.omega * Eigen::MatrixXd::Identity(state.model.input_dim + 1, state.model.input_dim + 1);
    }
    state.model.rules.push_back(std::move(rule));
    if (cfg.update_mode == ConsequentUpdate::GlobalRls) {
        state.model.global_covariance = make_global_covariance(state.model, cfg.omega);
    }

    const Eigen::VectorXd z = joint_vector(first_pair);
    state.joint_centers.push_back(z);
    state.center_potentials.push_back(1.0);
    state.beta = Eigen::VectorXd::Zero(z.size());
    state.sigma = 0.0;
    state.k = 0;
    advance_potential_accumulators(state, z);
    return state;
}

double sample_potential(const EtsState& state, const Eigen::VectorXd& z) {
    if (state.k < 1) {
        return 1.0;
    }
    const double m = static_cast<double>(state.k);
    const double theta = z.squaredNorm();
    const double proj = z.dot(state.beta);
    const double denom = m * (theta + 1.0) + state.sigma - 2.0 * proj;
    return m / denom;
}

void advance_potential_accumulators(EtsState& state, const Eigen::VectorXd& z) {
    if (state.beta.size() != z.size()) {
        throw DimensionError("joint sample has " + std::to_string(z.size()) +
                             " entries, accumulators hold " + std::to_string(state.beta.size()));
    }
    state.beta += z;
    state.sigma += z.squaredNorm();
    state.k += 1;
}

void refresh_center_potentials(EtsState& state, const Eigen::VectorXd& z) {
    // Sample index being processed is k+1; the recursion's (k-1) factor
    // therefore reads state.k here.
    const double m = static_cast<double>(state.k);
    for (std::size_t i = 0; i < state.center_potentials.size(); ++i) {
        const double prev = state.center_potentials[i];
        const double d2 = (z - state.joint_centers[i]).squaredNorm();
        state.center_potentials[i] = m * prev / ((m - 1.0) + prev + prev * d2);
    }
}

EtsStepResult ets_step(EtsState& state, const RegressorPair& pair) {
    EtsStepResult result;
    result.prediction = infer(state.model, pair.u);

    const Eigen::VectorXd z = joint_vector(pair);
    const double potential = sample_potential(state, z);
    refresh_center_potentials(state, z);

    result.decision.sample_potential = potential;
    const double best_center =
        *std::max_element(state.center_potentials.begin(), state.center_potentials.end());

    if (potential > best_center) {
        std::size_t nearest = 0;
        double nearest_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < state.joint_centers.size(); ++i) {
            const double d2 = (z - state.joint_centers[i]).squaredNorm();
            if (d2 < nearest_d2) {
                nearest_d2 = d2;
                nearest = i;
            }
        }
        if (std::sqrt(nearest_d2) < state.config.radius) {
            // Crowded region: move the nearest center onto the sample and
            // keep its consequent and estimator state.
            state.model.rules[nearest].center = pair.u;
            state.joint_centers[nearest] = z;
            state.center_potentials[nearest] = potential;
            result.decision.action = StructuralAction::ReplaceRule;
            result.decision.rule_index = nearest;
        } else {
            FuzzyRule rule;
            rule.center = pair.u;
            rule.width = rule_width(state.config, state.model.input_dim);
            rule.consequent = blended_consequent(state.model, pair.u);
            if (state.config.update_mode == ConsequentUpdate::LocalWrls) {
                rule.covariance = state.config.omega *
                                  Eigen::MatrixXd::Identity(state.model.input_dim + 1,
                                                            state.model.input_dim + 1);
            }
            state.model.rules.push_back(std::move(rule));
            state.joint_centers.push_back(z);
            state.center_potentials.push_back(potential);
            if (state.config.update_mode == ConsequentUpdate::GlobalRls) {
                extend_global_covariance(state.model, state.config.omega);
            }
            result.decision.action = StructuralAction::AddRule;
            result.decision.rule_index = state.model.rules.size() - 1;
        }
    }

    if (state.config.update_mode == ConsequentUpdate::GlobalRls) {
        rls_update_global(state.model, pair.u, pair.v, state.config.forgetting);
    } else {
        const FiringVector firing = fire(state.model, pair.u);
        for (std::size_t i = 0; i < state.model.rules.size(); ++i) {
            rls_update_local(state.model.rules[i], firing.normalized[static_cast<Eigen::Index>(i)],
                             pair.u, pair.v, state.model.output_dim, state.config.forgetting);
        }
    }

    advance_potential_accumulators(state, z);
    return result;
}

nlohmann::json ets_state_to_json(const EtsState& state) {
    nlohmann::json j;
    j["algorithm"] = "ets";
    j["model"] = model_to_json(state.model);
    j["config"] = {
        {"radius", state.config.radius},
        {"omega", state.config.omega},
        {"forgetting", state.config.forgetting},
        {"update_mode",
         state.config.update_mode == ConsequentUpdate::GlobalRls ? "global-rls" : "local-wrls"},
    };
    j["k"] = state.k;
    j["beta"] = vector_to_json(state.beta);
    j["sigma"] = state.sigma;
    j["center_potentials"] = state.center_potentials;
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& c : state.joint_centers) {
        centers.push_back(vector_to_json(c));
    }
    j["joint_centers"] = std::move(centers);
    return j;
}

EtsState ets_state_from_json(const nlohmann::json& j) {
    EtsState state;
    state.model = model_from_json(j.at("model"));
    const auto& cfg = j.at("config");
    state.config.radius = cfg.at("radius").get<double>();
    state.config.omega = cfg.at("omega").get<double>();
    state.config.forgetting = cfg.at("forgetting").get<double>();
    state.config.update_mode = cfg.at("update_mode").get<std::string>() == "global-rls"
                                   ? ConsequentUpdate::GlobalRls
                                   : ConsequentUpdate::LocalWrls;
    state.k = j.at("k").get<std::int64_t>();
    state.beta = vector_from_json(j.at("beta"));
    state.sigma = j.at("sigma").get<double>();
    state.center_potentials = j.at("center_potentials").get<std::vector<double>>();
    for (const auto& c : j.at("joint_centers")) {
        state.joint_centers.push_back(vector_from_json(c));
    }
    return state;
}

} // namespace evofis
