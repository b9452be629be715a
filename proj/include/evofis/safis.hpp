#pragma once

#include "evofis/fuzzy.hpp"
#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace evofis {

struct SafisConfig {
    double epsilon_max = 0.5;    // distance-threshold schedule start
    double epsilon_min = 0.1;    // schedule floor
    double decay = 0.997;        // threshold decay per step
    double e_grow = 0.05;        // candidate-influence floor for growth
    double e_prune = 0.01;       // influence floor before pruning
    double kappa = 2.0;          // width overlap factor
    int prune_window = 10;       // consecutive low-influence steps before removal
    double p0 = kEkfInitCovariance;
    EkfOptions ekf;
};

/// Streaming state of the sequential adaptive fuzzy inference learner.
struct SafisState {
    FisModel model;
    SafisConfig config;
    std::int64_t step = 0;                  // samples seen, init counts as 1
    std::vector<int> low_influence_steps;   // per rule, parallel to model.rules
};

enum class SafisActionKind { Grow, Update };

struct SafisAction {
    SafisActionKind kind = SafisActionKind::Update;
    std::optional<std::size_t> pruned_rule;
};

struct SafisStepResult {
    Eigen::VectorXd prediction;
    SafisAction action;
};

/// Bootstrap on the first sample: one rule at u1 with width kappa,
/// consequent predicting v1 exactly.
SafisState safis_init(const RegressorPair& first_pair, const SafisConfig& cfg);

/// Decaying distance threshold: epsilon_max * decay^(step-1), floored at
/// epsilon_min. Equals epsilon_max right after init.
double current_distance_threshold(const SafisState& state);

/// Per-rule influence at input u: |a_i| * raw_i / sum_j raw_j with |a_i|
/// the magnitude of rule i's affine output at u.
Eigen::VectorXd rule_influences(const FisModel& model, const Eigen::VectorXd& u);

/// Influence a hypothetical rule centered at u would carry, firing 1 at its
/// own center with output magnitude error_norm.
double candidate_influence(const FisModel& model, const Eigen::VectorXd& u, double error_norm);

/// Predict-then-learn step: grow when the sample is both far from every
/// rule and influential enough, otherwise EKF-update the nearest rule; then
/// prune at most one persistently low-influence rule.
SafisStepResult safis_step(SafisState& state, const RegressorPair& pair);

nlohmann::json safis_state_to_json(const SafisState& state);
SafisState safis_state_from_json(const nlohmann::json& j);

} // namespace evofis
