#pragma once

#include "evofis/fuzzy.hpp"
#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace evofis {

/// How eTS consequents are estimated each step.
enum class ConsequentUpdate { GlobalRls, LocalWrls };

struct EtsConfig {
    double radius = 0.3;             // cluster radius on normalized data
    double omega = kRlsInitCovariance;
    double forgetting = 1.0;
    ConsequentUpdate update_mode = ConsequentUpdate::LocalWrls;
};

enum class StructuralAction { UpdateOnly, AddRule, ReplaceRule };

struct PotentialDecision {
    double sample_potential = 0.0;
    StructuralAction action = StructuralAction::UpdateOnly;
    std::size_t rule_index = 0;      // target of ReplaceRule
};

/// Streaming state of the evolving Takagi-Sugeno learner. Clustering runs
/// in the joint input-output space, so alongside the model (whose rule
/// centers are input-space projections) the state keeps each rule's joint
/// center together with the Cauchy-potential accumulators.
struct EtsState {
    FisModel model;
    EtsConfig config;
    std::int64_t k = 0;              // samples incorporated so far
    Eigen::VectorXd beta;            // per-dimension sum of past joint samples
    double sigma = 0.0;              // sum of squared joint-sample norms
    std::vector<Eigen::VectorXd> joint_centers;
    std::vector<double> center_potentials;
};

struct EtsStepResult {
    Eigen::VectorXd prediction;
    PotentialDecision decision;
};

/// First sample becomes the focus of the first cluster: one rule at u1 with
/// width radius/sqrt(2), consequent predicting v1 exactly, potential 1.
EtsState ets_init(const RegressorPair& first_pair, const EtsConfig& cfg);

/// Joint vector [u; v] of a pair.
Eigen::VectorXd joint_vector(const RegressorPair& pair);

/// Cauchy potential of z against the samples accumulated so far (pure; the
/// accumulators advance inside ets_step). Equals 1 by convention before any
/// history exists.
double sample_potential(const EtsState& state, const Eigen::VectorXd& z);

/// Fold the current sample into beta/sigma/k.
void advance_potential_accumulators(EtsState& state, const Eigen::VectorXd& z);

/// One-step recursion bringing every center's potential up to date with the
/// arriving sample z.
void refresh_center_potentials(EtsState& state, const Eigen::VectorXd& z);

/// Predict-then-learn step: inference first, then potential bookkeeping,
/// the add/replace decision, and the consequent update.
EtsStepResult ets_step(EtsState& state, const RegressorPair& pair);

nlohmann::json ets_state_to_json(const EtsState& state);
EtsState ets_state_from_json(const nlohmann::json& j);

} // namespace evofis
