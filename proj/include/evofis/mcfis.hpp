#pragma once

#include "evofis/fuzzy.hpp"
#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace evofis {

struct McfisConfig {
    double e_delete = 0.01;        // below: sample carries nothing new
    double e_learn = 0.05;         // above: parameter update (self-adaptive)
    double e_add = 0.3;            // above (plus novelty): grow (self-adaptive)
    double novelty_threshold = 0.3; // max raw firing below this = novel region
    double delta = 0.98;           // threshold smoothing rate
    double e_prune = 1e-3;         // normalized-firing floor before pruning
    int prune_window = 20;         // consecutive low-firing learning steps
    double kappa = 0.7;            // width factor
    int max_reserve_passes = 3;
    double p0 = kEkfInitCovariance;
    EkfOptions ekf;
};

enum class MetaKind { Delete, Grow, Update, Reserve };

struct MetaDecision {
    MetaKind kind = MetaKind::Reserve;
    double error = 0.0;     // prediction error norm (infinite before any rule)
    double novelty = 0.0;   // max raw firing (0 before any rule)
};

/// Streaming state of the meta-cognitive learner. The model starts empty;
/// the first presented sample always grows the first rule. e_add and
/// e_learn adapt online, clamped so e_delete < e_learn <= e_add holds.
struct McfisState {
    FisModel model;
    McfisConfig config;
    double e_add = 0.0;
    double e_learn = 0.0;
    std::deque<RegressorPair> reserve_queue;
    std::vector<int> low_firing_steps;   // per rule, learning steps only
    std::int64_t grow_count = 0;
    std::int64_t update_count = 0;
    std::int64_t delete_count = 0;
    std::int64_t reserve_count = 0;
};

struct McfisStepResult {
    Eigen::VectorXd prediction;
    MetaDecision decision;
    std::optional<std::size_t> pruned_rule;
};

McfisState mcfis_init(const McfisConfig& cfg, int input_dim, int output_dim);

/// Pick the action for one sample without applying it.
MetaDecision mcfis_decide(const McfisState& state, const RegressorPair& pair);

/// Predict-then-learn step: apply the meta decision (delete discards, grow
/// adds a rule predicting v, update EKF-adjusts the strongest-firing rule,
/// reserve queues the pair), adapt the acting threshold, then prune at most
/// one persistently silent rule.
McfisStepResult mcfis_step(McfisState& state, const RegressorPair& pair);

/// Re-present reserved samples after the training stream: up to
/// max_reserve_passes passes, each sample leaving the queue unless it
/// decides reserve again.
void drain_reserve(McfisState& state);

nlohmann::json mcfis_state_to_json(const McfisState& state);
McfisState mcfis_state_from_json(const nlohmann::json& j);

} // namespace evofis
