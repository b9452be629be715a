#pragma once

#include "evofis/fuzzy.hpp"
#include "evofis/timeseries.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace evofis {

/// Uniform streaming facade over the three forecasters. Every call to step
/// first predicts from the current model, then (unless frozen) learns from
/// the revealed target, so the prediction for a sample can never depend on
/// that sample's target. Learners lazily size themselves from the first
/// sample they see.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    /// Predict-then-learn on one sample; returns the prediction made before
    /// the target was touched. Before the first learning step the prediction
    /// is the zero vector.
    virtual Eigen::VectorXd step(const RegressorPair& pair) = 0;

    /// Hook between the training and test streams (replays reserved samples
    /// for the meta-cognitive learner; no-op otherwise).
    virtual void finish_training() {}

    /// While frozen, step only predicts: no structural or parameter change.
    void set_frozen(bool frozen) { frozen_ = frozen; }
    bool frozen() const { return frozen_; }

    virtual FisModel model() const = 0;
    virtual std::size_t rule_count() const = 0;
    virtual nlohmann::json state_json() const = 0;
    virtual std::string name() const = 0;

protected:
    bool frozen_ = false;
};

/// Construct a learner by algorithm name ("ets", "safis", "mcfis") with
/// hyperparameters given as a JSON object; omitted keys take defaults,
/// unknown keys raise ConfigError.
std::unique_ptr<OnlineLearner> make_learner(const std::string& name,
                                            const nlohmann::json& hyperparameters);

} // namespace evofis
