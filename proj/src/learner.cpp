#include "evofis/learner.hpp"

#include "evofis/errors.hpp"
#include "evofis/ets.hpp"
#include "evofis/mcfis.hpp"
#include "evofis/safis.hpp"

#include <optional>
#include <set>
#include <utility>

namespace evofis {

namespace {

// Reject hyperparameter objects containing keys the algorithm does not
// recognize; a typo silently falling back to a default would be invisible.
void check_keys(const std::string& algorithm, const nlohmann::json& hyper,
                const std::set<std::string>& valid) {
    if (hyper.is_null()) return;
    if (!hyper.is_object())
        throw ConfigError("hyperparameters for \"" + algorithm + "\" must be a JSON object");
    for (const auto& [key, value] : hyper.items()) {
        (void)value;
        if (!valid.count(key)) {
            std::string known;
            for (const auto& k : valid) {
                if (!known.empty()) known += ", ";
                known += k;
            }
            throw ConfigError("unknown hyperparameter \"" + key + "\" for \"" + algorithm +
                              "\"; valid keys: " + known);
        }
    }
}

template <typename T>
void read_key(const nlohmann::json& hyper, const char* key, T& out) {
    if (hyper.is_object() && hyper.contains(key)) out = hyper.at(key).get<T>();
}

void read_ekf_keys(const nlohmann::json& hyper, EkfOptions& ekf) {
    read_key(hyper, "observation_noise", ekf.observation_noise);
    read_key(hyper, "consequent_only", ekf.consequent_only);
    read_key(hyper, "width_floor", ekf.width_floor);
}

EtsConfig ets_config_from_json(const nlohmann::json& hyper) {
    check_keys("ets", hyper, {"radius", "omega", "forgetting", "update_mode"});
    EtsConfig cfg;
    read_key(hyper, "radius", cfg.radius);
    read_key(hyper, "omega", cfg.omega);
    read_key(hyper, "forgetting", cfg.forgetting);
    if (hyper.is_object() && hyper.contains("update_mode")) {
        const auto mode = hyper.at("update_mode").get<std::string>();
        if (mode == "global-rls")
            cfg.update_mode = ConsequentUpdate::GlobalRls;
        else if (mode == "local-wrls")
            cfg.update_mode = ConsequentUpdate::LocalWrls;
        else
            throw ConfigError("update_mode must be \"global-rls\" or \"local-wrls\", got \"" +
                              mode + "\"");
    }
    return cfg;
}

SafisConfig safis_config_from_json(const nlohmann::json& hyper) {
    check_keys("safis", hyper,
               {"epsilon_max", "epsilon_min", "decay", "e_grow", "e_prune", "kappa",
                "prune_window", "p0", "observation_noise", "consequent_only", "width_floor"});
    SafisConfig cfg;
    read_key(hyper, "epsilon_max", cfg.epsilon_max);
    read_key(hyper, "epsilon_min", cfg.epsilon_min);
    read_key(hyper, "decay", cfg.decay);
    read_key(hyper, "e_grow", cfg.e_grow);
    read_key(hyper, "e_prune", cfg.e_prune);
    read_key(hyper, "kappa", cfg.kappa);
    read_key(hyper, "prune_window", cfg.prune_window);
    read_key(hyper, "p0", cfg.p0);
    read_ekf_keys(hyper, cfg.ekf);
    return cfg;
}

McfisConfig mcfis_config_from_json(const nlohmann::json& hyper) {
    check_keys("mcfis", hyper,
               {"e_delete", "e_learn", "e_add", "novelty_threshold", "delta", "e_prune",
                "prune_window", "kappa", "max_reserve_passes", "p0", "observation_noise",
                "consequent_only", "width_floor"});
    McfisConfig cfg;
    read_key(hyper, "e_delete", cfg.e_delete);
    read_key(hyper, "e_learn", cfg.e_learn);
    read_key(hyper, "e_add", cfg.e_add);
    read_key(hyper, "novelty_threshold", cfg.novelty_threshold);
    read_key(hyper, "delta", cfg.delta);
    read_key(hyper, "e_prune", cfg.e_prune);
    read_key(hyper, "prune_window", cfg.prune_window);
    read_key(hyper, "kappa", cfg.kappa);
    read_key(hyper, "max_reserve_passes", cfg.max_reserve_passes);
    read_key(hyper, "p0", cfg.p0);
    read_ekf_keys(hyper, cfg.ekf);
    return cfg;
}

class EtsLearner final : public OnlineLearner {
public:
    explicit EtsLearner(EtsConfig cfg) : cfg_(cfg) {}

    Eigen::VectorXd step(const RegressorPair& pair) override {
        if (!state_) {
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(pair.v.size());
            if (!frozen_) state_ = ets_init(pair, cfg_);
            return zero;
        }
        if (frozen_) return infer(state_->model, pair.u);
        return ets_step(*state_, pair).prediction;
    }

    FisModel model() const override { return state_ ? state_->model : FisModel{}; }
    std::size_t rule_count() const override { return state_ ? state_->model.rules.size() : 0; }
    nlohmann::json state_json() const override {
        if (!state_) return {{"algorithm", name()}, {"initialized", false}};
        return ets_state_to_json(*state_);
    }
    std::string name() const override { return "ets"; }

private:
    EtsConfig cfg_;
    std::optional<EtsState> state_;
};

class SafisLearner final : public OnlineLearner {
public:
    explicit SafisLearner(SafisConfig cfg) : cfg_(cfg) {}

    Eigen::VectorXd step(const RegressorPair& pair) override {
        if (!state_) {
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(pair.v.size());
            if (!frozen_) state_ = safis_init(pair, cfg_);
            return zero;
        }
        if (frozen_) return infer(state_->model, pair.u);
        return safis_step(*state_, pair).prediction;
    }

    FisModel model() const override { return state_ ? state_->model : FisModel{}; }
    std::size_t rule_count() const override { return state_ ? state_->model.rules.size() : 0; }
    nlohmann::json state_json() const override {
        if (!state_) return {{"algorithm", name()}, {"initialized", false}};
        return safis_state_to_json(*state_);
    }
    std::string name() const override { return "safis"; }

private:
    SafisConfig cfg_;
    std::optional<SafisState> state_;
};

class McfisLearner final : public OnlineLearner {
public:
    explicit McfisLearner(McfisConfig cfg) : cfg_(cfg) {}

    Eigen::VectorXd step(const RegressorPair& pair) override {
        if (!state_) {
            if (frozen_) return Eigen::VectorXd::Zero(pair.v.size());
            state_ = mcfis_init(cfg_, static_cast<int>(pair.u.size()),
                                static_cast<int>(pair.v.size()));
        }
        if (frozen_) {
            return state_->model.rules.empty()
                       ? Eigen::VectorXd::Zero(state_->model.output_dim).eval()
                       : infer(state_->model, pair.u);
        }
        return mcfis_step(*state_, pair).prediction;
    }

    void finish_training() override {
        if (state_ && !frozen_) drain_reserve(*state_);
    }

    FisModel model() const override { return state_ ? state_->model : FisModel{}; }
    std::size_t rule_count() const override { return state_ ? state_->model.rules.size() : 0; }
    nlohmann::json state_json() const override {
        if (!state_) return {{"algorithm", name()}, {"initialized", false}};
        return mcfis_state_to_json(*state_);
    }
    std::string name() const override { return "mcfis"; }

private:
    McfisConfig cfg_;
    std::optional<McfisState> state_;
};

} // namespace

std::unique_ptr<OnlineLearner> make_learner(const std::string& name,
                                            const nlohmann::json& hyperparameters) {
    if (name == "ets") return std::make_unique<EtsLearner>(ets_config_from_json(hyperparameters));
    if (name == "safis")
        return std::make_unique<SafisLearner>(safis_config_from_json(hyperparameters));
    if (name == "mcfis")
        return std::make_unique<McfisLearner>(mcfis_config_from_json(hyperparameters));
    throw ConfigError("unknown algorithm \"" + name + "\"; expected ets, safis, or mcfis");
}

} // namespace evofis
