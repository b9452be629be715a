#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include <optional>
#include <vector>

namespace evofis {

/// Default prior covariance scale for recursive least squares.
inline constexpr double kRlsInitCovariance = 1000.0;
/// Default prior covariance scale for per-rule EKF parameter vectors.
inline constexpr double kEkfInitCovariance = 1.0;
/// Default EKF observation noise.
inline constexpr double kEkfObservationNoise = 0.01;
/// Gaussian widths are clamped above this after any update.
inline constexpr double kWidthFloor = 1e-3;

/// One Takagi-Sugeno rule: Gaussian antecedent plus affine consequent.
/// consequent has one row per output coordinate and input_dim + 1 columns,
/// column 0 being the bias. covariance carries per-rule estimator state:
/// (input_dim+1)^2 for local weighted RLS, or the full EKF parameter
/// covariance when the rule is trained by ekf_update_nearest.
struct FuzzyRule {
    Eigen::VectorXd center;
    Eigen::VectorXd width;
    Eigen::MatrixXd consequent;
    std::optional<Eigen::MatrixXd> covariance;
};

/// Ordered rule base plus model dimensions. global_covariance is the stacked
/// RLS covariance used by rls_update_global; it is absent for locally
/// estimated models.
struct FisModel {
    int input_dim = 0;
    int output_dim = 0;
    std::vector<FuzzyRule> rules;
    std::optional<Eigen::MatrixXd> global_covariance;
};

/// Per-rule activations at one input: raw Gaussian memberships in (0, 1]
/// and their sum-one normalization.
struct FiringVector {
    Eigen::VectorXd raw;
    Eigen::VectorXd normalized;
};

/// The affine consequent output of one rule at input u.
Eigen::VectorXd rule_output(const FuzzyRule& rule, const Eigen::VectorXd& u);

/// Gaussian firing of every rule at u. Raw values are floored at the
/// smallest normal double so normalization stays well defined far from all
/// centers. Throws ModelError on an empty rule base.
FiringVector fire(const FisModel& model, const Eigen::VectorXd& u);

/// Weighted-sum Takagi-Sugeno inference: sum of normalized firing times the
/// per-rule affine output.
Eigen::VectorXd infer(const FisModel& model, const Eigen::VectorXd& u);

/// Build a rule whose consequent predicts exactly v at every input (bias v,
/// zero linear term).
FuzzyRule make_rule_predicting(const Eigen::VectorXd& center, const Eigen::VectorXd& width,
                               const Eigen::VectorXd& v);

/// Consequent initialized as the firing-weighted average of the existing
/// rules' consequents at input u.
Eigen::MatrixXd blended_consequent(const FisModel& model, const Eigen::VectorXd& u);

/// Fresh stacked covariance omega * I sized for the model's rule count.
Eigen::MatrixXd make_global_covariance(const FisModel& model, double omega);

/// Extend a stacked covariance with an omega * I block for one new rule.
void extend_global_covariance(FisModel& model, double omega);

/// One global RLS step over the stacked regressor
/// [w_1 [1;u]; ...; w_R [1;u]] shared by all output coordinates.
/// Requires global_covariance. Covariance is symmetrized after the update.
void rls_update_global(FisModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       double forgetting = 1.0);

/// One weighted RLS step on a single rule with observation weight (the
/// rule's normalized firing). weight 0 leaves the rule untouched.
void rls_update_local(FuzzyRule& rule, double weight, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, int output_dim, double forgetting = 1.0);

struct EkfOptions {
    double observation_noise = kEkfObservationNoise;
    bool consequent_only = false;
    double width_floor = kWidthFloor;
};

/// Number of EKF parameters for one rule under the given options.
int ekf_param_dim(int input_dim, int output_dim, const EkfOptions& opts);

/// Jacobian of the full-model prediction with respect to the selected
/// rule's parameter vector [consequent row-major; center; width], evaluated
/// at u. Exposed for oracle testing.
Eigen::MatrixXd ekf_jacobian(const FisModel& model, std::size_t rule_index,
                             const Eigen::VectorXd& u, const EkfOptions& opts);

/// One EKF step on the selected rule: innovation v - infer(u), covariance
/// symmetrized, widths clamped at width_floor.
void ekf_update_nearest(FisModel& model, std::size_t rule_index, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v, const EkfOptions& opts = {});

nlohmann::json model_to_json(const FisModel& model);
FisModel model_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

} // namespace evofis
