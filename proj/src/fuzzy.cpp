#include "evofis/fuzzy.hpp"

#include "evofis/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace evofis {

namespace {

Eigen::VectorXd affine_input(const Eigen::VectorXd& u) {
    Eigen::VectorXd e(u.size() + 1);
    e[0] = 1.0;
    e.tail(u.size()) = u;
    return e;
}

void check_input(const FisModel& model, const Eigen::VectorXd& u) {
    if (model.rules.empty()) {
        throw ModelError("uninitialized model: rule base is empty");
    }
    if (u.size() != model.input_dim) {
        throw DimensionError("input has " + std::to_string(u.size()) + " entries, model expects " +
                             std::to_string(model.input_dim));
    }
}

void symmetrize(Eigen::MatrixXd& m) {
    m = ((m + m.transpose()) * 0.5).eval();
}

} // namespace

Eigen::VectorXd rule_output(const FuzzyRule& rule, const Eigen::VectorXd& u) {
    return rule.consequent * affine_input(u);
}

FiringVector fire(const FisModel& model, const Eigen::VectorXd& u) {
    check_input(model, u);
    const auto n_rules = static_cast<Eigen::Index>(model.rules.size());
    FiringVector firing;
    firing.raw.resize(n_rules);
    for (Eigen::Index i = 0; i < n_rules; ++i) {
        const auto& rule = model.rules[static_cast<std::size_t>(i)];
        double exponent = 0.0;
        for (Eigen::Index d = 0; d < u.size(); ++d) {
            const double diff = u[d] - rule.center[d];
            exponent += diff * diff / (2.0 * rule.width[d] * rule.width[d]);
        }
        firing.raw[i] = std::max(std::exp(-exponent), std::numeric_limits<double>::min());
    }
    firing.normalized = firing.raw / firing.raw.sum();
    return firing;
}

Eigen::VectorXd infer(const FisModel& model, const Eigen::VectorXd& u) {
    const FiringVector firing = fire(model, u);
    const Eigen::VectorXd e = affine_input(u);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(model.output_dim);
    for (std::size_t i = 0; i < model.rules.size(); ++i) {
        out += firing.normalized[static_cast<Eigen::Index>(i)] * (model.rules[i].consequent * e);
    }
    return out;
}

FuzzyRule make_rule_predicting(const Eigen::VectorXd& center, const Eigen::VectorXd& width,
                               const Eigen::VectorXd& v) {
    FuzzyRule rule;
    rule.center = center;
    rule.width = width;
    rule.consequent = Eigen::MatrixXd::Zero(v.size(), center.size() + 1);
    rule.consequent.col(0) = v;
    return rule;
}

Eigen::MatrixXd blended_consequent(const FisModel& model, const Eigen::VectorXd& u) {
    const FiringVector firing = fire(model, u);
    Eigen::MatrixXd blend = Eigen::MatrixXd::Zero(model.output_dim, model.input_dim + 1);
    for (std::size_t i = 0; i < model.rules.size(); ++i) {
        blend += firing.normalized[static_cast<Eigen::Index>(i)] * model.rules[i].consequent;
    }
    return blend;
}

Eigen::MatrixXd make_global_covariance(const FisModel& model, double omega) {
    const auto dim = static_cast<Eigen::Index>(model.rules.size()) * (model.input_dim + 1);
    return omega * Eigen::MatrixXd::Identity(dim, dim);
}

void extend_global_covariance(FisModel& model, double omega) {
    if (!model.global_covariance) {
        model.global_covariance = make_global_covariance(model, omega);
        return;
    }
    const Eigen::Index block = model.input_dim + 1;
    const Eigen::Index old_dim = model.global_covariance->rows();
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(old_dim + block, old_dim + block);
    grown.topLeftCorner(old_dim, old_dim) = *model.global_covariance;
    grown.bottomRightCorner(block, block) = omega * Eigen::MatrixXd::Identity(block, block);
    model.global_covariance = std::move(grown);
}

void rls_update_global(FisModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                       double forgetting) {
    check_input(model, u);
    if (v.size() != model.output_dim) {
        throw DimensionError("target has " + std::to_string(v.size()) + " entries, model expects " +
                             std::to_string(model.output_dim));
    }
    if (!model.global_covariance) {
        throw ModelError("global RLS requires an initialized stacked covariance");
    }
    const auto n_rules = model.rules.size();
    const Eigen::Index block = model.input_dim + 1;
    const Eigen::Index dim = static_cast<Eigen::Index>(n_rules) * block;
    if (model.global_covariance->rows() != dim) {
        throw DimensionError("stacked covariance is " + std::to_string(model.global_covariance->rows()) +
                             "x, expected " + std::to_string(dim));
    }

    const FiringVector firing = fire(model, u);
    const Eigen::VectorXd e = affine_input(u);
    Eigen::VectorXd x(dim);
    for (std::size_t i = 0; i < n_rules; ++i) {
        x.segment(static_cast<Eigen::Index>(i) * block, block) =
            firing.normalized[static_cast<Eigen::Index>(i)] * e;
    }

    Eigen::MatrixXd& P = *model.global_covariance;
    const Eigen::VectorXd Px = P * x;
    const double denom = forgetting + x.dot(Px);
    const Eigen::VectorXd gain = Px / denom;

    for (int j = 0; j < model.output_dim; ++j) {
        Eigen::VectorXd theta(dim);
        for (std::size_t i = 0; i < n_rules; ++i) {
            theta.segment(static_cast<Eigen::Index>(i) * block, block) =
                model.rules[i].consequent.row(j).transpose();
        }
        const double innovation = v[j] - x.dot(theta);
        theta += gain * innovation;
        for (std::size_t i = 0; i < n_rules; ++i) {
            model.rules[i].consequent.row(j) =
                theta.segment(static_cast<Eigen::Index>(i) * block, block).transpose();
        }
    }

    P = ((P - gain * Px.transpose()) / forgetting).eval();
    symmetrize(P);
}

void rls_update_local(FuzzyRule& rule, double weight, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v, int output_dim, double forgetting) {
    if (weight <= 0.0) {
        return;
    }
    if (v.size() != output_dim || rule.consequent.rows() != output_dim ||
        rule.consequent.cols() != u.size() + 1) {
        throw DimensionError("local RLS dimensions inconsistent with the rule");
    }
    if (!rule.covariance || rule.covariance->rows() != u.size() + 1) {
        throw ModelError("rule carries no weighted-RLS covariance of matching size");
    }
    const Eigen::VectorXd e = affine_input(u);
    Eigen::MatrixXd& C = *rule.covariance;
    const Eigen::VectorXd Ce = C * e;
    const double denom = forgetting + weight * e.dot(Ce);
    const Eigen::VectorXd gain = weight * Ce / denom;

    for (int j = 0; j < output_dim; ++j) {
        const double innovation = v[j] - e.dot(rule.consequent.row(j));
        rule.consequent.row(j) += (gain * innovation).transpose();
    }
    C = ((C - gain * Ce.transpose()) / forgetting).eval();
    symmetrize(C);
}

int ekf_param_dim(int input_dim, int output_dim, const EkfOptions& opts) {
    const int consequent = output_dim * (input_dim + 1);
    return opts.consequent_only ? consequent : consequent + 2 * input_dim;
}

Eigen::MatrixXd ekf_jacobian(const FisModel& model, std::size_t rule_index,
                             const Eigen::VectorXd& u, const EkfOptions& opts) {
    check_input(model, u);
    if (rule_index >= model.rules.size()) {
        throw ModelError("rule index " + std::to_string(rule_index) + " out of range");
    }
    const int n = model.input_dim;
    const int m = model.output_dim;
    const int dim = ekf_param_dim(n, m, opts);
    const FuzzyRule& rule = model.rules[rule_index];

    const FiringVector firing = fire(model, u);
    const double lambda = firing.normalized[static_cast<Eigen::Index>(rule_index)];
    const Eigen::VectorXd e = affine_input(u);
    const Eigen::VectorXd a = rule.consequent * e;
    const Eigen::VectorXd v_hat = infer(model, u);

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, dim);
    for (int j = 0; j < m; ++j) {
        for (int d = 0; d <= n; ++d) {
            H(j, j * (n + 1) + d) = lambda * e[d];
        }
    }
    if (!opts.consequent_only) {
        const int c0 = m * (n + 1);
        for (int d = 0; d < n; ++d) {
            const double diff = u[d] - rule.center[d];
            const double w = rule.width[d];
            const double dcenter = lambda * diff / (w * w);
            const double dwidth = lambda * diff * diff / (w * w * w);
            for (int j = 0; j < m; ++j) {
                const double residual = a[j] - v_hat[j];
                H(j, c0 + d) = residual * dcenter;
                H(j, c0 + n + d) = residual * dwidth;
            }
        }
    }
    return H;
}

void ekf_update_nearest(FisModel& model, std::size_t rule_index, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v, const EkfOptions& opts) {
    check_input(model, u);
    if (rule_index >= model.rules.size()) {
        throw ModelError("rule index " + std::to_string(rule_index) + " out of range");
    }
    if (v.size() != model.output_dim) {
        throw DimensionError("target has " + std::to_string(v.size()) + " entries, model expects " +
                             std::to_string(model.output_dim));
    }
    const int n = model.input_dim;
    const int m = model.output_dim;
    const int dim = ekf_param_dim(n, m, opts);
    FuzzyRule& rule = model.rules[rule_index];
    if (!rule.covariance) {
        rule.covariance = kEkfInitCovariance * Eigen::MatrixXd::Identity(dim, dim);
    } else if (rule.covariance->rows() != dim) {
        throw DimensionError("rule covariance is " + std::to_string(rule.covariance->rows()) +
                             "x, EKF expects " + std::to_string(dim));
    }

    const Eigen::MatrixXd H = ekf_jacobian(model, rule_index, u, opts);
    if (!H.allFinite()) {
        throw Error("EKF Jacobian is not finite");
    }
    const Eigen::VectorXd innovation = v - infer(model, u);

    Eigen::MatrixXd& P = *rule.covariance;
    const Eigen::MatrixXd PHt = P * H.transpose();
    Eigen::MatrixXd S = H * PHt;
    S.diagonal().array() += opts.observation_noise;
    const Eigen::MatrixXd gain = S.ldlt().solve(PHt.transpose()).transpose();

    Eigen::VectorXd params(dim);
    for (int j = 0; j < m; ++j) {
        params.segment(j * (n + 1), n + 1) = rule.consequent.row(j).transpose();
    }
    if (!opts.consequent_only) {
        params.segment(m * (n + 1), n) = rule.center;
        params.segment(m * (n + 1) + n, n) = rule.width;
    }

    params += gain * innovation;
    P = ((Eigen::MatrixXd::Identity(dim, dim) - gain * H) * P).eval();
    symmetrize(P);

    for (int j = 0; j < m; ++j) {
        rule.consequent.row(j) = params.segment(j * (n + 1), n + 1).transpose();
    }
    if (!opts.consequent_only) {
        rule.center = params.segment(m * (n + 1), n);
        rule.width = params.segment(m * (n + 1) + n, n).cwiseMax(opts.width_floor);
    }
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    const auto n_cols = n_rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

nlohmann::json model_to_json(const FisModel& model) {
    nlohmann::json j;
    j["input_dim"] = model.input_dim;
    j["output_dim"] = model.output_dim;
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& rule : model.rules) {
        nlohmann::json r;
        r["center"] = vector_to_json(rule.center);
        r["width"] = vector_to_json(rule.width);
        r["consequent"] = matrix_to_json(rule.consequent);
        if (rule.covariance) {
            r["covariance"] = matrix_to_json(*rule.covariance);
        }
        rules.push_back(std::move(r));
    }
    j["rules"] = std::move(rules);
    if (model.global_covariance) {
        j["global_covariance"] = matrix_to_json(*model.global_covariance);
    }
    return j;
}

FisModel model_from_json(const nlohmann::json& j) {
    FisModel model;
    model.input_dim = j.at("input_dim").get<int>();
    model.output_dim = j.at("output_dim").get<int>();
    for (const auto& r : j.at("rules")) {
        FuzzyRule rule;
        rule.center = vector_from_json(r.at("center"));
        rule.width = vector_from_json(r.at("width"));
        rule.consequent = matrix_from_json(r.at("consequent"));
        if (r.contains("covariance")) {
            rule.covariance = matrix_from_json(r.at("covariance"));
        }
        model.rules.push_back(std::move(rule));
    }
    if (j.contains("global_covariance")) {
        model.global_covariance = matrix_from_json(j.at("global_covariance"));
    }
    return model;
}

} // namespace evofis
