#pragma once

#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "a2m/geometry/mesh.hpp"

namespace a2m::geo {

inline constexpr double kGemanMcClureSigma = 0.1;  // meters

// rho(r) = |r|^2 / (sigma^2 + |r|^2).
double geman_mcclure(const Vec3& r, double sigma = kGemanMcClureSigma);
Vec3 geman_mcclure_gradient(const Vec3& r, double sigma = kGemanMcClureSigma);

struct GaussianMixturePrior {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;

    int dimension() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
    int components() const { return static_cast<int>(weights.size()); }
    // Weights non-negative summing to 1, covariances symmetric positive definite.
    void validate() const;

    nlohmann::json to_json() const;
    static GaussianMixturePrior from_json(const nlohmann::json& j);

    // Single zero-mean component with covariance sigma^2 I.
    static GaussianMixturePrior isotropic(int dimension, double sigma);
};

// -log sum_i g_i N(theta; mu_i, Sigma_i), stabilized with log-sum-exp. When
// `gradient` is non-null it receives d/dtheta.
double gmm_neg_log_likelihood(const Eigen::VectorXd& theta, const GaussianMixturePrior& prior,
                              Eigen::VectorXd* gradient = nullptr);

GaussianMixturePrior load_prior(const std::string& path);
void save_prior(const std::string& path, const GaussianMixturePrior& prior);

}  // namespace a2m::geo
