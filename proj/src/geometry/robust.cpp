#include "a2m/geometry/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>

#include <Eigen/Cholesky>

#include "a2m/error.hpp"

namespace a2m::geo {

using nlohmann::json;

double geman_mcclure(const Vec3& r, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    const double r2 = r.squaredNorm();
    return r2 / (sigma * sigma + r2);
}

Vec3 geman_mcclure_gradient(const Vec3& r, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    const double s2 = sigma * sigma;
    const double d = s2 + r.squaredNorm();
    return (2.0 * s2 / (d * d)) * r;
}

void GaussianMixturePrior::validate() const {
    const int k = components();
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "mixture has no components");
    if (static_cast<int>(means.size()) != k || static_cast<int>(covariances.size()) != k) {
        throw Error(ErrorKind::DimensionMismatch, "mixture component counts disagree");
    }
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidArgument, "mixture weights must be non-negative and sum to 1");
    }
    const int d = dimension();
    for (int i = 0; i < k; ++i) {
        if (means[i].size() != d || covariances[i].rows() != d || covariances[i].cols() != d) {
            throw Error(ErrorKind::DimensionMismatch, "mixture component " + std::to_string(i) + " has wrong size");
        }
        if (!covariances[i].isApprox(covariances[i].transpose(), 1e-12)) {
            throw Error(ErrorKind::InvalidArgument, "covariance " + std::to_string(i) + " is not symmetric");
        }
        if (Eigen::LLT<Eigen::MatrixXd>(covariances[i]).info() != Eigen::Success) {
            throw Error(ErrorKind::InvalidArgument, "covariance " + std::to_string(i) + " is not positive definite");
        }
    }
}

json GaussianMixturePrior::to_json() const {
    json comps = json::array();
    for (int i = 0; i < components(); ++i) {
        json cov = json::array();
        for (Eigen::Index r = 0; r < covariances[i].rows(); ++r) {
            cov.push_back(std::vector<double>(covariances[i].row(r).begin(), covariances[i].row(r).end()));
        }
        comps.push_back({{"weight", weights[i]},
                         {"mean", std::vector<double>(means[i].begin(), means[i].end())},
                         {"covariance", cov}});
    }
    return {{"format", "a2m-gmm"}, {"components", comps}};
}

GaussianMixturePrior GaussianMixturePrior::from_json(const json& j) {
    GaussianMixturePrior p;
    try {
        const auto& comps = j.at("components");
        p.weights.resize(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) {
            p.weights[i] = comps[i].at("weight").get<double>();
            const auto m = comps[i].at("mean").get<std::vector<double>>();
            p.means.emplace_back(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()));
            const auto& cov = comps[i].at("covariance");
            Eigen::MatrixXd c(cov.size(), m.size());
            for (std::size_t r = 0; r < cov.size(); ++r) {
                const auto row = cov[r].get<std::vector<double>>();
                if (row.size() != m.size()) throw Error(ErrorKind::SchemaViolation, "covariance row has wrong length");
                for (std::size_t k = 0; k < row.size(); ++k) c(r, k) = row[k];
            }
            p.covariances.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("prior JSON: ") + e.what());
    }
    p.validate();
    return p;
}

GaussianMixturePrior GaussianMixturePrior::isotropic(int dimension, double sigma) {
    GaussianMixturePrior p;
    p.weights = Eigen::VectorXd::Ones(1);
    p.means.push_back(Eigen::VectorXd::Zero(dimension));
    p.covariances.push_back(Eigen::MatrixXd::Identity(dimension, dimension) * sigma * sigma);
    return p;
}

double gmm_neg_log_likelihood(const Eigen::VectorXd& theta, const GaussianMixturePrior& prior,
                              Eigen::VectorXd* gradient) {
    const int k = prior.components();
    const int d = prior.dimension();
    if (k == 0 || theta.size() != d) throw Error(ErrorKind::DimensionMismatch, "theta does not match the prior");
    std::vector<double> logs(k, -std::numeric_limits<double>::infinity());
    std::vector<Eigen::VectorXd> pulls(k);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        if (prior.weights[i] <= 0.0) continue;
        Eigen::LLT<Eigen::MatrixXd> llt(prior.covariances[i]);
        const Eigen::VectorXd diff = theta - prior.means[i];
        const Eigen::VectorXd sol = llt.solve(diff);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        logs[i] = std::log(prior.weights[i]) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet + diff.dot(sol));
        pulls[i] = sol;
        top = std::max(top, logs[i]);
    }
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::exp(logs[i] - top);
    const double lse = top + std::log(s);
    if (gradient) {
        gradient->setZero(d);
        for (int i = 0; i < k; ++i) {
            if (prior.weights[i] <= 0.0) continue;
            *gradient += std::exp(logs[i] - lse) * pulls[i];
        }
    }
    return -lse;
}

GaussianMixturePrior load_prior(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
    return GaussianMixturePrior::from_json(j);
}

void save_prior(const std::string& path, const GaussianMixturePrior& prior) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << prior.to_json().dump(1) << '\n';
}

}  // namespace a2m::geo
