#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

namespace a2m::metrics {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Symmetric positive semidefinite square root; negative eigenvalues of the
// (symmetrized) input are clamped to zero.
MatrixXd sqrtm_psd(const MatrixXd& a);

struct GaussianStats {
    VectorXd mean;
    MatrixXd cov;  // unbiased (n - 1)
    bool regularized = false;
};

// Mean and covariance of the rows. A covariance whose smallest eigenvalue
// is not positive gets `epsilon * I` added and is flagged.
GaussianStats gaussian_stats(const MatrixXd& samples, double epsilon = 1e-6);

// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)
double fid_from_stats(const VectorXd& mu1, const MatrixXd& s1, const VectorXd& mu2, const MatrixXd& s2);

struct FidResult {
    double value = 0.0;
    bool regularized = false;
};

// Rows are feature vectors; each side needs at least two.
FidResult fid(const MatrixXd& real, const MatrixXd& generated);

// Mean distance between two random subsets of `subset` rows each, drawn
// without replacement within a subset (with replacement when the pool is
// smaller than the subset).
double diversity(const MatrixXd& features, int subset, std::mt19937_64& rng);

// Class average of the per-class diversity with subset size `subset`.
double multimodality(const std::vector<MatrixXd>& features_by_class, int subset, std::mt19937_64& rng);

// 1.96 * sample standard deviation / sqrt(n); zero for n < 2.
double ci95(const std::vector<double>& values);
double mean(const std::vector<double>& values);

}  // namespace a2m::metrics
