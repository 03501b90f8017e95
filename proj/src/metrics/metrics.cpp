#include "a2m/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "a2m/error.hpp"

namespace a2m::metrics {

MatrixXd sqrtm_psd(const MatrixXd& a) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::ShapeMismatch, "sqrtm_psd needs a square matrix");
    const MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
    const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

GaussianStats gaussian_stats(const MatrixXd& samples, double epsilon) {
    if (samples.rows() < 2) throw Error(ErrorKind::InvalidArgument, "statistics need at least two samples");
    GaussianStats s;
    s.mean = samples.colwise().mean().transpose();
    const MatrixXd centered = samples.rowwise() - s.mean.transpose();
    s.cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        s.cov += epsilon * MatrixXd::Identity(s.cov.rows(), s.cov.cols());
        s.regularized = true;
    }
    return s;
}

double fid_from_stats(const VectorXd& mu1, const MatrixXd& s1, const VectorXd& mu2, const MatrixXd& s2) {
    if (mu1.size() != mu2.size() || s1.rows() != mu1.size() || s2.rows() != mu2.size()) {
        throw Error(ErrorKind::ShapeMismatch, "fid: statistics have different dimensions");
    }
    const MatrixXd r1 = sqrtm_psd(s1);
    const MatrixXd m = r1 * s2 * r1;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return (mu1 - mu2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * tr_sqrt;
}

FidResult fid(const MatrixXd& real, const MatrixXd& generated) {
    if (real.cols() != generated.cols()) throw Error(ErrorKind::ShapeMismatch, "fid: feature widths differ");
    const GaussianStats a = gaussian_stats(real);
    const GaussianStats b = gaussian_stats(generated);
    return {fid_from_stats(a.mean, a.cov, b.mean, b.cov), a.regularized || b.regularized};
}

namespace {

std::vector<int> draw_subset(int pool, int subset, std::mt19937_64& rng) {
    std::vector<int> idx;
    if (pool >= subset) {
        idx.resize(pool);
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates: the first `subset` entries are the sample.
        for (int i = 0; i < subset; ++i) {
            std::uniform_int_distribution<int> pick(i, pool - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(subset);
    } else {
        std::uniform_int_distribution<int> pick(0, pool - 1);
        for (int i = 0; i < subset; ++i) idx.push_back(pick(rng));
    }
    return idx;
}

}  // namespace

double diversity(const MatrixXd& features, int subset, std::mt19937_64& rng) {
    if (features.rows() == 0) throw Error(ErrorKind::EmptyResult, "diversity of an empty pool");
    if (subset < 1) throw Error(ErrorKind::InvalidArgument, "subset size must be >= 1");
    const int pool = static_cast<int>(features.rows());
    const auto a = draw_subset(pool, subset, rng);
    const auto b = draw_subset(pool, subset, rng);
    double total = 0.0;
    for (int i = 0; i < subset; ++i) total += (features.row(a[i]) - features.row(b[i])).norm();
    return total / subset;
}

double multimodality(const std::vector<MatrixXd>& features_by_class, int subset, std::mt19937_64& rng) {
    if (features_by_class.empty()) throw Error(ErrorKind::EmptyResult, "multimodality needs at least one class");
    double total = 0.0;
    for (std::size_t c = 0; c < features_by_class.size(); ++c) {
        if (features_by_class[c].rows() == 0) {
            throw Error(ErrorKind::EmptyResult, "class " + std::to_string(c) + " has no samples");
        }
        total += diversity(features_by_class[c], subset, rng);
    }
    return total / static_cast<double>(features_by_class.size());
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double ci95(const std::vector<double>& values) {
    const auto n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace a2m::metrics
