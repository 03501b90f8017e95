#include "a2m/geometry/fitting.hpp"

#include <cmath>
#include <limits>

#include "a2m/error.hpp"

namespace a2m::geo {

int pose_prior_dimension(const SkinnedTemplate& tmpl) { return 3 * (tmpl.joint_count() - 1); }

Eigen::VectorXd pose_prior_vector(const SkinnedTemplate& tmpl, const Points& theta) {
    Eigen::VectorXd v(pose_prior_dimension(tmpl));
    const int root = tmpl.root();
    int k = 0;
    for (int j = 0; j < tmpl.joint_count(); ++j) {
        if (j == root) continue;
        v.segment<3>(3 * k++) = theta.col(j);
    }
    return v;
}

std::vector<int> nearest_indices(const Points& queries, const Points& candidates) {
    if (candidates.cols() == 0) throw Error(ErrorKind::EmptyResult, "no candidate vertices");
    std::vector<int> out(queries.cols());
    const Eigen::RowVectorXd cand_sq = candidates.colwise().squaredNorm();
    for (Eigen::Index i = 0; i < queries.cols(); ++i) {
        const Eigen::RowVectorXd d = cand_sq - 2.0 * queries.col(i).transpose() * candidates;
        Eigen::Index best;
        d.minCoeff(&best);
        out[i] = static_cast<int>(best);
    }
    return out;
}

FitTerms fit_objective(const SkinnedTemplate& tmpl, const PoseParams& params, const TriMesh& target,
                       const Points& target_joints, const std::vector<int>& nearest,
                       const GaussianMixturePrior& prior, const FitOptions& options, PoseParams* gradient) {
    const int nj = tmpl.joint_count();
    const PosedTemplate posed = pose_template(tmpl, params);
    FitTerms terms;
    Points g_vertices, g_joints;
    if (gradient) {
        g_vertices = Points::Zero(3, tmpl.vertex_count());
        g_joints = Points::Zero(3, nj);
    }

    if (!nearest.empty()) {
        for (int i = 0; i < target.vertex_count(); ++i) {
            const Vec3 r = posed.vertices.col(nearest[i]) - target.vertices.col(i);
            const double eps = options.surface_epsilon;
            const double n = std::sqrt(r.squaredNorm() + eps * eps);
            terms.surface += n - eps;
            if (gradient && n > 0.0) g_vertices.col(nearest[i]) += r / n;
        }
    }

    if (options.lambda_joints != 0.0) {
        for (int j = 0; j < nj; ++j) {
            const double w = options.joint_confidence.size() ? options.joint_confidence[j] : 1.0;
            if (w == 0.0) continue;
            const Vec3 r = posed.joints.col(j) - target_joints.col(j);
            terms.joints += options.lambda_joints * w * geman_mcclure(r, options.sigma);
            if (gradient) g_joints.col(j) += options.lambda_joints * w * geman_mcclure_gradient(r, options.sigma);
        }
    }

    Eigen::VectorXd g_prior;
    if (options.lambda_reg != 0.0) {
        terms.reg = options.lambda_reg *
                    gmm_neg_log_likelihood(pose_prior_vector(tmpl, params.theta), prior, gradient ? &g_prior : nullptr);
    }

    if (gradient) {
        *gradient = pose_template_gradient(tmpl, params, posed, g_vertices, g_joints);
        if (g_prior.size()) {
            const int root = tmpl.root();
            int k = 0;
            for (int j = 0; j < nj; ++j) {
                if (j == root) continue;
                gradient->theta.col(j) += options.lambda_reg * g_prior.segment<3>(3 * k++);
            }
        }
    }
    return terms;
}

FitResult fit_skinned_template(const SkinnedTemplate& tmpl, const TriMesh& target, const Points& target_joints,
                               const GaussianMixturePrior& prior, const FitOptions& options,
                               std::optional<PoseParams> initial) {
    tmpl.validate();
    target.validate();
    const int nj = tmpl.joint_count();
    if (target_joints.cols() != nj) throw Error(ErrorKind::DimensionMismatch, "target joints must follow the template joints");
    if (options.joint_confidence.size() && options.joint_confidence.size() != nj) {
        throw Error(ErrorKind::DimensionMismatch, "one joint confidence per joint required");
    }
    if (options.lambda_reg != 0.0 && prior.dimension() != pose_prior_dimension(tmpl)) {
        throw Error(ErrorKind::DimensionMismatch, "pose prior dimension does not match the template");
    }
    if (options.outer_iterations < 0 || options.inner_iterations < 0 || !(options.initial_step > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "invalid fit options");
    }

    FitResult result;
    PoseParams p = initial ? *initial : PoseParams::zeros(tmpl);
    if (!initial && options.align_root) {
        const int root = tmpl.root();
        p.translation = target_joints.col(root) - tmpl.rest_joints(p.beta).col(root);
    }
    const Eigen::Index shapes = tmpl.shape_count();

    std::vector<int> nearest;
    for (int outer = 0; outer < options.outer_iterations; ++outer) {
        nearest.clear();
        if (outer >= options.surface_free_iterations) {
            nearest = nearest_indices(target.vertices, pose_template(tmpl, p).vertices);
        }
        auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
            PoseParams grad;
            const FitTerms t = fit_objective(tmpl, PoseParams::unflatten(x, shapes, nj), target, target_joints, nearest,
                                             prior, options, g ? &grad : nullptr);
            if (g) *g = grad.flatten();
            return t.total();
        };

        Eigen::VectorXd x = p.flatten(), g;
        double f = eval(x, &g);
        double step = options.initial_step;
        for (int it = 0; it < options.inner_iterations; ++it) {
            const double gg = g.squaredNorm();
            if (gg <= options.gradient_tolerance * options.gradient_tolerance) break;
            bool accepted = false;
            for (int bt = 0; bt < options.max_backtracks; ++bt) {
                const Eigen::VectorXd trial = x - step * g;
                const double ft = eval(trial, nullptr);
                if (std::isfinite(ft) && ft <= f - options.armijo * step * gg) {
                    x = trial;
                    f = eval(x, &g);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                result.stalled = true;
                break;
            }
            result.objective.push_back(f);
            result.step_outer.push_back(outer);
            step *= 2.0;
        }
        p = PoseParams::unflatten(x, shapes, nj);
        result.outer_objective.push_back(f);
    }

    result.params = p;
    result.terms = fit_objective(tmpl, p, target, target_joints, nearest_indices(target.vertices, pose_template(tmpl, p).vertices),
                                 prior, options);
    return result;
}

}  // namespace a2m::geo
