#pragma once

#include <optional>
#include <vector>

#include "a2m/geometry/robust.hpp"
#include "a2m/geometry/skinned_template.hpp"

namespace a2m::geo {

struct FitOptions {
    double lambda_joints = 2.0;
    double lambda_reg = 0.2;
    double sigma = kGemanMcClureSigma;
    // Surface distances are measured as sqrt(|r|^2 + eps^2) - eps; 0 gives
    // the plain Euclidean distance.
    double surface_epsilon = 1e-3;
    Eigen::VectorXd joint_confidence;   // omega_i; empty means all ones
    int outer_iterations = 10;
    int surface_free_iterations = 2;    // leading outer iterations without the surface term
    int inner_iterations = 200;         // gradient steps per outer iteration
    double initial_step = 1e-3;
    double armijo = 1e-4;
    int max_backtracks = 40;
    double gradient_tolerance = 1e-10;
    bool align_root = true;             // start the translation at the target root
};

struct FitTerms {
    double surface = 0.0, joints = 0.0, reg = 0.0;
    double total() const { return surface + joints + reg; }
};

struct FitResult {
    PoseParams params;
    FitTerms terms;                       // at the returned parameters, surface term included
    std::vector<double> objective;        // after every accepted step
    std::vector<int> step_outer;          // outer iteration of each accepted step
    std::vector<double> outer_objective;  // at the end of each outer iteration
    bool stalled = false;  // a line search ran out of backtracks above the gradient tolerance
};

// Pose prior over theta without the root column (dimension 3 (J - 1)).
int pose_prior_dimension(const SkinnedTemplate& tmpl);
Eigen::VectorXd pose_prior_vector(const SkinnedTemplate& tmpl, const Points& theta);

// For every target vertex, the index of its nearest template vertex.
std::vector<int> nearest_indices(const Points& queries, const Points& candidates);

// Objective with fixed surface correspondences (`nearest[i]` is the template
// vertex closest to target vertex i; empty disables the surface term).
// Optional gradient with respect to every parameter.
FitTerms fit_objective(const SkinnedTemplate& tmpl, const PoseParams& params, const TriMesh& target,
                       const Points& target_joints, const std::vector<int>& nearest,
                       const GaussianMixturePrior& prior, const FitOptions& options, PoseParams* gradient = nullptr);

FitResult fit_skinned_template(const SkinnedTemplate& tmpl, const TriMesh& target, const Points& target_joints,
                               const GaussianMixturePrior& prior, const FitOptions& options = {},
                               std::optional<PoseParams> initial = std::nullopt);

}  // namespace a2m::geo
