#pragma once

#include <vector>

#include "a2m/geometry/arap.hpp"
#include "a2m/geometry/skinned_template.hpp"
#include "a2m/lie/kinematics.hpp"

namespace a2m::geo {

// Template pose whose joints follow `joints` (template joint order): each
// joint's world rotation aligns its rest child directions with the observed
// ones (minimal rotation for one child, Kabsch for several, the parent's
// rotation for leaves) and the translation moves the root onto joints.col(root).
PoseParams retarget_pose(const SkinnedTemplate& tmpl, const Eigen::VectorXd& beta, const Points& joints);

struct AnimateOptions {
    ArapOptions arap;
    NeighborWeights weights;  // empty: uniform
};

// Reposes `target` (to which `fitted` was fitted) along the motion: per frame
// the template is reposed, control targets are rebuilt from the displacement
// map and ARAP runs with the previous frame's output as its rest state.
std::vector<TriMesh> animate_mesh(const SkinnedTemplate& tmpl, const PoseParams& fitted, const TriMesh& target,
                                  const lie::KinematicTree& tree, const lie::LieMotion& motion,
                                  const AnimateOptions& options = {});

}  // namespace a2m::geo
