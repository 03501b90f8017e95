#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "a2m/lie/skeleton.hpp"
#include "a2m/lie/so3.hpp"

namespace a2m::lie {

// Joint positions, one column per joint (meters).
using JointPose = Eigen::Matrix3Xd;
using JointSequence = std::vector<JointPose>;

// Pose in the disentangled Lie representation: a global orientation and
// location for the root plus one so(3) vector per bone (bone order of the
// KinematicTree).
struct LiePose {
    Vec3 root_orientation = Vec3::Zero();
    Vec3 root_position = Vec3::Zero();
    Eigen::Matrix3Xd lie;  // 3 x bone_count
};

enum class RootMode { absolute, relative };

struct LieMotion {
    // root_position of every frame is stored as an absolute location.
    std::vector<LiePose> frames;
    // Encoding used when the trajectory is exported or fed to a network.
    RootMode root_trajectory_mode = RootMode::absolute;
    std::vector<double> bone_lengths;
};

// Chains the per-bone rotations from the root outwards. Every chain starts
// from the root orientation; joint i of a chain sits at
//   J_i = (R_root exp(w_1) ... exp(w_i)) (b_i, 0, 0)^T + J_{i-1}.
JointPose forward_kinematics(const KinematicTree& tree, const LiePose& pose);

// Inverse of forward_kinematics for twist-free poses: each bone rotation is
// the minimal rotation between consecutive bone directions, the root
// orientation is the identity and bone lengths are the per-sequence mean of
// the observed inter-joint distances.
LieMotion joints_to_lie(const KinematicTree& tree, std::span<const JointPose> frames);

// mode == relative gives V_t = J_t - J_{t-1} with V_1 = 0.
std::vector<Vec3> root_trajectory(const LieMotion& motion, RootMode mode);

std::vector<Vec3> relative_from_absolute(std::span<const Vec3> absolute);
std::vector<Vec3> absolute_from_relative(std::span<const Vec3> relative, const Vec3& start);

// Forward kinematics for every frame, using motion.bone_lengths when set.
JointSequence motion_to_joints(const KinematicTree& tree, const LieMotion& motion);

}  // namespace a2m::lie
