#include "a2m/lie/kinematics.hpp"

#include <string>

#include "a2m/error.hpp"

namespace a2m::lie {

JointPose forward_kinematics(const KinematicTree& tree, const LiePose& pose) {
    if (pose.lie.cols() != tree.bone_count()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "pose has " + std::to_string(pose.lie.cols()) + " Lie vectors, skeleton has " +
                        std::to_string(tree.bone_count()) + " bones");
    }
    JointPose joints(3, tree.joint_count());
    joints.col(tree.root()) = pose.root_position;
    const Mat3 root_rot = exp_so3(pose.root_orientation).matrix();

    int bone = 0;
    for (const auto& chain : tree.chains()) {
        Mat3 r = root_rot;
        for (std::size_t i = 1; i < chain.size(); ++i, ++bone) {
            r = r * exp_so3(pose.lie.col(bone)).matrix();
            joints.col(chain[i]) = r.col(0) * tree.bone(bone).length + joints.col(chain[i - 1]);
        }
    }
    return joints;
}

LieMotion joints_to_lie(const KinematicTree& tree, std::span<const JointPose> frames) {
    const int n_bones = tree.bone_count();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].cols() != tree.joint_count()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "frame " + std::to_string(t) + " has " + std::to_string(frames[t].cols()) +
                            " joints, skeleton has " + std::to_string(tree.joint_count()));
        }
    }

    LieMotion motion;
    motion.bone_lengths.assign(n_bones, 0.0);
    if (frames.empty()) return motion;

    for (int b = 0; b < n_bones; ++b) {
        const Bone& bone = tree.bone(b);
        double sum = 0.0;
        for (const auto& f : frames) sum += (f.col(bone.child) - f.col(bone.parent)).norm();
        if (sum <= 0.0) {
            throw Error(ErrorKind::DegenerateBone,
                        "bone " + tree.joint_names()[bone.parent] + " -> " +
                            tree.joint_names()[bone.child] + " has zero length in every frame");
        }
        motion.bone_lengths[b] = sum / static_cast<double>(frames.size());
    }

    motion.frames.reserve(frames.size());
    for (const auto& f : frames) {
        LiePose pose;
        pose.root_position = f.col(tree.root());
        pose.lie.setZero(3, n_bones);
        int bone = 0;
        for (const auto& chain : tree.chains()) {
            Mat3 r = Mat3::Identity();
            for (std::size_t i = 1; i < chain.size(); ++i, ++bone) {
                const Vec3 d = f.col(chain[i]) - f.col(chain[i - 1]);
                const double len = d.norm();
                if (len > 1e-12) {
                    // Direction in the frame of the previous bone; the local
                    // bone axis is +x.
                    const Vec3 local = r.transpose() * (d / len);
                    const Vec3 w = minimal_rotation(Vec3::UnitX(), local);
                    pose.lie.col(bone) = w;
                    r = r * exp_so3(w).matrix();
                }
            }
        }
        motion.frames.push_back(std::move(pose));
    }
    return motion;
}

std::vector<Vec3> relative_from_absolute(std::span<const Vec3> absolute) {
    std::vector<Vec3> out(absolute.size(), Vec3::Zero());
    for (std::size_t t = 1; t < absolute.size(); ++t) out[t] = absolute[t] - absolute[t - 1];
    return out;
}

std::vector<Vec3> absolute_from_relative(std::span<const Vec3> relative, const Vec3& start) {
    std::vector<Vec3> out;
    out.reserve(relative.size());
    Vec3 acc = start;
    for (std::size_t t = 0; t < relative.size(); ++t) {
        if (t > 0) acc += relative[t];
        out.push_back(acc);
    }
    return out;
}

std::vector<Vec3> root_trajectory(const LieMotion& motion, RootMode mode) {
    std::vector<Vec3> absolute;
    absolute.reserve(motion.frames.size());
    for (const auto& f : motion.frames) absolute.push_back(f.root_position);
    if (mode == RootMode::absolute) return absolute;
    return relative_from_absolute(absolute);
}

JointSequence motion_to_joints(const KinematicTree& tree, const LieMotion& motion) {
    const KinematicTree sized = static_cast<int>(motion.bone_lengths.size()) == tree.bone_count()
                                    ? tree.with_bone_lengths(motion.bone_lengths)
                                    : tree;
    JointSequence out;
    out.reserve(motion.frames.size());
    for (const auto& f : motion.frames) out.push_back(forward_kinematics(sized, f));
    return out;
}

}  // namespace a2m::lie
