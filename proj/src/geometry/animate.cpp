#include "a2m/geometry/animate.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "a2m/error.hpp"
#include "a2m/lie/so3.hpp"

namespace a2m::geo {

PoseParams retarget_pose(const SkinnedTemplate& tmpl, const Eigen::VectorXd& beta, const Points& joints) {
    const int nj = tmpl.joint_count();
    if (joints.cols() != nj) throw Error(ErrorKind::DimensionMismatch, "joints must follow the template joints");
    const Points rest = tmpl.rest_joints(beta);
    std::vector<std::vector<int>> children(nj);
    for (int j = 0; j < nj; ++j) {
        if (tmpl.parents[j] >= 0) children[tmpl.parents[j]].push_back(j);
    }

    PoseParams p = PoseParams::zeros(tmpl);
    p.beta = beta;
    std::vector<Mat3> world(nj, Mat3::Identity());
    for (int j : tmpl.topological_order()) {
        const int par = tmpl.parents[j];
        const Mat3 parent_world = par < 0 ? Mat3::Identity() : world[par];
        const auto& ch = children[j];
        if (ch.empty()) {
            world[j] = parent_world;
        } else if (ch.size() == 1) {
            const Vec3 a = (rest.col(ch[0]) - rest.col(j)).normalized();
            const Vec3 b = (joints.col(ch[0]) - joints.col(j)).normalized();
            world[j] = lie::exp_so3(lie::minimal_rotation(a, b)).matrix();
        } else {
            Mat3 h = Mat3::Zero();
            for (int c : ch) {
                h += (rest.col(c) - rest.col(j)).normalized() * (joints.col(c) - joints.col(j)).normalized().transpose();
            }
            Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Mat3 d = Mat3::Identity();
            d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
            world[j] = svd.matrixV() * d * svd.matrixU().transpose();
        }
        p.theta.col(j) = lie::log_so3(lie::Rotation::from_matrix(parent_world.transpose() * world[j])).w;
    }
    const int root = tmpl.root();
    p.translation = joints.col(root) - rest.col(root);
    return p;
}

std::vector<TriMesh> animate_mesh(const SkinnedTemplate& tmpl, const PoseParams& fitted, const TriMesh& target,
                                  const lie::KinematicTree& tree, const lie::LieMotion& motion,
                                  const AnimateOptions& options) {
    if (tree.joint_count() != tmpl.joint_count()) {
        throw Error(ErrorKind::DimensionMismatch, "motion skeleton does not match the template");
    }
    const PosedTemplate base = pose_template(tmpl, fitted);
    const CorrespondenceSet corr = build_correspondences(base.vertices, tmpl.mesh.part_labels, target);
    const auto joints = lie::motion_to_joints(tree, motion);

    std::vector<TriMesh> frames;
    frames.reserve(joints.size());
    TriMesh rest = target;
    for (const auto& frame : joints) {
        const PoseParams pose = retarget_pose(tmpl, fitted.beta, frame);
        const ControlTargets controls = repose_targets(corr, pose_template(tmpl, pose).vertices);
        const ArapResult deformed = arap_deform(rest, controls, rest.vertices, options.weights, options.arap);
        TriMesh out = target;
        out.vertices = deformed.vertices;
        frames.push_back(out);
        rest = std::move(out);
    }
    return frames;
}

}  // namespace a2m::geo
