#include "a2m/datasets/export.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "a2m/error.hpp"

namespace a2m::data {

using lie::Mat3;

Eigen::Vector3d euler_zxy(const Mat3& r) {
    const double x = std::asin(std::clamp(r(2, 1), -1.0, 1.0));
    double z, y;
    if (std::abs(r(2, 1)) < 1.0 - 1e-12) {
        z = std::atan2(-r(0, 1), r(1, 1));
        y = std::atan2(-r(2, 0), r(2, 2));
    } else {
        // Gimbal lock: only z + y (or z - y) is determined.
        z = std::atan2(r(1, 0), r(0, 0));
        y = 0.0;
    }
    return {z, x, y};
}

Mat3 from_euler_zxy(const Eigen::Vector3d& zxy) {
    using Eigen::AngleAxisd;
    return (AngleAxisd(zxy(0), Eigen::Vector3d::UnitZ()) * AngleAxisd(zxy(1), Eigen::Vector3d::UnitX()) *
            AngleAxisd(zxy(2), Eigen::Vector3d::UnitY()))
        .toRotationMatrix();
}

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct Node {
    int bone = -1;  // -1 for the root node
    std::vector<int> children;
};

// Bones starting at joint j, in bone order.
std::vector<int> bones_from(const lie::KinematicTree& tree, int joint) {
    std::vector<int> out;
    for (int b = 0; b < tree.bone_count(); ++b) {
        if (tree.bone(b).parent == joint) out.push_back(b);
    }
    return out;
}

// Parent bone of bone b in the chain sense (-1 when b starts a chain).
int chain_parent(const lie::KinematicTree& tree, int b) {
    return tree.bone_of_joint(tree.bone(b).parent);
}

void write_node(std::ostringstream& os, const lie::KinematicTree& tree, int bone, double offset, int depth,
                std::vector<int>& order) {
    const std::string pad(2 * depth, ' ');
    const auto& names = tree.joint_names();
    const auto& b = tree.bone(bone);
    order.push_back(bone);
    os << pad << "JOINT " << names[b.parent] << "_to_" << names[b.child] << "\n" << pad << "{\n";
    os << pad << "  OFFSET " << offset << " 0 0\n";
    os << pad << "  CHANNELS 3 Zrotation Xrotation Yrotation\n";
    const auto kids = bones_from(tree, b.child);
    if (kids.empty()) {
        os << pad << "  End Site\n" << pad << "  {\n" << pad << "    OFFSET " << b.length << " 0 0\n" << pad << "  }\n";
    }
    for (int k : kids) write_node(os, tree, k, b.length, depth + 1, order);
    os << pad << "}\n";
}

}  // namespace

std::string to_bvh(const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps) {
    const lie::KinematicTree sized = static_cast<int>(motion.bone_lengths.size()) == tree.bone_count()
                                         ? tree.with_bone_lengths(motion.bone_lengths)
                                         : tree;
    std::ostringstream os;
    os << std::setprecision(17);
    std::vector<int> order;
    os << "HIERARCHY\nROOT " << sized.joint_names()[sized.root()] << "\n{\n  OFFSET 0 0 0\n";
    os << "  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation\n";
    for (int b : bones_from(sized, sized.root())) write_node(os, sized, b, 0.0, 1, order);
    os << "}\nMOTION\nFrames: " << motion.frames.size() << "\nFrame Time: " << 1.0 / fps << "\n";

    for (const auto& f : motion.frames) {
        if (f.lie.cols() != sized.bone_count()) {
            throw Error(ErrorKind::DimensionMismatch, "motion frame does not match the skeleton");
        }
        const Mat3 root = lie::exp_so3(f.root_orientation).matrix();
        // Accumulated world rotation at the end of each bone.
        std::vector<Mat3> world(sized.bone_count());
        int bone = 0;
        for (const auto& chain : sized.chains()) {
            Mat3 r = root;
            for (std::size_t i = 1; i < chain.size(); ++i, ++bone) {
                r = r * lie::exp_so3(f.lie.col(bone)).matrix();
                world[bone] = r;
            }
        }
        const Eigen::Vector3d re = euler_zxy(root) * kDeg;
        os << f.root_position.x() << ' ' << f.root_position.y() << ' ' << f.root_position.z() << ' ' << re(0)
           << ' ' << re(1) << ' ' << re(2);
        for (int b : order) {
            const int pb = chain_parent(sized, b);
            // The node inherits the world rotation of its parent node; the
            // local channel turns that into this bone's chain rotation.
            const Mat3 parent_world = pb < 0 ? root : world[pb];
            const Eigen::Vector3d e = euler_zxy(parent_world.transpose() * world[b]) * kDeg;
            os << ' ' << e(0) << ' ' << e(1) << ' ' << e(2);
        }
        os << "\n";
    }
    return os.str();
}

void export_bvh(const std::string& path, const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << to_bvh(tree, motion, fps);
}

nlohmann::json motion_to_json(const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps) {
    using nlohmann::json;
    auto vec = [](const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); };
    const auto joints = lie::motion_to_joints(tree, motion);
    json frames = json::array();
    for (std::size_t t = 0; t < motion.frames.size(); ++t) {
        const auto& f = motion.frames[t];
        json bones = json::array(), pos = json::array();
        for (Eigen::Index b = 0; b < f.lie.cols(); ++b) bones.push_back(vec(f.lie.col(b)));
        for (Eigen::Index j = 0; j < joints[t].cols(); ++j) pos.push_back(vec(joints[t].col(j)));
        frames.push_back({{"root_orientation", vec(f.root_orientation)},
                          {"root_position", vec(f.root_position)},
                          {"lie", bones},
                          {"joints", pos}});
    }
    return {{"format", "a2m-lie-motion"},
            {"version", 1},
            {"skeleton", tree.to_json()},
            {"fps", fps},
            {"bone_lengths", motion.bone_lengths},
            {"frames", frames}};
}

void export_json(const std::string& path, const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << motion_to_json(tree, motion, fps).dump(1) << '\n';
}

void export_csv(const std::string& path, const lie::KinematicTree& tree, const lie::JointSequence& frames,
                double fps) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << std::setprecision(17) << "frame,time";
    for (const auto& n : tree.joint_names()) out << ',' << n << "_x," << n << "_y," << n << "_z";
    out << '\n';
    for (std::size_t t = 0; t < frames.size(); ++t) {
        out << t << ',' << static_cast<double>(t) / fps;
        for (Eigen::Index j = 0; j < frames[t].cols(); ++j) {
            out << ',' << frames[t](0, j) << ',' << frames[t](1, j) << ',' << frames[t](2, j);
        }
        out << '\n';
    }
}

}  // namespace a2m::data
