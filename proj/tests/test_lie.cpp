#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "fixtures.hpp"

#include "a2m/error.hpp"
#include "a2m/lie/kinematics.hpp"
#include "a2m/lie/skeleton.hpp"
#include "a2m/lie/so3.hpp"

using namespace a2m;
using namespace a2m::lie;

namespace {

Vec3 random_vector(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> n(0.0, 1.0);
    return scale * Vec3(n(rng), n(rng), n(rng));
}

// Axis-angle with angle uniform in [0, max_angle].
Vec3 random_rotation_vector(std::mt19937_64& rng, double max_angle) {
    std::uniform_real_distribution<double> u(0.0, max_angle);
    return random_vector(rng, 1.0).normalized() * u(rng);
}

LiePose random_pose(const KinematicTree& tree, std::mt19937_64& rng, double max_angle) {
    LiePose p;
    p.root_orientation = random_rotation_vector(rng, max_angle);
    p.root_position = random_vector(rng, 1.0);
    p.lie.resize(3, tree.bone_count());
    for (int b = 0; b < tree.bone_count(); ++b) p.lie.col(b) = random_rotation_vector(rng, max_angle);
    return p;
}

}  // namespace

TEST_CASE("hat and vee are inverse and hat builds the cross product") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const Vec3 w = random_vector(rng, 2.0), v = random_vector(rng, 1.0);
        CHECK((hat(w) * v - w.cross(v)).norm() < 1e-14);
        CHECK((vee(hat(w)) - w).norm() == 0.0);
        CHECK((hat(w) + hat(w).transpose()).norm() == 0.0);
    }
}

TEST_CASE("exp matches a quaternion oracle, including tiny angles") {
    std::mt19937_64 rng(2);
    for (double scale : {1e-12, 1e-8, 1e-6, 1e-3, 0.5, 2.0, 3.1}) {
        for (int i = 0; i < 50; ++i) {
            const Vec3 axis = random_vector(rng, 1.0).normalized();
            const Vec3 w = axis * scale * std::uniform_real_distribution<double>(0.5, 1.0)(rng);
            const Eigen::Quaterniond q(Eigen::AngleAxisd(w.norm(), axis));
            CHECK((exp_so3(w).matrix() - q.toRotationMatrix()).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    CHECK(exp_so3(Vec3::Zero()).matrix() == Mat3::Identity());
}

TEST_CASE("exp derivatives match finite differences") {
    std::mt19937_64 rng(3);
    for (double scale : {1e-9, 1e-4, 0.3, 1.5, 3.0}) {
        for (int i = 0; i < 10; ++i) {
            const Vec3 w = random_vector(rng, scale);
            const auto d = exp_so3_derivatives(w);
            const double h = 1e-6;
            for (int k = 0; k < 3; ++k) {
                Vec3 up = w, down = w;
                up[k] += h;
                down[k] -= h;
                const Mat3 num = (exp_so3(up).matrix() - exp_so3(down).matrix()) / (2.0 * h);
                CHECK((d[k] - num).cwiseAbs().maxCoeff() < 1e-8);
            }
        }
    }
}

TEST_CASE("log inverts exp below pi to 1e-8") {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const Vec3 w = random_rotation_vector(rng, std::numbers::pi - 2e-3);
        const auto l = log_so3(exp_so3(w));
        CHECK_FALSE(l.low_precision);
        worst = std::max(worst, (l.w - w).norm());
        const Mat3 r = exp_so3(w).matrix();
        worst = std::max(worst, (exp_so3(log_so3(exp_so3(w)).w).matrix() - r).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
    for (double tiny : {0.0, 1e-14, 1e-9, 1e-7}) {
        const Vec3 w = Vec3(1, -2, 0.5).normalized() * tiny;
        CHECK((log_so3(exp_so3(w)).w - w).norm() < 1e-15);
    }
}

TEST_CASE("log agrees with the angle-axis oracle") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Quaterniond q = Eigen::Quaterniond::UnitRandom();
        const Mat3 m = q.toRotationMatrix();
        const Eigen::AngleAxisd aa(m);
        const auto l = log_so3(Rotation::from_matrix(m));
        if (l.low_precision) continue;
        CHECK((l.w - aa.angle() * aa.axis()).norm() < 1e-9);
    }
}

TEST_CASE("log near pi is flagged and strict log throws") {
    const Vec3 axis = Vec3(0.3, -0.4, 0.866).normalized();
    const auto r = exp_so3(axis * (std::numbers::pi - 1e-5));
    const auto l = log_so3(r);
    CHECK(l.low_precision);
    CHECK((exp_so3(l.w).matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS_AS(log_so3_strict(r), Error);
    try {
        log_so3_strict(r);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AngleNearPi);
    }
    const auto exact = exp_so3(Vec3(0, 0, std::numbers::pi));
    CHECK((exp_so3(log_so3(exact).w).matrix() - exact.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Rotation::from_matrix rejects non-rotations") {
    Mat3 m = Mat3::Identity();
    m(0, 0) = -1.0;
    CHECK_THROWS_AS(Rotation::from_matrix(m), Error);
    CHECK_THROWS_AS(Rotation::from_matrix(2.0 * Mat3::Identity()), Error);
}

TEST_CASE("wrap_to_pi keeps the rotation") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        Vec3 w = random_vector(rng, 5.0);
        const Mat3 before = exp_so3(w).matrix();
        const bool big = w.norm() > std::numbers::pi;
        CHECK(wrap_to_pi(w) == big);
        CHECK(w.norm() <= std::numbers::pi + 1e-12);
        CHECK((exp_so3(w).matrix() - before).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("minimal rotation maps from onto to") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a = random_vector(rng, 1.0).normalized(), b = random_vector(rng, 1.0).normalized();
        const Vec3 w = minimal_rotation(a, b);
        CHECK((exp_so3(w) * a - b).norm() < 1e-12);
        CHECK(std::abs(w.dot(a)) < 1e-12);
    }
    const Vec3 x = Vec3::UnitX();
    const Vec3 w = minimal_rotation(x, -x);
    CHECK((exp_so3(w) * x + x).norm() < 1e-12);
    CHECK(minimal_rotation(x, x).norm() == 0.0);
}

TEST_CASE("skeleton presets have the documented sizes and round trip through JSON") {
    const std::pair<const char*, int> sizes[] = {{"ntu18", 18}, {"cmu22", 22}, {"humanact24", 24}, {"toy8", 8}};
    for (auto [name, joints] : sizes) {
        const auto tree = preset_skeleton(name);
        CHECK(tree.joint_count() == joints);
        CHECK(tree.bone_count() == joints - 1);
        if (joints != 8) CHECK(tree.chains().size() == 5);
        const auto back = KinematicTree::from_json(tree.to_json());
        CHECK(back == tree);
        CHECK(back.hash() == tree.hash());
        for (int j = 0; j < tree.joint_count(); ++j) {
            CHECK(tree.find_joint(tree.joint_names()[j]) == j);
            if (j != tree.root()) CHECK(tree.bone(tree.bone_of_joint(j)).child == j);
        }
    }
    CHECK(preset_skeleton("toy8").hash() != preset_skeleton("ntu18").hash());
    CHECK_THROWS_AS(preset_skeleton("nope"), Error);
}

TEST_CASE("invalid trees are rejected") {
    CHECK_THROWS_AS(KinematicTree({"a", "b", "c"}, {{0, 1}, {1, 1}}, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(KinematicTree({"a", "b", "c"}, {{0, 1}}, {1.0}), Error);
    CHECK_THROWS_AS(KinematicTree({"a", "b"}, {{0, 1}}, {-1.0}), Error);
    CHECK_THROWS_AS(KinematicTree({"a", "b"}, {{0, 1}}, {1.0, 2.0}), Error);
}

TEST_CASE("forward kinematics of a hand-computed two-bone chain") {
    const KinematicTree tree({"root", "mid", "tip"}, {{0, 1, 2}}, {2.0, 1.0});
    LiePose p;
    p.root_position = Vec3(1, 1, 1);
    p.lie.resize(3, 2);
    p.lie.col(0) = Vec3(0, 0, std::numbers::pi / 2);  // first bone along +y
    p.lie.col(1) = Vec3(0, 0, std::numbers::pi / 2);  // second bone turns to -x
    const JointPose j = forward_kinematics(tree, p);
    CHECK((j.col(0) - Vec3(1, 1, 1)).norm() < 1e-15);
    CHECK((j.col(1) - Vec3(1, 3, 1)).norm() < 1e-15);
    CHECK((j.col(2) - Vec3(0, 3, 1)).norm() < 1e-15);
}

TEST_CASE("forward kinematics preserves bone lengths on 1000 random poses per preset") {
    std::mt19937_64 rng(8);
    for (const auto& name : preset_skeleton_names()) {
        const auto tree = preset_skeleton(name);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const JointPose j = forward_kinematics(tree, random_pose(tree, rng, std::numbers::pi));
            for (const auto& b : tree.bones()) worst = std::max(worst, std::abs((j.col(b.child) - j.col(b.parent)).norm() - b.length));
        }
        CHECK_MESSAGE(worst < 1e-9, name);
    }
}

TEST_CASE("joints_to_lie inverts forward kinematics on twist-free poses") {
    std::mt19937_64 rng(9);
    for (const auto& name : preset_skeleton_names()) {
        const auto tree = preset_skeleton(name);
        JointSequence frames;
        std::vector<LiePose> poses;
        for (int t = 0; t < 20; ++t) {
            LiePose p = random_pose(tree, rng, 2.5);
            p.root_orientation.setZero();
            p.lie.row(0).setZero();  // no twist about the incoming bone axis
            poses.push_back(p);
            frames.push_back(forward_kinematics(tree, p));
        }
        const LieMotion m = joints_to_lie(tree, frames);
        for (int b = 0; b < tree.bone_count(); ++b) CHECK(std::abs(m.bone_lengths[b] - tree.bone(b).length) < 1e-12);
        const JointSequence back = motion_to_joints(tree, m);
        double worst = 0.0, lie_err = 0.0;
        for (int t = 0; t < 20; ++t) {
            worst = std::max(worst, (back[t] - frames[t]).cwiseAbs().maxCoeff());
            lie_err = std::max(lie_err, (m.frames[t].lie - poses[t].lie).cwiseAbs().maxCoeff());
        }
        CHECK_MESSAGE(worst < 1e-6, name);
        CHECK_MESSAGE(lie_err < 1e-6, name);
    }
}

TEST_CASE("joints_to_lie rejects mismatched frames and degenerate bones") {
    const auto tree = preset_skeleton("toy8");
    const JointSequence bad = {JointPose::Zero(3, 7)};
    CHECK_THROWS_AS(joints_to_lie(tree, bad), Error);
    const JointSequence flat = {JointPose::Zero(3, 8)};
    CHECK_THROWS_AS(joints_to_lie(tree, flat), Error);
}

TEST_CASE("root trajectory modes round trip") {
    std::mt19937_64 rng(10);
    std::vector<Vec3> abs;
    for (int t = 0; t < 12; ++t) abs.push_back(random_vector(rng, 1.0));
    const auto rel = relative_from_absolute(abs);
    CHECK(rel[0] == Vec3::Zero());
    const auto back = absolute_from_relative(rel, abs[0]);
    for (int t = 0; t < 12; ++t) CHECK((back[t] - abs[t]).norm() < 1e-14);

    LieMotion m;
    for (const auto& p : abs) {
        LiePose pose;
        pose.root_position = p;
        m.frames.push_back(pose);
    }
    const auto r = root_trajectory(m, RootMode::relative);
    for (int t = 1; t < 12; ++t) CHECK((r[t] - (abs[t] - abs[t - 1])).norm() < 1e-15);
}
