#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "a2m/datasets/dataset.hpp"
#include "a2m/lie/kinematics.hpp"

namespace a2m::data {

// Euler angles (radians) with R = Rz(z) Rx(x) Ry(y), returned as (z, x, y).
Eigen::Vector3d euler_zxy(const lie::Mat3& r);
lie::Mat3 from_euler_zxy(const Eigen::Vector3d& zxy);

// BVH text for a Lie motion. Every bone becomes a node placed at its start
// joint whose children sit at (length, 0, 0); channels are ZXY Euler angles
// in degrees, the root also carries its position.
std::string to_bvh(const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps);
void export_bvh(const std::string& path, const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps);

// Lie motion as JSON: skeleton, fps, bone lengths, per-frame root
// orientation/position and bone vectors, plus the joint positions.
nlohmann::json motion_to_json(const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps);
void export_json(const std::string& path, const lie::KinematicTree& tree, const lie::LieMotion& motion, double fps);

// One row per frame: frame index, time, then x,y,z of every joint.
void export_csv(const std::string& path, const lie::KinematicTree& tree, const lie::JointSequence& frames,
                double fps);

}  // namespace a2m::data
