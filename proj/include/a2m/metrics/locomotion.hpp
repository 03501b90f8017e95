#pragma once

#include "a2m/lie/kinematics.hpp"

namespace a2m::metrics {

// Mean horizontal (xz) speed of the stance foot, in meters per second. The
// stance foot of frame t is whichever foot is lower (smaller y) at t; its
// displacement is measured from frame t-1 to t.
double foot_slide(const lie::JointSequence& motion, int left_foot, int right_foot, double fps);

// Same, looking the feet up by the names "left_foot" and "right_foot".
double foot_slide(const lie::KinematicTree& tree, const lie::JointSequence& motion, double fps);

}  // namespace a2m::metrics
