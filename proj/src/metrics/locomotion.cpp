#include "a2m/metrics/locomotion.hpp"

#include "a2m/error.hpp"

namespace a2m::metrics {

double foot_slide(const lie::JointSequence& motion, int left_foot, int right_foot, double fps) {
    if (motion.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t t = 1; t < motion.size(); ++t) {
        const int stance = motion[t](1, left_foot) <= motion[t](1, right_foot) ? left_foot : right_foot;
        const Eigen::Vector3d d = motion[t].col(stance) - motion[t - 1].col(stance);
        total += std::hypot(d.x(), d.z());
    }
    return total / static_cast<double>(motion.size() - 1) * fps;
}

double foot_slide(const lie::KinematicTree& tree, const lie::JointSequence& motion, double fps) {
    const int l = tree.find_joint("left_foot");
    const int r = tree.find_joint("right_foot");
    if (l < 0 || r < 0) throw Error(ErrorKind::InvalidSkeleton, "skeleton has no left_foot/right_foot joints");
    return foot_slide(motion, l, r, fps);
}

}  // namespace a2m::metrics
