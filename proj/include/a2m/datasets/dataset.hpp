#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "a2m/lie/kinematics.hpp"

namespace a2m::data {

struct MotionClip {
    std::string name;
    int label = 0;
    std::string subject;
    double fps = 12.0;
    lie::JointSequence frames;
    // Free-form annotations carried through load/save (e.g. a transition
    // schedule).
    nlohmann::json meta = nlohmann::json::object();
};

struct MotionDataset {
    lie::KinematicTree skeleton;
    std::vector<std::string> actions;
    std::vector<MotionClip> clips;

    // Index of an action name, throws UnknownAction.
    int action_index(const std::string& name) const;
    // Validates joint counts and labels; throws SchemaViolation.
    void validate() const;
};

// JSON-lines: a header object (format, version, skeleton, skeleton_hash,
// actions) followed by one clip object per line. See docs/motion_format.md.
MotionDataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const MotionDataset& dataset);

// Keeps ceil(T * dst / src) frames, frame k taken from the source frame
// nearest to time k / dst.
MotionDataset downsample(const MotionDataset& dataset, double src_fps, double dst_fps);
std::vector<int> downsample_indices(int frames, double src_fps, double dst_fps);

// Subject-disjoint split: subjects are shuffled with `seed` and the first
// ceil(train_fraction * subjects) go to the training side.
std::pair<MotionDataset, MotionDataset> split_by_subject(const MotionDataset& dataset,
                                                         double train_fraction, std::uint64_t seed);

// Network-facing layout of a batch of clips cut to a fixed window.
// Pose vectors are the absolute joint coordinates (joint-major xyz) followed
// by the root velocity V_t = J_{0,t} - J_{0,t-1} (V_1 = 0). Each clip is
// translated so that its first root location is the origin.
struct TrainingTensors {
    int window = 0;
    int joints = 0;
    // One B x (3 * joints + 3) matrix per time step.
    std::vector<Eigen::MatrixXd> poses;
    Eigen::MatrixXd onehot;  // B x C
    std::vector<int> labels;
    Eigen::MatrixXd mask;    // B x window, 0 on padded frames
    std::vector<double> counters;  // c_t = t / window, t = 1..window

    int batch() const { return static_cast<int>(labels.size()); }
    int pose_dim() const { return 3 * joints + 3; }
    // Rows `rows` of every tensor, in the given order.
    TrainingTensors select(const std::vector<int>& rows) const;
};

// Clips longer than `window` keep their first `window` frames; shorter
// clips repeat their last frame and mask the padding.
TrainingTensors to_training_tensors(const MotionDataset& dataset, int window);

// Flattens a pose (3 x J) into joint-major xyz and back.
Eigen::RowVectorXd flatten_pose(const lie::JointPose& pose);
lie::JointPose unflatten_pose(const Eigen::Ref<const Eigen::RowVectorXd>& row, int joints);

// Translation applied by to_training_tensors.
lie::JointSequence normalize_clip(const lie::JointSequence& frames, int root);

}  // namespace a2m::data
