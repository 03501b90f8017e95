#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace a2m::lie {

struct Bone {
    int parent = -1;  // joint index the bone starts at
    int child = -1;   // joint index the bone ends at
    double length = 0.0;
};

// Skeleton topology as K kinematic chains. Each chain is an ordered joint
// list whose first entry is the root or a joint reached by an earlier chain;
// the remaining entries are new joints, so the chains partition all
// non-root joints. Bones are numbered in chain traversal order, which is the
// layout of per-bone Lie vectors everywhere in the library.
class KinematicTree {
public:
    KinematicTree() = default;
    KinematicTree(std::vector<std::string> joint_names,
                  std::vector<std::vector<int>> chains,
                  std::vector<double> bone_lengths,
                  int root = 0);

    int joint_count() const { return static_cast<int>(names_.size()); }
    int bone_count() const { return static_cast<int>(bones_.size()); }
    int root() const { return root_; }

    const std::vector<std::string>& joint_names() const { return names_; }
    const std::vector<std::vector<int>>& chains() const { return chains_; }
    const std::vector<Bone>& bones() const { return bones_; }
    const Bone& bone(int i) const { return bones_.at(i); }

    // Parent joint index, -1 for the root.
    int parent(int joint) const { return parents_.at(joint); }
    const std::vector<int>& parents() const { return parents_; }
    // Index of the bone ending at `joint`, -1 for the root.
    int bone_of_joint(int joint) const { return bone_of_joint_.at(joint); }
    // Joint index by name, -1 when absent.
    int find_joint(std::string_view name) const;

    std::vector<double> bone_lengths() const;
    KinematicTree with_bone_lengths(std::vector<double> lengths) const;

    nlohmann::json to_json() const;
    static KinematicTree from_json(const nlohmann::json& j);
    // FNV-1a over the canonical JSON text, as 16 hex digits.
    std::string hash() const;

    bool operator==(const KinematicTree& other) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<int>> chains_;
    std::vector<Bone> bones_;
    std::vector<int> parents_;
    std::vector<int> bone_of_joint_;
    int root_ = 0;
};

// Shipped layouts: "ntu18", "cmu22", "humanact24" (five chains each) and
// "toy8", the 8-joint body used by the synthetic datasets.
KinematicTree preset_skeleton(std::string_view name);
std::vector<std::string> preset_skeleton_names();

KinematicTree load_skeleton(const std::string& path);
void save_skeleton(const std::string& path, const KinematicTree& tree);

}  // namespace a2m::lie
