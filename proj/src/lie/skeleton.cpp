#include "a2m/lie/skeleton.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "a2m/error.hpp"

namespace a2m::lie {

namespace {

[[noreturn]] void invalid(const std::string& msg) {
    throw Error(ErrorKind::InvalidSkeleton, msg);
}

}  // namespace

KinematicTree::KinematicTree(std::vector<std::string> joint_names,
                             std::vector<std::vector<int>> chains,
                             std::vector<double> bone_lengths, int root)
    : names_(std::move(joint_names)), chains_(std::move(chains)), root_(root) {
    const int n = static_cast<int>(names_.size());
    if (n < 1) invalid("skeleton needs at least one joint");
    if (root_ < 0 || root_ >= n) invalid("root index out of range");

    parents_.assign(n, -2);
    bone_of_joint_.assign(n, -1);
    parents_[root_] = -1;
    for (std::size_t k = 0; k < chains_.size(); ++k) {
        const auto& chain = chains_[k];
        if (chain.size() < 2) invalid("chain " + std::to_string(k) + " has fewer than two joints");
        for (int j : chain) {
            if (j < 0 || j >= n) invalid("chain " + std::to_string(k) + " references joint out of range");
        }
        if (parents_[chain.front()] == -2) {
            invalid("chain " + std::to_string(k) + " starts at a joint not reached by an earlier chain");
        }
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const int j = chain[i];
            if (parents_[j] != -2) invalid("joint " + std::to_string(j) + " appears on more than one chain");
            parents_[j] = chain[i - 1];
            bone_of_joint_[j] = static_cast<int>(bones_.size());
            bones_.push_back(Bone{chain[i - 1], j, 0.0});
        }
    }
    for (int j = 0; j < n; ++j) {
        if (parents_[j] == -2) invalid("joint " + std::to_string(j) + " is not on any chain");
    }
    if (bone_lengths.size() != bones_.size()) {
        invalid("expected " + std::to_string(bones_.size()) + " bone lengths, got " +
                std::to_string(bone_lengths.size()));
    }
    for (std::size_t b = 0; b < bones_.size(); ++b) {
        if (!std::isfinite(bone_lengths[b]) || bone_lengths[b] < 0.0) {
            invalid("bone " + std::to_string(b) + " has invalid length");
        }
        bones_[b].length = bone_lengths[b];
    }
}

int KinematicTree::find_joint(std::string_view name) const {
    for (int j = 0; j < joint_count(); ++j) {
        if (names_[j] == name) return j;
    }
    return -1;
}

std::vector<double> KinematicTree::bone_lengths() const {
    std::vector<double> out;
    out.reserve(bones_.size());
    for (const auto& b : bones_) out.push_back(b.length);
    return out;
}

KinematicTree KinematicTree::with_bone_lengths(std::vector<double> lengths) const {
    return KinematicTree(names_, chains_, std::move(lengths), root_);
}

nlohmann::json KinematicTree::to_json() const {
    nlohmann::json j;
    j["joints"] = names_;
    j["parents"] = parents_;
    j["chains"] = chains_;
    j["bone_lengths"] = bone_lengths();
    j["root"] = root_;
    return j;
}

KinematicTree KinematicTree::from_json(const nlohmann::json& j) {
    try {
        KinematicTree tree(j.at("joints").get<std::vector<std::string>>(),
                           j.at("chains").get<std::vector<std::vector<int>>>(),
                           j.at("bone_lengths").get<std::vector<double>>(),
                           j.value("root", 0));
        if (j.contains("parents") && j["parents"].get<std::vector<int>>() != tree.parents()) {
            invalid("parent list disagrees with the chains");
        }
        return tree;
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("malformed skeleton JSON: ") + e.what());
    }
}

std::string KinematicTree::hash() const {
    const std::string text = to_json().dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool KinematicTree::operator==(const KinematicTree& other) const {
    return names_ == other.names_ && chains_ == other.chains_ && root_ == other.root_ &&
           bone_lengths() == other.bone_lengths();
}

namespace {

struct PresetDef {
    std::vector<std::string> names;
    std::vector<std::vector<int>> chains;
    std::map<int, double> length_by_child;
};

KinematicTree build(const PresetDef& def) {
    // Lengths are given per child joint; reorder to bone traversal order.
    std::vector<double> lengths;
    for (const auto& chain : def.chains) {
        for (std::size_t i = 1; i < chain.size(); ++i) lengths.push_back(def.length_by_child.at(chain[i]));
    }
    return KinematicTree(def.names, def.chains, lengths, 0);
}

PresetDef smpl_like(bool with_hands) {
    PresetDef d;
    d.names = {"pelvis", "left_hip", "right_hip", "spine1", "left_knee", "right_knee",
               "spine2", "left_ankle", "right_ankle", "spine3", "left_foot", "right_foot",
               "neck", "left_collar", "right_collar", "head", "left_shoulder", "right_shoulder",
               "left_elbow", "right_elbow", "left_wrist", "right_wrist"};
    d.chains = {{0, 2, 5, 8, 11}, {0, 1, 4, 7, 10}, {0, 3, 6, 9, 12, 15},
                {9, 14, 17, 19, 21}, {9, 13, 16, 18, 20}};
    d.length_by_child = {{1, 0.11}, {2, 0.11}, {3, 0.11}, {4, 0.38}, {5, 0.38},
                         {6, 0.14}, {7, 0.40}, {8, 0.40}, {9, 0.06}, {10, 0.14},
                         {11, 0.14}, {12, 0.21}, {13, 0.13}, {14, 0.13}, {15, 0.10},
                         {16, 0.12}, {17, 0.12}, {18, 0.26}, {19, 0.26}, {20, 0.25},
                         {21, 0.25}};
    if (with_hands) {
        d.names.push_back("left_hand");
        d.names.push_back("right_hand");
        d.chains[3].push_back(23);
        d.chains[4].push_back(22);
        d.length_by_child[22] = 0.09;
        d.length_by_child[23] = 0.09;
    }
    return d;
}

}  // namespace

KinematicTree preset_skeleton(std::string_view name) {
    if (name == "toy8") {
        PresetDef d;
        d.names = {"pelvis", "left_knee", "left_foot", "right_knee", "right_foot",
                   "neck", "left_hand", "right_hand"};
        d.chains = {{0, 1, 2}, {0, 3, 4}, {0, 5}, {5, 6}, {5, 7}};
        d.length_by_child = {{1, 0.45}, {2, 0.45}, {3, 0.45}, {4, 0.45},
                             {5, 0.55}, {6, 0.60}, {7, 0.60}};
        return build(d);
    }
    if (name == "ntu18") {
        PresetDef d;
        d.names = {"pelvis", "neck", "right_shoulder", "right_elbow", "right_wrist",
                   "left_shoulder", "left_elbow", "left_wrist", "nose", "right_hip",
                   "right_knee", "right_ankle", "left_hip", "left_knee", "left_ankle",
                   "left_toe", "right_toe", "head_top"};
        d.chains = {{0, 12, 13, 14, 15}, {0, 9, 10, 11, 16}, {0, 1, 8, 17},
                    {1, 5, 6, 7}, {1, 2, 3, 4}};
        d.length_by_child = {{1, 0.50}, {2, 0.18}, {3, 0.29}, {4, 0.26}, {5, 0.18},
                             {6, 0.29}, {7, 0.26}, {8, 0.20}, {9, 0.10}, {10, 0.42},
                             {11, 0.41}, {12, 0.10}, {13, 0.42}, {14, 0.41}, {15, 0.14},
                             {16, 0.14}, {17, 0.12}};
        return build(d);
    }
    if (name == "cmu22") return build(smpl_like(false));
    if (name == "humanact24") return build(smpl_like(true));
    throw Error(ErrorKind::InvalidArgument, "unknown skeleton preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_skeleton_names() {
    return {"ntu18", "cmu22", "humanact24", "toy8"};
}

KinematicTree load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open skeleton file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidSkeleton, std::string("malformed skeleton JSON: ") + e.what());
    }
    return KinematicTree::from_json(j);
}

void save_skeleton(const std::string& path, const KinematicTree& tree) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write skeleton file " + path);
    out << tree.to_json().dump(2) << "\n";
}

}  // namespace a2m::lie
