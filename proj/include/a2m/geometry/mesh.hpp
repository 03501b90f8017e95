#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

namespace a2m::geo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Points = Eigen::Matrix3Xd;  // one column per vertex

struct TriMesh {
    Points vertices;
    Eigen::Matrix3Xi faces;
    Points colors;                 // empty, or RGB in [0, 1] per vertex
    std::vector<int> part_labels;  // empty, or one id per vertex

    int vertex_count() const { return static_cast<int>(vertices.cols()); }
    // Throws InvalidArgument on out-of-range faces or mismatched attribute sizes.
    void validate() const;

    nlohmann::json to_json() const;
    static TriMesh from_json(const nlohmann::json& j);
};

// Sorted, duplicate-free edge neighbors of every vertex.
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

// Hop distance from the nearest seed along mesh edges; -1 when unreachable
// or farther than max_hops.
std::vector<int> hop_distance(const std::vector<std::vector<int>>& neighbors, const std::vector<int>& seeds,
                              int max_hops);

double bbox_diagonal(const Points& p);

// OBJ subset: "v x y z [r g b]" and "f a b c" (1-based, "a/b/c" forms accepted);
// part labels ride along as "# label i id" comments.
TriMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const TriMesh& mesh);

// Dispatches on the extension (.obj or .json).
TriMesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const TriMesh& mesh);

}  // namespace a2m::geo
