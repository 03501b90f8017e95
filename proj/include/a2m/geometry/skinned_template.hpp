#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "a2m/geometry/mesh.hpp"
#include "a2m/lie/skeleton.hpp"

namespace a2m::geo {

// Rigged body with linear blend skinning:
//   V(beta)   = V0 + sum_k beta_k B_k
//   J(beta)   = regressor * V(beta)
//   M(beta, theta, t) = sum_j w_vj (Rw_j (V_v - J_j) + p_j)
// where Rw_root = exp(theta_root), Rw_j = Rw_parent exp(theta_j),
// p_root = J_root + t and p_j = p_parent + Rw_parent (J_j - J_parent).
struct SkinnedTemplate {
    TriMesh mesh;                         // rest vertices, faces, part labels
    std::vector<std::string> joint_names;
    std::vector<int> parents;             // -1 for the root
    Eigen::MatrixXd regressor;            // J x V
    Eigen::MatrixXd weights;              // V x J, rows sum to 1
    std::vector<Points> shape_basis;      // each 3 x V

    int joint_count() const { return static_cast<int>(parents.size()); }
    int vertex_count() const { return mesh.vertex_count(); }
    int shape_count() const { return static_cast<int>(shape_basis.size()); }
    int root() const;
    // Parents before children.
    std::vector<int> topological_order() const;
    void validate() const;

    Points shaped_vertices(const Eigen::VectorXd& beta) const;
    Points rest_joints(const Eigen::VectorXd& beta) const;

    nlohmann::json to_json() const;
    static SkinnedTemplate from_json(const nlohmann::json& j);
};

SkinnedTemplate load_template(const std::string& path);
void save_template(const std::string& path, const SkinnedTemplate& tmpl);

struct TubeOptions {
    double radius = 0.05;
    int ring_vertices = 8;
    int stations = 5;  // rings per bone, both ends included
};

// Builds a template of one open tube per bone around the given rest
// joints. Part labels are bone indices. The shape basis holds: global scale
// about the root, limb thickness, vertical stretch about the root.
SkinnedTemplate build_tube_template(const lie::KinematicTree& tree, const Points& rest_joints,
                                    const TubeOptions& options = {});

struct PoseParams {
    Eigen::VectorXd beta;
    Points theta;  // 3 x J, per-joint so(3) vectors
    Vec3 translation = Vec3::Zero();

    static PoseParams zeros(const SkinnedTemplate& tmpl);
    Eigen::Index size() const { return beta.size() + theta.size() + 3; }
    Eigen::VectorXd flatten() const;
    static PoseParams unflatten(const Eigen::VectorXd& x, Eigen::Index shapes, Eigen::Index joints);

    // {"beta": [...], "theta": [[x, y, z] per joint], "translation": [x, y, z]}
    nlohmann::json to_json() const;
    static PoseParams from_json(const nlohmann::json& j);
};

struct PosedTemplate {
    Points vertices;            // M, 3 x V
    Points joints;              // p, 3 x J
    Points rest_joints;         // J(beta)
    Points shaped;              // V(beta)
    std::vector<Mat3> world;    // Rw_j
    std::vector<Mat3> local;    // exp(theta_j)
};

PosedTemplate pose_template(const SkinnedTemplate& tmpl, const PoseParams& params);

// Gradient of a scalar through pose_template given its gradients with respect
// to the posed vertices (3 x V) and posed joints (3 x J); either may be empty.
PoseParams pose_template_gradient(const SkinnedTemplate& tmpl, const PoseParams& params, const PosedTemplate& posed,
                                  const Points& grad_vertices, const Points& grad_joints);

}  // namespace a2m::geo
