#pragma once

#include <vector>

#include "a2m/geometry/mesh.hpp"

namespace a2m::geo {

struct Correspondence {
    int template_vertex = -1;
    int target_vertex = -1;
    Vec3 displacement = Vec3::Zero();  // S_j - M_i
};

struct CorrespondenceSet {
    std::vector<Correspondence> pairs;  // sorted by template vertex, at most one each
    int filtered = 0;                   // pairs dropped for mismatched part labels
};

// Nearest target vertex for every template vertex; pairs whose part labels
// differ are dropped (no filtering when either side has no labels). Throws
// EmptyResult when nothing survives.
CorrespondenceSet build_correspondences(const Points& template_posed, const std::vector<int>& template_labels,
                                        const TriMesh& target);

struct ControlTargets {
    std::vector<int> vertices;  // target mesh indices, ascending
    Points positions;           // 3 x vertices.size()
};

// S*_j = M_i(reposed) + d_{i->j}, averaged over template vertices sharing a target.
ControlTargets repose_targets(const CorrespondenceSet& correspondences, const Points& template_reposed);

}  // namespace a2m::geo
