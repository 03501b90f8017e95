#pragma once

#include <vector>

#include "a2m/geometry/correspondence.hpp"
#include "a2m/geometry/mesh.hpp"

namespace a2m::geo {

// Per-vertex weights parallel to vertex_neighbors(mesh).
using NeighborWeights = std::vector<std::vector<double>>;

// k_ij = 1 / |N_i|.
NeighborWeights uniform_weights(const TriMesh& mesh);
// Half the sum of the cotangents opposite each edge, clamped at 0.
NeighborWeights cotangent_weights(const TriMesh& mesh);

struct ArapOptions {
    int iterations = 20;
    double tolerance = 1e-12;  // stop when the relative energy drop falls below this
};

struct ArapResult {
    Points vertices;
    std::vector<Mat3> rotations;
    std::vector<double> energy;  // after each local/global alternation
};

// Minimizes
//   sum_i sum_{j in N_i} k_ij |(S'_i - S'_j) - R_i (S_i - S_j)|^2 + sum_{c} |S'_c - S*_c|^2
// starting from `initial` (the rest positions when empty). Throws
// SingularSystem when some connected component has no control vertex.
ArapResult arap_deform(const TriMesh& rest, const ControlTargets& controls, const Points& initial = {},
                       const NeighborWeights& weights = {}, const ArapOptions& options = {});

}  // namespace a2m::geo
