#pragma once

#include <vector>

#include "a2m/geometry/mesh.hpp"

namespace a2m::geo {

struct BlendOptions {
    double lambda = 1.0;
    int neighbor_count = 10;
    int band_rings = 2;          // width of the visible transition band
    double tolerance = 1e-5;     // on the max per-vertex color change
    int max_iterations = 500;
};

struct BlendResult {
    Points colors;                  // 3 x V, visible vertices outside the band untouched
    std::vector<int> band;          // visible vertices that were smoothed
    std::vector<double> objective;  // after each sweep
    int iterations = 0;
    bool converged = false;
};

// Up to k edge neighbors of every vertex, nearest first.
std::vector<std::vector<int>> nearest_edge_neighbors(const TriMesh& mesh, int k);

// Minimizes
//   sum_{x in U} w_x |c_x - c^p_x|^2 + lambda / |N_x| sum_{y in N_x} |c_x - c_y|^2
// over U = occluded + band, with w = 1 on the occluded set and 0 on the band,
// by preconditioned conjugate gradients on the normal equations. `reference` holds c^p for every
// vertex (only occluded entries are read); mesh.colors seeds the rest.
BlendResult blend_occluded_texture(const TriMesh& mesh, const std::vector<int>& occluded, const Points& reference,
                                   const BlendOptions& options = {});

// The objective above for a given color assignment.
double blend_objective(const Points& colors, const Points& reference, const std::vector<int>& free_vertices,
                       const std::vector<char>& data_term, const std::vector<std::vector<int>>& neighbors,
                       double lambda);

}  // namespace a2m::geo
