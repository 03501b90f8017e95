#include "a2m/geometry/texture_blend.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/SparseCore>

#include "a2m/error.hpp"

namespace a2m::geo {

std::vector<std::vector<int>> nearest_edge_neighbors(const TriMesh& mesh, int k) {
    auto nb = vertex_neighbors(mesh);
    for (int v = 0; v < static_cast<int>(nb.size()); ++v) {
        auto& n = nb[v];
        std::stable_sort(n.begin(), n.end(), [&](int a, int b) {
            return (mesh.vertices.col(a) - mesh.vertices.col(v)).squaredNorm() <
                   (mesh.vertices.col(b) - mesh.vertices.col(v)).squaredNorm();
        });
        if (static_cast<int>(n.size()) > k) n.resize(k);
    }
    return nb;
}

double blend_objective(const Points& colors, const Points& reference, const std::vector<int>& free_vertices,
                       const std::vector<char>& data_term, const std::vector<std::vector<int>>& neighbors,
                       double lambda) {
    double e = 0.0;
    for (int x : free_vertices) {
        if (data_term[x]) e += (colors.col(x) - reference.col(x)).squaredNorm();
        const auto& n = neighbors[x];
        if (n.empty() || lambda == 0.0) continue;
        double s = 0.0;
        for (int y : n) s += (colors.col(x) - colors.col(y)).squaredNorm();
        e += lambda * s / static_cast<double>(n.size());
    }
    return e;
}

BlendResult blend_occluded_texture(const TriMesh& mesh, const std::vector<int>& occluded, const Points& reference,
                                   const BlendOptions& options) {
    mesh.validate();
    const int n = mesh.vertex_count();
    if (mesh.colors.cols() != n) throw Error(ErrorKind::InvalidArgument, "mesh has no vertex colors");
    if (reference.cols() != n) throw Error(ErrorKind::DimensionMismatch, "reference colors must cover every vertex");
    if (options.lambda < 0.0 || options.neighbor_count < 1 || options.band_rings < 0 || options.max_iterations < 0) {
        throw Error(ErrorKind::InvalidArgument, "invalid blend options");
    }

    const auto neighbors = nearest_edge_neighbors(mesh, options.neighbor_count);
    std::vector<char> in_o(n, 0);
    for (int v : occluded) {
        if (v < 0 || v >= n) throw Error(ErrorKind::InvalidArgument, "occluded vertex out of range");
        in_o[v] = 1;
    }
    std::vector<int> seeds;
    for (int v = 0; v < n; ++v) {
        if (in_o[v]) seeds.push_back(v);
    }

    BlendResult result;
    const auto dist = hop_distance(vertex_neighbors(mesh), seeds, options.band_rings);
    std::vector<int> free_vertices = seeds;
    for (int v = 0; v < n; ++v) {
        if (!in_o[v] && dist[v] > 0) {
            result.band.push_back(v);
            free_vertices.push_back(v);
        }
    }
    std::sort(free_vertices.begin(), free_vertices.end());

    // Normal equations A c = b of the quadratic over the free vertices.
    std::vector<int> slot(n, -1);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) slot[free_vertices[i]] = static_cast<int>(i);
    const int m = static_cast<int>(free_vertices.size());
    Points c = mesh.colors;
    for (int v : seeds) c.col(v) = reference.col(v);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, 3);
    const double lambda = options.lambda;
    for (int i = 0; i < m; ++i) {
        const int x = free_vertices[i];
        if (in_o[x]) {
            trip.emplace_back(i, i, 1.0);
            b.row(i) += reference.col(x).transpose();
        }
        if (lambda == 0.0 || neighbors[x].empty()) continue;
        const double a = lambda / static_cast<double>(neighbors[x].size());
        for (int y : neighbors[x]) {
            trip.emplace_back(i, i, a);
            if (slot[y] >= 0) {
                trip.emplace_back(slot[y], slot[y], a);
                trip.emplace_back(i, slot[y], -a);
                trip.emplace_back(slot[y], i, -a);
            } else {
                b.row(i) += a * c.col(y).transpose();
            }
        }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    const Eigen::VectorXd diag = A.diagonal();

    // Jacobi-preconditioned conjugate gradients, one run per channel in
    // lockstep. Vertices without any term (band vertices when lambda = 0)
    // have an empty row and keep their colors.
    Eigen::MatrixXd x(m, 3);
    for (int i = 0; i < m; ++i) x.row(i) = c.col(free_vertices[i]).transpose();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
        if (diag[i] > 0.0) inv[i] = 1.0 / diag[i];
    }
    Eigen::MatrixXd r = b - A * x;
    Eigen::MatrixXd z = inv.asDiagonal() * r;
    Eigen::MatrixXd p = z;
    Eigen::RowVector3d rz = (r.array() * z.array()).colwise().sum();
    auto write_back = [&]() {
        for (int i = 0; i < m; ++i) c.col(free_vertices[i]) = x.row(i).transpose();
    };
    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd ap = A * p;
        Eigen::MatrixXd step = Eigen::MatrixXd::Zero(m, 3);
        for (int ch = 0; ch < 3; ++ch) {
            const double pap = p.col(ch).dot(ap.col(ch));
            if (pap <= 0.0 || rz[ch] == 0.0) continue;
            const double alpha = rz[ch] / pap;
            step.col(ch) = alpha * p.col(ch);
            r.col(ch) -= alpha * ap.col(ch);
        }
        x += step;
        z = inv.asDiagonal() * r;
        const Eigen::RowVector3d rz_next = (r.array() * z.array()).colwise().sum();
        for (int ch = 0; ch < 3; ++ch) {
            const double beta = rz[ch] > 0.0 ? rz_next[ch] / rz[ch] : 0.0;
            p.col(ch) = z.col(ch) + beta * p.col(ch);
        }
        rz = rz_next;
        write_back();
        result.iterations = it + 1;
        result.objective.push_back(blend_objective(c, reference, free_vertices, in_o, neighbors, lambda));
        if (step.size() == 0 || step.cwiseAbs().maxCoeff() < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.colors = std::move(c);
    return result;
}

}  // namespace a2m::geo
