#include "a2m/geometry/arap.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "a2m/error.hpp"

namespace a2m::geo {

NeighborWeights uniform_weights(const TriMesh& mesh) {
    const auto nb = vertex_neighbors(mesh);
    NeighborWeights w(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) w[i].assign(nb[i].size(), nb[i].empty() ? 0.0 : 1.0 / nb[i].size());
    return w;
}

NeighborWeights cotangent_weights(const TriMesh& mesh) {
    const auto nb = vertex_neighbors(mesh);
    NeighborWeights w(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) w[i].assign(nb[i].size(), 0.0);
    auto add = [&](int a, int b, double v) {
        const auto& n = nb[a];
        const auto pos = std::lower_bound(n.begin(), n.end(), b) - n.begin();
        w[a][pos] += v;
    };
    for (Eigen::Index f = 0; f < mesh.faces.cols(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int o = mesh.faces(k, f), a = mesh.faces((k + 1) % 3, f), b = mesh.faces((k + 2) % 3, f);
            if (a == b || o == a || o == b) continue;
            const Vec3 u = mesh.vertices.col(a) - mesh.vertices.col(o);
            const Vec3 v = mesh.vertices.col(b) - mesh.vertices.col(o);
            const double s = u.cross(v).norm();
            if (s < 1e-15) continue;
            const double cot = 0.5 * u.dot(v) / s;
            add(a, b, cot);
            add(b, a, cot);
        }
    }
    for (auto& row : w) {
        for (double& x : row) x = std::max(x, 0.0);
    }
    return w;
}

namespace {

void check_controlled(const std::vector<std::vector<int>>& nb, const std::vector<char>& controlled) {
    std::vector<int> comp(nb.size(), -1);
    for (std::size_t s = 0; s < nb.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{static_cast<int>(s)};
        comp[s] = static_cast<int>(s);
        bool has_control = false;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            has_control = has_control || controlled[v];
            for (int w : nb[v]) {
                if (comp[w] < 0) {
                    comp[w] = static_cast<int>(s);
                    stack.push_back(w);
                }
            }
        }
        if (!has_control) {
            throw Error(ErrorKind::SingularSystem,
                        "vertex " + std::to_string(s) + " lies in a component without control targets");
        }
    }
}

}  // namespace

ArapResult arap_deform(const TriMesh& rest, const ControlTargets& controls, const Points& initial,
                       const NeighborWeights& weights, const ArapOptions& options) {
    rest.validate();
    const int n = rest.vertex_count();
    if (initial.size() && initial.cols() != n) throw Error(ErrorKind::DimensionMismatch, "initial positions must be 3 x V");
    if (controls.positions.cols() != static_cast<Eigen::Index>(controls.vertices.size())) {
        throw Error(ErrorKind::DimensionMismatch, "one control position per control vertex required");
    }
    if (controls.vertices.empty()) throw Error(ErrorKind::SingularSystem, "control set is empty");
    const auto nb = vertex_neighbors(rest);
    const NeighborWeights k = weights.empty() ? uniform_weights(rest) : weights;
    if (k.size() != nb.size()) throw Error(ErrorKind::DimensionMismatch, "neighbor weights must follow vertex_neighbors");
    for (std::size_t i = 0; i < nb.size(); ++i) {
        if (k[i].size() != nb[i].size()) throw Error(ErrorKind::DimensionMismatch, "neighbor weights must follow vertex_neighbors");
        for (double x : k[i]) {
            if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "neighbor weights must be non-negative");
        }
    }

    std::vector<char> controlled(n, 0);
    Points target = Points::Zero(3, n);
    for (std::size_t c = 0; c < controls.vertices.size(); ++c) {
        const int v = controls.vertices[c];
        if (v < 0 || v >= n) throw Error(ErrorKind::InvalidArgument, "control vertex out of range");
        if (controlled[v]) throw Error(ErrorKind::InvalidArgument, "duplicate control vertex");
        controlled[v] = 1;
        target.col(v) = controls.positions.col(c);
    }
    check_controlled(nb, controlled);

    // k_ji looked up by position of i in N_j.
    auto weight = [&](int i, int j) {
        const auto& n_i = nb[i];
        return k[i][std::lower_bound(n_i.begin(), n_i.end(), j) - n_i.begin()];
    };

    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        double diag = controlled[i] ? 1.0 : 0.0;
        for (std::size_t a = 0; a < nb[i].size(); ++a) {
            const int j = nb[i][a];
            const double w = k[i][a] + weight(j, i);
            diag += w;
            trip.emplace_back(i, j, -w);
        }
        trip.emplace_back(i, i, diag);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "ARAP system factorization failed");

    const Points& s = rest.vertices;
    ArapResult out;
    out.vertices = initial.size() ? initial : s;
    out.rotations.assign(n, Mat3::Identity());

    auto energy = [&]() {
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < nb[i].size(); ++a) {
                const int j = nb[i][a];
                e += k[i][a] * ((out.vertices.col(i) - out.vertices.col(j)) -
                                out.rotations[i] * (s.col(i) - s.col(j))).squaredNorm();
            }
            if (controlled[i]) e += (out.vertices.col(i) - target.col(i)).squaredNorm();
        }
        return e;
    };

    for (int it = 0; it < options.iterations; ++it) {
        for (int i = 0; i < n; ++i) {
            Mat3 cov = Mat3::Zero();
            for (std::size_t a = 0; a < nb[i].size(); ++a) {
                const int j = nb[i][a];
                cov += k[i][a] * (s.col(i) - s.col(j)) * (out.vertices.col(i) - out.vertices.col(j)).transpose();
            }
            Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Mat3 u = svd.matrixU();
            Mat3 r = svd.matrixV() * u.transpose();
            if (r.determinant() < 0.0) {
                u.col(2) *= -1.0;
                r = svd.matrixV() * u.transpose();
            }
            out.rotations[i] = r;
        }

        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);
        for (int i = 0; i < n; ++i) {
            Vec3 b = controlled[i] ? Vec3(target.col(i)) : Vec3::Zero();
            for (std::size_t a = 0; a < nb[i].size(); ++a) {
                const int j = nb[i][a];
                b += (k[i][a] * out.rotations[i] + weight(j, i) * out.rotations[j]) * (s.col(i) - s.col(j));
            }
            rhs.row(i) = b.transpose();
        }
        const Eigen::MatrixXd sol = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "ARAP solve failed");
        out.vertices = sol.transpose();

        out.energy.push_back(energy());
        if (out.energy.size() >= 2) {
            const double prev = out.energy[out.energy.size() - 2];
            if (prev - out.energy.back() <= options.tolerance * std::max(prev, 1e-300)) break;
        }
    }
    return out;
}

}  // namespace a2m::geo
