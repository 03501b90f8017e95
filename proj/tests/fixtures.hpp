#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Core>

#include "a2m/geometry/mesh.hpp"

namespace fixtures {

// Central differences of f at x.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                        double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-8) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

// Open cylinder: `rings` rings of `per_ring` vertices along +y.
inline a2m::geo::TriMesh cylinder(int rings, int per_ring, double radius = 0.3, double height = 1.0) {
    a2m::geo::TriMesh m;
    m.vertices.resize(3, rings * per_ring);
    m.faces.resize(3, 2 * (rings - 1) * per_ring);
    int f = 0;
    for (int r = 0; r < rings; ++r) {
        for (int k = 0; k < per_ring; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / per_ring;
            m.vertices.col(r * per_ring + k) << radius * std::cos(phi), height * r / (rings - 1), radius * std::sin(phi);
            if (r + 1 < rings) {
                const int a = r * per_ring + k, b = r * per_ring + (k + 1) % per_ring;
                m.faces.col(f++) << a, b, b + per_ring;
                m.faces.col(f++) << a, b + per_ring, a + per_ring;
            }
        }
    }
    return m;
}

// Path graph 0-1-...-(n-1) expressed with degenerate triangles.
inline a2m::geo::TriMesh path_mesh(int n) {
    a2m::geo::TriMesh m;
    m.vertices.resize(3, n);
    m.faces.resize(3, n - 1);
    for (int i = 0; i < n; ++i) m.vertices.col(i) << i, 0.0, 0.0;
    for (int i = 0; i + 1 < n; ++i) m.faces.col(i) << i, i + 1, i + 1;
    return m;
}

}  // namespace fixtures
