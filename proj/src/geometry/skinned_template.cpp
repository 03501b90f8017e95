#include "a2m/geometry/skinned_template.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "a2m/error.hpp"
#include "a2m/lie/so3.hpp"

namespace a2m::geo {

using nlohmann::json;

int SkinnedTemplate::root() const {
    for (int j = 0; j < joint_count(); ++j) {
        if (parents[j] < 0) return j;
    }
    throw Error(ErrorKind::InvalidSkeleton, "template has no root joint");
}

std::vector<int> SkinnedTemplate::topological_order() const {
    const int n = joint_count();
    std::vector<std::vector<int>> children(n);
    int root_count = 0;
    for (int j = 0; j < n; ++j) {
        if (parents[j] < 0) {
            ++root_count;
        } else if (parents[j] >= n) {
            throw Error(ErrorKind::InvalidSkeleton, "parent index out of range");
        } else {
            children[parents[j]].push_back(j);
        }
    }
    if (root_count != 1) throw Error(ErrorKind::InvalidSkeleton, "template needs exactly one root");
    std::vector<int> order{root()};
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (int c : children[order[i]]) order.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) throw Error(ErrorKind::InvalidSkeleton, "template joints form a cycle");
    return order;
}

void SkinnedTemplate::validate() const {
    mesh.validate();
    const int v = vertex_count(), j = joint_count();
    if (static_cast<int>(joint_names.size()) != j) throw Error(ErrorKind::DimensionMismatch, "one name per joint required");
    topological_order();
    if (regressor.rows() != j || regressor.cols() != v) throw Error(ErrorKind::DimensionMismatch, "regressor must be J x V");
    if (weights.rows() != v || weights.cols() != j) throw Error(ErrorKind::DimensionMismatch, "skinning weights must be V x J");
    if ((weights.array() < 0.0).any()) throw Error(ErrorKind::InvalidArgument, "negative skinning weight");
    for (int i = 0; i < v; ++i) {
        if (std::abs(weights.row(i).sum() - 1.0) > 1e-9) {
            throw Error(ErrorKind::InvalidArgument, "skinning weights of vertex " + std::to_string(i) + " do not sum to 1");
        }
    }
    for (const auto& b : shape_basis) {
        if (b.cols() != v) throw Error(ErrorKind::DimensionMismatch, "shape direction must be 3 x V");
    }
}

Points SkinnedTemplate::shaped_vertices(const Eigen::VectorXd& beta) const {
    if (beta.size() != shape_count()) throw Error(ErrorKind::DimensionMismatch, "beta has wrong length");
    Points v = mesh.vertices;
    for (int k = 0; k < shape_count(); ++k) v += beta[k] * shape_basis[k];
    return v;
}

Points SkinnedTemplate::rest_joints(const Eigen::VectorXd& beta) const {
    return shaped_vertices(beta) * regressor.transpose();
}

namespace {

json matrix_rows(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Eigen::MatrixXd rows_matrix(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols) throw Error(ErrorKind::SchemaViolation, "ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

}  // namespace

json SkinnedTemplate::to_json() const {
    json basis = json::array();
    for (const auto& b : shape_basis) basis.push_back(matrix_rows(b.transpose()));
    return {{"format", "a2m-template"},
            {"mesh", mesh.to_json()},
            {"joint_names", joint_names},
            {"parents", parents},
            {"regressor", matrix_rows(regressor)},
            {"weights", matrix_rows(weights)},
            {"shape_basis", basis}};
}

SkinnedTemplate SkinnedTemplate::from_json(const json& j) {
    SkinnedTemplate t;
    try {
        t.mesh = TriMesh::from_json(j.at("mesh"));
        t.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        t.parents = j.at("parents").get<std::vector<int>>();
        t.regressor = rows_matrix(j.at("regressor"));
        t.weights = rows_matrix(j.at("weights"));
        for (const auto& b : j.at("shape_basis")) t.shape_basis.push_back(rows_matrix(b).transpose());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("template JSON: ") + e.what());
    }
    t.validate();
    return t;
}

SkinnedTemplate load_template(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
    return SkinnedTemplate::from_json(j);
}

void save_template(const std::string& path, const SkinnedTemplate& tmpl) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << tmpl.to_json().dump() << '\n';
}

SkinnedTemplate build_tube_template(const lie::KinematicTree& tree, const Points& rest_joints,
                                    const TubeOptions& options) {
    const int nj = tree.joint_count();
    if (rest_joints.cols() != nj) throw Error(ErrorKind::DimensionMismatch, "one rest position per joint required");
    if (options.ring_vertices < 3 || options.stations < 2 || !(options.radius > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "invalid tube options");
    }
    const int ring = options.ring_vertices, stations = options.stations;
    const int per_bone = ring * stations;
    const int nv = per_bone * tree.bone_count();
    const int root = tree.root();

    SkinnedTemplate t;
    t.joint_names = tree.joint_names();
    t.parents = tree.parents();
    t.mesh.vertices.resize(3, nv);
    t.mesh.faces.resize(3, 2 * ring * (stations - 1) * tree.bone_count());
    t.mesh.part_labels.resize(nv);
    t.weights = Eigen::MatrixXd::Zero(nv, nj);
    t.regressor = Eigen::MatrixXd::Zero(nj, nv);
    Points radial(3, nv), centers(3, nv);

    int face = 0;
    for (int b = 0; b < tree.bone_count(); ++b) {
        const auto& bone = tree.bone(b);
        const Vec3 a = rest_joints.col(bone.parent), c = rest_joints.col(bone.child);
        const double len = (c - a).norm();
        if (len < 1e-9) throw Error(ErrorKind::DegenerateBone, "zero-length bone in rest pose");
        const Vec3 axis = (c - a) / len;
        const Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        const Vec3 u = axis.cross(helper).normalized();
        const Vec3 w = axis.cross(u);
        const int grand = t.parents[bone.parent];
        for (int s = 0; s < stations; ++s) {
            const double frac = static_cast<double>(s) / (stations - 1);
            const Vec3 center = a + frac * (c - a);
            for (int k = 0; k < ring; ++k) {
                const double phi = 2.0 * std::numbers::pi * k / ring;
                const int v = b * per_bone + s * ring + k;
                const Vec3 r = options.radius * (std::cos(phi) * u + std::sin(phi) * w);
                t.mesh.vertices.col(v) = center + r;
                radial.col(v) = r;
                centers.col(v) = center;
                t.mesh.part_labels[v] = b;
                const double own = grand < 0 ? 1.0 : std::min(1.0, 0.5 + frac);
                t.weights(v, bone.parent) += own;
                if (own < 1.0) t.weights(v, grand) += 1.0 - own;
                if (s == 0) t.regressor(bone.parent, v) = 1.0;
                if (s == stations - 1) t.regressor(bone.child, v) = 1.0;
                if (s + 1 < stations) {
                    const int v1 = b * per_bone + s * ring + (k + 1) % ring;
                    const int v2 = v + ring, v3 = v1 + ring;
                    t.mesh.faces.col(face++) = Eigen::Vector3i(v, v1, v3);
                    t.mesh.faces.col(face++) = Eigen::Vector3i(v, v3, v2);
                }
            }
        }
    }
    for (int j = 0; j < nj; ++j) {
        const double s = t.regressor.row(j).sum();
        if (s == 0.0) throw Error(ErrorKind::InvalidSkeleton, "joint " + t.joint_names[j] + " has no bone");
        t.regressor.row(j) /= s;
    }

    Points scale = t.mesh.vertices.colwise() - rest_joints.col(root);
    Points stretch = Points::Zero(3, nv);
    stretch.row(1) = scale.row(1);
    t.shape_basis = {scale, radial, stretch};
    t.validate();
    return t;
}

PoseParams PoseParams::zeros(const SkinnedTemplate& tmpl) {
    PoseParams p;
    p.beta = Eigen::VectorXd::Zero(tmpl.shape_count());
    p.theta = Points::Zero(3, tmpl.joint_count());
    return p;
}

Eigen::VectorXd PoseParams::flatten() const {
    Eigen::VectorXd x(size());
    x << beta, theta.reshaped(), translation;
    return x;
}

PoseParams PoseParams::unflatten(const Eigen::VectorXd& x, Eigen::Index shapes, Eigen::Index joints) {
    if (x.size() != shapes + 3 * joints + 3) throw Error(ErrorKind::DimensionMismatch, "parameter vector has wrong length");
    PoseParams p;
    p.beta = x.head(shapes);
    p.theta = x.segment(shapes, 3 * joints).reshaped(3, joints);
    p.translation = x.tail(3);
    return p;
}

json PoseParams::to_json() const {
    json th = json::array();
    for (Eigen::Index j = 0; j < theta.cols(); ++j) th.push_back({theta(0, j), theta(1, j), theta(2, j)});
    return {{"beta", std::vector<double>(beta.data(), beta.data() + beta.size())},
            {"theta", th},
            {"translation", {translation.x(), translation.y(), translation.z()}}};
}

PoseParams PoseParams::from_json(const json& j) {
    try {
        PoseParams p;
        const auto beta = j.at("beta").get<std::vector<double>>();
        p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
        const auto& th = j.at("theta");
        p.theta.resize(3, static_cast<Eigen::Index>(th.size()));
        for (std::size_t k = 0; k < th.size(); ++k) {
            const auto v = th[k].get<std::vector<double>>();
            if (v.size() != 3) throw Error(ErrorKind::SchemaViolation, "theta entries must have 3 values");
            p.theta.col(static_cast<Eigen::Index>(k)) << v[0], v[1], v[2];
        }
        const auto t = j.at("translation").get<std::vector<double>>();
        if (t.size() != 3) throw Error(ErrorKind::SchemaViolation, "translation must have 3 values");
        p.translation = Vec3(t[0], t[1], t[2]);
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("pose parameters: ") + e.what());
    }
}

PosedTemplate pose_template(const SkinnedTemplate& tmpl, const PoseParams& params) {
    const int nj = tmpl.joint_count(), nv = tmpl.vertex_count();
    if (params.theta.cols() != nj) throw Error(ErrorKind::DimensionMismatch, "theta must be 3 x J");
    PosedTemplate out;
    out.shaped = tmpl.shaped_vertices(params.beta);
    out.rest_joints = out.shaped * tmpl.regressor.transpose();
    out.joints.resize(3, nj);
    out.world.resize(nj);
    out.local.resize(nj);
    for (int j : tmpl.topological_order()) {
        out.local[j] = lie::exp_so3(params.theta.col(j)).matrix();
        const int par = tmpl.parents[j];
        if (par < 0) {
            out.world[j] = out.local[j];
            out.joints.col(j) = out.rest_joints.col(j) + params.translation;
        } else {
            out.world[j] = out.world[par] * out.local[j];
            out.joints.col(j) =
                out.joints.col(par) + out.world[par] * (out.rest_joints.col(j) - out.rest_joints.col(par));
        }
    }
    out.vertices = Points::Zero(3, nv);
    for (int v = 0; v < nv; ++v) {
        for (int j = 0; j < nj; ++j) {
            const double w = tmpl.weights(v, j);
            if (w == 0.0) continue;
            out.vertices.col(v) += w * (out.world[j] * (out.shaped.col(v) - out.rest_joints.col(j)) + out.joints.col(j));
        }
    }
    return out;
}

PoseParams pose_template_gradient(const SkinnedTemplate& tmpl, const PoseParams& params, const PosedTemplate& posed,
                                  const Points& grad_vertices, const Points& grad_joints) {
    const int nj = tmpl.joint_count(), nv = tmpl.vertex_count();
    Points g_shaped = Points::Zero(3, nv);
    Points g_rest = Points::Zero(3, nj);
    Points g_p = grad_joints.size() ? grad_joints : Points::Zero(3, nj);
    std::vector<Mat3> g_world(nj, Mat3::Zero());

    if (grad_vertices.size()) {
        for (int v = 0; v < nv; ++v) {
            const Vec3 gm = grad_vertices.col(v);
            if (gm.isZero(0.0)) continue;
            for (int j = 0; j < nj; ++j) {
                const double w = tmpl.weights(v, j);
                if (w == 0.0) continue;
                g_world[j] += w * gm * (posed.shaped.col(v) - posed.rest_joints.col(j)).transpose();
                const Vec3 back = w * (posed.world[j].transpose() * gm);
                g_shaped.col(v) += back;
                g_rest.col(j) -= back;
                g_p.col(j) += w * gm;
            }
        }
    }

    PoseParams g = PoseParams::zeros(tmpl);
    const auto order = tmpl.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int j = *it;
        const int par = tmpl.parents[j];
        Mat3 g_local;
        if (par < 0) {
            g_local = g_world[j];
            g_rest.col(j) += g_p.col(j);
            g.translation = g_p.col(j);
        } else {
            const Mat3& rp = posed.world[par];
            g_p.col(par) += g_p.col(j);
            g_world[par] += g_p.col(j) * (posed.rest_joints.col(j) - posed.rest_joints.col(par)).transpose();
            const Vec3 back = rp.transpose() * g_p.col(j);
            g_rest.col(j) += back;
            g_rest.col(par) -= back;
            g_world[par] += g_world[j] * posed.local[j].transpose();
            g_local = rp.transpose() * g_world[j];
        }
        const auto d = lie::exp_so3_derivatives(params.theta.col(j));
        for (int k = 0; k < 3; ++k) g.theta(k, j) = (g_local.array() * d[k].array()).sum();
    }

    g_shaped += g_rest * tmpl.regressor;
    for (int k = 0; k < tmpl.shape_count(); ++k) g.beta[k] = (g_shaped.array() * tmpl.shape_basis[k].array()).sum();
    return g;
}

}  // namespace a2m::geo
