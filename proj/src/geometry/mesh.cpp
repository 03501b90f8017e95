#include "a2m/geometry/mesh.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "a2m/error.hpp"

namespace a2m::geo {

using nlohmann::json;

void TriMesh::validate() const {
    const int n = vertex_count();
    if (faces.size() > 0 && (faces.minCoeff() < 0 || faces.maxCoeff() >= n)) {
        throw Error(ErrorKind::InvalidArgument, "face index out of range");
    }
    if (colors.size() != 0 && colors.cols() != n) throw Error(ErrorKind::InvalidArgument, "one color per vertex required");
    if (!part_labels.empty() && static_cast<int>(part_labels.size()) != n) {
        throw Error(ErrorKind::InvalidArgument, "one part label per vertex required");
    }
    if (!vertices.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite vertex coordinates");
}

json TriMesh::to_json() const {
    json v = json::array(), f = json::array(), c = json::array();
    for (int i = 0; i < vertex_count(); ++i) v.push_back({vertices(0, i), vertices(1, i), vertices(2, i)});
    for (Eigen::Index i = 0; i < faces.cols(); ++i) f.push_back({faces(0, i), faces(1, i), faces(2, i)});
    for (Eigen::Index i = 0; i < colors.cols(); ++i) c.push_back({colors(0, i), colors(1, i), colors(2, i)});
    json out = {{"vertices", v}, {"faces", f}};
    if (colors.size()) out["colors"] = c;
    if (!part_labels.empty()) out["part_labels"] = part_labels;
    return out;
}

TriMesh TriMesh::from_json(const json& j) {
    TriMesh m;
    try {
        const auto& v = j.at("vertices");
        m.vertices.resize(3, v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (int k = 0; k < 3; ++k) m.vertices(k, i) = v[i].at(k).get<double>();
        }
        const auto& f = j.at("faces");
        m.faces.resize(3, f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            for (int k = 0; k < 3; ++k) m.faces(k, i) = f[i].at(k).get<int>();
        }
        if (j.contains("colors")) {
            const auto& c = j.at("colors");
            m.colors.resize(3, c.size());
            for (std::size_t i = 0; i < c.size(); ++i) {
                for (int k = 0; k < 3; ++k) m.colors(k, i) = c[i].at(k).get<double>();
            }
        }
        if (j.contains("part_labels")) m.part_labels = j.at("part_labels").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("mesh JSON: ") + e.what());
    }
    m.validate();
    return m;
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
    std::vector<std::vector<int>> nb(mesh.vertex_count());
    for (Eigen::Index f = 0; f < mesh.faces.cols(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.faces(k, f), b = mesh.faces((k + 1) % 3, f);
            if (a == b) continue;
            nb[a].push_back(b);
            nb[b].push_back(a);
        }
    }
    for (auto& n : nb) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return nb;
}

std::vector<int> hop_distance(const std::vector<std::vector<int>>& neighbors, const std::vector<int>& seeds,
                              int max_hops) {
    std::vector<int> dist(neighbors.size(), -1);
    std::deque<int> queue;
    for (int s : seeds) {
        if (dist.at(s) < 0) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (dist[v] >= max_hops) continue;
        for (int w : neighbors[v]) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

double bbox_diagonal(const Points& p) {
    if (p.cols() == 0) return 0.0;
    return (p.rowwise().maxCoeff() - p.rowwise().minCoeff()).norm();
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::vector<Vec3> v, c;
    std::vector<Eigen::Vector3i> f;
    std::vector<std::pair<int, int>> labels;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x() >> p.y() >> p.z();
            if (!ss) throw Error(ErrorKind::SchemaViolation, path + ":" + std::to_string(lineno) + ": bad vertex");
            v.push_back(p);
            Vec3 rgb;
            if (ss >> rgb.x() >> rgb.y() >> rgb.z()) c.push_back(rgb);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
            if (idx.size() < 3) throw Error(ErrorKind::SchemaViolation, path + ":" + std::to_string(lineno) + ": bad face");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) f.emplace_back(idx[0], idx[k], idx[k + 1]);
        } else if (tag == "#") {
            std::string kind;
            int i, id;
            if (ss >> kind >> i >> id && kind == "label") labels.emplace_back(i, id);
        }
    }
    TriMesh m;
    m.vertices.resize(3, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m.vertices.col(i) = v[i];
    m.faces.resize(3, f.size());
    for (std::size_t i = 0; i < f.size(); ++i) m.faces.col(i) = f[i];
    if (!c.empty()) {
        if (c.size() != v.size()) throw Error(ErrorKind::SchemaViolation, path + ": colors on some vertices only");
        m.colors.resize(3, c.size());
        for (std::size_t i = 0; i < c.size(); ++i) m.colors.col(i) = c[i];
    }
    if (!labels.empty()) {
        m.part_labels.assign(v.size(), -1);
        for (auto [i, id] : labels) m.part_labels.at(i) = id;
    }
    m.validate();
    return m;
}

void save_obj(const std::string& path, const TriMesh& mesh) {
    mesh.validate();
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << std::setprecision(17);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        out << "v " << mesh.vertices(0, i) << ' ' << mesh.vertices(1, i) << ' ' << mesh.vertices(2, i);
        if (mesh.colors.size()) out << ' ' << mesh.colors(0, i) << ' ' << mesh.colors(1, i) << ' ' << mesh.colors(2, i);
        out << '\n';
    }
    for (Eigen::Index i = 0; i < mesh.faces.cols(); ++i) {
        out << "f " << mesh.faces(0, i) + 1 << ' ' << mesh.faces(1, i) + 1 << ' ' << mesh.faces(2, i) + 1 << '\n';
    }
    for (std::size_t i = 0; i < mesh.part_labels.size(); ++i) out << "# label " << i << ' ' << mesh.part_labels[i] << '\n';
}

namespace {
bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

TriMesh load_mesh(const std::string& path) {
    if (ends_with(path, ".obj")) return load_obj(path);
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
    return TriMesh::from_json(j);
}

void save_mesh(const std::string& path, const TriMesh& mesh) {
    if (ends_with(path, ".obj")) return save_obj(path, mesh);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << mesh.to_json().dump() << '\n';
}

}  // namespace a2m::geo
