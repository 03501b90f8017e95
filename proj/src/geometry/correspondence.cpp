#include "a2m/geometry/correspondence.hpp"

#include <map>

#include "a2m/error.hpp"
#include "a2m/geometry/fitting.hpp"

namespace a2m::geo {

CorrespondenceSet build_correspondences(const Points& template_posed, const std::vector<int>& template_labels,
                                        const TriMesh& target) {
    target.validate();
    const bool filter = !template_labels.empty() && !target.part_labels.empty();
    if (filter && static_cast<Eigen::Index>(template_labels.size()) != template_posed.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "one label per template vertex required");
    }
    if (target.vertex_count() == 0) throw Error(ErrorKind::EmptyResult, "target mesh has no vertices");
    const auto nearest = nearest_indices(template_posed, target.vertices);
    CorrespondenceSet set;
    for (int i = 0; i < static_cast<int>(nearest.size()); ++i) {
        const int j = nearest[i];
        if (filter && template_labels[i] != target.part_labels[j]) {
            ++set.filtered;
            continue;
        }
        set.pairs.push_back({i, j, target.vertices.col(j) - template_posed.col(i)});
    }
    if (set.pairs.empty()) throw Error(ErrorKind::EmptyResult, "no correspondences survived part filtering");
    return set;
}

ControlTargets repose_targets(const CorrespondenceSet& correspondences, const Points& template_reposed) {
    std::map<int, std::pair<Vec3, int>> acc;
    for (const auto& c : correspondences.pairs) {
        if (c.template_vertex < 0 || c.template_vertex >= template_reposed.cols()) {
            throw Error(ErrorKind::DimensionMismatch, "correspondence refers to a missing template vertex");
        }
        auto& [sum, count] = acc.try_emplace(c.target_vertex, Vec3::Zero(), 0).first->second;
        sum += template_reposed.col(c.template_vertex) + c.displacement;
        ++count;
    }
    ControlTargets out;
    out.positions.resize(3, acc.size());
    for (const auto& [j, sc] : acc) {
        out.positions.col(out.vertices.size()) = sc.first / sc.second;
        out.vertices.push_back(j);
    }
    return out;
}

}  // namespace a2m::geo
