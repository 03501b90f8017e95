#include "a2m/datasets/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "a2m/error.hpp"

namespace a2m::data {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "a2m-motion";
constexpr int kVersion = 1;

json clip_to_json(const MotionClip& clip, const std::vector<std::string>& actions) {
    json frames = json::array();
    for (const auto& f : clip.frames) {
        json row = json::array();
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            for (int k = 0; k < 3; ++k) row.push_back(f(k, j));
        }
        frames.push_back(std::move(row));
    }
    json out = {{"name", clip.name},
                {"action", actions.at(clip.label)},
                {"subject", clip.subject},
                {"fps", clip.fps},
                {"frames", std::move(frames)}};
    if (!clip.meta.empty()) out["meta"] = clip.meta;
    return out;
}

[[noreturn]] void schema(int line, const std::string& what) {
    throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

int MotionDataset::action_index(const std::string& name) const {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it == actions.end()) throw Error(ErrorKind::UnknownAction, "unknown action '" + name + "'");
    return static_cast<int>(it - actions.begin());
}

void MotionDataset::validate() const {
    for (const auto& c : clips) {
        if (c.label < 0 || c.label >= static_cast<int>(actions.size())) {
            throw Error(ErrorKind::SchemaViolation, "clip '" + c.name + "' has label out of range");
        }
        if (c.frames.empty()) throw Error(ErrorKind::SchemaViolation, "clip '" + c.name + "' has no frames");
        for (const auto& f : c.frames) {
            if (f.cols() != skeleton.joint_count()) {
                throw Error(ErrorKind::SchemaViolation,
                            "clip '" + c.name + "' has " + std::to_string(f.cols()) + " joints, skeleton has " +
                                std::to_string(skeleton.joint_count()));
            }
            if (!f.allFinite()) throw Error(ErrorKind::SchemaViolation, "clip '" + c.name + "' has non-finite joints");
        }
    }
}

void save_dataset(const std::string& path, const MotionDataset& dataset) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    const json header = {{"format", kFormat},
                         {"version", kVersion},
                         {"skeleton", dataset.skeleton.to_json()},
                         {"skeleton_hash", dataset.skeleton.hash()},
                         {"actions", dataset.actions}};
    out << header.dump() << '\n';
    for (const auto& c : dataset.clips) out << clip_to_json(c, dataset.actions).dump() << '\n';
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

MotionDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    MotionDataset ds;
    std::string text;
    int line = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            schema(line, std::string("invalid JSON: ") + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("format", "") != kFormat) schema(line, "missing a2m-motion header");
                if (j.value("version", 0) != kVersion) schema(line, "unsupported version");
                ds.skeleton = lie::KinematicTree::from_json(j.at("skeleton"));
                if (j.contains("skeleton_hash") && j.at("skeleton_hash").get<std::string>() != ds.skeleton.hash()) {
                    schema(line, "skeleton_hash does not match the skeleton");
                }
                ds.actions = j.at("actions").get<std::vector<std::string>>();
                have_header = true;
                continue;
            }
            MotionClip clip;
            clip.name = j.value("name", "clip" + std::to_string(ds.clips.size()));
            const auto action = j.at("action").get<std::string>();
            auto it = std::find(ds.actions.begin(), ds.actions.end(), action);
            if (it == ds.actions.end()) schema(line, "clip '" + clip.name + "' has unknown action " + action);
            clip.label = static_cast<int>(it - ds.actions.begin());
            clip.subject = j.value("subject", "");
            clip.fps = j.value("fps", 12.0);
            if (j.contains("meta")) clip.meta = j.at("meta");
            const int n_joints = ds.skeleton.joint_count();
            for (const auto& row : j.at("frames")) {
                const auto values = row.get<std::vector<double>>();
                if (static_cast<int>(values.size()) != 3 * n_joints) {
                    schema(line, "clip '" + clip.name + "' frame has " + std::to_string(values.size()) +
                                     " coordinates, expected " + std::to_string(3 * n_joints));
                }
                clip.frames.push_back(Eigen::Map<const Eigen::Matrix3Xd>(values.data(), 3, n_joints));
            }
            if (clip.frames.empty()) schema(line, "clip '" + clip.name + "' has no frames");
            ds.clips.push_back(std::move(clip));
        } catch (const json::exception& e) {
            schema(line, e.what());
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::SchemaViolation) throw;
            schema(line, e.what());
        }
    }
    if (!have_header || ds.clips.empty()) throw Error(ErrorKind::EmptyDataset, path + " contains no clips");
    return ds;
}

std::vector<int> downsample_indices(int frames, double src_fps, double dst_fps) {
    if (!(src_fps > 0.0) || !(dst_fps > 0.0) || dst_fps > src_fps) {
        throw Error(ErrorKind::InvalidArgument, "downsample needs 0 < dst_fps <= src_fps");
    }
    const int out = static_cast<int>(std::ceil(frames * dst_fps / src_fps - 1e-9));
    std::vector<int> idx;
    idx.reserve(out);
    for (int k = 0; k < out; ++k) {
        const int i = static_cast<int>(std::lround(k * src_fps / dst_fps));
        idx.push_back(std::min(i, frames - 1));
    }
    return idx;
}

MotionDataset downsample(const MotionDataset& dataset, double src_fps, double dst_fps) {
    MotionDataset out = dataset;
    for (auto& c : out.clips) {
        lie::JointSequence picked;
        for (int i : downsample_indices(static_cast<int>(c.frames.size()), src_fps, dst_fps)) {
            picked.push_back(c.frames[i]);
        }
        c.frames = std::move(picked);
        c.fps = dst_fps;
    }
    return out;
}

std::pair<MotionDataset, MotionDataset> split_by_subject(const MotionDataset& dataset,
                                                         double train_fraction, std::uint64_t seed) {
    std::set<std::string> subject_set;
    for (const auto& c : dataset.clips) subject_set.insert(c.subject);
    std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
    std::mt19937_64 rng(seed);
    std::shuffle(subjects.begin(), subjects.end(), rng);
    auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * subjects.size() - 1e-9));
    if (subjects.size() > 1) n_train = std::clamp<std::size_t>(n_train, 1, subjects.size() - 1);
    const std::set<std::string> train_subjects(subjects.begin(), subjects.begin() + n_train);

    MotionDataset train{dataset.skeleton, dataset.actions, {}};
    MotionDataset test{dataset.skeleton, dataset.actions, {}};
    for (const auto& c : dataset.clips) {
        (train_subjects.count(c.subject) ? train : test).clips.push_back(c);
    }
    return {std::move(train), std::move(test)};
}

Eigen::RowVectorXd flatten_pose(const lie::JointPose& pose) {
    return Eigen::Map<const Eigen::RowVectorXd>(pose.data(), pose.size());
}

lie::JointPose unflatten_pose(const Eigen::Ref<const Eigen::RowVectorXd>& row, int joints) {
    if (row.size() < 3 * joints) throw Error(ErrorKind::ShapeMismatch, "pose vector too short");
    lie::JointPose p(3, joints);
    for (int j = 0; j < joints; ++j) {
        for (int k = 0; k < 3; ++k) p(k, j) = row(3 * j + k);
    }
    return p;
}

lie::JointSequence normalize_clip(const lie::JointSequence& frames, int root) {
    lie::JointSequence out = frames;
    if (frames.empty()) return out;
    const Eigen::Vector3d origin = frames.front().col(root);
    for (auto& f : out) f.colwise() -= origin;
    return out;
}

TrainingTensors TrainingTensors::select(const std::vector<int>& rows) const {
    TrainingTensors out;
    out.window = window;
    out.joints = joints;
    out.counters = counters;
    const auto n = static_cast<Eigen::Index>(rows.size());
    for (const auto& p : poses) {
        Eigen::MatrixXd m(n, p.cols());
        for (Eigen::Index i = 0; i < n; ++i) m.row(i) = p.row(rows[i]);
        out.poses.push_back(std::move(m));
    }
    out.onehot.resize(n, onehot.cols());
    out.mask.resize(n, mask.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        out.onehot.row(i) = onehot.row(rows[i]);
        out.mask.row(i) = mask.row(rows[i]);
        out.labels.push_back(labels[rows[i]]);
    }
    return out;
}

TrainingTensors to_training_tensors(const MotionDataset& dataset, int window) {
    if (dataset.clips.empty()) throw Error(ErrorKind::EmptyDataset, "dataset has no clips");
    if (window < 1) throw Error(ErrorKind::InvalidArgument, "window must be >= 1");
    const int joints = dataset.skeleton.joint_count();
    const int root = dataset.skeleton.root();
    const auto batch = static_cast<Eigen::Index>(dataset.clips.size());
    const int classes = static_cast<int>(dataset.actions.size());

    TrainingTensors out;
    out.window = window;
    out.joints = joints;
    out.poses.assign(window, Eigen::MatrixXd::Zero(batch, 3 * joints + 3));
    out.onehot = Eigen::MatrixXd::Zero(batch, classes);
    out.mask = Eigen::MatrixXd::Zero(batch, window);
    for (int t = 1; t <= window; ++t) out.counters.push_back(static_cast<double>(t) / window);

    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& clip = dataset.clips[b];
        const lie::JointSequence frames = normalize_clip(clip.frames, root);
        const int n = static_cast<int>(frames.size());
        out.onehot(b, clip.label) = 1.0;
        out.labels.push_back(clip.label);
        Eigen::Vector3d prev_root = frames.front().col(root);
        for (int t = 0; t < window; ++t) {
            const auto& f = frames[std::min(t, n - 1)];
            out.mask(b, t) = t < n ? 1.0 : 0.0;
            out.poses[t].block(b, 0, 1, 3 * joints) = flatten_pose(f);
            const Eigen::Vector3d r = f.col(root);
            out.poses[t].block(b, 3 * joints, 1, 3) = (r - prev_root).transpose();
            prev_root = r;
        }
    }
    return out;
}

}  // namespace a2m::data
