#include "a2m/metrics/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "a2m/autodiff/checkpoint.hpp"
#include "a2m/error.hpp"

namespace a2m::metrics {

using nlohmann::json;

json ClassifierConfig::to_json() const {
    return {{"hidden", hidden}, {"layers", layers}, {"feature_dim", feature_dim}, {"epochs", epochs},
            {"batch", batch},   {"window", window}, {"lr", lr},                   {"seed", seed}};
}

ClassifierConfig ClassifierConfig::from_json(const json& j) {
    ClassifierConfig c;
    c.hidden = j.value("hidden", c.hidden);
    c.layers = j.value("layers", c.layers);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    c.window = j.value("window", c.window);
    c.lr = j.value("lr", c.lr);
    c.seed = j.value("seed", c.seed);
    return c;
}

MotionClassifier::MotionClassifier(int joints, int root, int classes, const ClassifierConfig& cfg)
    : cfg_(cfg), joints_(joints), root_(root), classes_(classes) {
    if (classes < 1 || joints < 1) throw Error(ErrorKind::InvalidArgument, "classifier needs joints and classes");
    ad::Rng rng(cfg.seed);
    gru_ = ad::GruStack("classifier.gru", 3 * joints + 3, cfg.hidden, cfg.layers, rng);
    feat_ = ad::Linear("classifier.feature", cfg.hidden, cfg.feature_dim, rng);
    head_ = ad::Linear("classifier.head", cfg.feature_dim, classes, rng);
}

std::vector<ad::Parameter*> MotionClassifier::parameters() {
    auto out = gru_.parameters();
    for (auto* p : feat_.parameters()) out.push_back(p);
    for (auto* p : head_.parameters()) out.push_back(p);
    return out;
}

std::vector<const ad::Parameter*> MotionClassifier::parameters() const {
    auto ps = const_cast<MotionClassifier*>(this)->parameters();
    return {ps.begin(), ps.end()};
}

std::vector<Matrix> MotionClassifier::frame_inputs(const std::vector<const lie::JointSequence*>& motions) const {
    if (motions.empty()) return {};
    const std::size_t T = motions.front()->size();
    const auto B = static_cast<Index>(motions.size());
    std::vector<Matrix> out(T, Matrix(B, 3 * joints_ + 3));
    for (Index b = 0; b < B; ++b) {
        const auto& m = *motions[b];
        if (m.size() != T) throw Error(ErrorKind::ShapeMismatch, "classifier batch needs equal lengths");
        for (std::size_t t = 0; t < T; ++t) {
            if (m[t].cols() != joints_) throw Error(ErrorKind::DimensionMismatch, "motion does not match classifier joints");
            const Eigen::Vector3d r = m[t].col(root_);
            const Eigen::Vector3d v = t == 0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(r - m[t - 1].col(root_));
            for (int j = 0; j < joints_; ++j) out[t].block<1, 3>(b, 3 * j) = (m[t].col(j) - r).transpose();
            out[t].block<1, 3>(b, 3 * joints_) = v.transpose();
        }
    }
    return out;
}

std::pair<ad::Tensor, ad::Tensor> MotionClassifier::forward(ad::Tape& tape, const std::vector<Matrix>& inputs) const {
    if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "motion length must be >= 1");
    auto state = gru_.zero_state(tape, inputs.front().rows());
    ad::Tensor h;
    for (const auto& x : inputs) h = gru_.step(tape, tape.constant(x), state);
    const ad::Tensor f = ad::tanh(feat_(tape, h));
    return {f, head_(tape, f)};
}

namespace {

// Runs `fn(indices, logits_or_features)` over groups of equal-length motions.
template <typename Fn>
void for_length_groups(const std::vector<lie::JointSequence>& motions, Fn fn) {
    std::map<std::size_t, std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(motions.size()); ++i) groups[motions[i].size()].push_back(i);
    for (const auto& [len, idx] : groups) {
        for (std::size_t start = 0; start < idx.size(); start += 256) {
            std::vector<int> chunk(idx.begin() + start, idx.begin() + std::min(idx.size(), start + 256));
            fn(chunk);
        }
    }
}

}  // namespace

Matrix MotionClassifier::features(const std::vector<lie::JointSequence>& motions) const {
    Matrix out(motions.size(), feature_dim());
    for_length_groups(motions, [&](const std::vector<int>& idx) {
        std::vector<const lie::JointSequence*> ptrs;
        for (int i : idx) ptrs.push_back(&motions[i]);
        ad::Tape tape(false);
        const auto [f, logits] = forward(tape, frame_inputs(ptrs));
        for (std::size_t k = 0; k < idx.size(); ++k) out.row(idx[k]) = f.value().row(k);
    });
    return out;
}

std::vector<int> MotionClassifier::predict(const std::vector<lie::JointSequence>& motions) const {
    std::vector<int> out(motions.size());
    for_length_groups(motions, [&](const std::vector<int>& idx) {
        std::vector<const lie::JointSequence*> ptrs;
        for (int i : idx) ptrs.push_back(&motions[i]);
        ad::Tape tape(false);
        const auto [f, logits] = forward(tape, frame_inputs(ptrs));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Index arg;
            logits.value().row(k).maxCoeff(&arg);
            out[idx[k]] = static_cast<int>(arg);
        }
    });
    return out;
}

void MotionClassifier::save(const std::string& path) const {
    ad::save_checkpoint(path, parameters());
    json side = {{"format", "a2m-classifier"},
                 {"joints", joints_},
                 {"root", root_},
                 {"classes", classes_},
                 {"config", cfg_.to_json()}};
    std::ofstream out(path + ".json");
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path + ".json");
    out << side.dump(2) << '\n';
}

MotionClassifier MotionClassifier::load(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path + ".json");
    json side;
    try {
        in >> side;
        if (side.value("format", "") != "a2m-classifier") throw Error(ErrorKind::SchemaViolation, "not a classifier sidecar");
        MotionClassifier c(side.at("joints").get<int>(), side.at("root").get<int>(), side.at("classes").get<int>(),
                           ClassifierConfig::from_json(side.at("config")));
        ad::load_checkpoint(path, c.parameters());
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("classifier sidecar: ") + e.what());
    }
}

namespace {

std::vector<lie::JointSequence> windowed(const data::MotionDataset& ds, int window) {
    std::vector<lie::JointSequence> out;
    for (const auto& c : ds.clips) {
        lie::JointSequence f = c.frames;
        if (static_cast<int>(f.size()) > window) f.resize(window);
        while (static_cast<int>(f.size()) < window) f.push_back(f.back());
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<int> labels_of(const data::MotionDataset& ds) {
    std::vector<int> out;
    for (const auto& c : ds.clips) out.push_back(c.label);
    return out;
}

}  // namespace

MotionClassifier train_classifier(const data::MotionDataset& train, const data::MotionDataset& test,
                                  const ClassifierConfig& cfg, ClassifierReport* report) {
    if (train.clips.empty()) throw Error(ErrorKind::EmptyDataset, "classifier training set is empty");
    MotionClassifier clf(train.skeleton.joint_count(), train.skeleton.root(), static_cast<int>(train.actions.size()), cfg);
    const auto motions = windowed(train, cfg.window);
    const auto labels = labels_of(train);
    std::vector<const lie::JointSequence*> all;
    for (const auto& m : motions) all.push_back(&m);
    const std::vector<Matrix> inputs = clf.frame_inputs(all);

    std::mt19937_64 rng(cfg.seed);
    ad::Adam opt(clf.parameters(), ad::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, 1e-5});
    const int n = static_cast<int>(motions.size());
    std::vector<int> order(n);
    ClassifierReport rep;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch) {
            const int count = std::min(cfg.batch, n - start);
            std::vector<Matrix> xb;
            for (const auto& x : inputs) {
                Matrix m(count, x.cols());
                for (int k = 0; k < count; ++k) m.row(k) = x.row(order[start + k]);
                xb.push_back(std::move(m));
            }
            std::vector<int> yb;
            for (int k = 0; k < count; ++k) yb.push_back(labels[order[start + k]]);
            ad::Tape tape;
            const auto [f, logits] = clf.forward(tape, xb);
            const ad::Tensor loss = ad::softmax_cross_entropy(logits, yb);
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
            epoch_loss += loss.scalar() * count / n;
        }
        rep.loss.push_back(epoch_loss);
    }
    rep.train_accuracy = recognition_accuracy(clf, motions, labels);
    if (!test.clips.empty()) rep.test_accuracy = recognition_accuracy(clf, windowed(test, cfg.window), labels_of(test));
    if (report) *report = rep;
    return clf;
}

Matrix extract_features(const MotionClassifier& c, const std::vector<lie::JointSequence>& motions) {
    return c.features(motions);
}

Eigen::RowVectorXd extract_features(const MotionClassifier& c, const lie::JointSequence& motion) {
    return c.features({motion}).row(0);
}

double recognition_accuracy(const MotionClassifier& c, const std::vector<lie::JointSequence>& motions,
                            const std::vector<int>& labels) {
    if (motions.size() != labels.size()) throw Error(ErrorKind::ShapeMismatch, "one label per motion");
    if (motions.empty()) return 0.0;
    const auto pred = c.predict(motions);
    int hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace a2m::metrics
