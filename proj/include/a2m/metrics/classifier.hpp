#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2m/autodiff/adam.hpp"
#include "a2m/autodiff/nn.hpp"
#include "a2m/datasets/dataset.hpp"

namespace a2m::metrics {

using ad::Index;
using ad::Matrix;

struct ClassifierConfig {
    int hidden = 128;
    int layers = 2;
    int feature_dim = 30;
    int epochs = 60;
    int batch = 32;
    int window = 16;
    double lr = 1e-3;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static ClassifierConfig from_json(const nlohmann::json& j);
};

// Recurrent action recognizer. Frames enter as root-relative joints plus the
// root velocity; the GRU stack runs over the clip and the last-frame state
// goes through Linear -> tanh (the feature tap) -> Linear -> logits.
class MotionClassifier {
public:
    MotionClassifier(int joints, int root, int classes, const ClassifierConfig& cfg);

    int joints() const { return joints_; }
    int classes() const { return classes_; }
    int feature_dim() const { return static_cast<int>(feat_.out_dim()); }
    const ClassifierConfig& config() const { return cfg_; }

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;

    // Network input of one frame sequence: T matrices of B x (3J + 3).
    std::vector<Matrix> frame_inputs(const std::vector<const lie::JointSequence*>& motions) const;

    // Runs the network; returns (features, logits) tensors.
    std::pair<ad::Tensor, ad::Tensor> forward(ad::Tape& tape, const std::vector<Matrix>& inputs) const;

    // Feature vectors (rows) of the motions; motions of different lengths are
    // processed one length group at a time.
    Matrix features(const std::vector<lie::JointSequence>& motions) const;
    std::vector<int> predict(const std::vector<lie::JointSequence>& motions) const;

    void save(const std::string& path) const;
    static MotionClassifier load(const std::string& path);

private:
    ClassifierConfig cfg_;
    int joints_;
    int root_;
    int classes_;
    ad::GruStack gru_;
    ad::Linear feat_;
    ad::Linear head_;
};

struct ClassifierReport {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> loss;
};

// Trains on `train`; test accuracy is measured on `test` when it has clips.
MotionClassifier train_classifier(const data::MotionDataset& train, const data::MotionDataset& test,
                                  const ClassifierConfig& cfg, ClassifierReport* report = nullptr);

Matrix extract_features(const MotionClassifier& c, const std::vector<lie::JointSequence>& motions);
Eigen::RowVectorXd extract_features(const MotionClassifier& c, const lie::JointSequence& motion);

double recognition_accuracy(const MotionClassifier& c, const std::vector<lie::JointSequence>& motions,
                            const std::vector<int>& labels);

}  // namespace a2m::metrics
