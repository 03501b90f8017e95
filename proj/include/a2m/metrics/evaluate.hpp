#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2m/datasets/dataset.hpp"
#include "a2m/metrics/classifier.hpp"

namespace a2m::metrics {

struct EvalConfig {
    int trials = 20;
    int samples = 3000;
    int diversity_subset = 200;
    int multimodality_subset = 20;
    int length = 16;
    std::uint64_t seed = 0;
};

struct MetricStat {
    double mean = 0.0;
    double ci95 = 0.0;
    std::vector<double> values;
};

struct MetricsReport {
    MetricStat fid;
    MetricStat accuracy;
    MetricStat diversity;
    MetricStat multimodality;
    int trials = 0;
    // Set when any trial needed covariance regularization.
    bool fid_regularized = false;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    // "metric mean ± ci" lines.
    std::string table() const;
};

// Produces one motion of `length` frames per requested label; the seed is
// derived from the evaluation seed and the trial index.
using MotionSource = std::function<std::vector<lie::JointSequence>(const std::vector<int>& labels, int length,
                                                                   std::uint64_t seed)>;

// Per trial: draws `samples` real clips from `test` with replacement, asks
// `source` for motions with the same labels, and scores FID against the
// real clips, recognition accuracy, diversity and multimodality.
MetricsReport evaluate(const MotionClassifier& classifier, const MotionSource& source,
                       const data::MotionDataset& test, const EvalConfig& cfg);

// Source returning real clips, for the reference row of a report.
MotionSource real_motion_source(const data::MotionDataset& dataset);

// Clip frames trimmed or last-frame padded to `length`.
lie::JointSequence fit_length(const lie::JointSequence& frames, int length);

}  // namespace a2m::metrics
