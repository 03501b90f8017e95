#include "a2m/metrics/evaluate.hpp"

#include <iomanip>
#include <random>
#include <sstream>

#include "a2m/error.hpp"
#include "a2m/metrics/metrics.hpp"

namespace a2m::metrics {

using nlohmann::json;

namespace {

void finish(MetricStat& s) {
    s.mean = mean(s.values);
    s.ci95 = ci95(s.values);
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

json stat_json(const MetricStat& s) { return {{"mean", s.mean}, {"ci95", s.ci95}, {"values", s.values}}; }

}  // namespace

lie::JointSequence fit_length(const lie::JointSequence& frames, int length) {
    if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "empty motion");
    lie::JointSequence f = frames;
    if (static_cast<int>(f.size()) > length) f.resize(length);
    while (static_cast<int>(f.size()) < length) f.push_back(f.back());
    return f;
}

MotionSource real_motion_source(const data::MotionDataset& dataset) {
    return [&dataset](const std::vector<int>& labels, int length, std::uint64_t seed) {
        std::vector<std::vector<int>> by_class(dataset.actions.size());
        for (int i = 0; i < static_cast<int>(dataset.clips.size()); ++i) by_class[dataset.clips[i].label].push_back(i);
        std::mt19937_64 rng(seed);
        std::vector<lie::JointSequence> out;
        for (int l : labels) {
            const auto& pool = by_class.at(l);
            if (pool.empty()) throw Error(ErrorKind::EmptyDataset, "no real clips for action " + dataset.actions[l]);
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            out.push_back(fit_length(dataset.clips[pool[pick(rng)]].frames, length));
        }
        return out;
    };
}

MetricsReport evaluate(const MotionClassifier& classifier, const MotionSource& source, const data::MotionDataset& test,
                       const EvalConfig& cfg) {
    if (test.clips.empty()) throw Error(ErrorKind::EmptyDataset, "evaluation set is empty");
    if (cfg.trials < 1 || cfg.samples < 2) throw Error(ErrorKind::InvalidArgument, "need trials >= 1 and samples >= 2");
    const int classes = static_cast<int>(test.actions.size());
    MetricsReport rep;
    rep.trials = cfg.trials;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t seed = trial_seed(cfg.seed, trial);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, test.clips.size() - 1);
        std::vector<lie::JointSequence> real;
        std::vector<int> labels;
        for (int i = 0; i < cfg.samples; ++i) {
            const auto& clip = test.clips[pick(rng)];
            real.push_back(fit_length(clip.frames, cfg.length));
            labels.push_back(clip.label);
        }
        const auto generated = source(labels, cfg.length, rng());
        if (generated.size() != labels.size()) throw Error(ErrorKind::ShapeMismatch, "source returned a wrong count");

        const MatrixXd real_f = classifier.features(real);
        const MatrixXd gen_f = classifier.features(generated);
        const FidResult f = fid(real_f, gen_f);
        rep.fid.values.push_back(f.value);
        rep.fid_regularized = rep.fid_regularized || f.regularized;
        rep.accuracy.values.push_back(recognition_accuracy(classifier, generated, labels));
        rep.diversity.values.push_back(diversity(gen_f, cfg.diversity_subset, rng));

        std::vector<std::vector<int>> rows(classes);
        for (int i = 0; i < cfg.samples; ++i) rows[labels[i]].push_back(i);
        std::vector<MatrixXd> by_class;
        for (const auto& r : rows) {
            if (r.empty()) continue;
            MatrixXd m(r.size(), gen_f.cols());
            for (std::size_t k = 0; k < r.size(); ++k) m.row(k) = gen_f.row(r[k]);
            by_class.push_back(std::move(m));
        }
        rep.multimodality.values.push_back(multimodality(by_class, cfg.multimodality_subset, rng));
    }
    finish(rep.fid);
    finish(rep.accuracy);
    finish(rep.diversity);
    finish(rep.multimodality);
    return rep;
}

json MetricsReport::to_json() const {
    return {{"trials", trials},
            {"fid", stat_json(fid)},
            {"accuracy", stat_json(accuracy)},
            {"diversity", stat_json(diversity)},
            {"multimodality", stat_json(multimodality)},
            {"fid_regularized", fid_regularized}};
}

std::string MetricsReport::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(10) << "metric,mean,ci95,trials\n";
    os << "fid," << fid.mean << ',' << fid.ci95 << ',' << trials << '\n';
    os << "accuracy," << accuracy.mean << ',' << accuracy.ci95 << ',' << trials << '\n';
    os << "diversity," << diversity.mean << ',' << diversity.ci95 << ',' << trials << '\n';
    os << "multimodality," << multimodality.mean << ',' << multimodality.ci95 << ',' << trials << '\n';
    return os.str();
}

std::string MetricsReport::table() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "FID            " << fid.mean << " ± " << fid.ci95 << '\n';
    os << "Accuracy       " << accuracy.mean << " ± " << accuracy.ci95 << '\n';
    os << "Diversity      " << diversity.mean << " ± " << diversity.ci95 << '\n';
    os << "Multimodality  " << multimodality.mean << " ± " << multimodality.ci95 << '\n';
    return os.str();
}

}  // namespace a2m::metrics
