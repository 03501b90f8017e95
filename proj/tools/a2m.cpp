#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <set>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "a2m/datasets/dataset.hpp"
#include "a2m/datasets/export.hpp"
#include "a2m/datasets/synthesize.hpp"
#include "a2m/error.hpp"
#include "a2m/geometry/animate.hpp"
#include "a2m/geometry/arap.hpp"
#include "a2m/geometry/fitting.hpp"
#include "a2m/geometry/mesh.hpp"
#include "a2m/geometry/robust.hpp"
#include "a2m/lie/kinematics.hpp"
#include "a2m/lie/skeleton.hpp"
#include "a2m/geometry/skinned_template.hpp"
#include "a2m/geometry/texture_blend.hpp"
#include "a2m/metrics/classifier.hpp"
#include "a2m/metrics/evaluate.hpp"
#include "a2m/tvae/model_io.hpp"
#include "a2m/tvae/sampling.hpp"
#include "a2m/tvae/train.hpp"
#include "run_context.hpp"

namespace {

using namespace a2m;
using nlohmann::json;
namespace fs = std::filesystem;

// Options shared by every subcommand.
struct Common {
    std::uint64_t seed = 0;
    std::string out_dir;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
    sub->add_option("--out-dir", c.out_dir, "Write outputs here instead of a new run directory");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, sep);) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void say(const std::string& what, const fs::path& p) { std::cout << what << ' ' << p.string() << '\n'; }

double model_fps(const tvae::SavedModel& saved) {
    if (saved.sidecar.contains("extra")) return saved.sidecar["extra"].value("fps", 12.0);
    return 12.0;
}

// Generated motions as a dataset on the model's skeleton. Each clip takes
// the action active on its first frame as its label.
data::MotionDataset motions_to_dataset(const tvae::ModelConfig& cfg, const std::vector<tvae::GeneratedMotion>& ms,
                                       double fps, const std::string& stem, const std::vector<json>& meta) {
    data::MotionDataset ds;
    ds.skeleton = cfg.skeleton;
    ds.actions = cfg.actions;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        data::MotionClip c;
        c.name = stem + "_" + std::to_string(i);
        c.label = ms[i].frame_actions.front();
        c.subject = "generated";
        c.fps = fps;
        c.frames = ms[i].joints;
        c.meta = i < meta.size() ? meta[i] : json::object();
        c.meta["wrapped_lie_vectors"] = ms[i].wrapped;
        ds.clips.push_back(std::move(c));
    }
    return ds;
}

tvae::Schedule parse_schedule(const std::string& text, const tvae::ModelConfig& cfg, int length) {
    tvae::Schedule s;
    for (const auto& item : split(text, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) {
            throw Error(ErrorKind::InvalidSchedule, "schedule entries look like action:frame, got '" + item + "'");
        }
        const std::string name = item.substr(0, colon);
        const auto it = std::find(cfg.actions.begin(), cfg.actions.end(), name);
        if (it == cfg.actions.end()) throw Error(ErrorKind::UnknownAction, "unknown action '" + name + "'");
        int frame = 0;
        try {
            std::size_t used = 0;
            frame = std::stoi(item.substr(colon + 1), &used);
            if (used != item.size() - colon - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidSchedule, "bad frame in schedule entry '" + item + "'");
        }
        s.emplace_back(static_cast<int>(it - cfg.actions.begin()), frame);
    }
    tvae::validate_schedule(s, length, cfg.action_count());
    return s;
}

int action_of(const tvae::ModelConfig& cfg, const std::string& name) {
    const auto it = std::find(cfg.actions.begin(), cfg.actions.end(), name);
    if (it == cfg.actions.end()) throw Error(ErrorKind::UnknownAction, "unknown action '" + name + "'");
    return static_cast<int>(it - cfg.actions.begin());
}

const data::MotionClip& pick_clip(const data::MotionDataset& ds, int index) {
    if (index < 0 || index >= static_cast<int>(ds.clips.size())) {
        throw Error(ErrorKind::InvalidArgument, "clip index " + std::to_string(index) + " out of range");
    }
    return ds.clips[index];
}

// Test side of the split a model or classifier was trained with.
data::MotionDataset held_out(const data::MotionDataset& ds, double train_fraction, std::uint64_t split_seed) {
    auto [train, test] = data::split_by_subject(ds, train_fraction, split_seed);
    return test.clips.empty() ? ds : test;
}

json subjects_of(const data::MotionDataset& ds) {
    std::set<std::string> s;
    for (const auto& c : ds.clips) s.insert(c.subject);
    return std::vector<std::string>(s.begin(), s.end());
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
}

geo::Points read_joints(const std::string& path) {
    const json j = read_json(path);
    const json& rows = j.is_object() ? j.at("joints") : j;
    geo::Points p(3, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto v = rows[k].get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorKind::SchemaViolation, path + ": joint entries need 3 values");
        p.col(static_cast<Eigen::Index>(k)) << v[0], v[1], v[2];
    }
    return p;
}

std::vector<int> read_indices(const std::string& path) {
    const json j = read_json(path);
    const json& list = j.is_object() ? j.at("occluded") : j;
    return list.get<std::vector<int>>();
}

geo::SkinnedTemplate template_or_default(const std::string& path, const std::string& skeleton) {
    if (!path.empty()) return geo::load_template(path);
    if (skeleton != "toy8") {
        throw Error(ErrorKind::InvalidArgument, "a default template exists only for toy8; pass --template");
    }
    return geo::build_tube_template(lie::preset_skeleton("toy8"), data::standing_pose());
}

// Subcommand handlers. Each receives its run context after the snapshot is
// written.
using Handler = std::function<void(const cli::RunContext&)>;

struct Command {
    CLI::App* app = nullptr;
    std::set<std::string> paths;
    Handler run;
};

int run_cli(std::vector<std::string> args);

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Action-conditioned motion generation and mesh animation"};
    app.require_subcommand(0, 1);
    app.option_defaults()->always_capture_default();
    Common common;
    std::vector<Command> commands;

    // synth-data
    {
        auto* sub = app.add_subcommand("synth-data", "Write a synthetic toy8 motion dataset");
        add_common(sub, common);
        auto spec = std::make_shared<data::SynthSpec>();
        auto actions = std::make_shared<std::string>("walk,wave,squat");
        sub->add_option("--actions", *actions, "Comma separated subset of walk,wave,squat");
        sub->add_option("--clips-per-action", spec->clips_per_action)->check(CLI::PositiveNumber);
        sub->add_option("--frames", spec->frames)->check(CLI::PositiveNumber);
        sub->add_option("--fps", spec->fps)->check(CLI::PositiveNumber);
        sub->add_option("--subjects", spec->subjects)->check(CLI::PositiveNumber);
        sub->add_option("--noise", spec->angle_noise, "Per-frame angle jitter (radians)")->check(CLI::NonNegativeNumber);
        commands.push_back({sub, {}, [spec, actions, &common](const cli::RunContext& run) {
                                spec->actions = split(*actions, ',');
                                const auto ds = data::synthesize(*spec, common.seed);
                                data::save_dataset(run.file("dataset.jsonl").string(), ds);
                                say("wrote", run.file("dataset.jsonl"));
                            }});
    }

    // train
    {
        auto* sub = app.add_subcommand("train", "Train a temporal VAE on a motion dataset");
        add_common(sub, common);
        struct Opts {
            std::string data, variant = "glmi_m";
            tvae::ModelConfig model;
            tvae::TrainConfig train;
            double train_fraction = 0.8;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--data", o->data, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
        sub->add_option("--variant", o->variant)->check(CLI::IsMember({"plain", "lie", "glmi_m", "glmi_r"}));
        sub->add_option("--hidden", o->model.hidden)->check(CLI::PositiveNumber);
        sub->add_option("--z-dim", o->model.z_dim)->check(CLI::PositiveNumber);
        sub->add_option("--h-o-dim", o->model.h_o_dim)->check(CLI::PositiveNumber);
        sub->add_option("--layers", o->model.generator_layers)->check(CLI::PositiveNumber);
        sub->add_option("--epochs", o->train.epochs)->check(CLI::PositiveNumber);
        sub->add_option("--batch", o->train.batch)->check(CLI::PositiveNumber);
        sub->add_option("--window", o->train.window)->check(CLI::PositiveNumber);
        sub->add_option("--lr", o->train.adam.lr)->check(CLI::PositiveNumber);
        sub->add_option("--weight-decay", o->train.adam.weight_decay)->check(CLI::NonNegativeNumber);
        sub->add_option("--teacher-forcing", o->train.teacher_forcing)->check(CLI::Range(0.0, 1.0));
        sub->add_option("--kl-start", o->train.kl_start)->check(CLI::NonNegativeNumber);
        sub->add_option("--kl-end", o->train.kl_end)->check(CLI::NonNegativeNumber);
        sub->add_option("--lambda-align", o->train.lambda_align)->check(CLI::NonNegativeNumber);
        sub->add_option("--train-fraction", o->train_fraction, "Share of subjects used for training")
            ->check(CLI::Range(0.0, 1.0));
        commands.push_back({sub, {"data"}, [o, &common](const cli::RunContext& run) {
                                const auto ds = data::load_dataset(o->data);
                                auto [train_ds, test_ds] = data::split_by_subject(ds, o->train_fraction, common.seed);
                                tvae::ModelConfig mc = o->model;
                                mc.skeleton = ds.skeleton;
                                mc.actions = ds.actions;
                                mc.variant = tvae::parse_variant(o->variant);
                                tvae::TrainConfig tc = o->train;
                                tc.seed = common.seed;
                                tvae::Action2MotionModel model(mc, common.seed);
                                std::ofstream hist(run.file("history.csv"));
                                hist << "epoch,lambda_kl,total,recon,kl,align\n" << std::setprecision(9);
                                const int every = std::max(1, tc.epochs / 20);
                                tvae::train(model, train_ds, tc, [&](const tvae::EpochLog& e) {
                                    hist << e.epoch << ',' << e.lambda_kl << ',' << e.total << ',' << e.recon << ','
                                         << e.kl << ',' << e.align << '\n';
                                    if (e.epoch % every == 0 || e.epoch + 1 == tc.epochs) {
                                        std::cout << "epoch " << e.epoch << " loss " << e.total << " recon " << e.recon
                                                  << " kl " << e.kl << " align " << e.align << '\n';
                                    }
                                });
                                const json extra = {{"fps", ds.clips.front().fps},
                                                    {"split",
                                                     {{"train_fraction", o->train_fraction},
                                                      {"seed", common.seed},
                                                      {"train_subjects", subjects_of(train_ds)},
                                                      {"test_subjects", subjects_of(test_ds)}}}};
                                tvae::save_model(run.file("model.ckpt").string(), model, tc, extra);
                                say("wrote", run.file("model.ckpt"));
                            }});
    }

    // train-classifier
    {
        auto* sub = app.add_subcommand("train-classifier", "Train the action recognizer used by evaluate");
        add_common(sub, common);
        struct Opts {
            std::string data;
            metrics::ClassifierConfig cfg;
            double train_fraction = 0.8;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--data", o->data)->required()->check(CLI::ExistingFile);
        sub->add_option("--hidden", o->cfg.hidden)->check(CLI::PositiveNumber);
        sub->add_option("--layers", o->cfg.layers)->check(CLI::PositiveNumber);
        sub->add_option("--feature-dim", o->cfg.feature_dim)->check(CLI::PositiveNumber);
        sub->add_option("--epochs", o->cfg.epochs)->check(CLI::PositiveNumber);
        sub->add_option("--batch", o->cfg.batch)->check(CLI::PositiveNumber);
        sub->add_option("--window", o->cfg.window)->check(CLI::PositiveNumber);
        sub->add_option("--lr", o->cfg.lr)->check(CLI::PositiveNumber);
        sub->add_option("--train-fraction", o->train_fraction)->check(CLI::Range(0.0, 1.0));
        commands.push_back({sub, {"data"}, [o, &common](const cli::RunContext& run) {
                                const auto ds = data::load_dataset(o->data);
                                auto [train_ds, test_ds] = data::split_by_subject(ds, o->train_fraction, common.seed);
                                auto cfg = o->cfg;
                                cfg.seed = common.seed;
                                metrics::ClassifierReport report;
                                const auto c = metrics::train_classifier(train_ds, test_ds, cfg, &report);
                                c.save(run.file("classifier.ckpt").string());
                                write_json(run.file("classifier_report.json"),
                                           {{"train_accuracy", report.train_accuracy},
                                            {"test_accuracy", report.test_accuracy},
                                            {"loss", report.loss},
                                            {"test_subjects", subjects_of(test_ds)}});
                                std::cout << "train accuracy " << report.train_accuracy << " test accuracy "
                                          << report.test_accuracy << '\n';
                                say("wrote", run.file("classifier.ckpt"));
                            }});
    }

    // generate
    {
        auto* sub = app.add_subcommand("generate", "Sample motions of one action");
        add_common(sub, common);
        struct Opts {
            std::string model, action;
            int length = 60, count = 1;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
        sub->add_option("--action", o->action)->required();
        sub->add_option("--length", o->length)->check(CLI::PositiveNumber);
        sub->add_option("--count", o->count, "Motions to draw; with more than one, motion i uses a derived seed")
            ->check(CLI::PositiveNumber);
        commands.push_back({sub, {"model"}, [o, &common](const cli::RunContext& run) {
                                const auto saved = tvae::load_model(o->model);
                                const auto& cfg = saved.model->config();
                                const int a = action_of(cfg, o->action);
                                std::vector<tvae::GeneratedMotion> ms;
                                std::vector<json> meta;
                                if (o->count == 1) {
                                    ms.push_back(tvae::generate(*saved.model, a, o->length, common.seed));
                                    meta.push_back({{"seed", common.seed}});
                                } else {
                                    ms = tvae::generate_batch(*saved.model, std::vector<int>(o->count, a), o->length,
                                                              common.seed);
                                    for (int i = 0; i < o->count; ++i) {
                                        meta.push_back({{"seed", tvae::row_seed(common.seed, i)}});
                                    }
                                }
                                const auto ds = motions_to_dataset(cfg, ms, model_fps(saved), o->action, meta);
                                data::save_dataset(run.file("motions.jsonl").string(), ds);
                                say("wrote", run.file("motions.jsonl"));
                            }});
    }

    // evaluate
    {
        auto* sub = app.add_subcommand("evaluate", "FID, accuracy, diversity and multimodality of a model");
        add_common(sub, common);
        struct Opts {
            std::string model, classifier, data;
            metrics::EvalConfig cfg;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
        sub->add_option("--classifier", o->classifier)->required()->check(CLI::ExistingFile);
        sub->add_option("--data", o->data, "Real motions; the model's held-out subjects are used")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--trials", o->cfg.trials)->check(CLI::PositiveNumber);
        sub->add_option("--samples", o->cfg.samples)->check(CLI::PositiveNumber);
        sub->add_option("--diversity-subset", o->cfg.diversity_subset)->check(CLI::PositiveNumber);
        sub->add_option("--multimodality-subset", o->cfg.multimodality_subset)->check(CLI::PositiveNumber);
        sub->add_option("--length", o->cfg.length)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"model", "classifier", "data"}, [o, &common](const cli::RunContext& run) {
                                const auto saved = tvae::load_model(o->model);
                                const auto classifier = metrics::MotionClassifier::load(o->classifier);
                                const auto ds = data::load_dataset(o->data);
                                double fraction = 0.8;
                                std::uint64_t split_seed = 0;
                                if (saved.sidecar.contains("extra") && saved.sidecar["extra"].contains("split")) {
                                    fraction = saved.sidecar["extra"]["split"].value("train_fraction", 0.8);
                                    split_seed = saved.sidecar["extra"]["split"].value("seed", std::uint64_t{0});
                                }
                                const auto test = held_out(ds, fraction, split_seed);
                                auto cfg = o->cfg;
                                cfg.seed = common.seed;
                                const auto& model = *saved.model;
                                const metrics::MotionSource source = [&](const std::vector<int>& labels, int length,
                                                                         std::uint64_t seed) {
                                    std::vector<lie::JointSequence> out;
                                    for (auto& m : tvae::generate_batch(model, labels, length, seed)) {
                                        out.push_back(std::move(m.joints));
                                    }
                                    return out;
                                };
                                const auto real = metrics::evaluate(classifier, metrics::real_motion_source(test), test, cfg);
                                const auto gen = metrics::evaluate(classifier, source, test, cfg);
                                std::cout << "Real motions\n" << real.table() << '\n';
                                std::cout << tvae::to_string(model.config().variant) << '\n' << gen.table();
                                if (real.fid_regularized || gen.fid_regularized) {
                                    std::cout << "note: covariance regularization was needed for FID\n";
                                }
                                write_json(run.file("metrics.json"), {{"real", real.to_json()},
                                                                       {"generated", gen.to_json()},
                                                                       {"test_clips", test.clips.size()}});
                                std::ofstream csv(run.file("metrics.csv"));
                                csv << "source," << real.to_csv().substr(0, real.to_csv().find('\n') + 1);
                                auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
                                std::istringstream rr(body(real.to_csv())), gr(body(gen.to_csv()));
                                for (std::string l; std::getline(rr, l);) csv << "real," << l << '\n';
                                for (std::string l; std::getline(gr, l);) csv << "generated," << l << '\n';
                                say("wrote", run.file("metrics.json"));
                            }});
    }

    // interpolate
    {
        auto* sub = app.add_subcommand("interpolate", "Walk the first-step latent between two seeded samples");
        add_common(sub, common);
        struct Opts {
            std::string model, action;
            int length = 60, k = 5;
            std::uint64_t seed_a = 0, seed_b = 1;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
        sub->add_option("--action", o->action)->required();
        sub->add_option("--length", o->length)->check(CLI::PositiveNumber);
        sub->add_option("--k", o->k, "Number of interpolation points, endpoints included")->check(CLI::Range(2, 1000));
        sub->add_option("--seed-a", o->seed_a, "Seed whose first latent starts the path");
        sub->add_option("--seed-b", o->seed_b, "Seed whose first latent ends the path");
        commands.push_back({sub, {"model"}, [o, &common](const cli::RunContext& run) {
                                const auto saved = tvae::load_model(o->model);
                                const auto& cfg = saved.model->config();
                                const int a = action_of(cfg, o->action);
                                const auto za = tvae::first_latent(*saved.model, a, o->length, o->seed_a);
                                const auto zb = tvae::first_latent(*saved.model, a, o->length, o->seed_b);
                                const auto ms = tvae::interpolate(*saved.model, a, za, zb, o->k, o->length, common.seed);
                                std::vector<json> meta;
                                for (int i = 0; i < o->k; ++i) {
                                    meta.push_back({{"alpha", static_cast<double>(i) / (o->k - 1)},
                                                    {"seed", common.seed},
                                                    {"seed_a", o->seed_a},
                                                    {"seed_b", o->seed_b}});
                                }
                                const auto ds = motions_to_dataset(cfg, ms, model_fps(saved), "interp", meta);
                                data::save_dataset(run.file("motions.jsonl").string(), ds);
                                say("wrote", run.file("motions.jsonl"));
                            }});
    }

    // transition
    {
        auto* sub = app.add_subcommand("transition", "One motion following an action schedule");
        add_common(sub, common);
        struct Opts {
            std::string model, schedule;
            int length = 60;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
        sub->add_option("--schedule", o->schedule, "action:start_frame list, e.g. walk:0,wave:30")->required();
        sub->add_option("--length", o->length)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"model"}, [o, &common](const cli::RunContext& run) {
                                const auto saved = tvae::load_model(o->model);
                                const auto& cfg = saved.model->config();
                                const auto schedule = parse_schedule(o->schedule, cfg, o->length);
                                const auto m = tvae::transition(*saved.model, schedule, o->length, common.seed);
                                json entries = json::array();
                                for (const auto& [a, start] : schedule) {
                                    entries.push_back({{"action", cfg.actions[a]}, {"start", start}});
                                }
                                const auto ds = motions_to_dataset(cfg, {m}, model_fps(saved), "transition",
                                                                   {{{"seed", common.seed},
                                                                     {"schedule", entries},
                                                                     {"frame_actions", m.frame_actions}}});
                                data::save_dataset(run.file("motions.jsonl").string(), ds);
                                say("wrote", run.file("motions.jsonl"));
                            }});
    }

    // outpaint
    {
        auto* sub = app.add_subcommand("outpaint", "Continue a motion prefix");
        add_common(sub, common);
        struct Opts {
            std::string model, prefix, action;
            int clip = 0, prefix_frames = 8, length = 60, count = 1;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--model", o->model)->required()->check(CLI::ExistingFile);
        sub->add_option("--prefix", o->prefix, "Dataset holding the prefix clip")->required()->check(CLI::ExistingFile);
        sub->add_option("--clip", o->clip)->check(CLI::NonNegativeNumber);
        sub->add_option("--prefix-frames", o->prefix_frames)->check(CLI::PositiveNumber);
        sub->add_option("--action", o->action)->required();
        sub->add_option("--length", o->length)->check(CLI::PositiveNumber);
        sub->add_option("--count", o->count)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"model", "prefix"}, [o, &common](const cli::RunContext& run) {
                                const auto saved = tvae::load_model(o->model);
                                const auto& cfg = saved.model->config();
                                const int a = action_of(cfg, o->action);
                                const auto ds = data::load_dataset(o->prefix);
                                if (ds.skeleton.hash() != cfg.skeleton.hash()) {
                                    throw Error(ErrorKind::InvalidSkeleton, "prefix skeleton differs from the model's");
                                }
                                const auto& clip = pick_clip(ds, o->clip);
                                if (o->prefix_frames > static_cast<int>(clip.frames.size())) {
                                    throw Error(ErrorKind::InvalidArgument, "clip is shorter than --prefix-frames");
                                }
                                const lie::JointSequence cut(clip.frames.begin(), clip.frames.begin() + o->prefix_frames);
                                const auto prefix = data::normalize_clip(cut, cfg.skeleton.root());
                                std::vector<tvae::GeneratedMotion> ms;
                                std::vector<json> meta;
                                for (int i = 0; i < o->count; ++i) {
                                    const std::uint64_t s = o->count == 1 ? common.seed : tvae::row_seed(common.seed, i);
                                    ms.push_back(tvae::outpaint(*saved.model, prefix, a, o->length, s));
                                    meta.push_back({{"seed", s}, {"prefix_frames", o->prefix_frames}, {"prefix_clip", clip.name}});
                                }
                                const auto out = motions_to_dataset(cfg, ms, model_fps(saved), "outpaint", meta);
                                data::save_dataset(run.file("motions.jsonl").string(), out);
                                say("wrote", run.file("motions.jsonl"));
                            }});
    }

    // fit-mesh
    {
        auto* sub = app.add_subcommand("fit-mesh", "Fit the skinned template to a mesh");
        add_common(sub, common);
        struct Opts {
            std::string mesh, joints, tmpl, prior, skeleton = "toy8";
            geo::FitOptions fit;
            double prior_sigma = 1.0;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--mesh", o->mesh, "Target mesh (.obj or .json)")->required()->check(CLI::ExistingFile);
        sub->add_option("--joints", o->joints, "Target joints JSON in template joint order")->check(CLI::ExistingFile);
        sub->add_option("--template", o->tmpl, "Skinned template JSON; default: tube template")
            ->check(CLI::ExistingFile);
        sub->add_option("--skeleton", o->skeleton, "Skeleton of the default template");
        sub->add_option("--prior", o->prior, "Pose prior GMM JSON; default: isotropic")->check(CLI::ExistingFile);
        sub->add_option("--prior-sigma", o->prior_sigma)->check(CLI::PositiveNumber);
        sub->add_option("--lambda-joints", o->fit.lambda_joints)->check(CLI::NonNegativeNumber);
        sub->add_option("--lambda-reg", o->fit.lambda_reg)->check(CLI::NonNegativeNumber);
        sub->add_option("--outer", o->fit.outer_iterations)->check(CLI::PositiveNumber);
        sub->add_option("--inner", o->fit.inner_iterations)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"mesh", "joints", "template", "prior"}, [o](const cli::RunContext& run) {
                                const auto target = geo::load_mesh(o->mesh);
                                const auto tmpl = template_or_default(o->tmpl, o->skeleton);
                                const auto prior = o->prior.empty()
                                                       ? geo::GaussianMixturePrior::isotropic(
                                                             geo::pose_prior_dimension(tmpl), o->prior_sigma)
                                                       : geo::load_prior(o->prior);
                                auto opts = o->fit;
                                geo::Points joints;
                                std::optional<geo::PoseParams> initial;
                                if (!o->joints.empty()) {
                                    joints = read_joints(o->joints);
                                } else {
                                    // No joint targets: surface and prior terms only, started
                                    // with the template centered on the target.
                                    opts.lambda_joints = 0.0;
                                    opts.align_root = false;
                                    joints = tmpl.rest_joints(Eigen::VectorXd::Zero(tmpl.shape_count()));
                                    geo::PoseParams p = geo::PoseParams::zeros(tmpl);
                                    p.translation = target.vertices.rowwise().mean() - tmpl.mesh.vertices.rowwise().mean();
                                    initial = p;
                                }
                                const auto r = geo::fit_skinned_template(tmpl, target, joints, prior, opts, initial);
                                geo::TriMesh fitted = tmpl.mesh;
                                fitted.vertices = geo::pose_template(tmpl, r.params).vertices;
                                geo::save_template(run.file("template.json").string(), tmpl);
                                geo::save_mesh(run.file("fitted.obj").string(), fitted);
                                write_json(run.file("fit.json"), {{"params", r.params.to_json()},
                                                                  {"surface", r.terms.surface},
                                                                  {"joints", r.terms.joints},
                                                                  {"reg", r.terms.reg},
                                                                  {"objective", r.terms.total()},
                                                                  {"accepted_steps", r.objective.size()},
                                                                  {"stalled", r.stalled}});
                                std::cout << "objective " << r.terms.total() << (r.stalled ? " (line search stalled)" : "")
                                          << '\n';
                                say("wrote", run.file("fit.json"));
                            }});
    }

    // animate-mesh
    {
        auto* sub = app.add_subcommand("animate-mesh", "Repose a fitted mesh along a motion");
        add_common(sub, common);
        struct Opts {
            std::string mesh, tmpl, fit, motion, weights = "uniform";
            int clip = 0;
            geo::ArapOptions arap;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--mesh", o->mesh, "Mesh the fit was made to")->required()->check(CLI::ExistingFile);
        sub->add_option("--template", o->tmpl, "Template written by fit-mesh")->required()->check(CLI::ExistingFile);
        sub->add_option("--fit", o->fit, "fit.json written by fit-mesh")->required()->check(CLI::ExistingFile);
        sub->add_option("--motion", o->motion, "Motion dataset (.jsonl)")->required()->check(CLI::ExistingFile);
        sub->add_option("--clip", o->clip)->check(CLI::NonNegativeNumber);
        sub->add_option("--weights", o->weights)->check(CLI::IsMember({"uniform", "cotangent"}));
        sub->add_option("--arap-iterations", o->arap.iterations)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"mesh", "template", "fit", "motion"}, [o](const cli::RunContext& run) {
                                const auto target = geo::load_mesh(o->mesh);
                                const auto tmpl = geo::load_template(o->tmpl);
                                const auto fitted = geo::PoseParams::from_json(read_json(o->fit).at("params"));
                                const auto ds = data::load_dataset(o->motion);
                                const auto& clip = pick_clip(ds, o->clip);
                                const auto motion = lie::joints_to_lie(ds.skeleton, clip.frames);
                                geo::AnimateOptions opts;
                                opts.arap = o->arap;
                                if (o->weights == "cotangent") opts.weights = geo::cotangent_weights(target);
                                const auto frames = geo::animate_mesh(tmpl, fitted, target, ds.skeleton, motion, opts);
                                fs::create_directories(run.file("frames"));
                                char name[32];
                                for (std::size_t t = 0; t < frames.size(); ++t) {
                                    std::snprintf(name, sizeof(name), "frame_%04zu.obj", t);
                                    geo::save_obj((run.file("frames") / name).string(), frames[t]);
                                }
                                std::cout << "frames " << frames.size() << '\n';
                                say("wrote", run.file("frames"));
                            }});
    }

    // blend-texture
    {
        auto* sub = app.add_subcommand("blend-texture", "Fill occluded vertex colors from a reference");
        add_common(sub, common);
        struct Opts {
            std::string mesh, reference, occluded;
            geo::BlendOptions blend;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--mesh", o->mesh, "Colored mesh")->required()->check(CLI::ExistingFile);
        sub->add_option("--reference", o->reference, "Mesh with the same vertices carrying the reference colors")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--occluded", o->occluded, "JSON list of occluded vertex indices")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--lambda", o->blend.lambda)->check(CLI::NonNegativeNumber);
        sub->add_option("--neighbors", o->blend.neighbor_count)->check(CLI::PositiveNumber);
        sub->add_option("--band-rings", o->blend.band_rings)->check(CLI::NonNegativeNumber);
        sub->add_option("--tolerance", o->blend.tolerance)->check(CLI::PositiveNumber);
        sub->add_option("--max-iterations", o->blend.max_iterations)->check(CLI::PositiveNumber);
        commands.push_back({sub, {"mesh", "reference", "occluded"}, [o](const cli::RunContext& run) {
                                auto mesh = geo::load_mesh(o->mesh);
                                const auto ref = geo::load_mesh(o->reference);
                                if (ref.colors.cols() != mesh.vertex_count()) {
                                    throw Error(ErrorKind::DimensionMismatch, "reference colors must cover every vertex");
                                }
                                if (mesh.colors.cols() != mesh.vertex_count()) {
                                    throw Error(ErrorKind::DimensionMismatch, "mesh has no vertex colors");
                                }
                                const auto r = geo::blend_occluded_texture(mesh, read_indices(o->occluded), ref.colors,
                                                                           o->blend);
                                mesh.colors = r.colors;
                                geo::save_mesh(run.file("blended.obj").string(), mesh);
                                write_json(run.file("blend.json"), {{"band", r.band},
                                                                    {"iterations", r.iterations},
                                                                    {"converged", r.converged},
                                                                    {"objective", r.objective}});
                                say("wrote", run.file("blended.obj"));
                            }});
    }

    // export
    {
        auto* sub = app.add_subcommand("export", "Convert dataset clips to BVH, Lie JSON or CSV");
        add_common(sub, common);
        struct Opts {
            std::string input, format = "bvh";
            int clip = -1;
        };
        auto o = std::make_shared<Opts>();
        sub->add_option("--input", o->input, "Motion dataset (.jsonl)")->required()->check(CLI::ExistingFile);
        sub->add_option("--format", o->format)->check(CLI::IsMember({"bvh", "json", "csv"}));
        sub->add_option("--clip", o->clip, "Clip index; -1 exports every clip");
        commands.push_back({sub, {"input"}, [o](const cli::RunContext& run) {
                                const auto ds = data::load_dataset(o->input);
                                std::vector<int> which;
                                if (o->clip < 0) {
                                    for (int i = 0; i < static_cast<int>(ds.clips.size()); ++i) which.push_back(i);
                                } else {
                                    pick_clip(ds, o->clip);
                                    which.push_back(o->clip);
                                }
                                for (int i : which) {
                                    const auto& c = ds.clips[i];
                                    const fs::path p = run.file(c.name + "." + o->format);
                                    if (o->format == "csv") {
                                        data::export_csv(p.string(), ds.skeleton, c.frames, c.fps);
                                    } else {
                                        const auto motion = lie::joints_to_lie(ds.skeleton, c.frames);
                                        if (o->format == "bvh") {
                                            data::export_bvh(p.string(), ds.skeleton, motion, c.fps);
                                        } else {
                                            data::export_json(p.string(), ds.skeleton, motion, c.fps);
                                        }
                                    }
                                    say("wrote", p);
                                }
                            }});
    }

    // replay
    std::string replay_config;
    auto* replay = app.add_subcommand("replay", "Re-run a subcommand from its config.json snapshot");
    replay->add_option("config", replay_config, "config.json of an earlier run")->required()->check(CLI::ExistingFile);
    std::string replay_out;
    replay->add_option("--out-dir", replay_out, "Write outputs here instead of a new run directory");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (replay->parsed()) {
        const json snap = read_json(replay_config);
        if (snap.value("format", "") != "a2m-run") {
            throw Error(ErrorKind::SchemaViolation, replay_config + " is not a run snapshot");
        }
        std::vector<std::string> again = {snap.at("subcommand").get<std::string>()};
        for (const auto& [k, v] : snap.at("options").items()) {
            again.push_back("--" + k);
            again.push_back(v.get<std::string>());
        }
        if (!replay_out.empty()) {
            again.push_back("--out-dir");
            again.push_back(replay_out);
        }
        return run_cli(again);
    }
    for (auto& c : commands) {
        if (!c.app->parsed()) continue;
        const json options = cli::resolved_options(*c.app, c.paths);
        const cli::RunContext run = cli::open_run(c.app->get_name(), options, common.out_dir);
        c.run(run);
        return 0;
    }
    std::cerr << app.help();
    return 2;
}

void report_error(std::string_view kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args);
    } catch (const a2m::Error& e) {
        report_error(a2m::to_string(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
        report_error("SchemaViolation", e.what());
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
    }
    return 1;
}
