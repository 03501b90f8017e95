// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "gradcheck.hpp"

#include "a2m/datasets/dataset.hpp"
#include "a2m/datasets/synthesize.hpp"
#include "a2m/error.hpp"
#include "a2m/geometry/arap.hpp"
#include "a2m/geometry/fitting.hpp"
#include "a2m/geometry/robust.hpp"
#include "a2m/geometry/skinned_template.hpp"
#include "a2m/geometry/texture_blend.hpp"
#include "a2m/lie/kinematics.hpp"
#include "a2m/lie/so3.hpp"
#include "a2m/metrics/classifier.hpp"
#include "a2m/metrics/evaluate.hpp"
#include "a2m/metrics/locomotion.hpp"
#include "a2m/metrics/metrics.hpp"
#include "a2m/tvae/pose_decoding.hpp"
#include "a2m/tvae/sampling.hpp"
#include "a2m/tvae/train.hpp"

#ifndef A2M_CLI_PATH
#define A2M_CLI_PATH "a2m"
#endif

using namespace a2m;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using gradcheck::random_matrix;

namespace {

// Named checks of one criterion; any failed check fails the criterion.
class Report {
public:
    void check(const std::string& name, bool ok, const std::string& detail) {
        std::cout << "  " << (ok ? "ok    " : "FAIL  ") << name << ": " << detail << '\n' << std::flush;
        failed_ += ok ? 0 : 1;
    }
    // value < limit, printed with both numbers.
    void below(const std::string& name, double value, double limit) {
        std::ostringstream s;
        s << std::setprecision(3) << value << " < " << limit;
        check(name, value < limit, s.str());
    }
    bool passed() const { return failed_ == 0; }

private:
    int failed_ = 0;
};

std::string num(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------- criterion 1

lie::Vec3 random_rotation_vector(std::mt19937_64& rng, double max_angle) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, max_angle);
    return lie::Vec3(n(rng), n(rng), n(rng)).normalized() * u(rng);
}

lie::LiePose random_pose(const lie::KinematicTree& tree, std::mt19937_64& rng, double max_angle) {
    std::normal_distribution<double> n(0.0, 1.0);
    lie::LiePose p;
    p.root_orientation = random_rotation_vector(rng, max_angle);
    p.root_position = lie::Vec3(n(rng), n(rng), n(rng));
    p.lie.resize(3, tree.bone_count());
    for (int b = 0; b < tree.bone_count(); ++b) p.lie.col(b) = random_rotation_vector(rng, max_angle);
    return p;
}

void kinematics(Report& r) {
    std::mt19937_64 rng(101);
    double exp_log = 0.0, log_exp = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const lie::Vec3 w = random_rotation_vector(rng, std::numbers::pi - 1e-3);
        const auto back = lie::log_so3(lie::exp_so3(w));
        exp_log = std::max(exp_log, (back.w - w).norm());
        const lie::Rotation rot = lie::exp_so3(random_rotation_vector(rng, std::numbers::pi - 1e-3));
        log_exp = std::max(log_exp, (lie::exp_so3(lie::log_so3(rot).w).matrix() - rot.matrix()).cwiseAbs().maxCoeff());
    }
    r.below("log(exp(w)) - w over 1e5 vectors with |w| < pi", exp_log, 1e-8);
    r.below("exp(log(R)) - R over 1e5 rotations", log_exp, 1e-8);

    for (const char* name : {"ntu18", "cmu22", "humanact24"}) {
        const auto tree = lie::preset_skeleton(name);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto j = lie::forward_kinematics(tree, random_pose(tree, rng, std::numbers::pi));
            for (const auto& b : tree.bones()) {
                worst = std::max(worst, std::abs((j.col(b.child) - j.col(b.parent)).norm() - b.length));
            }
        }
        r.below(std::string("FK bone length error, 1000 poses, ") + name + " (" + std::to_string(tree.joint_count()) +
                    " joints)",
                worst, 1e-9);
    }

    for (const char* name : {"ntu18", "cmu22", "humanact24", "toy8"}) {
        const auto tree = lie::preset_skeleton(name);
        lie::JointSequence frames;
        for (int t = 0; t < 50; ++t) {
            lie::LiePose p = random_pose(tree, rng, 2.5);
            p.root_orientation.setZero();
            p.lie.row(0).setZero();  // no twist about the incoming bone axis
            frames.push_back(lie::forward_kinematics(tree, p));
        }
        const auto back = lie::motion_to_joints(tree, lie::joints_to_lie(tree, frames));
        double worst = 0.0;
        for (std::size_t t = 0; t < frames.size(); ++t) {
            worst = std::max(worst, (back[t] - frames[t]).cwiseAbs().maxCoeff());
        }
        r.below(std::string("FK(joints_to_lie(x)) - x on twist-free poses, ") + name, worst, 1e-6);
    }
}

// ---------------------------------------------------------------- criterion 2

void autodiff(Report& r) {
    using namespace a2m::ad;
    std::mt19937_64 rng(202);
    const Matrix a = random_matrix(4, 3, rng), b = random_matrix(4, 3, rng), row = random_matrix(1, 3, rng);
    const Matrix w = random_matrix(3, 5, rng), col = random_matrix(4, 1, rng);
    Matrix k = random_matrix(5, 4, rng);
    for (Index i = 0; i < k.size(); ++i) {
        if (std::abs(k.data()[i]) < 0.05) k.data()[i] = 0.3;
        if (std::abs(std::abs(k.data()[i]) - 0.8) < 0.05) k.data()[i] = 0.5;
    }
    const Matrix logits = random_matrix(5, 4, rng);
    const std::vector<int> labels = {0, 3, 1, 1, 2};
    const Matrix mu = random_matrix(3, 4, rng), lv = random_matrix(3, 4, rng, 0.5), noise = random_matrix(3, 4, rng);
    const Matrix mu2 = random_matrix(3, 4, rng), lv2 = random_matrix(3, 4, rng, 0.5);
    using In = const std::vector<Tensor>&;

    std::vector<std::pair<std::string, double>> ops = {
        {"matmul", gradcheck::inputs({a, w}, [](Tape&, In x) { return matmul(x[0], x[1]); })},
        {"add", gradcheck::inputs({a, b}, [](Tape&, In x) { return x[0] + x[1]; })},
        {"add row broadcast", gradcheck::inputs({a, row}, [](Tape&, In x) { return x[0] + x[1]; })},
        {"sub", gradcheck::inputs({a, b}, [](Tape&, In x) { return x[0] - x[1]; })},
        {"sub row broadcast", gradcheck::inputs({a, row}, [](Tape&, In x) { return x[0] - x[1]; })},
        {"mul", gradcheck::inputs({a, b}, [](Tape&, In x) { return x[0] * x[1]; })},
        {"mul row broadcast", gradcheck::inputs({a, row}, [](Tape&, In x) { return x[0] * x[1]; })},
        {"mul_rows", gradcheck::inputs({a, col}, [](Tape&, In x) { return mul_rows(x[0], x[1]); })},
        {"scale", gradcheck::inputs({a}, [](Tape&, In x) { return 2.5 * x[0]; })},
        {"add_scalar", gradcheck::inputs({a}, [](Tape&, In x) { return add_scalar(x[0], 0.7); })},
        {"neg", gradcheck::inputs({a}, [](Tape&, In x) { return -x[0]; })},
        {"concat", gradcheck::inputs({a, w.transpose().topRows(4), col},
                                     [](Tape&, In x) { return concat({x[0], x[1], x[2]}); })},
        {"slice", gradcheck::inputs({k}, [](Tape&, In x) { return slice(x[0], 1, 2); })},
        {"tile_cols", gradcheck::inputs({a}, [](Tape&, In x) { return tile_cols(x[0], 3); })},
        {"tanh", gradcheck::inputs({k}, [](Tape&, In x) { return ad::tanh(x[0]); })},
        {"sigmoid", gradcheck::inputs({k}, [](Tape&, In x) { return sigmoid(x[0]); })},
        {"relu", gradcheck::inputs({k}, [](Tape&, In x) { return relu(x[0]); })},
        {"exp", gradcheck::inputs({k}, [](Tape&, In x) { return ad::exp(x[0]); })},
        {"square", gradcheck::inputs({k}, [](Tape&, In x) { return square(x[0]); })},
        {"clamp", gradcheck::inputs({k}, [](Tape&, In x) { return clamp(x[0], -0.8, 0.8); })},
        {"sum", gradcheck::inputs({k}, [](Tape&, In x) { return sum(x[0]); })},
        {"mean", gradcheck::inputs({k}, [](Tape&, In x) { return mean(x[0]); })},
        {"row_sum", gradcheck::inputs({k}, [](Tape&, In x) { return row_sum(x[0]); })},
        {"l2_norm rows", gradcheck::inputs({k}, [](Tape&, In x) { return l2_norm(x[0]); })},
        {"l2_norm groups", gradcheck::inputs({a}, [](Tape&, In x) { return l2_norm(x[0], 3); })},
        {"softmax_cross_entropy",
         gradcheck::inputs({logits}, [&](Tape&, In x) { return softmax_cross_entropy(x[0], labels); })},
        {"reparameterized_sample",
         gradcheck::inputs({mu, lv}, [&](Tape&, In x) { return reparameterized_sample(x[0], x[1], noise); })},
        {"kl_diag_gaussians_rows", gradcheck::inputs({mu, lv, mu2, lv2}, [](Tape&, In x) {
             return kl_diag_gaussians_rows(x[0], x[1], x[2], x[3]);
         })},
        {"kl_diag_gaussians", gradcheck::inputs({mu, lv, mu2, lv2}, [](Tape&, In x) {
             return kl_diag_gaussians(x[0], x[1], x[2], x[3]);
         })},
    };

    Rng prng(203);
    Linear lin("lin", 4, 3, prng);
    GruParams gru("gru", 4, 3, prng);
    GruStack stack("stack", 4, 3, 2, prng);
    const Matrix x = random_matrix(5, 4, rng), h = random_matrix(5, 3, rng, 0.5), wout = random_matrix(5, 3, rng);
    ops.push_back({"Linear parameters", gradcheck::parameters(lin.parameters(), [&](Tape& t) {
                       return sum(ad::tanh(lin(t, t.constant(x))));
                   })});
    ops.push_back({"gru_cell inputs", gradcheck::inputs({x, h}, [&](Tape& t, In in) {
                       return gru_cell(t, in[0], in[1], gru);
                   })});
    ops.push_back({"gru_cell parameters", gradcheck::parameters(gru.parameters(), [&](Tape& t) {
                       return sum(gru_cell(t, t.constant(x), t.constant(h), gru) * t.constant(wout));
                   })});
    ops.push_back({"GRU stack parameters", gradcheck::parameters(stack.parameters(), [&](Tape& t) {
                       auto state = stack.zero_state(t, 5);
                       stack.step(t, t.constant(x), state);
                       return sum(stack.step(t, t.constant(x), state) * t.constant(wout));
                   })});

    const auto toy = lie::preset_skeleton("toy8");
    const int nb = toy.bone_count(), nj = toy.joint_count();
    const Matrix lie_in = random_matrix(3, 3 * nb, rng, 0.7);
    const Matrix prev_root = random_matrix(3, 3, rng), prev_offset = random_matrix(3, 3 * nj, rng);
    ops.push_back({"fk_tensor", gradcheck::inputs({lie_in}, [&](Tape& t, In in) { return tvae::fk_tensor(t, in[0], toy); })});
    ops.push_back({"plain pose decoder", gradcheck::inputs({random_matrix(3, 3 * nj, rng), prev_root}, [&](Tape& t, In in) {
                       const auto d = tvae::decode_pose_plain(t, in[0], in[1], nj, toy.root());
                       return concat({d.joints, d.velocity});
                   })});
    ops.push_back({"lie pose decoder", gradcheck::inputs({random_matrix(3, 3 * nb + 3, rng, 0.7), prev_root},
                                                         [&](Tape& t, In in) {
                                                             const auto d = tvae::decode_pose_lie(t, in[0], in[1], toy);
                                                             return concat({d.joints, d.velocity});
                                                         })});
    const Matrix vel_w = random_matrix(6 * nj + 2, 3, rng, 0.1);
    ops.push_back({"glmi pose decoder",
                   gradcheck::inputs({random_matrix(3, 3 * nb + 2, rng, 0.7), prev_offset, prev_root}, [&](Tape& t, In in) {
                       const auto d = tvae::decode_pose_glmi(t, in[0], in[1], in[2], toy, [&](const Tensor& f) {
                           return ad::tanh(matmul(f, t.constant(vel_w)));
                       });
                       return concat({d.joints, d.velocity});
                   })});

    double worst = 0.0;
    std::string worst_name;
    for (const auto& [name, err] : ops) {
        if (err >= worst) {
            worst = err;
            worst_name = name;
        }
        if (err >= gradcheck::kOpTolerance) r.below("op " + name, err, gradcheck::kOpTolerance);
    }
    r.below(std::to_string(ops.size()) + " ops, worst relative error (" + worst_name + ")", worst,
            gradcheck::kOpTolerance);

    // Full ELBO on a 2-frame, 3-joint problem for every decoder variant.
    const lie::KinematicTree tree({"root", "a", "b"}, {{0, 1, 2}}, {0.3, 0.2});
    data::MotionDataset ds;
    ds.skeleton = tree;
    ds.actions = {"walk", "wave"};
    for (int c = 0; c < 3; ++c) {
        data::MotionClip clip;
        clip.label = c % 2;
        for (int t = 0; t < 2; ++t) {
            lie::LiePose p;
            p.root_position = random_matrix(3, 1, rng, 0.2);
            p.lie = random_matrix(3, 2, rng, 0.5);
            clip.frames.push_back(lie::forward_kinematics(tree, p));
        }
        ds.clips.push_back(clip);
    }
    const auto batch = data::to_training_tensors(ds, 2);
    Eigen::VectorXd forcing(3);
    forcing << 1.0, 0.0, 1.0;
    for (auto v : {tvae::DecoderVariant::plain, tvae::DecoderVariant::lie, tvae::DecoderVariant::glmi_m,
                   tvae::DecoderVariant::glmi_r}) {
        tvae::ModelConfig cfg;
        cfg.skeleton = tree;
        cfg.actions = ds.actions;
        cfg.variant = v;
        cfg.hidden = 5;
        cfg.z_dim = 3;
        cfg.h_o_dim = 2;
        tvae::Action2MotionModel model(cfg, 7);
        std::vector<Matrix> eps = {random_matrix(3, 3, rng), random_matrix(3, 3, rng)};
        const double err = gradcheck::parameters_pooled(model.parameters(), [&](Tape& t) {
            return tvae::elbo_loss(t, model, batch, forcing, eps, 0.3, 2.0).total;
        });
        r.below("ELBO gradient, " + tvae::to_string(v) + " decoder", err, 1e-3);
    }
}

// ---------------------------------------------------------------- criterion 3

// Cyclic Jacobi eigendecomposition of a symmetric matrix: A = V diag(l) V^T.
void jacobi_eigen(MatrixXd a, VectorXd& values, MatrixXd& vectors) {
    const Eigen::Index n = a.rows();
    vectors = MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = vectors(k, p), vkq = vectors(k, q);
                    vectors(k, p) = c * vkp - s * vkq;
                    vectors(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    values = a.diagonal();
}

// n samples whose empirical mean and unbiased covariance equal mu and cov
// up to rounding.
MatrixXd moment_matched(const VectorXd& mu, const MatrixXd& cov, int n, std::mt19937_64& rng) {
    MatrixXd x = random_matrix(n, mu.size(), rng);
    x = x.rowwise() - x.colwise().mean();
    const MatrixXd emp = x.transpose() * x / (n - 1);
    const MatrixXd l_emp = emp.llt().matrixL();
    const MatrixXd l_cov = cov.llt().matrixL();
    // Whiten to identity covariance, then color with the target factor.
    const MatrixXd white = l_emp.triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
    return (white * l_cov.transpose()).rowwise() + mu.transpose();
}

void metric_oracles(Report& r) {
    std::mt19937_64 rng(303);

    const MatrixXd x = random_matrix(500, 6, rng);
    const auto same = metrics::fid(x, x);
    r.below("fid(X, X)", std::abs(same.value), 1e-6);

    {
        VectorXd m0(1), m1(1);
        m0 << 0.0;
        m1 << 1.0;
        const MatrixXd one = MatrixXd::Identity(1, 1);
        const double f = metrics::fid(moment_matched(m0, one, 1000, rng), moment_matched(m1, one, 1000, rng)).value;
        r.below("1-d N(0,1) vs N(1,1) against 1.0", std::abs(f - 1.0), 1e-6);
    }
    {
        VectorXd m0(4), m1(4), d0(4), d1(4);
        m0 << 0.5, -1.0, 2.0, 0.0;
        m1 << -0.5, 1.0, 1.5, 0.3;
        d0 << 1.0, 0.25, 4.0, 2.0;
        d1 << 2.0, 1.0, 0.5, 2.0;
        double closed = (m0 - m1).squaredNorm();
        for (int i = 0; i < 4; ++i) closed += std::pow(std::sqrt(d0[i]) - std::sqrt(d1[i]), 2);
        const double f = metrics::fid(moment_matched(m0, d0.asDiagonal().toDenseMatrix(), 800, rng),
                                      moment_matched(m1, d1.asDiagonal().toDenseMatrix(), 800, rng))
                             .value;
        r.below("4-d diagonal Gaussians against the closed form " + num(closed), std::abs(f - closed), 1e-6);
    }
    {
        // 2 x 2, non-commuting covariances: Tr sqrt(M) = sqrt(tr M + 2 sqrt(det M)).
        VectorXd m0(2), m1(2);
        m0 << 0.3, -0.2;
        m1 << -0.4, 0.9;
        MatrixXd s0(2, 2), s1(2, 2);
        s0 << 2.0, 0.8, 0.8, 1.0;
        s1 << 0.7, -0.3, -0.3, 1.5;
        const double tr_sqrt = std::sqrt((s0 * s1).trace() + 2.0 * std::sqrt(s0.determinant() * s1.determinant()));
        const double closed = (m0 - m1).squaredNorm() + s0.trace() + s1.trace() - 2.0 * tr_sqrt;
        const double f = metrics::fid(moment_matched(m0, s0, 600, rng), moment_matched(m1, s1, 600, rng)).value;
        r.below("2-d correlated Gaussians against the closed form " + num(closed), std::abs(f - closed), 1e-6);
    }

    for (double floor : {1.0, 1e-6}) {
        const MatrixXd g = random_matrix(8, 8, rng);
        const MatrixXd a = g * g.transpose() + floor * MatrixXd::Identity(8, 8);
        VectorXd values;
        MatrixXd vectors;
        jacobi_eigen(a, values, vectors);
        const MatrixXd oracle = vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
        r.below("sqrtm_psd vs Jacobi eigendecomposition, 8x8 SPD, smallest eigenvalue " + num(values.minCoeff(), 2),
                (metrics::sqrtm_psd(a) - oracle).cwiseAbs().maxCoeff(), 1e-8);
    }
    {
        // Rank 5 of 8: the square root of a rounding-level eigenvalue is
        // ~1e-8, so only the defining identity is checked here.
        const MatrixXd g = random_matrix(8, 5, rng);
        const MatrixXd a = g * g.transpose();
        const MatrixXd s = metrics::sqrtm_psd(a);
        r.below("sqrtm_psd(A)^2 - A, 8x8 rank 5, relative", (s * s - a).norm() / a.norm(), 1e-12);
    }

    const MatrixXd collapsed = VectorXd::LinSpaced(5, 0.1, 0.5).transpose().replicate(60, 1);
    std::mt19937_64 mrng(1);
    const double div = metrics::diversity(collapsed, 20, mrng);
    const double mm = metrics::multimodality({collapsed, collapsed, collapsed}, 10, mrng);
    r.check("diversity of a collapsed set", div == 0.0, num(div) + " == 0");
    r.check("multimodality of collapsed classes", mm == 0.0, num(mm) + " == 0");
}

// ---------------------------------------------------------------- criterion 4

double walk_slide(const tvae::Action2MotionModel& model, const lie::KinematicTree& tree, int walk, int count,
                  double fps) {
    const auto ms = tvae::generate_batch(model, std::vector<int>(count, walk), 16, 404);
    double total = 0.0;
    for (const auto& m : ms) total += metrics::foot_slide(tree, m.joints, fps);
    return total / count;
}

void training_experiment(Report& r) {
    const data::SynthSpec spec;  // walk, wave, squat; 100 clips each; 16 frames
    const auto ds = data::synthesize(spec, 11);
    auto [train, test] = data::split_by_subject(ds, 0.8, 1);
    r.check("dataset", ds.clips.size() == 300 && ds.skeleton.joint_count() == 8,
            std::to_string(ds.clips.size()) + " clips, " + std::to_string(train.clips.size()) + " train / " +
                std::to_string(test.clips.size()) + " held out, " + std::to_string(ds.skeleton.joint_count()) +
                " joints");

    auto t0 = Clock::now();
    metrics::ClassifierConfig ccfg;
    ccfg.seed = 1;
    metrics::ClassifierReport crep;
    const auto classifier = metrics::train_classifier(train, test, ccfg, &crep);
    std::cout << "  classifier: held-out accuracy " << num(crep.test_accuracy) << " (" << num(seconds_since(t0), 3)
              << " s)\n";

    tvae::TrainConfig tcfg;
    tcfg.batch = 8;
    tcfg.epochs = 60;
    tcfg.adam.lr = 2e-3;
    tcfg.seed = 1;
    auto make = [&](tvae::DecoderVariant v) {
        tvae::ModelConfig mc;
        mc.skeleton = ds.skeleton;
        mc.actions = ds.actions;
        mc.variant = v;
        return tvae::Action2MotionModel(mc, 1);
    };
    const tvae::Action2MotionModel untrained = make(tvae::DecoderVariant::glmi_m);
    tvae::Action2MotionModel glmi = make(tvae::DecoderVariant::glmi_m);
    tvae::Action2MotionModel lie = make(tvae::DecoderVariant::lie);
    for (auto* m : {&glmi, &lie}) {
        t0 = Clock::now();
        const auto hist = tvae::train(*m, train, tcfg);
        std::cout << "  trained " << tvae::to_string(m->config().variant) << ": loss "
                  << num(hist.epochs.front().total) << " -> " << num(hist.epochs.back().total) << " ("
                  << num(seconds_since(t0), 3) << " s)\n";
    }

    metrics::EvalConfig ecfg;
    ecfg.trials = 5;
    ecfg.samples = 500;
    ecfg.seed = 5;
    auto source = [](const tvae::Action2MotionModel& m) -> metrics::MotionSource {
        return [&m](const std::vector<int>& labels, int length, std::uint64_t seed) {
            std::vector<lie::JointSequence> out;
            for (auto& g : tvae::generate_batch(m, labels, length, seed)) out.push_back(std::move(g.joints));
            return out;
        };
    };
    t0 = Clock::now();
    const auto real = metrics::evaluate(classifier, metrics::real_motion_source(test), test, ecfg);
    const auto before = metrics::evaluate(classifier, source(untrained), test, ecfg);
    const auto after = metrics::evaluate(classifier, source(glmi), test, ecfg);
    const auto after_lie = metrics::evaluate(classifier, source(lie), test, ecfg);
    std::cout << "  evaluation (" << num(seconds_since(t0), 3) << " s), " << ecfg.trials << " trials of "
              << ecfg.samples << " samples against the held-out subjects\n";
    auto row = [](const std::string& name, const metrics::MetricsReport& m) {
        std::cout << "    " << std::left << std::setw(18) << name << " FID " << std::setw(10) << num(m.fid.mean)
                  << " accuracy " << std::setw(7) << num(m.accuracy.mean, 3) << " diversity " << std::setw(7)
                  << num(m.diversity.mean, 3) << " multimodality " << num(m.multimodality.mean, 3) << '\n';
    };
    row("real", real);
    row("untrained glmi_m", before);
    row("glmi_m", after);
    row("lie", after_lie);

    r.check("(a) trained FID at least 5x below untrained",
            5.0 * after.fid.mean <= before.fid.mean,
            num(after.fid.mean) + " * 5 <= " + num(before.fid.mean) + " (ratio " + num(before.fid.mean / after.fid.mean) +
                ")");
    r.check("(b) recognition accuracy of generated motions", after.accuracy.mean >= 0.8,
            num(after.accuracy.mean) + " >= 0.8");

    const int walk = ds.action_index("walk");
    const double fps = spec.fps;
    const double slide_glmi = walk_slide(glmi, ds.skeleton, walk, 300, fps);
    const double slide_lie = walk_slide(lie, ds.skeleton, walk, 300, fps);
    double slide_real = 0.0;
    int walks = 0;
    for (const auto& c : test.clips) {
        if (c.label != walk) continue;
        slide_real += metrics::foot_slide(ds.skeleton, c.frames, c.fps);
        ++walks;
    }
    std::cout << "  stance-foot slide on walk (m/s): real " << num(slide_real / std::max(walks, 1)) << ", glmi_m "
              << num(slide_glmi) << ", lie " << num(slide_lie) << '\n';
    r.check("(c) glmi_m foot slide below lie", slide_glmi < slide_lie, num(slide_glmi) + " < " + num(slide_lie));
}

// ---------------------------------------------------------------- criterion 5

void geometry(Report& r) {
    using namespace a2m::geo;
    {
        const TriMesh m = fixtures::cylinder(10, 20);
        const Mat3 rot = lie::exp_so3(Vec3(0.3, -0.5, 0.2)).matrix();
        const Vec3 t(0.4, -0.1, 0.25);
        ControlTargets c;
        for (int v = 0; v < m.vertex_count(); v += 5) c.vertices.push_back(v);
        c.positions.resize(3, c.vertices.size());
        for (std::size_t i = 0; i < c.vertices.size(); ++i) c.positions.col(i) = rot * m.vertices.col(c.vertices[i]) + t;
        ArapOptions opt;
        opt.iterations = 100;
        const auto out = arap_deform(m, c, {}, {}, opt);
        const Points expected = (rot * m.vertices).colwise() + t;
        const double err = (out.vertices - expected).colwise().norm().maxCoeff() / bbox_diagonal(m.vertices);
        r.below("ARAP rigid reproduction, " + std::to_string(m.vertex_count()) + " vertices, error / bbox diagonal",
                err, 1e-3);
    }
    {
        std::mt19937_64 rng(505);
        std::normal_distribution<double> n(0.0, 1.0);
        double worst_rise = 0.0;
        int alternations = 0;
        for (int trial = 0; trial < 6; ++trial) {
            const TriMesh m = fixtures::cylinder(10, 20);
            ControlTargets c;
            for (int v = 0; v < m.vertex_count(); v += 7) c.vertices.push_back(v);
            c.positions.resize(3, c.vertices.size());
            for (std::size_t i = 0; i < c.vertices.size(); ++i) {
                c.positions.col(i) = m.vertices.col(c.vertices[i]) + 0.2 * Vec3(n(rng), n(rng), n(rng));
            }
            ArapOptions opt;
            opt.iterations = 40;
            opt.tolerance = 0.0;
            const auto out = arap_deform(m, c, {}, trial % 2 ? cotangent_weights(m) : uniform_weights(m), opt);
            for (std::size_t i = 1; i < out.energy.size(); ++i) {
                worst_rise = std::max(worst_rise, (out.energy[i] - out.energy[i - 1]) / out.energy[i - 1]);
            }
            alternations += static_cast<int>(out.energy.size());
        }
        r.check("ARAP energy monotone per alternation", worst_rise <= 1e-12,
                "largest relative rise " + num(worst_rise) + " over " + std::to_string(alternations) + " alternations");
    }
    {
        TriMesh m = fixtures::cylinder(8, 10);
        std::mt19937_64 rng(506);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        m.colors.resize(3, m.vertex_count());
        Points ref(3, m.vertex_count());
        for (Eigen::Index i = 0; i < m.colors.size(); ++i) {
            m.colors.data()[i] = u(rng);
            ref.data()[i] = u(rng);
        }
        std::vector<int> occluded;
        for (int v = 0; v < m.vertex_count(); v += 3) occluded.push_back(v);
        BlendOptions opt;
        opt.lambda = 0.0;
        const auto res = blend_occluded_texture(m, occluded, ref, opt);
        double diff = 0.0;
        for (int v : occluded) diff = std::max(diff, (res.colors.col(v) - ref.col(v)).cwiseAbs().maxCoeff());
        r.check("texture blend with lambda 0 reproduces the reference", diff == 0.0, "max difference " + num(diff));
    }
    {
        // 5-vertex path: occluded {1, 2}, band {0, 3}, vertex 4 fixed. Dense
        // least squares over the free vertices.
        TriMesh m = fixtures::path_mesh(5);
        m.colors.resize(3, 5);
        m.colors << 0.9, 0.1, 0.4, 0.3, 0.2, 0.1, 0.8, 0.6, 0.2, 0.7, 0.5, 0.5, 0.1, 0.9, 0.3;
        Points ref(3, 5);
        ref << 0.0, 0.7, 0.2, 1.0, 0.0, 0.0, 0.3, 0.9, 0.5, 0.0, 0.0, 0.6, 0.4, 0.1, 0.0;
        BlendOptions opt;
        opt.lambda = 0.7;
        opt.band_rings = 1;
        const std::vector<int> occluded = {1, 2};
        const auto res = blend_occluded_texture(m, occluded, ref, opt);
        const std::vector<std::vector<int>> nb = {{1}, {0, 2}, {1, 3}, {2, 4}};
        MatrixXd a = MatrixXd::Zero(4, 4), b = MatrixXd::Zero(4, 3);
        // Normal equations of sum_x w_x |c_x - p_x|^2 + lambda / |N_x| sum_y |c_x - c_y|^2.
        for (int xv : occluded) {
            a(xv, xv) += 1.0;
            b.row(xv) += ref.col(xv).transpose();
        }
        for (int xv = 0; xv < 4; ++xv) {
            const double w = opt.lambda / nb[xv].size();
            for (int y : nb[xv]) {
                a(xv, xv) += w;
                if (y < 4) {
                    a(xv, y) -= w;
                    a(y, y) += w;
                    a(y, xv) -= w;
                } else {
                    b.row(xv) += w * m.colors.col(y).transpose();
                }
            }
        }
        const MatrixXd oracle = a.ldlt().solve(b);
        double err = 0.0;
        for (int xv = 0; xv < 4; ++xv) err = std::max(err, (res.colors.col(xv) - oracle.row(xv).transpose()).cwiseAbs().maxCoeff());
        r.below("texture blend on the 5-vertex path vs dense solve", err, 1e-6);
    }
    {
        const auto tmpl = build_tube_template(lie::preset_skeleton("toy8"), data::standing_pose());
        const auto prior = GaussianMixturePrior::isotropic(pose_prior_dimension(tmpl), 1.0);
        std::mt19937_64 rng(507);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            PoseParams truth = PoseParams::zeros(tmpl);
            for (Eigen::Index i = 0; i < truth.theta.size(); ++i) truth.theta.data()[i] = 0.25 * u(rng);
            for (Eigen::Index i = 0; i < truth.beta.size(); ++i) truth.beta[i] = 0.05 * u(rng);
            truth.translation = Vec3(u(rng), 0.2 * u(rng), u(rng));
            const PosedTemplate gt = pose_template(tmpl, truth);
            TriMesh target = tmpl.mesh;
            target.vertices = gt.vertices;
            const FitResult fit = fit_skinned_template(tmpl, target, gt.joints, prior);
            const Points joints = pose_template(tmpl, fit.params).joints;
            const double height = gt.joints.row(1).maxCoeff() - gt.joints.row(1).minCoeff();
            worst = std::max(worst, (joints - gt.joints).colwise().norm().maxCoeff() / height);
        }
        r.below("fit recovers synthetic (beta, theta), joint error / skeleton height, 3 targets", worst, 1e-3);
    }
}

// ---------------------------------------------------------------- criterion 6

bool same_motion(const tvae::GeneratedMotion& a, const tvae::GeneratedMotion& b) {
    if (a.joints.size() != b.joints.size() || a.frame_actions != b.frame_actions) return false;
    for (std::size_t t = 0; t < a.joints.size(); ++t) {
        if (a.joints[t] != b.joints[t]) return false;
    }
    return true;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Files under `dir` keyed by relative path.
std::map<std::string, std::string> tree_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
    return out;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + A2M_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

// The CLI pipeline into `root`; returns false when a command fails.
bool cli_pipeline(const fs::path& root, std::string& failed) {
    const std::string d = (root / "data").string(), m = (root / "model").string();
    const std::vector<std::string> steps = {
        "synth-data --clips-per-action 8 --subjects 4 --seed 3 --out-dir " + d,
        "train --data " + d + "/dataset.jsonl --variant glmi_m --epochs 3 --batch 8 --hidden 16 --z-dim 4 --h-o-dim 4 "
                              "--seed 4 --out-dir " + m,
        "generate --model " + m + "/model.ckpt --action walk --length 100 --seed 7 --out-dir " + (root / "gen").string(),
        "generate --model " + m + "/model.ckpt --action wave --length 20 --count 4 --seed 8 --out-dir " +
            (root / "batch").string(),
        "transition --model " + m + "/model.ckpt --schedule walk:0,squat:10 --length 24 --seed 9 --out-dir " +
            (root / "transition").string(),
        "outpaint --model " + m + "/model.ckpt --prefix " + d + "/dataset.jsonl --clip 1 --prefix-frames 5 "
                                                                "--action walk --length 20 --count 2 --seed 10 --out-dir " +
            (root / "outpaint").string(),
        "interpolate --model " + m + "/model.ckpt --action squat --seed-a 1 --seed-b 2 --k 4 --seed 11 --out-dir " +
            (root / "interpolate").string(),
        "export --input " + (root / "gen").string() + "/motions.jsonl --format bvh --out-dir " +
            (root / "export").string(),
    };
    for (const auto& s : steps) {
        if (run(s) != 0) {
            failed = s.substr(0, s.find(' '));
            return false;
        }
    }
    return true;
}

void application_contracts(Report& r) {
    // A briefly trained toy model so the contracts run on non-trivial weights.
    data::SynthSpec spec;
    spec.clips_per_action = 10;
    spec.subjects = 4;
    const auto ds = data::synthesize(spec, 21);
    tvae::ModelConfig mc;
    mc.skeleton = ds.skeleton;
    mc.actions = ds.actions;
    mc.variant = tvae::DecoderVariant::glmi_m;
    mc.hidden = 32;
    mc.z_dim = 8;
    mc.h_o_dim = 8;
    tvae::TrainConfig tc;
    tc.batch = 8;
    tc.epochs = 10;
    tc.adam.lr = 2e-3;
    tc.seed = 2;
    tvae::Action2MotionModel model(mc, 2);
    tvae::train(model, ds, tc);
    tvae::Action2MotionModel again(mc, 2);
    tvae::train(again, ds, tc);
    bool same_weights = true;
    const auto pa = model.parameters(), pb = again.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) same_weights = same_weights && pa[i]->value == pb[i]->value;
    r.check("seeded training repeats bit-identically", same_weights, std::to_string(pa.size()) + " parameter tensors");

    const int walk = ds.action_index("walk"), wave = ds.action_index("wave"), squat = ds.action_index("squat");
    {
        const auto& clip = ds.clips.front();
        const lie::JointSequence prefix =
            data::normalize_clip(lie::JointSequence(clip.frames.begin(), clip.frames.begin() + 6), ds.skeleton.root());
        bool exact = true;
        for (std::uint64_t seed : {1, 2, 3}) {
            const auto out = tvae::outpaint(model, prefix, walk, 30, seed);
            for (std::size_t t = 0; t < prefix.size(); ++t) exact = exact && out.joints[t] == prefix[t];
        }
        r.check("outpaint keeps its prefix bit-exactly", exact, "6-frame prefix, 3 seeds");
    }
    {
        bool equal = true;
        for (int a : {walk, wave, squat}) equal = equal && same_motion(tvae::transition(model, {{a, 0}}, 40, 17), tvae::generate(model, a, 40, 17));
        r.check("single-action transition equals generate", equal, "3 actions, 40 frames, seed 17");
    }
    {
        const std::uint64_t sa = 31, sb = 32;
        const auto za = tvae::first_latent(model, squat, 30, sa);
        const auto zb = tvae::first_latent(model, squat, 30, sb);
        const auto from_a = tvae::interpolate(model, squat, za, zb, 5, 30, sa);
        const auto from_b = tvae::interpolate(model, squat, za, zb, 5, 30, sb);
        const bool ends = same_motion(from_a.front(), tvae::generate(model, squat, 30, sa)) &&
                          same_motion(from_b.back(), tvae::generate(model, squat, 30, sb));
        r.check("interpolation endpoints reproduce the seeded motions", ends, "k = 5, seeds 31 and 32");
        const double span = (from_a.front().joints.front() - from_a.back().joints.front()).norm();
        double step = 0.0;
        for (std::size_t i = 1; i < from_a.size(); ++i) {
            step = std::max(step, (from_a[i].joints.front() - from_a[i - 1].joints.front()).norm());
        }
        r.check("interpolated first poses move continuously", step < span,
                "largest adjacent step " + num(step) + " < endpoint distance " + num(span));
    }
    {
        bool repeat = true;
        for (int a : {walk, wave, squat}) repeat = repeat && same_motion(tvae::generate(model, a, 60, 5), tvae::generate(model, a, 60, 5));
        const auto b1 = tvae::generate_batch(model, {walk, wave, squat, walk}, 20, 6);
        const auto b2 = tvae::generate_batch(model, {walk, wave, squat, walk}, 20, 6);
        for (std::size_t i = 0; i < b1.size(); ++i) repeat = repeat && same_motion(b1[i], b2[i]);
        r.check("seeded sampling repeats bit-identically", repeat, "generate and generate_batch");
    }

    const fs::path scratch = fs::temp_directory_path() / ("a2m_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    // Both repeats run under the same path, so config.json snapshots
    // compare too.
    std::string failed;
    const bool ok1 = cli_pipeline(scratch / "run", failed);
    if (ok1) fs::rename(scratch / "run", scratch / "first");
    const bool ok2 = ok1 && cli_pipeline(scratch / "run", failed);
    if (!ok1 || !ok2) {
        r.check("CLI pipeline runs", false, "'" + failed + "' exited non-zero");
    } else {
        const auto a = tree_contents(scratch / "first"), b = tree_contents(scratch / "run");
        std::vector<std::string> differing;
        for (const auto& [name, bytes] : a) {
            const auto it = b.find(name);
            if (it == b.end() || it->second != bytes) differing.push_back(name);
        }
        r.check("CLI runs byte-identical across repeats", differing.empty() && a.size() == b.size(),
                std::to_string(a.size()) + " files compared, run snapshots included" +
                    (differing.empty() ? "" : ", first difference in " + differing.front()));
        const int replay = run("replay " + (scratch / "first" / "gen" / "config.json").string() + " --out-dir " +
                               (scratch / "replayed").string());
        const bool replayed = replay == 0 && read_file(scratch / "replayed" / "motions.jsonl") ==
                                                 read_file(scratch / "first" / "gen" / "motions.jsonl");
        r.check("replay of a run snapshot reproduces its output", replayed, "generate --length 100 --seed 7");
    }
    fs::remove_all(scratch);
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0: no runtime limit
    void (*run)(Report&);
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "kinematics", 10.0, kinematics},
        {2, "autodiff", 60.0, autodiff},
        {3, "metric oracles", 0.0, metric_oracles},
        {4, "scaled-down training experiment", 1800.0, training_experiment},
        {5, "geometry", 60.0, geometry},
        {6, "application contracts", 0.0, application_contracts},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int passed = 0, ran = 0;
    std::vector<std::string> summary;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        std::cout << "criterion " << c.id << " (" << c.name << ")\n";
        Report r;
        const auto t0 = Clock::now();
        try {
            c.run(r);
        } catch (const std::exception& e) {
            r.check("no exception", false, e.what());
        }
        const double secs = seconds_since(t0);
        if (c.budget_seconds > 0) r.below("runtime (s)", secs, c.budget_seconds);
        std::ostringstream line;
        line << "criterion " << c.id << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << std::fixed
             << std::setprecision(1) << secs << " s) " << c.name;
        std::cout << line.str() << "\n\n" << std::flush;
        summary.push_back(line.str());
        ++ran;
        passed += r.passed();
    }
    for (const auto& s : summary) std::cout << s << '\n';
    std::cout << passed << " of " << ran << " criteria passed\n";
    return passed == ran ? 0 : 1;
}
