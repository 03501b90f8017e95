#include "a2m/tvae/sampling.hpp"

#include <random>

#include "a2m/datasets/dataset.hpp"
#include "a2m/error.hpp"

namespace a2m::tvae {

namespace {

int active_action(const Schedule& s, int t) {
    int a = s.front().first;
    for (const auto& [action, start] : s) {
        if (start <= t) a = action;
    }
    return a;
}

Eigen::RowVectorXd prefix_pose_vector(const lie::JointSequence& prefix, int t, int root) {
    const auto& f = prefix[t];
    Eigen::RowVectorXd v(f.size() + 3);
    v.head(f.size()) = data::flatten_pose(f);
    const Eigen::Vector3d vel = t == 0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(f.col(root) - prefix[t - 1].col(root));
    v.tail<3>() = vel.transpose();
    return v;
}

}  // namespace

void validate_schedule(const Schedule& schedule, int length, int action_count) {
    if (schedule.empty()) throw Error(ErrorKind::InvalidSchedule, "schedule is empty");
    if (schedule.front().second != 0) throw Error(ErrorKind::InvalidSchedule, "the first action must start at frame 0");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& [action, start] = schedule[i];
        if (action < 0 || action >= action_count) {
            throw Error(ErrorKind::UnknownAction, "action index " + std::to_string(action) + " out of range");
        }
        if (start >= length) throw Error(ErrorKind::InvalidSchedule, "switch frame " + std::to_string(start) + " >= length");
        if (i > 0 && start <= schedule[i - 1].second) {
            throw Error(ErrorKind::InvalidSchedule, "switch frames must be strictly ascending");
        }
    }
}

std::uint64_t row_seed(std::uint64_t seed, std::uint64_t row) {
    // splitmix64 of the pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (row + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

std::vector<GeneratedMotion> rollout_batch(const Action2MotionModel& model, const RolloutOptions& options) {
    const ModelConfig& cfg = model.config();
    const int length = options.length;
    const auto batch = static_cast<Index>(options.rows.size());
    if (length < 1) throw Error(ErrorKind::InvalidArgument, "length must be >= 1");
    if (batch == 0) return {};
    const int nj = cfg.joints();
    const int root = cfg.skeleton.root();
    const std::size_t prefix_len = options.rows.front().prefix.size();
    for (const auto& r : options.rows) {
        validate_schedule(r.schedule, length, cfg.action_count());
        if (r.prefix.size() != prefix_len) throw Error(ErrorKind::InvalidArgument, "rows need equal prefix lengths");
        for (const auto& f : r.prefix) {
            if (f.cols() != nj) throw Error(ErrorKind::DimensionMismatch, "prefix frame does not match the skeleton");
        }
    }
    if (static_cast<int>(prefix_len) >= length) {
        throw Error(ErrorKind::InvalidArgument, "prefix must be shorter than the requested length");
    }
    if (options.first_latent &&
        (options.first_latent->rows() != batch || options.first_latent->cols() != cfg.z_dim)) {
        throw Error(ErrorKind::ShapeMismatch, "first latent must be B x z_dim");
    }

    std::vector<std::mt19937_64> rngs;
    std::vector<std::normal_distribution<double>> normals(batch);
    for (const auto& r : options.rows) rngs.emplace_back(r.seed);

    std::vector<GeneratedMotion> out(batch);
    Matrix prev = Matrix::Zero(batch, cfg.pose_dim());
    // Recurrent values between steps.
    Matrix post_h = Matrix::Zero(batch, cfg.hidden);
    Matrix prior_h = Matrix::Zero(batch, cfg.hidden);
    std::vector<Matrix> gen_h(cfg.generator_layers, Matrix::Zero(batch, cfg.hidden));
    Matrix glmi_h = Matrix::Zero(batch, cfg.hidden);

    for (int t = 0; t < length; ++t) {
        const double c = static_cast<double>(t + 1) / length;
        Matrix onehot = Matrix::Zero(batch, cfg.action_count());
        Matrix noise(batch, cfg.z_dim);
        for (Index b = 0; b < batch; ++b) {
            const int a = active_action(options.rows[b].schedule, t);
            onehot(b, a) = 1.0;
            out[b].frame_actions.push_back(a);
            for (int k = 0; k < cfg.z_dim; ++k) noise(b, k) = normals[b](rngs[b]);
        }

        Tape tape(false);
        RecurrentState state;
        state.posterior = tape.constant(post_h);
        state.prior = tape.constant(prior_h);
        for (const auto& g : gen_h) state.generator.push_back(tape.constant(g));
        if (cfg.variant == DecoderVariant::glmi_r) state.glmi = tape.constant(glmi_h);
        const Tensor a = tape.constant(onehot);
        const Tensor prev_t = tape.constant(prev);
        const bool in_prefix = t < static_cast<int>(prefix_len);

        Matrix forced;
        Tensor z;
        Tensor enc;
        if (in_prefix) {
            forced.resize(batch, cfg.pose_dim());
            for (Index b = 0; b < batch; ++b) forced.row(b) = prefix_pose_vector(options.rows[b].prefix, t, root);
            const Gaussian q = model.posterior_step(tape, tape.constant(forced), a, c, state);
            model.prior_step(tape, prev_t, a, c, state, &enc);
            z = ad::reparameterized_sample(q.mu, q.logvar, noise);
        } else {
            const Gaussian p = model.prior_step(tape, prev_t, a, c, state, &enc);
            if (t == 0 && options.first_latent) {
                z = tape.constant(*options.first_latent);
            } else {
                z = ad::reparameterized_sample(p.mu, p.logvar, noise);
            }
        }
        const GeneratorOutput g = model.generator_step(tape, z, prev_t, a, c, state, &enc);

        for (Index b = 0; b < batch; ++b) {
            GeneratedMotion& m = out[b];
            if (in_prefix) {
                m.joints.push_back(options.rows[b].prefix[t]);
            } else {
                m.joints.push_back(data::unflatten_pose(g.pose.joints.value().row(b), nj));
            }
            lie::LiePose lp;
            lp.root_position = m.joints.back().col(root);
            if (!in_prefix && g.pose.lie.valid()) {
                lp.lie.resize(3, cfg.skeleton.bone_count());
                for (int k = 0; k < cfg.skeleton.bone_count(); ++k) {
                    lie::Vec3 w = g.pose.lie.value().block<1, 3>(b, 3 * k).transpose();
                    if (lie::wrap_to_pi(w)) ++m.wrapped;
                    lp.lie.col(k) = w;
                }
            } else {
                const lie::JointPose& f = m.joints.back();
                const lie::LieMotion one = lie::joints_to_lie(cfg.skeleton, std::span<const lie::JointPose>(&f, 1));
                lp.lie = one.frames.front().lie;
            }
            m.motion.frames.push_back(std::move(lp));
        }

        prev = in_prefix ? forced : g.pose_vector.value();
        if (in_prefix) post_h = state.posterior.value();
        prior_h = state.prior.value();
        for (std::size_t l = 0; l < gen_h.size(); ++l) gen_h[l] = state.generator[l].value();
        if (state.glmi.valid()) glmi_h = state.glmi.value();
    }
    for (auto& m : out) {
        m.motion.bone_lengths = cfg.skeleton.bone_lengths();
        m.motion.root_trajectory_mode = lie::RootMode::absolute;
    }
    return out;
}

}  // namespace

std::vector<GeneratedMotion> rollout(const Action2MotionModel& model, const RolloutOptions& options) {
    if (options.rows.size() <= 1) return rollout_batch(model, options);
    if (options.first_latent && options.first_latent->rows() != static_cast<Index>(options.rows.size())) {
        throw Error(ErrorKind::ShapeMismatch, "first latent must be B x z_dim");
    }
    // Rows run one at a time: a batched matrix product rounds differently
    // from a single-row one.
    std::vector<GeneratedMotion> out;
    out.reserve(options.rows.size());
    for (std::size_t i = 0; i < options.rows.size(); ++i) {
        RolloutOptions one;
        one.length = options.length;
        one.rows = {options.rows[i]};
        if (options.first_latent) one.first_latent = Matrix(options.first_latent->row(static_cast<Index>(i)));
        out.push_back(std::move(rollout_batch(model, one).front()));
    }
    return out;
}

GeneratedMotion generate(const Action2MotionModel& model, int action, int length, std::uint64_t seed) {
    RolloutOptions o;
    o.length = length;
    o.rows.push_back({{{action, 0}}, seed, {}});
    return rollout(model, o).front();
}

std::vector<GeneratedMotion> generate_batch(const Action2MotionModel& model, const std::vector<int>& actions,
                                            int length, std::uint64_t seed) {
    RolloutOptions o;
    o.length = length;
    for (std::size_t i = 0; i < actions.size(); ++i) o.rows.push_back({{{actions[i], 0}}, row_seed(seed, i), {}});
    return rollout(model, o);
}

Eigen::RowVectorXd first_latent(const Action2MotionModel& model, int action, int length, std::uint64_t seed) {
    const ModelConfig& cfg = model.config();
    validate_schedule({{action, 0}}, length, cfg.action_count());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix noise(1, cfg.z_dim);
    for (int k = 0; k < cfg.z_dim; ++k) noise(0, k) = normal(rng);
    Tape tape(false);
    RecurrentState state = model.initial_state(tape, 1);
    Matrix onehot = Matrix::Zero(1, cfg.action_count());
    onehot(0, action) = 1.0;
    const Gaussian p = model.prior_step(tape, tape.constant(Matrix::Zero(1, cfg.pose_dim())), tape.constant(onehot),
                                        1.0 / length, state);
    return ad::reparameterized_sample(p.mu, p.logvar, noise).value().row(0);
}

std::vector<GeneratedMotion> interpolate(const Action2MotionModel& model, int action,
                                         const Eigen::RowVectorXd& z_a, const Eigen::RowVectorXd& z_b, int k,
                                         int length, std::uint64_t seed) {
    if (k < 2) throw Error(ErrorKind::InvalidArgument, "interpolation needs k >= 2");
    const int zd = model.config().z_dim;
    if (z_a.size() != zd || z_b.size() != zd) throw Error(ErrorKind::ShapeMismatch, "latents must have z_dim entries");
    RolloutOptions o;
    o.length = length;
    Matrix z(k, zd);
    for (int i = 0; i < k; ++i) {
        const double s = static_cast<double>(i) / (k - 1);
        z.row(i) = (1.0 - s) * z_a + s * z_b;
        o.rows.push_back({{{action, 0}}, seed, {}});
    }
    o.first_latent = z;
    return rollout(model, o);
}

GeneratedMotion transition(const Action2MotionModel& model, const Schedule& schedule, int length,
                           std::uint64_t seed) {
    RolloutOptions o;
    o.length = length;
    o.rows.push_back({schedule, seed, {}});
    return rollout(model, o).front();
}

GeneratedMotion outpaint(const Action2MotionModel& model, const lie::JointSequence& prefix, int action, int length,
                         std::uint64_t seed) {
    if (prefix.empty()) return generate(model, action, length, seed);
    if (static_cast<int>(prefix.size()) >= length) {
        throw Error(ErrorKind::InvalidArgument, "prefix of " + std::to_string(prefix.size()) +
                                                    " frames is not shorter than length " + std::to_string(length));
    }
    const int root = model.config().skeleton.root();
    const Eigen::Vector3d origin = prefix.front().col(root);
    RolloutOptions o;
    o.length = length;
    o.rows.push_back({{{action, 0}}, seed, data::normalize_clip(prefix, root)});
    GeneratedMotion m = rollout(model, o).front();
    for (std::size_t t = 0; t < m.joints.size(); ++t) {
        if (t < prefix.size()) {
            m.joints[t] = prefix[t];
        } else {
            m.joints[t].colwise() += origin;
        }
        m.motion.frames[t].root_position = m.joints[t].col(root);
    }
    return m;
}

}  // namespace a2m::tvae
