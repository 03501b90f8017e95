#include "a2m/tvae/model.hpp"

#include "a2m/error.hpp"

namespace a2m::tvae {

using nlohmann::json;

std::string to_string(DecoderVariant v) {
    switch (v) {
        case DecoderVariant::plain: return "plain";
        case DecoderVariant::lie: return "lie";
        case DecoderVariant::glmi_m: return "glmi_m";
        case DecoderVariant::glmi_r: return "glmi_r";
    }
    return "plain";
}

DecoderVariant parse_variant(const std::string& s) {
    if (s == "plain") return DecoderVariant::plain;
    if (s == "lie") return DecoderVariant::lie;
    if (s == "glmi_m" || s == "glmi-m") return DecoderVariant::glmi_m;
    if (s == "glmi_r" || s == "glmi-r") return DecoderVariant::glmi_r;
    throw Error(ErrorKind::InvalidArgument, "unknown decoder variant '" + s + "'");
}

bool is_glmi(DecoderVariant v) { return v == DecoderVariant::glmi_m || v == DecoderVariant::glmi_r; }

int ModelConfig::decoder_out_dim() const {
    const int nb = skeleton.bone_count();
    switch (variant) {
        case DecoderVariant::plain: return 3 * joints();
        case DecoderVariant::lie: return 3 * nb + 3;
        default: return 3 * nb + h_o_dim;
    }
}

json ModelConfig::to_json() const {
    return {{"skeleton", skeleton.to_json()},
            {"skeleton_hash", skeleton.hash()},
            {"actions", actions},
            {"variant", to_string(variant)},
            {"hidden", hidden},
            {"z_dim", z_dim},
            {"h_o_dim", h_o_dim},
            {"generator_layers", generator_layers},
            {"logvar_bound", logvar_bound}};
}

ModelConfig ModelConfig::from_json(const json& j) {
    ModelConfig c;
    try {
        c.skeleton = lie::KinematicTree::from_json(j.at("skeleton"));
        if (j.contains("skeleton_hash") && j.at("skeleton_hash").get<std::string>() != c.skeleton.hash()) {
            throw Error(ErrorKind::SchemaViolation, "model skeleton_hash does not match its skeleton");
        }
        c.actions = j.at("actions").get<std::vector<std::string>>();
        c.variant = parse_variant(j.at("variant").get<std::string>());
        c.hidden = j.at("hidden").get<int>();
        c.z_dim = j.at("z_dim").get<int>();
        c.h_o_dim = j.at("h_o_dim").get<int>();
        c.generator_layers = j.at("generator_layers").get<int>();
        c.logvar_bound = j.value("logvar_bound", 10.0);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("model config: ") + e.what());
    }
    return c;
}

RecurrentState RecurrentState::rebind(Tape& tape) const {
    RecurrentState s;
    s.posterior = tape.constant(posterior.value());
    s.prior = tape.constant(prior.value());
    for (const auto& g : generator) s.generator.push_back(tape.constant(g.value()));
    if (glmi.valid()) s.glmi = tape.constant(glmi.value());
    return s;
}

Action2MotionModel::Action2MotionModel(ModelConfig config, std::uint64_t seed) : cfg_(std::move(config)) {
    if (cfg_.actions.empty()) throw Error(ErrorKind::InvalidArgument, "model needs at least one action");
    ad::Rng rng(seed);
    const Index h = cfg_.hidden;
    const Index enc_in = cfg_.pose_dim() + cfg_.action_count() + 1;
    enc1_ = ad::Linear("encoder.0", enc_in, h, rng);
    enc2_ = ad::Linear("encoder.1", h, h, rng);
    post_gru_ = ad::GruParams("posterior.gru", h, h, rng);
    post_head_ = ad::Linear("posterior.head", h, 2 * cfg_.z_dim, rng);
    prior_gru_ = ad::GruParams("prior.gru", h, h, rng);
    prior_head_ = ad::Linear("prior.head", h, 2 * cfg_.z_dim, rng);
    gen_gru_ = ad::GruStack("generator.gru", h + cfg_.z_dim, h, cfg_.generator_layers, rng);
    dec1_ = ad::Linear("decoder.0", h, h, rng);
    dec2_ = ad::Linear("decoder.1", h, cfg_.decoder_out_dim(), rng);
    const Index vel_in = 6 * cfg_.joints() + cfg_.h_o_dim;
    if (cfg_.variant == DecoderVariant::glmi_m) {
        mlp1_ = ad::Linear("velocity.0", vel_in, h, rng);
        mlp2_ = ad::Linear("velocity.1", h, 3, rng);
    } else if (cfg_.variant == DecoderVariant::glmi_r) {
        vel_cell_ = ad::GruParams("velocity.gru", vel_in, h, rng);
        mlp2_ = ad::Linear("velocity.1", h, 3, rng);
    }
}

std::vector<Parameter*> Action2MotionModel::parameters() {
    std::vector<Parameter*> out;
    auto add = [&out](std::vector<Parameter*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
    add(enc1_.parameters());
    add(enc2_.parameters());
    add(post_gru_.parameters());
    add(post_head_.parameters());
    add(prior_gru_.parameters());
    add(prior_head_.parameters());
    add(gen_gru_.parameters());
    add(dec1_.parameters());
    add(dec2_.parameters());
    if (cfg_.variant == DecoderVariant::glmi_m) add(mlp1_.parameters());
    if (cfg_.variant == DecoderVariant::glmi_r) add(vel_cell_.parameters());
    if (is_glmi(cfg_.variant)) add(mlp2_.parameters());
    return out;
}

std::vector<const Parameter*> Action2MotionModel::parameters() const {
    auto ps = const_cast<Action2MotionModel*>(this)->parameters();
    return {ps.begin(), ps.end()};
}

RecurrentState Action2MotionModel::initial_state(Tape& tape, Index batch) const {
    RecurrentState s;
    s.posterior = tape.constant(Matrix::Zero(batch, cfg_.hidden));
    s.prior = tape.constant(Matrix::Zero(batch, cfg_.hidden));
    s.generator = gen_gru_.zero_state(tape, batch);
    if (cfg_.variant == DecoderVariant::glmi_r) s.glmi = tape.constant(Matrix::Zero(batch, cfg_.hidden));
    return s;
}

Tensor Action2MotionModel::encode(Tape& tape, const Tensor& pose, const Tensor& onehot, double counter) const {
    if (pose.cols() != cfg_.pose_dim() || onehot.cols() != cfg_.action_count() || pose.rows() != onehot.rows()) {
        throw Error(ErrorKind::ShapeMismatch, "encoder input: pose " + std::to_string(pose.cols()) +
                                                  " (expected " + std::to_string(cfg_.pose_dim()) + "), action " +
                                                  std::to_string(onehot.cols()) + " (expected " +
                                                  std::to_string(cfg_.action_count()) + ")");
    }
    const Tensor c = tape.constant(Matrix::Constant(pose.rows(), 1, counter));
    return enc2_(tape, ad::tanh(enc1_(tape, ad::concat({pose, onehot, c}))));
}

Gaussian Action2MotionModel::head(Tape& tape, const ad::Linear& layer, const Tensor& h) const {
    const Tensor out = layer(tape, h);
    Gaussian g;
    g.mu = ad::slice(out, 0, cfg_.z_dim);
    g.logvar = ad::clamp(ad::slice(out, cfg_.z_dim, cfg_.z_dim), -cfg_.logvar_bound, cfg_.logvar_bound);
    return g;
}

Gaussian Action2MotionModel::posterior_step(Tape& tape, const Tensor& pose, const Tensor& onehot, double counter,
                                            RecurrentState& state) const {
    const Tensor e = encode(tape, pose, onehot, counter);
    state.posterior = ad::gru_cell(tape, e, state.posterior, post_gru_);
    return head(tape, post_head_, state.posterior);
}

Gaussian Action2MotionModel::prior_step(Tape& tape, const Tensor& prev_pose, const Tensor& onehot, double counter,
                                        RecurrentState& state, Tensor* encoding) const {
    const Tensor e = encode(tape, prev_pose, onehot, counter);
    if (encoding) *encoding = e;
    state.prior = ad::gru_cell(tape, e, state.prior, prior_gru_);
    return head(tape, prior_head_, state.prior);
}

Tensor Action2MotionModel::velocity(Tape& tape, const Tensor& features, RecurrentState& state) const {
    if (cfg_.variant == DecoderVariant::glmi_m) return mlp2_(tape, ad::tanh(mlp1_(tape, features)));
    state.glmi = ad::gru_cell(tape, features, state.glmi, vel_cell_);
    return mlp2_(tape, state.glmi);
}

Tensor pose_joints(const Tensor& pose_vector, int joints) { return ad::slice(pose_vector, 0, 3 * joints); }

GeneratorOutput Action2MotionModel::generator_step(Tape& tape, const Tensor& z, const Tensor& prev_pose,
                                                   const Tensor& onehot, double counter, RecurrentState& state,
                                                   const Tensor* prev_encoding) const {
    if (z.cols() != cfg_.z_dim || z.rows() != prev_pose.rows()) {
        throw Error(ErrorKind::ShapeMismatch, "generator: z must be B x " + std::to_string(cfg_.z_dim));
    }
    const Tensor e = prev_encoding ? *prev_encoding : encode(tape, prev_pose, onehot, counter);
    const Tensor h = gen_gru_.step(tape, ad::concat({e, z}), state.generator);
    const Tensor out = dec2_(tape, ad::tanh(dec1_(tape, h)));

    const int nj = cfg_.joints();
    const Tensor prev_joints = pose_joints(prev_pose, nj);
    const Tensor prev_root = ad::slice(prev_joints, 3 * cfg_.skeleton.root(), 3);

    GeneratorOutput g;
    switch (cfg_.variant) {
        case DecoderVariant::plain:
            g.pose = decode_pose_plain(tape, out, prev_root, nj, cfg_.skeleton.root());
            break;
        case DecoderVariant::lie:
            g.pose = decode_pose_lie(tape, out, prev_root, cfg_.skeleton);
            break;
        default: {
            const Tensor prev_offset = prev_joints - ad::tile_cols(prev_root, nj);
            g.pose = decode_pose_glmi(tape, out, prev_offset, prev_root, cfg_.skeleton,
                                      [&](const Tensor& f) { return velocity(tape, f, state); });
        }
    }
    g.pose_vector = ad::concat({g.pose.joints, g.pose.velocity});
    return g;
}

}  // namespace a2m::tvae
