#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2m/autodiff/nn.hpp"
#include "a2m/lie/skeleton.hpp"
#include "a2m/tvae/pose_decoding.hpp"

namespace a2m::tvae {

using ad::Matrix;
using ad::Parameter;

enum class DecoderVariant { plain, lie, glmi_m, glmi_r };

std::string to_string(DecoderVariant v);
DecoderVariant parse_variant(const std::string& s);
bool is_glmi(DecoderVariant v);

struct ModelConfig {
    lie::KinematicTree skeleton;
    std::vector<std::string> actions;
    DecoderVariant variant = DecoderVariant::glmi_m;
    int hidden = 128;
    int z_dim = 30;
    int h_o_dim = 20;
    int generator_layers = 2;
    double logvar_bound = 10.0;

    int joints() const { return skeleton.joint_count(); }
    // Absolute joints followed by the root velocity.
    int pose_dim() const { return 3 * joints() + 3; }
    int action_count() const { return static_cast<int>(actions.size()); }
    int decoder_out_dim() const;

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

struct Gaussian {
    Tensor mu;
    Tensor logvar;
};

// Recurrent state of one rollout; tensors live on the tape of the step that
// produced them.
struct RecurrentState {
    Tensor posterior;
    Tensor prior;
    std::vector<Tensor> generator;
    Tensor glmi;  // glmi_r backbone only

    // Copies the values onto `tape` as constants.
    RecurrentState rebind(Tape& tape) const;
};

struct GeneratorOutput {
    DecodedPose pose;
    // Network input for the next step: joints followed by velocity.
    Tensor pose_vector;
};

class Action2MotionModel {
public:
    Action2MotionModel(ModelConfig config, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;

    RecurrentState initial_state(Tape& tape, Index batch) const;

    // Shared encoder E_n(p, a, c).
    Tensor encode(Tape& tape, const Tensor& pose, const Tensor& onehot, double counter) const;

    // q(z_t | p_{1:t}): fed with the current pose.
    Gaussian posterior_step(Tape& tape, const Tensor& pose, const Tensor& onehot, double counter,
                            RecurrentState& state) const;
    // p(z_t | p_{1:t-1}): fed with the previous pose (zero at t = 1). When
    // `encoding` is non-null it must be encode(prev_pose, onehot, counter).
    Gaussian prior_step(Tape& tape, const Tensor& prev_pose, const Tensor& onehot, double counter,
                        RecurrentState& state, Tensor* encoding = nullptr) const;
    // p(p_t | z_{1:t}, p_{1:t-1}) followed by the configured pose decoder.
    GeneratorOutput generator_step(Tape& tape, const Tensor& z, const Tensor& prev_pose, const Tensor& onehot,
                                   double counter, RecurrentState& state,
                                   const Tensor* prev_encoding = nullptr) const;

private:
    Gaussian head(Tape& tape, const ad::Linear& layer, const Tensor& h) const;
    Tensor velocity(Tape& tape, const Tensor& features, RecurrentState& state) const;

    ModelConfig cfg_;
    ad::Linear enc1_, enc2_;
    ad::GruParams post_gru_, prior_gru_;
    ad::Linear post_head_, prior_head_;
    ad::GruStack gen_gru_;
    ad::Linear dec1_, dec2_;
    // glmi_m: mlp1 -> tanh -> mlp2; glmi_r: cell -> mlp2.
    ad::Linear mlp1_;
    ad::GruParams vel_cell_;
    ad::Linear mlp2_;
};

// Splits a B x pose_dim network pose into the joint block and the root
// location (first joint).
Tensor pose_joints(const Tensor& pose_vector, int joints);

}  // namespace a2m::tvae
