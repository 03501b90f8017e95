#pragma once

#include <functional>

#include "a2m/autodiff/nn.hpp"
#include "a2m/lie/skeleton.hpp"

namespace a2m::tvae {

using ad::Tape;
using ad::Tensor;
using ad::Index;

// Batched forward kinematics on a tape: `lie` is B x 3N (bone-major), the
// root is pinned at the origin with identity orientation and the result is
// B x 3J (joint-major). The backward rule is analytic.
Tensor fk_tensor(Tape& tape, const Tensor& lie, const lie::KinematicTree& tree);

struct DecodedPose {
    Tensor joints;    // B x 3J, absolute
    Tensor velocity;  // B x 3, root displacement from the previous frame
    Tensor offset;    // B x 3J, root-pinned pose (lie and glmi variants)
    Tensor lie;       // B x 3N, raw decoder Lie block (lie and glmi variants)
    Tensor h_o;       // B x h_o_dim (glmi variants)
};

// Decoder output is the absolute joints, 3J wide.
DecodedPose decode_pose_plain(Tape& tape, const Tensor& decoder_out, const Tensor& prev_root, int joints,
                              int root = 0);

// Decoder output is [Lie block 3N | root position 3].
DecodedPose decode_pose_lie(Tape& tape, const Tensor& decoder_out, const Tensor& prev_root,
                            const lie::KinematicTree& tree);

// Estimates the root displacement from concat(offset_t, offset_{t-1}, h_o).
using VelocityModel = std::function<Tensor(const Tensor& features)>;

// Decoder output is [Lie block 3N | h_o]. The pose is
//   p_t = FK(lie) + J_{0,t-1} + V_t,  V_t = velocity(FK(lie), p^o_{t-1}, h_o).
DecodedPose decode_pose_glmi(Tape& tape, const Tensor& decoder_out, const Tensor& prev_offset,
                             const Tensor& prev_root, const lie::KinematicTree& tree,
                             const VelocityModel& velocity);

}  // namespace a2m::tvae
