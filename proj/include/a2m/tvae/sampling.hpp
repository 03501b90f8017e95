#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "a2m/lie/kinematics.hpp"
#include "a2m/tvae/model.hpp"

namespace a2m::tvae {

// (action index, first frame it is active on). The first entry must start
// at frame 0 and frames must be strictly ascending.
using Schedule = std::vector<std::pair<int, int>>;

struct GeneratedMotion {
    lie::JointSequence joints;
    // Reported Lie vectors are wrapped into |w| <= pi; root positions are
    // the absolute root joints.
    lie::LieMotion motion;
    std::vector<int> frame_actions;
    // Number of emitted Lie vectors that needed wrapping.
    int wrapped = 0;
};

struct RolloutRow {
    Schedule schedule;
    std::uint64_t seed = 0;
    // Teacher-forced opening frames in the model's coordinates.
    lie::JointSequence prefix;
};

struct RolloutOptions {
    int length = 16;
    std::vector<RolloutRow> rows;
    // Replaces the prior sample at the first step (B x z_dim). The noise for
    // that step is still drawn so later steps see the same random stream.
    std::optional<Matrix> first_latent;
};

// Every row draws its own noise from a generator seeded with its seed and
// is rolled out on its own, so a row's result is bit-identical to running
// it alone.
std::vector<GeneratedMotion> rollout(const Action2MotionModel& model, const RolloutOptions& options);

GeneratedMotion generate(const Action2MotionModel& model, int action, int length, std::uint64_t seed);

// Seed of row i of a batch generated from `seed`.
std::uint64_t row_seed(std::uint64_t seed, std::uint64_t row);

// One motion per entry of `actions`, row i seeded with row_seed(seed, i).
std::vector<GeneratedMotion> generate_batch(const Action2MotionModel& model, const std::vector<int>& actions,
                                            int length, std::uint64_t seed);

// First-step prior sample that generate(model, action, length, seed) uses.
Eigen::RowVectorXd first_latent(const Action2MotionModel& model, int action, int length, std::uint64_t seed);

// k motions whose first latents run linearly from z_a to z_b; later steps
// use the noise stream of `seed`.
std::vector<GeneratedMotion> interpolate(const Action2MotionModel& model, int action,
                                         const Eigen::RowVectorXd& z_a, const Eigen::RowVectorXd& z_b, int k,
                                         int length, std::uint64_t seed);

GeneratedMotion transition(const Action2MotionModel& model, const Schedule& schedule, int length,
                           std::uint64_t seed);

// The prefix is copied to the output unchanged; the continuation starts
// from the recurrent state reached by feeding the prefix.
GeneratedMotion outpaint(const Action2MotionModel& model, const lie::JointSequence& prefix, int action,
                         int length, std::uint64_t seed);

void validate_schedule(const Schedule& schedule, int length, int action_count);

}  // namespace a2m::tvae
