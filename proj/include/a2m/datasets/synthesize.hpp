#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "a2m/datasets/dataset.hpp"

namespace a2m::data {

// Procedural actions on the "toy8" skeleton (y up, facing +z, left = +x).
//   walk  - legs swing in antiphase with amplitude A, the swing leg lifts
//           by abduction and an early-swing knee bend, the root advances so
//           the lower (stance) foot never slides; speed grows with A.
//   wave  - right arm elevation e(t) = e0 + E sin(2 pi f t + phase).
//   squat - both thighs flex by d(t), shins counter-rotate and the root
//           drops so the feet stay planted.
struct SynthSpec {
    std::vector<std::string> actions = {"walk", "wave", "squat"};
    int clips_per_action = 100;
    int frames = 16;
    double fps = 12.0;
    int subjects = 10;
    // Standard deviation (radians) of per-frame jitter on every driving angle.
    double angle_noise = 0.01;
};

std::vector<std::string> synthetic_action_names();

MotionDataset synthesize(const SynthSpec& spec, std::uint64_t seed);

struct WalkParams {
    double amplitude = 0.4;  // thigh swing, radians
    double frequency = 0.9;  // gait cycles per second
    double phase = 0.0;
};
struct WaveParams {
    double center = 2.0;      // mean elevation of the right arm from hanging, radians
    double amplitude = 0.4;
    double frequency = 1.2;
    double phase = 0.0;
};
struct SquatParams {
    double depth = 0.8;  // peak thigh flexion, radians
    double frequency = 0.6;
    double phase = 0.0;
};

// Neutral toy8 pose: limbs hanging, feet on y = 0, pelvis above the origin.
lie::JointPose standing_pose();

// Single clips; `rng` is only used when angle_noise > 0.
lie::JointSequence walk_clip(const WalkParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng);
lie::JointSequence wave_clip(const WaveParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng);
lie::JointSequence squat_clip(const SquatParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng);

// Elevation angle of the right arm of a toy8 pose (angle between the
// neck->hand direction and straight down).
double right_arm_elevation(const lie::JointPose& pose);

}  // namespace a2m::data
