#include "a2m/datasets/synthesize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "a2m/error.hpp"

namespace a2m::data {

namespace {

using Vec3 = Eigen::Vector3d;
using std::numbers::pi;

// toy8 joint indices and segment lengths.
constexpr int kPelvis = 0, kLKnee = 1, kLFoot = 2, kRKnee = 3, kRFoot = 4, kNeck = 5, kLHand = 6, kRHand = 7;
constexpr double kLeg = 0.45;
constexpr double kTrunk = 0.55;
constexpr double kArm = 0.60;
constexpr double kHipSplay = 0.12;
constexpr double kArmSplay = 0.30;

// Unit limb direction: hanging down, tilted sideways by `splay` towards
// `side` (+1 left, -1 right) and swung forward by `swing`.
Vec3 limb(double side, double splay, double swing) {
    return {side * std::sin(splay), -std::cos(splay) * std::cos(swing), std::cos(splay) * std::sin(swing)};
}

struct Body {
    // Per-leg thigh swing, shin swing and abduction.
    double thigh[2] = {0, 0}, shin[2] = {0, 0}, splay[2] = {kHipSplay, kHipSplay};
    double arm_swing[2] = {0, 0};
    double arm_splay[2] = {kArmSplay, kArmSplay};
    double lean = 0.0;
};

// Joint offsets from the pelvis.
lie::JointPose pose_offsets(const Body& b) {
    lie::JointPose p = lie::JointPose::Zero(3, 8);
    const double side[2] = {1.0, -1.0};
    const int knee[2] = {kLKnee, kRKnee}, foot[2] = {kLFoot, kRFoot}, hand[2] = {kLHand, kRHand};
    for (int s = 0; s < 2; ++s) {
        p.col(knee[s]) = kLeg * limb(side[s], b.splay[s], b.thigh[s]);
        p.col(foot[s]) = p.col(knee[s]) + kLeg * limb(side[s], b.splay[s], b.shin[s]);
    }
    p.col(kNeck) = kTrunk * Vec3(0.0, std::cos(b.lean), std::sin(b.lean));
    for (int s = 0; s < 2; ++s) {
        p.col(hand[s]) = p.col(kNeck) + kArm * limb(side[s], b.arm_splay[s], b.arm_swing[s]);
    }
    return p;
}

// Places the pelvis so the lowest foot touches y = 0.
void ground(lie::JointPose& offsets, const Vec3& pelvis_xz) {
    const double lowest = std::min(offsets(1, kLFoot), offsets(1, kRFoot));
    offsets.colwise() += Vec3(pelvis_xz.x(), -lowest, pelvis_xz.z());
}

double jitter(double sigma, std::mt19937_64& rng) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

double uniform(double lo, double hi, std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

lie::JointPose standing_pose() {
    lie::JointPose p = pose_offsets(Body{});
    ground(p, Vec3::Zero());
    return p;
}

std::vector<std::string> synthetic_action_names() { return {"walk", "wave", "squat"}; }

lie::JointSequence walk_clip(const WalkParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng) {
    lie::JointSequence out;
    Vec3 pelvis = Vec3::Zero();
    lie::JointPose prev;
    for (int t = 0; t < frames; ++t) {
        const double phi = 2.0 * pi * p.frequency * t / fps + p.phase;
        Body b;
        b.lean = 0.05;
        for (int s = 0; s < 2; ++s) {
            // Left leg leads with sin(phi); it swings forward while cos(phi) > 0.
            const double sgn = s == 0 ? 1.0 : -1.0;
            const double swinging = std::max(0.0, sgn * std::cos(phi));
            b.thigh[s] = sgn * p.amplitude * std::sin(phi) + jitter(angle_noise, rng);
            const double early = std::max(0.0, -sgn * std::sin(phi));
            b.shin[s] = b.thigh[s] - 0.6 * swinging * early + jitter(angle_noise, rng);
            b.splay[s] = kHipSplay + 0.15 * swinging + jitter(angle_noise, rng);
            b.arm_swing[s] = -0.8 * sgn * p.amplitude * std::sin(phi) + jitter(angle_noise, rng);
        }
        lie::JointPose cur = pose_offsets(b);
        if (t > 0) {
            // Keep the stance (lower) foot fixed on the ground.
            const int stance = cur(1, kLFoot) <= cur(1, kRFoot) ? kLFoot : kRFoot;
            const Vec3 slide = cur.col(stance) - prev.col(stance);
            pelvis.x() -= slide.x();
            pelvis.z() -= slide.z();
        }
        prev = cur;
        ground(cur, pelvis);
        out.push_back(std::move(cur));
    }
    return out;
}

lie::JointSequence wave_clip(const WaveParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng) {
    lie::JointSequence out;
    for (int t = 0; t < frames; ++t) {
        const double phi = 2.0 * pi * p.frequency * t / fps + p.phase;
        Body b;
        for (int s = 0; s < 2; ++s) {
            b.thigh[s] = jitter(angle_noise, rng);
            b.shin[s] = b.thigh[s];
            b.arm_swing[s] = jitter(angle_noise, rng);
        }
        b.arm_swing[1] = 0.0;
        b.arm_splay[1] = p.center + p.amplitude * std::sin(phi) + jitter(angle_noise, rng);
        lie::JointPose cur = pose_offsets(b);
        ground(cur, Vec3::Zero());
        out.push_back(std::move(cur));
    }
    return out;
}

lie::JointSequence squat_clip(const SquatParams& p, int frames, double fps, double angle_noise, std::mt19937_64& rng) {
    lie::JointSequence out;
    for (int t = 0; t < frames; ++t) {
        const double phi = 2.0 * pi * p.frequency * t / fps + p.phase;
        const double d = p.depth * 0.5 * (1.0 - std::cos(phi));
        Body b;
        b.lean = 0.6 * d + jitter(angle_noise, rng);
        for (int s = 0; s < 2; ++s) {
            b.thigh[s] = d + jitter(angle_noise, rng);
            b.shin[s] = -d + jitter(angle_noise, rng);
            b.arm_swing[s] = 1.2 * d + jitter(angle_noise, rng);
        }
        lie::JointPose cur = pose_offsets(b);
        ground(cur, Vec3::Zero());
        out.push_back(std::move(cur));
    }
    return out;
}

double right_arm_elevation(const lie::JointPose& pose) {
    const Vec3 d = (pose.col(kRHand) - pose.col(kNeck)).normalized();
    return std::acos(std::clamp(-d.y(), -1.0, 1.0));
}

MotionDataset synthesize(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.clips_per_action < 1 || spec.frames < 1 || spec.subjects < 1 || !(spec.fps > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "synthesis sizes must be positive");
    }
    const auto known = synthetic_action_names();
    for (const auto& a : spec.actions) {
        if (std::find(known.begin(), known.end(), a) == known.end()) {
            throw Error(ErrorKind::UnknownAction, "no procedural generator for action '" + a + "'");
        }
    }
    std::mt19937_64 rng(seed);
    MotionDataset ds;
    ds.skeleton = lie::preset_skeleton("toy8");
    ds.actions = spec.actions;

    // Per-subject style: a multiplier on amplitudes and one on tempo.
    std::vector<double> size_style, tempo_style;
    for (int s = 0; s < spec.subjects; ++s) {
        size_style.push_back(uniform(0.9, 1.1, rng));
        tempo_style.push_back(uniform(0.9, 1.1, rng));
    }

    for (int a = 0; a < static_cast<int>(spec.actions.size()); ++a) {
        const std::string& action = spec.actions[a];
        for (int i = 0; i < spec.clips_per_action; ++i) {
            const int subject = i % spec.subjects;
            const double u = size_style[subject];
            const double v = tempo_style[subject];
            MotionClip clip;
            clip.label = a;
            clip.fps = spec.fps;
            clip.subject = "s" + std::to_string(subject);
            clip.name = action + "_" + std::to_string(i);
            if (action == "walk") {
                WalkParams p{u * uniform(0.2, 0.55, rng), v * uniform(0.7, 1.1, rng), uniform(0.0, 2.0 * pi, rng)};
                clip.frames = walk_clip(p, spec.frames, spec.fps, spec.angle_noise, rng);
                clip.meta["amplitude"] = p.amplitude;
            } else if (action == "wave") {
                WaveParams p{uniform(1.8, 2.2, rng), u * uniform(0.3, 0.5, rng), v * uniform(1.0, 1.6, rng),
                             uniform(0.0, 2.0 * pi, rng)};
                clip.frames = wave_clip(p, spec.frames, spec.fps, spec.angle_noise, rng);
            } else {
                SquatParams p{u * uniform(0.5, 1.0, rng), v * uniform(0.5, 0.8, rng), uniform(-0.5, 0.5, rng)};
                clip.frames = squat_clip(p, spec.frames, spec.fps, spec.angle_noise, rng);
            }
            ds.clips.push_back(std::move(clip));
        }
    }
    return ds;
}

}  // namespace a2m::data
