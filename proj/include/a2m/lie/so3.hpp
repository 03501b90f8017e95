#pragma once

#include <array>

#include <Eigen/Core>

namespace a2m::lie {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Below this norm the exp/log coefficients switch to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;
// log_so3 flags results whose rotation angle is this close to pi.
inline constexpr double kNearPi = 1e-3;

// so(3) element [w]_x, satisfying hat(w) * v == w.cross(v).
Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& skew);

// Element of SO(3). Construction from an arbitrary matrix validates
// orthogonality and det = +1 to 1e-9.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}

    static Rotation from_matrix(const Mat3& m);
    static Rotation identity() { return Rotation(); }

    const Mat3& matrix() const { return m_; }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
    Rotation inverse() const { return Rotation(m_.transpose()); }

    // Rotation angle in [0, pi].
    double angle() const;

private:
    explicit Rotation(const Mat3& m) : m_(m) {}
    friend Rotation exp_so3(const Vec3& w);

    Mat3 m_;
};

// Rodrigues formula R = I + sin(t)/t W + (1 - cos(t))/t^2 W^2, t = |w|.
Rotation exp_so3(const Vec3& w);

// Partial derivatives dR/dw_k of exp_so3, k = 0..2.
std::array<Mat3, 3> exp_so3_derivatives(const Vec3& w);

struct LogResult {
    Vec3 w = Vec3::Zero();
    // Set when the angle is within kNearPi of pi; the axis then comes from
    // the symmetric part of R and its sign is only weakly determined.
    bool low_precision = false;
};

// Inverse of exp_so3 with |w| in [0, pi].
LogResult log_so3(const Rotation& r);

// Same as log_so3, but throws Error(AngleNearPi) instead of returning a
// low-precision result.
Vec3 log_so3_strict(const Rotation& r);

// Rotation-preserving wrap of an axis-angle vector into the ball |w| <= pi.
// Returns true when the vector had to be changed.
bool wrap_to_pi(Vec3& w);

// Minimal rotation taking unit vector `from` onto unit vector `to` (axis
// from their cross product, angle from their dot product). Anti-parallel
// inputs rotate by pi about an axis perpendicular to `from`.
Vec3 minimal_rotation(const Vec3& from, const Vec3& to);

}  // namespace a2m::lie
