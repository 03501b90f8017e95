#include "a2m/lie/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "a2m/error.hpp"

namespace a2m::lie {

Mat3 hat(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return m;
}

Vec3 vee(const Mat3& s) {
    return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

Rotation Rotation::from_matrix(const Mat3& m) {
    const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
    const double det = m.determinant();
    if (!(ortho < 1e-9) || !(std::abs(det - 1.0) < 1e-9)) {
        std::ostringstream os;
        os << "matrix is not a rotation (|R^T R - I| = " << ortho << ", det = " << det << ")";
        throw Error(ErrorKind::InvalidArgument, os.str());
    }
    return Rotation(m);
}

double Rotation::angle() const {
    const double s = 0.5 * vee(m_ - m_.transpose()).norm();
    const double c = 0.5 * (m_.trace() - 1.0);
    return std::atan2(s, c);
}

namespace {

// Coefficients of W and W^2 in the Rodrigues formula.
void rodrigues_coefficients(double theta, double& a, double& b) {
    if (theta < kSmallAngle) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / (theta * theta);
    }
}

}  // namespace

Rotation exp_so3(const Vec3& w) {
    const double theta = w.norm();
    double a = 0.0;
    double b = 0.0;
    rodrigues_coefficients(theta, a, b);
    const Mat3 W = hat(w);
    return Rotation(Mat3::Identity() + a * W + b * W * W);
}

std::array<Mat3, 3> exp_so3_derivatives(const Vec3& w) {
    const double theta = w.norm();
    double a = 0.0;
    double b = 0.0;
    rodrigues_coefficients(theta, a, b);
    // da/dtheta / theta and db/dtheta / theta; both smooth at theta = 0.
    double da = 0.0;
    double db = 0.0;
    if (theta < 1e-3) {
        const double t2 = theta * theta;
        da = -1.0 / 3.0 + t2 / 30.0;
        db = -1.0 / 12.0 + t2 / 180.0;
    } else {
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        const double t2 = theta * theta;
        da = (theta * c - s) / (t2 * theta);
        db = (theta * s - 2.0 * (1.0 - c)) / (t2 * t2);
    }
    const Mat3 W = hat(w);
    const Mat3 W2 = W * W;
    std::array<Mat3, 3> d;
    for (int k = 0; k < 3; ++k) {
        const Mat3 E = hat(Vec3::Unit(k));
        d[k] = da * w[k] * W + a * E + db * w[k] * W2 + b * (E * W + W * E);
    }
    return d;
}

LogResult log_so3(const Rotation& r) {
    const Mat3& m = r.matrix();
    const Vec3 axis_sin = 0.5 * vee(m - m.transpose());  // sin(theta) * axis
    const double s = axis_sin.norm();
    const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
    const double theta = std::atan2(s, c);

    LogResult out;
    if (theta < kSmallAngle) {
        out.w = (1.0 + theta * theta / 6.0) * axis_sin;
        return out;
    }
    if (std::numbers::pi - theta > kNearPi) {
        out.w = (theta / s) * axis_sin;
        return out;
    }

    // Near pi: R + R^T = 2 cos(t) I + 2 (1 - cos(t)) a a^T.
    const Mat3 B = (0.5 * (m + m.transpose()) - c * Mat3::Identity()) / (1.0 - c);
    int k = 0;
    B.diagonal().maxCoeff(&k);
    Vec3 axis = B.col(k) / std::sqrt(std::max(B(k, k), 1e-300));
    axis.normalize();
    if (axis.dot(axis_sin) < 0.0) {
        axis = -axis;
    }
    out.w = theta * axis;
    out.low_precision = true;
    return out;
}

Vec3 log_so3_strict(const Rotation& r) {
    const LogResult res = log_so3(r);
    if (res.low_precision) {
        throw Error(ErrorKind::AngleNearPi, "rotation angle within 1e-3 of pi");
    }
    return res.w;
}

bool wrap_to_pi(Vec3& w) {
    const double theta = w.norm();
    if (theta <= std::numbers::pi) {
        return false;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::fmod(theta, two_pi);
    if (wrapped > std::numbers::pi) {
        wrapped -= two_pi;
    }
    w *= wrapped / theta;
    return true;
}

Vec3 minimal_rotation(const Vec3& from, const Vec3& to) {
    const Vec3 cross = from.cross(to);
    const double s = cross.norm();
    const double c = std::clamp(from.dot(to), -1.0, 1.0);
    const double angle = std::atan2(s, c);
    if (s > 1e-12) {
        return angle * (cross / s);
    }
    if (c > 0.0) {
        return Vec3::Zero();
    }
    // Anti-parallel: any axis perpendicular to `from` works; take the one
    // closest to z, falling back to y when `from` is along z.
    Vec3 axis = Vec3::UnitZ() - from.z() * from;
    if (axis.norm() < 1e-6) {
        axis = Vec3::UnitY() - from.y() * from;
    }
    axis.normalize();
    return std::numbers::pi * axis;
}

}  // namespace a2m::lie
