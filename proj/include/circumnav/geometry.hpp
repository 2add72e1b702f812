#pragma once

#include <array>
#include <cmath>

#include "circumnav/errors.hpp"

namespace circumnav {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Hard guard radius around the target's vertical axis (meters). A robot this
// close to the axis indicates a broken scenario, so it is an error rather
// than something to regularize away.
inline constexpr double kAxisEpsilon = 1e-9;

/// Reduce an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r == 0.0) r = 0.0;  // normalize -0
    return r;
}

/// Reduce an angle to (-pi, pi].
inline double wrap_pi(double a) {
    double r = wrap_two_pi(a);
    return r > kPi ? r - kTwoPi : r;
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    bool operator==(const Vec3&) const = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// 3x3 matrix, row major. Enough linear algebra for the frame transforms;
// the n x n work lives in matrix.hpp.
struct Mat3 {
    std::array<double, 9> a{};  // zero

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }

    double& operator()(int r, int c) { return a[3 * r + c]; }
    double operator()(int r, int c) const { return a[3 * r + c]; }

    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    }
};

/// Transposed multiply: R^T * v, without forming the transpose.
inline Vec3 transposed_mul(const Mat3& m, const Vec3& v) {
    return {m.a[0] * v.x + m.a[3] * v.y + m.a[6] * v.z,
            m.a[1] * v.x + m.a[4] * v.y + m.a[7] * v.z,
            m.a[2] * v.x + m.a[5] * v.y + m.a[8] * v.z};
}

// Cylindrical coordinates (rho, phi, z) in the target body frame. phi is
// stored as produced by the chart in [0, 2*pi); the simulator keeps its own
// unwrapped angle tracker on top of this.
struct Cylindrical {
    double rho = 0.0;  // distance of the XY projection to the target, >= 0
    double phi = 0.0;  // angle from the body X axis, radians
    double z = 0.0;    // height over the body XY plane
};

// Rates in the cylindrical chart; the controller's native output.
struct CylindricalRate {
    double rho_dot = 0.0;
    double phi_dot = 0.0;
    double z_dot = 0.0;
};

// Body reference frame centered at the target. The rotation never evolves in
// the shipped scenarios (rotation_rate stays zero); moving targets use only
// origin_velocity.
struct BodyFrame {
    Vec3 origin{};                        // target position p_b, world frame
    Mat3 rotation = Mat3::identity();     // R_b
    Vec3 origin_velocity{};               // dp_b/dt
    Mat3 rotation_rate{};                 // dR_b/dt, zero by default

    /// Orthonormality / right-handedness check, tolerance 1e-12.
    bool valid(double tol = 1e-12) const {
        Mat3 should_be_identity = rotation.transpose() * rotation;
        Mat3 eye = Mat3::identity();
        for (int i = 0; i < 9; ++i)
            if (std::abs(should_be_identity.a[i] - eye.a[i]) > tol) return false;
        return std::abs(rotation.det() - 1.0) <= tol;
    }
};

/// Cartesian -> cylindrical chart. phi lands in [0, 2*pi); the branch point
/// (negative x, y = 0) maps to phi = pi.
inline Cylindrical cart_to_cyl(const Vec3& p) {
    const double planar_sq = p.x * p.x + p.y * p.y;
    if (planar_sq <= kAxisEpsilon * kAxisEpsilon)
        throw AxisSingularity("point too close to the target's vertical axis");
    double phi = std::atan2(p.y, p.x);
    if (phi < 0.0) phi += kTwoPi;
    if (phi == 0.0) phi = 0.0;
    return {std::sqrt(planar_sq), phi, p.z};
}

/// Inverse chart, for tests and plotting.
inline Vec3 cyl_to_cart(const Cylindrical& q) {
    return {q.rho * std::cos(q.phi), q.rho * std::sin(q.phi), q.z};
}

/// Jacobian d(rho, phi, z)/d(x, y, z) at p. det = 1/rho.
inline Mat3 jacobian(const Vec3& p) {
    const double planar_sq = p.x * p.x + p.y * p.y;
    if (planar_sq <= kAxisEpsilon * kAxisEpsilon)
        throw AxisSingularity("Jacobian undefined on the target's vertical axis");
    const double planar = std::sqrt(planar_sq);
    Mat3 j;
    j.a = {p.x / planar, p.y / planar, 0.0,
           -p.y / planar_sq, p.x / planar_sq, 0.0,
           0.0, 0.0, 1.0};
    return j;
}

/// Closed-form inverse of jacobian(p).
inline Mat3 jacobian_inverse(const Vec3& p) {
    const double planar_sq = p.x * p.x + p.y * p.y;
    if (planar_sq <= kAxisEpsilon * kAxisEpsilon)
        throw AxisSingularity("Jacobian not invertible on the target's vertical axis");
    const double planar = std::sqrt(planar_sq);
    Mat3 j;
    j.a = {p.x / planar, -p.y, 0.0,
           p.y / planar, p.x, 0.0,
           0.0, 0.0, 1.0};
    return j;
}

/// Cylindrical coordinates of world point p_i in the body frame.
inline Cylindrical body_coords(const Vec3& p_i, const BodyFrame& frame) {
    return cart_to_cyl(transposed_mul(frame.rotation, p_i - frame.origin));
}

/// Lift a cylindrical-rate command to a world-frame velocity so that the
/// body-frame rates of the moving point equal v exactly:
///   u = dp_b + R_b (J^{-1} v - dR_b^T (p_i - p_b))
inline Vec3 lift_control(const CylindricalRate& v, const Vec3& p_i, const BodyFrame& frame) {
    const Vec3 rel = p_i - frame.origin;
    const Vec3 body_point = transposed_mul(frame.rotation, rel);
    const Mat3 j_inv = jacobian_inverse(body_point);
    const Vec3 v_vec{v.rho_dot, v.phi_dot, v.z_dot};
    const Vec3 body_vel = j_inv * v_vec - transposed_mul(frame.rotation_rate, rel);
    return frame.origin_velocity + frame.rotation * body_vel;
}

}  // namespace circumnav
