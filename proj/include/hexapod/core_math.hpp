#pragma once

// Frame-and-matrix toolbox shared by every module.
//
// Units: millimetres, radians, seconds, kilograms.

#include <Eigen/Dense>

namespace hexapod {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

enum class Axis { X, Y, Z };

/// Rigid homogeneous transform. The bottom row is always [0 0 0 1]; the rotation
/// block is orthonormal for every transform built by the factory functions below.
class Transform4 {
public:
    Transform4() : m_(Mat4::Identity()) {}
    Transform4(const Mat3& rotation, const Vec3& translation);

    static Transform4 identity() { return {}; }
    /// Wraps a raw 4x4; throws InvalidArgument if the bottom row is not [0 0 0 1]
    /// or an entry is not finite. Orthonormality is not checked here.
    static Transform4 from_matrix(const Mat4& m);

    Mat3 rotation() const { return m_.topLeftCorner<3, 3>(); }
    Vec3 translation() const { return m_.topRightCorner<3, 1>(); }
    const Mat4& matrix() const { return m_; }

    Transform4 operator*(const Transform4& rhs) const;
    Vec3 apply(const Vec3& p) const { return rotation() * p + translation(); }
    /// Rotates a direction vector (fourth homogeneous coordinate zero).
    Vec3 apply_direction(const Vec3& v) const { return rotation() * v; }
    Transform4 inverse() const;

    bool is_approx(const Transform4& other, double tol) const;

private:
    Mat4 m_;
};

Transform4 translation(double dx, double dy, double dz);
inline Transform4 translation(const Vec3& d) { return translation(d.x(), d.y(), d.z()); }

/// Right-handed elementary rotation about a principal axis.
Transform4 rotation(Axis axis, double angle);
Mat3 rotation_matrix(Axis axis, double angle);

/// Rz(rot_z) * Ry(rot_y) * Rx(rot_x), the body attitude convention used throughout.
Mat3 rotation_zyx(double rot_x, double rot_y, double rot_z);

/// Inverse of rotation_zyx: returns (rot_x, rot_y, rot_z) with rot_y in [-pi/2, pi/2].
Vec3 euler_zyx(const Mat3& r);

/// S with S * v == r.cross(v).
Mat3 skew(const Vec3& r);

/// Kronecker product: the (i, j) block of the result is a(i, j) * b.
MatX kron(const MatX& a, const MatX& b);

/// Left pseudoinverse (A^T A)^-1 A^T of a full-column-rank matrix, computed through
/// an SVD. Throws RankDeficiencyError when a singular value falls below 1e-10
/// (relative to the largest one).
MatX left_pseudoinverse(const MatX& a);

/// Numerical rank with the same singular-value threshold as left_pseudoinverse.
int numerical_rank(const MatX& a);

/// Maps body DOF rates (x, y, z, rot_x, rot_y, rot_z) to the world-frame twist
/// (v, omega). The linear block is the identity. The angular block follows the
/// Rz*Ry*Rx order; it is singular at rot_y = +-pi/2 and is returned as-is there.
Mat6 euler_rate_map(double rot_x, double rot_y, double rot_z);

/// Angular block of euler_rate_map.
Mat3 euler_rate_angular(double rot_x, double rot_y, double rot_z);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace hexapod
