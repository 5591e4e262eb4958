#include "hexapod/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hexapod/errors.hpp"

namespace hexapod {

namespace {

constexpr double kRankThreshold = 1e-10;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

}  // namespace

Transform4::Transform4(const Mat3& rotation, const Vec3& translation) : m_(Mat4::Identity()) {
    m_.topLeftCorner<3, 3>() = rotation;
    m_.topRightCorner<3, 1>() = translation;
}

Transform4 Transform4::from_matrix(const Mat4& m) {
    if (!m.allFinite()) {
        throw InvalidArgument("transform entries must be finite");
    }
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
        throw InvalidArgument("transform bottom row must be [0 0 0 1]");
    }
    Transform4 t;
    t.m_ = m;
    return t;
}

Transform4 Transform4::operator*(const Transform4& rhs) const {
    Transform4 out;
    out.m_.topLeftCorner<3, 3>() = rotation() * rhs.rotation();
    out.m_.topRightCorner<3, 1>() = rotation() * rhs.translation() + translation();
    return out;
}

Transform4 Transform4::inverse() const {
    const Mat3 rt = rotation().transpose();
    return {rt, -rt * translation()};
}

bool Transform4::is_approx(const Transform4& other, double tol) const {
    return (m_ - other.m_).cwiseAbs().maxCoeff() <= tol;
}

Transform4 translation(double dx, double dy, double dz) {
    require_finite(dx, "dx");
    require_finite(dy, "dy");
    require_finite(dz, "dz");
    return {Mat3::Identity(), Vec3(dx, dy, dz)};
}

Mat3 rotation_matrix(Axis axis, double angle) {
    require_finite(angle, "angle");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r;
    switch (axis) {
        case Axis::X:
            r << 1, 0, 0, 0, c, -s, 0, s, c;
            break;
        case Axis::Y:
            r << c, 0, s, 0, 1, 0, -s, 0, c;
            break;
        case Axis::Z:
            r << c, -s, 0, s, c, 0, 0, 0, 1;
            break;
    }
    return r;
}

Transform4 rotation(Axis axis, double angle) { return {rotation_matrix(axis, angle), Vec3::Zero()}; }

Mat3 rotation_zyx(double rot_x, double rot_y, double rot_z) {
    return rotation_matrix(Axis::Z, rot_z) * rotation_matrix(Axis::Y, rot_y) *
           rotation_matrix(Axis::X, rot_x);
}

Vec3 euler_zyx(const Mat3& r) {
    const double sy = std::clamp(-r(2, 0), -1.0, 1.0);
    const double rot_y = std::asin(sy);
    const double rot_x = std::atan2(r(2, 1), r(2, 2));
    const double rot_z = std::atan2(r(1, 0), r(0, 0));
    return {rot_x, rot_y, rot_z};
}

Mat3 skew(const Vec3& r) {
    Mat3 s;
    s << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
    return s;
}

MatX kron(const MatX& a, const MatX& b) {
    MatX out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

int numerical_rank(const MatX& a) {
    if (a.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<MatX> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    if (smax <= 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kRankThreshold * std::max(1.0, smax)) {
            ++rank;
        }
    }
    return rank;
}

MatX left_pseudoinverse(const MatX& a) {
    const int cols = static_cast<int>(a.cols());
    if (a.rows() < a.cols()) {
        throw RankDeficiencyError("left pseudoinverse needs at least as many rows as columns",
                                  static_cast<int>(a.rows()), cols);
    }
    Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VecX& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double threshold = kRankThreshold * std::max(1.0, smax);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++rank;
        }
    }
    if (rank < cols) {
        throw RankDeficiencyError("matrix is not full column rank (rank " + std::to_string(rank) +
                                      " of " + std::to_string(cols) + ")",
                                  rank, cols);
    }
    return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Mat3 euler_rate_angular(double rot_x, double rot_y, double rot_z) {
    // omega = rz' * e_z + ry' * Rz e_y + rx' * Rz Ry e_x
    const double cy = std::cos(rot_y);
    const double sy = std::sin(rot_y);
    const double cz = std::cos(rot_z);
    const double sz = std::sin(rot_z);
    (void)rot_x;
    Mat3 e;
    e.col(0) = Vec3(cz * cy, sz * cy, -sy);
    e.col(1) = Vec3(-sz, cz, 0.0);
    e.col(2) = Vec3(0.0, 0.0, 1.0);
    return e;
}

Mat6 euler_rate_map(double rot_x, double rot_y, double rot_z) {
    require_finite(rot_x, "rot_x");
    require_finite(rot_y, "rot_y");
    require_finite(rot_z, "rot_z");
    Mat6 psi = Mat6::Zero();
    psi.topLeftCorner<3, 3>().setIdentity();
    psi.bottomRightCorner<3, 3>() = euler_rate_angular(rot_x, rot_y, rot_z);
    return psi;
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) {
        a += two_pi;
    } else if (a > std::numbers::pi) {
        a -= two_pi;
    }
    return a;
}

}  // namespace hexapod
