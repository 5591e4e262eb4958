#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hexapod/core_math.hpp"
#include "hexapod/errors.hpp"
#include "oracles.hpp"

using namespace hexapod;
using std::numbers::pi;

namespace {

bool is_rigid(const Transform4& t, double tol = 1e-9) {
    const Mat4& m = t.matrix();
    const bool bottom = m(3, 0) == 0.0 && m(3, 1) == 0.0 && m(3, 2) == 0.0 && m(3, 3) == 1.0;
    const Mat3 r = t.rotation();
    return bottom && (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(r.determinant() - 1.0) < tol;
}

Transform4 random_transform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-pi, pi);
    std::uniform_real_distribution<double> off(-500.0, 500.0);
    return translation(off(rng), off(rng), off(rng)) * rotation(Axis::Z, ang(rng)) * rotation(Axis::Y, ang(rng)) *
           rotation(Axis::X, ang(rng));
}

}  // namespace

TEST_CASE("translation") {
    CHECK(translation(0, 0, 0).is_approx(Transform4::identity(), 0.0));
    const Transform4 start = translation(10, -20, 100);
    CHECK(start.translation().isApprox(Vec3(10, -20, 100)));
    CHECK(start.rotation().isIdentity(0.0));
    CHECK(translation(1, 2, 3).apply(Vec3::Zero()).isApprox(Vec3(1, 2, 3)));
    CHECK(translation(1, 2, 3).matrix() * Vec4(0, 0, 0, 1) == Vec4(1, 2, 3, 1));
    CHECK_THROWS_AS(translation(std::numeric_limits<double>::quiet_NaN(), 0, 0), InvalidArgument);
    CHECK_THROWS_AS(translation(0, std::numeric_limits<double>::infinity(), 0), InvalidArgument);
}

TEST_CASE("elementary rotations") {
    CHECK(rotation(Axis::Z, 0.0).is_approx(Transform4::identity(), 0.0));
    CHECK((rotation(Axis::Z, pi / 2).apply(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((rotation(Axis::X, pi / 2).apply(Vec3(0, 1, 0)) - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK((rotation(Axis::Y, pi / 2).apply(Vec3(0, 0, 1)) - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK(rotation(Axis::Z, 1.0).translation().isZero(0.0));
    CHECK_THROWS_AS(rotation(Axis::X, std::numeric_limits<double>::quiet_NaN()), InvalidArgument);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ang(-pi, pi);
    for (int i = 0; i < 50; ++i) {
        const double a = ang(rng);
        const double b = ang(rng);
        Mat3 ry;
        ry << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
        Mat3 rx;
        rx << 1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b);
        CHECK(((rotation(Axis::Y, a) * rotation(Axis::X, b)).rotation() - ry * rx).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("transform composition stays rigid and inverts") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Transform4 a = random_transform(rng);
        const Transform4 b = random_transform(rng);
        CHECK(is_rigid(a * b));
        CHECK((a.inverse() * a).is_approx(Transform4::identity(), 1e-10));
        CHECK((a * a.inverse()).is_approx(Transform4::identity(), 1e-10));
        CHECK(((a * b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("from_matrix validates the bottom row") {
    Mat4 m = Mat4::Identity();
    CHECK_NOTHROW(Transform4::from_matrix(m));
    m(3, 1) = 1e-3;
    CHECK_THROWS_AS(Transform4::from_matrix(m), InvalidArgument);
    m = Mat4::Identity();
    m(0, 3) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Transform4::from_matrix(m), InvalidArgument);
}

TEST_CASE("euler_zyx inverts rotation_zyx") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-1.4, 1.4);
    for (int i = 0; i < 100; ++i) {
        const Vec3 e(ang(rng), ang(rng), ang(rng));
        CHECK((euler_zyx(rotation_zyx(e.x(), e.y(), e.z())) - e).norm() < 1e-12);
    }
}

TEST_CASE("skew") {
    CHECK(skew(Vec3::Zero()).isZero(0.0));
    CHECK(skew(Vec3(1, 0, 0)) * Vec3(0, 1, 0) == Vec3(0, 0, 1));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 r(n(rng), n(rng), n(rng));
        const Vec3 v(n(rng), n(rng), n(rng));
        const Mat3 s = skew(r);
        CHECK(s == -s.transpose());
        CHECK((s * v - r.cross(v)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kron") {
    CHECK(kron(MatX::Identity(2, 2), MatX::Identity(2, 2)) == MatX::Identity(4, 4));
    MatX row(1, 2);
    row << 1, 2;
    MatX col(2, 1);
    col << 0, 1;
    MatX expected(2, 2);
    expected << 0, 0, 1, 2;
    CHECK(kron(row, col) == expected);
    CHECK(kron(row, col) == oracle::kron_loops(row, col));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int i = 0; i < 20; ++i) {
        MatX a(3, 2);
        MatX b(2, 2);
        for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = n(rng);
        for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = n(rng);
        const MatX k = kron(a, b);
        CHECK(k.rows() == 6);
        CHECK(k.cols() == 4);
        CHECK(k == oracle::kron_loops(a, b));
    }
}

TEST_CASE("left pseudoinverse") {
    Mat3 sq;
    sq << 2, 1, 0, 0, 3, 1, 1, 0, 4;
    CHECK((left_pseudoinverse(sq) - sq.inverse()).cwiseAbs().maxCoeff() < 1e-12);

    MatX tall(2, 1);
    tall << 1, 1;
    const MatX p = left_pseudoinverse(tall);
    CHECK(p.rows() == 1);
    CHECK(p.cols() == 2);
    CHECK(std::abs(p(0, 0) - 0.5) < 1e-14);
    CHECK(std::abs(p(0, 1) - 0.5) < 1e-14);
    CHECK((p - oracle::normal_equations_pinv(tall)).cwiseAbs().maxCoeff() < 1e-14);

    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    for (int i = 0; i < 50; ++i) {
        MatX a(9, 6);
        for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = n(rng);
        const MatX ap = left_pseudoinverse(a);
        CHECK((ap * a - MatX::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((ap - oracle::normal_equations_pinv(a)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("left pseudoinverse rejects rank-deficient input") {
    MatX a = MatX::Zero(6, 3);
    a(0, 0) = 1;
    a(1, 1) = 1;  // third column zero
    try {
        left_pseudoinverse(a);
        FAIL("expected a rank error");
    } catch (const RankDeficiencyError& e) {
        CHECK(e.rank() == 2);
        CHECK(e.required() == 3);
    }
    CHECK(numerical_rank(a) == 2);
    CHECK_THROWS_AS(left_pseudoinverse(MatX::Ones(2, 3)), RankDeficiencyError);
}

TEST_CASE("euler rate map") {
    CHECK(euler_rate_map(0, 0, 0).isIdentity(0.0));
    const Vec6 rates = (Vec6() << 0, 0, 0, 0, 0, 0.7).finished();
    const Vec6 twist = euler_rate_map(0, 0, 0) * rates;
    CHECK((twist.tail<3>() - Vec3(0, 0, 0.7)).norm() < 1e-15);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-1.2, 1.2);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        const Vec3 e(ang(rng), ang(rng), ang(rng));
        const Vec3 ed(n(rng), n(rng), n(rng));
        auto rot = [&](double t) {
            const Vec3 at = e + t * ed;
            return rotation_zyx(at.x(), at.y(), at.z());
        };
        const Vec3 w_fd = oracle::angular_velocity(rot, 0.0);
        Vec6 xb_dot;
        xb_dot << n(rng), n(rng), n(rng), ed;
        const Vec6 tw = euler_rate_map(e.x(), e.y(), e.z()) * xb_dot;
        CHECK((tw.head<3>() - xb_dot.head<3>()).norm() < 1e-15);
        CHECK((tw.tail<3>() - w_fd).norm() < 1e-4);
    }
}

TEST_CASE("wrap_angle") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(std::abs(wrap_angle(3 * pi) - pi) < 1e-12);
    CHECK(std::abs(wrap_angle(-pi / 2 - 4 * pi) + pi / 2) < 1e-12);
}
