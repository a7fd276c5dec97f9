#include <doctest.h>

#include <random>

#include "fracflow/errors.hpp"
#include "fracflow/klein.hpp"

using namespace fracflow;
using namespace fracflow::klein;

namespace {

std::mt19937 rng(20210911);

Vec rand_vec(Eigen::Index n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

Mat rand_skew(Eigen::Index n) {
    Mat a(n, n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u(rng);
    return 0.5 * (a - a.transpose());
}

}  // namespace

TEST_CASE("embedding produces skew matrices and dot products") {
    for (int n : {2, 3, 4, 5}) {
        const Vec p = rand_vec(n), q = rand_vec(n);
        const Mat a = embed_p(p), b = embed_p(q);
        CHECK((a + a.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
        // Cartan-Killing restricts to the Euclidean dot product
        CHECK(ck_inner(a, b) == doctest::Approx(p.dot(q)).epsilon(1e-14));
    }
}

TEST_CASE("worked 3d embedding") {
    Vec p(3);
    p << 1.0, 2.0, 0.0;
    const Mat k = embed_p(p);
    CHECK(k.rows() == 4);
    CHECK(k(0, 1) == 1.0);
    CHECK(k(0, 2) == 2.0);
    CHECK(k(1, 0) == -1.0);
    CHECK(k(2, 0) == -2.0);
    CHECK(ck_inner(k, k) == doctest::Approx(5.0));
}

TEST_CASE("bracket is a Lie bracket") {
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 3 + trial % 4;
        const Mat a = rand_skew(n), b = rand_skew(n), c = rand_skew(n);
        CHECK((bracket(a, b) + bracket(b, a)).cwiseAbs().maxCoeff() <= 1e-12);
        const Mat jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) +
                        bracket(c, bracket(a, b));
        CHECK(jac.cwiseAbs().maxCoeff() <= 1e-12);
        // closure: bracket of skew is skew
        const Mat d = bracket(a, b);
        CHECK((d + d.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("decompose splits orthogonally and reassembles") {
    for (int n : {2, 3, 5}) {
        const Mat k = rand_skew(n + 1);
        const auto d = decompose(k);
        CHECK(d.tangential.size() == n);
        CHECK(d.normal.rows() == n);
        const Mat rebuilt = embed_p(d.tangential) + so_corner(d.normal);
        CHECK((rebuilt - k).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK(ck_inner(embed_p(d.tangential), so_corner(d.normal)) ==
              doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("frame bracket identities, randomized over sector dimensions") {
    // n = 2: e_perp is a single component and theta is empty-rank so(1)
    for (int n : {2, 3, 4, 5}) {
        for (int trial = 0; trial < 50; ++trial) {
            const Vec v = rand_vec(n - 1);
            const Vec e_perp = rand_vec(n - 1);
            const Vec varpi = rand_vec(n - 1);
            const Mat theta = rand_skew(n - 1);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            const double e_par = u(rng);
            CHECK(bracket_identity_residual(v, e_par, e_perp, varpi, theta) <= 1e-12);
        }
    }
}

TEST_CASE("worked n = 2 frame bracket") {
    // [e_X, e_Y] with e_Y = (e_par, e_perp) lands in the so(2) corner
    const Mat e_x = unit_direction(2);
    Vec y(2);
    y << 0.6, 0.8;
    const Mat lhs = bracket(e_x, embed_p(y));
    Vec w(1);
    w << 0.8;
    const Mat rhs = -so_corner(pair_block(w));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(ck_inner(Mat::Zero(3, 3), Mat::Zero(4, 4)), config_error);
    CHECK_THROWS_AS(bracket(Mat::Zero(3, 3), Mat::Zero(4, 4)), config_error);
    CHECK_THROWS_AS(embed_p(Vec()), config_error);
    CHECK_THROWS_AS(bracket_identity_residual(Vec::Ones(2), 1.0, Vec::Ones(3),
                                              Vec::Ones(2), Mat::Zero(2, 2)),
                    config_error);
}
