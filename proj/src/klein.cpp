#include "fracflow/klein.hpp"

#include "fracflow/errors.hpp"

namespace fracflow::klein {

Mat embed_p(const Vec& p) {
    const Eigen::Index n = p.size();
    if (n < 1) throw config_error("embed_p: empty vector");
    Mat k = Mat::Zero(n + 1, n + 1);
    k.block(0, 1, 1, n) = p.transpose();
    k.block(1, 0, n, 1) = -p;
    return k;
}

double ck_inner(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw config_error("ck_inner: dimension mismatch");
    return 0.5 * (a.transpose() * b).trace();
}

Mat bracket(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
        throw config_error("bracket: dimension mismatch");
    return a * b - b * a;
}

Decomposition decompose(const Mat& k) {
    const Eigen::Index n = k.rows() - 1;
    if (n < 1 || k.rows() != k.cols()) throw config_error("decompose: bad shape");
    Decomposition d;
    d.tangential = k.block(0, 1, 1, n).transpose();
    d.normal = k.block(1, 1, n, n);
    return d;
}

Mat so_corner(const Mat& s) {
    const Eigen::Index n = s.rows();
    if (n != s.cols()) throw config_error("so_corner: not square");
    Mat k = Mat::Zero(n + 1, n + 1);
    k.block(1, 1, n, n) = s;
    return k;
}

Mat pair_block(const Vec& w) {
    const Eigen::Index d = w.size() + 1;
    Mat s = Mat::Zero(d, d);
    s.block(0, 1, 1, d - 1) = w.transpose();
    s.block(1, 0, d - 1, 1) = -w;
    return s;
}

Mat unit_direction(int n) {
    if (n < 1) throw config_error("unit_direction: n must be >= 1");
    Vec e = Vec::Zero(n);
    e(0) = 1.0;
    return embed_p(e);
}

double bracket_identity_residual(const Vec& v, double e_par, const Vec& e_perp,
                                 const Vec& varpi, const Mat& theta) {
    const Eigen::Index n = v.size() + 1;
    if (e_perp.size() != n - 1 || varpi.size() != n - 1 || theta.rows() != n - 1 ||
        theta.cols() != n - 1)
        throw config_error("bracket_identity_residual: dimension mismatch");

    const Mat e_x = unit_direction(int(n));
    Vec y(n);
    y(0) = e_par;
    y.tail(n - 1) = e_perp;
    const Mat e_y = embed_p(y);
    const Mat gamma_x = so_corner(pair_block(v));
    Mat corner_y = pair_block(varpi);
    corner_y.block(1, 1, n - 1, n - 1) = theta;
    const Mat gamma_y = so_corner(corner_y);

    const Mat r1 = bracket(e_x, e_y) + so_corner(pair_block(e_perp));

    Vec p2(n);
    p2(0) = 0.0;
    p2.tail(n - 1) = varpi;
    const Mat r2 = bracket(gamma_y, e_x) + embed_p(p2);

    Vec p3(n);
    p3(0) = -v.dot(e_perp);
    p3.tail(n - 1) = e_par * v;
    const Mat r3 = bracket(gamma_x, e_y) + embed_p(p3);

    return std::max({r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff(),
                     r3.cwiseAbs().maxCoeff()});
}

}  // namespace fracflow::klein
