#pragma once
// so(n+1) realized as the pair algebra of the unit sphere: a vector p in R^n
// embeds as [[0, p], [-p^T, 0]] and the Cartan-Killing form <a,b> =
// 1/2 tr(a^T b) restricts to the Euclidean dot product on embedded vectors.

#include <Eigen/Dense>

namespace fracflow::klein {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// R^n -> so(n+1), p |-> [[0, p], [-p^T, 0]].
Mat embed_p(const Vec& p);

// Cartan-Killing pairing 1/2 tr(a^T b).
double ck_inner(const Mat& a, const Mat& b);

// Matrix commutator ab - ba.
Mat bracket(const Mat& a, const Mat& b);

// Splits k in so(n+1) into the embedded-vector part (row 0 / column 0) and
// the so(n) corner; the two are ck_inner-orthogonal.
struct Decomposition {
    Vec tangential;  // R^n
    Mat normal;      // so(n)
};
Decomposition decompose(const Mat& k);

// so(n) -> so(n+1), zero first row/column, s in the lower-right corner.
Mat so_corner(const Mat& s);

// R^(d-1) -> so(d), w |-> [[0, w], [-w^T, 0]]; building block for corners.
Mat pair_block(const Vec& w);

// Embedded unit direction (1, 0, ..., 0) in R^n.
Mat unit_direction(int n);

// Residuals of the three frame/connection bracket identities in one sector
// of dimension n (inputs: v, varpi in R^(n-1), theta in so(n-1), frame pair
// (e_par, e_perp) with e_perp in R^(n-1)). Returns the max absolute entry of
//   [e_X, e_Y]     + corner(pair_block(e_perp))
//   [Gamma_Y, e_X] + embed((0, varpi))
//   [Gamma_X, e_Y] + embed((-v.e_perp, e_par*v)).
double bracket_identity_residual(const Vec& v, double e_par, const Vec& e_perp,
                                 const Vec& varpi, const Mat& theta);

}  // namespace fracflow::klein
