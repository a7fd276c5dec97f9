#pragma once
// Variational calculus and the recursion machinery on differential
// polynomials. The compatible pair acting on covectors varpi and flows e:
//
//   J(e)     = D e + D^{-1}(<v, e>) v
//   H(varpi) = D varpi + v _| D^{-1}(v ^ varpi)
//   R        = H o J                         (hereditary recursion)
//
// D^{-1} is the formal integral: exact antiderivative in the invariant
// algebra, found by solving a small exact linear system per grading class
// (factor count, total derivative order). The Euler operator guards
// exactness of scalar arguments; ker D is trivial here, so antiderivatives
// are unique.

#include <vector>

#include "fracflow/diffpoly.hpp"

namespace fracflow::dp {

// Variational gradient sum_j (-D)^j (d h / d v_j).
VectorPoly euler(const ScalarPoly& h);

// Exact antiderivative q with D q = p. Throws not_exact_error when p is not
// a total derivative (detected via euler(p) != 0 for scalars, solver
// inconsistency for wedges).
ScalarPoly formal_integral(const ScalarPoly& p);
WedgePoly formal_integral(const WedgePoly& p);

// Canonical representative of p modulo im(D): per grading class, the top
// derivative order is reduced as far as integration by parts allows; the
// remaining freedom is fixed deterministically (reduced row echelon with
// free coefficients zeroed).
ScalarPoly ibp_normal_form(const ScalarPoly& p);

VectorPoly op_j(const VectorPoly& e_perp);
VectorPoly op_h(const VectorPoly& varpi);
VectorPoly op_r(const VectorPoly& e_perp);

// Density h with euler(h) = varpi, normalized by ibp_normal_form; uses the
// scaling homotopy h = int_0^1 <varpi[lambda v], v> dlambda.
ScalarPoly hamiltonian_from_covector(const VectorPoly& varpi);

struct HierarchyLevel {
    VectorPoly flow;        // e_perp^(k), weight 2 + 2k
    VectorPoly covector;    // varpi^(k),  weight 1 + 2k
    ScalarPoly hamiltonian; // weight 2 + 2k
};

// Levels 0..top_level of the flow hierarchy from e_perp^(0) = v_1,
// varpi^(0) = v_0, iterating varpi^(k+1) = J(e^(k)), e^(k+1) = H(varpi^(k+1)).
std::vector<HierarchyLevel> generate_hierarchy(int top_level);

// flow_up - c * flow: mixes hierarchy neighbors into the constant-curvature
// flow family.
VectorPoly constant_curvature_shift(const VectorPoly& flow_up,
                                    const VectorPoly& flow, const Rational& c);

// Directional derivative of P along Q: d/de P[v + e Q] at e = 0. Two flows
// commute iff frechet(K1, K0) - frechet(K0, K1) vanishes.
VectorPoly frechet(const VectorPoly& p, const VectorPoly& q);

}  // namespace fracflow::dp
