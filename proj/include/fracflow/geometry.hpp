#pragma once
// N-adapted frame calculus on grid-sampled data: canonical d-connection,
// anholonomy coefficients, torsion, curvature, and the Ricci / scalar /
// Einstein blocks. All partials are Caputo derivatives along grid axes;
// alpha = 1 reduces to centered differences on interior nodes.
//
// Frames: e_j = d^a_j - N_j^a d^a_a (horizontal), e_b = d^a_b (vertical).
// Connection layout: D_{e_g} e_b = G^t_bg e_t. Anholonomy coefficients from
// [e_b, e_g] = W^s_bg e_s, extracted per node by evaluating commutators on
// coordinate functions and solving against the frame matrix M_s^d = e_s(u^d).
//
//   T^t_bg = G^t_gb - G^t_bg - W^t_bg
//   R^t_bgd = e_d(G^t_bg) - e_g(G^t_bd) + G^s_bg G^t_sd - G^s_bd G^t_sg
//             + W^s_gd G^t_bs
//   Ricci_bg = sum_t R^t_bgt,  sR = g^{ij}R_ij + g^{ab}R_ab,
//   G_bg = Ricci_bg - 1/2 g_bg sR
//
// Sign conventions fixed so the unit 2-sphere h-block has scalar curvature
// +2. Derived tensors are defined on the interior window only (margin 1 for
// connections, 2 for torsion/curvature); the boundary layers are NaN.

#include <string>
#include <vector>

#include "fracflow/grid.hpp"

namespace fracflow::geom {

// N_i^a, i < n, a < m
struct NConnection {
    int n = 0;
    int m = 0;
    std::vector<GridField> coeff;  // [i*m + a]
    const GridField& of(int i, int a) const { return coeff[std::size_t(i) * m + a]; }
    GridField& of(int i, int a) { return coeff[std::size_t(i) * m + a]; }
};

struct DMetric {
    int n = 0;
    int m = 0;
    std::vector<GridField> h;  // g_jk, [j*n + k], symmetric
    std::vector<GridField> v;  // g_bc, [b*m + c], symmetric
    const GridField& hof(int j, int k) const { return h[std::size_t(j) * n + k]; }
    GridField& hof(int j, int k) { return h[std::size_t(j) * n + k]; }
    const GridField& vof(int b, int c) const { return v[std::size_t(b) * m + c]; }
    GridField& vof(int b, int c) { return v[std::size_t(b) * m + c]; }
    // symmetry + per-node invertibility (|det| > 1e-10); throws config_error
    void validate(const ChartSpec& chart) const;
};

struct DConnection {
    int n = 0;
    int m = 0;
    std::vector<GridField> l_h;  // L^i_jk  [(i*n + j)*n + k]
    std::vector<GridField> l_v;  // L^a_bk  [(a*m + b)*n + k]
    std::vector<GridField> c_h;  // C^i_jc  [(i*n + j)*m + c]
    std::vector<GridField> c_v;  // C^a_bc  [(a*m + b)*m + c]
};

struct RicciBlocks {
    std::vector<GridField> ricci;  // [b*d + g]
    GridField ricci_h;             // g^{ij} R_ij
    GridField ricci_v;             // g^{ab} R_ab
    GridField scalar;              // sum of the two
    std::vector<GridField> einstein;  // [b*d + g]
};

struct CurvatureBundle {
    std::vector<GridField> torsion;  // T^t_bg   [(t*d + b)*d + g]
    std::vector<GridField> riemann;  // R^t_bgd  [((t*d + b)*d + g)*d + dd]
    RicciBlocks blocks;
};

// e-frame derivative of a sampled field along frame direction 0..n+m-1
GridField n_adapted_derivative(const ChartSpec& chart, const NConnection& nc,
                               const GridField& f, int direction);
double n_adapted_derivative_at(const ChartSpec& chart, const NConnection& nc,
                               const GridField& f, int direction,
                               const std::vector<int>& node);

DConnection canonical_dconnection(const ChartSpec& chart, const NConnection& nc,
                                  const DMetric& g);

// full-index connection G^t_bg with zero mixed blocks
std::vector<GridField> full_connection(const ChartSpec& chart, const DConnection& c);
// W^s_bg from numerically evaluated frame commutators
std::vector<GridField> anholonomy(const ChartSpec& chart, const NConnection& nc);

std::vector<GridField> torsion(const ChartSpec& chart, const NConnection& nc,
                               const DConnection& conn);
std::vector<GridField> curvature(const ChartSpec& chart, const NConnection& nc,
                                 const DConnection& conn);
RicciBlocks ricci_scalar_einstein(const ChartSpec& chart, const DMetric& g,
                                  const std::vector<GridField>& riemann);

// the full pipeline: connection, torsion, curvature, contractions
CurvatureBundle analyze(const ChartSpec& chart, const NConnection& nc,
                        const DMetric& g);

// max |D_g| of the metric over the defined window (exact cancellation up to
// roundoff for the canonical d-connection)
double metric_compat_residual(const ChartSpec& chart, const NConnection& nc,
                              const DMetric& g, const DConnection& conn);

// Christoffel symbols of the lifted (n+m)-metric in the coordinate frame,
// with Caputo partials; test-only reference variant
std::vector<GridField> levi_civita_full(const ChartSpec& chart,
                                        const NConnection& nc, const DMetric& g);

struct GeometryFixture {
    ChartSpec chart;
    NConnection nconn;
    DMetric metric;
};

// flat | sphere | twisted | vcurved
GeometryFixture builtin_fixture(const std::string& name, double alpha);
// whitespace tabular format: header line (x1.. y1.. N_i_a gh_j_k gv_b_c),
// then one row per node in row-major order; alpha supplied by the caller
GeometryFixture load_fixture(const std::string& path, double alpha);
void save_fixture(const GeometryFixture& fx, const std::string& path);
// coordinates, sR, hR, vS, ricci_*, einstein_*, torsion absmax per node
void save_report(const ChartSpec& chart, const CurvatureBundle& cb,
                 const std::string& path);

}  // namespace fracflow::geom
