#pragma once
// Time integration of the curve-flow hierarchy on a uniform arclength grid.
//
// Nonnegative levels evolve the tangent components v(l) by classical RK4:
//   level 0: v_tau = D v                      (pure transport)
//   level k: v_tau = flow_k - c*flow_{k-1}    (c = curvature_const)
// with flow_k the level-k vector polynomial of the hierarchy and D^j realized
// by the configured DerivativeEngine. Fractional runs additionally apply a
// sixth-difference stabilizer and a short damping sponge next to the lower
// terminal where the one-sided derivative has no history.
//
// Level -1 evolves v_tau = -curvature_const * e_perp, where the moving frame
// (e_par, e_perp) is reconstructed from v along the curve by the constraint
// system
//   D e_par  = -<v, e_perp>,   D e_perp = e_par * v,
//   e_par(0) = 1,              e_perp(0) = 0,
// integrated cell by cell with a midpoint rotation (Rodrigues form), which
// keeps e_par^2 + |e_perp|^2 = 1 to round-off. The state is renormalized
// after every step and aborts if the pre-projection drift exceeds 1e-6.
//
// CFL guard: dt <= cfl_const * h^3 for levels >= 1 (default constant 0.1).
// Note the guard is an admissibility bound, not an optimal choice; for the
// pseudospectral backend the RK4 imaginary-axis limit demands
// dt * (pi/h)^3 <= 2*sqrt(2), i.e. an effective constant below ~0.091.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fracflow/diffpoly.hpp"
#include "fracflow/frac.hpp"
#include "fracflow/spectral.hpp"

namespace fracflow::flow {

struct SolverConfig {
    frac::FractionalOrder order{1.0};
    int flow_level = 1;          // -1, 0, 1 or 2
    double curvature_const = 0.0;
    double dt = 0.0;
    double t_end = 0.0;
    int node_count = 0;
    double domain_length = 0.0;
    double cfl_const = 0.1;
    int component_count = 1;
    std::vector<int> monitor_set;  // Hamiltonian levels traced by monitor()

    double step_size() const { return domain_length / node_count; }
    void validate() const;  // throws config_error, including the CFL guard
};

// v, e_perp are row-major [node*component_count + c]; grid is implicit,
// l_j = j * config.step_size()
struct FlowState {
    double tau = 0.0;
    std::vector<double> v;
    std::vector<double> e_parallel;  // level -1 only
    std::vector<double> e_perp;      // level -1 only
};

struct Profile {
    std::string name = "zero";  // zero | soliton | kink | gaussian | file
    double k = 1.0;             // soliton / kink steepness
    double center = -1.0;       // peak position; negative = domain midpoint
    double width = 1.0;         // gaussian
    double amplitude = 1.0;     // gaussian
    std::string file;           // tabular initial data for name == "file"
};

struct TraceEntry {
    double tau = 0.0;
    std::vector<double> values;  // one integral per monitor_set entry
};

struct SgResidual {
    std::vector<double> residual;     // [node*component_count + c]
    std::vector<int> singular_nodes;  // |e_perp| too close to 1, excluded
    double max_abs = 0.0;             // over non-singular nodes
};

class FlowSolver {
  public:
    explicit FlowSolver(const SolverConfig& cfg);
    const SolverConfig& config() const { return cfg_; }

    FlowState initial_state(const Profile& profile) const;
    std::vector<double> rhs(const FlowState& state) const;
    void advance(FlowState& state) const;  // one step of size <= dt
    void advance_to(FlowState& state, double tau_end) const;
    TraceEntry monitor(const FlowState& state) const;

    // level -1 frame reconstruction from v (fills e_parallel, e_perp)
    void reconstruct(FlowState& state) const;

    // signed charge Q = D e_perp / e_par used by the residual; nodes with
    // |e_par| < eps are flagged in singular and their Q set to 0
    std::vector<double> sg_charge(const FlowState& state,
                                  std::vector<char>& singular) const;

    int derivative_order_needed() const { return max_order_; }

  private:
    SolverConfig cfg_;
    std::unique_ptr<DerivativeEngine> engine_;
    struct ScalarTerm {
        double c;
        std::vector<std::pair<int, int>> dots;
    };
    struct VectorTerm {
        double c;
        std::vector<std::pair<int, int>> dots;
        int ord;
    };
    std::vector<VectorTerm> rhs_terms_;
    std::vector<std::vector<ScalarTerm>> monitor_terms_;
    int max_order_ = 1;
    std::vector<double> sponge_;  // per-node damping rate, fractional only
    int quiet_ = 0;               // edge band width held quiet, fractional only

    void component_derivatives(const std::vector<double>& field, int max_order,
                               std::vector<std::vector<double>>& dv) const;
    std::vector<double> rhs_positive(const std::vector<double>& v) const;
    std::vector<double> rhs_minus1(const std::vector<double>& v) const;
    void step_positive(FlowState& state, double dt) const;
    void step_minus1(FlowState& state, double dt) const;
};

// single-call wrappers around FlowSolver for the common operations
std::vector<double> rhs_flow(const FlowState& state, const SolverConfig& cfg);
FlowState step(const FlowState& state, const SolverConfig& cfg);
FlowState step_minus1(const FlowState& state, const SolverConfig& cfg);
TraceEntry monitor(const FlowState& state, const SolverConfig& cfg);

// discrete residual of the level -1 constraint system between two states:
//   (Q(later) - Q(earlier)) / (later.tau - earlier.tau)
//     + curvature_const * (e_perp(earlier) + e_perp(later)) / 2
// with Q = D e_perp / e_par; vanishing e_par flags the node as singular
SgResidual sg_residual(const FlowState& earlier, const FlowState& later,
                       const SolverConfig& cfg);

// initial data from a whitespace table "node v1 .. vC"; throws io_error
FlowState load_initial_table(const SolverConfig& cfg, const std::string& path);

// one CSV frame: tau,node,v components and, when present, e_par,e_perp
void write_frame_csv(std::ostream& os, const FlowState& state,
                     const SolverConfig& cfg, bool with_header);

}  // namespace fracflow::flow
