#pragma once
// Spatial derivative backend for the 1-D flow solvers on uniform grids with
// nodes l_j = j*step.
//
// order = 1: periodic pseudospectral derivatives, (ik)^j multipliers on the
// real FFT, exact for band-limited data. The Nyquist mode of odd derivatives
// is zeroed to keep the output real.
//
// order < 1: left Caputo derivative with lower terminal 0, L1 scheme,
// iterated once per derivative order. Node 0 has no history and is reported
// as 0. Near integer order (alpha > 0.9) the leading O(h) composition error
// of the one-sided stencil is removed by deferred corrections,
//     d1 <- L1(f)   + g*(h/2)  * d2_c(f)/h^2
//     d3 <- L1^3(f) + g*(3h/2) * d4_c(f)/h^4
// with centered differences d2_c, d4_c and gate g = (alpha-0.9)/0.1. The
// correction cancels the real (dissipative) part of the one-sided symbol
// exactly, so near-integer fractional runs track the spectral ones.

#include <vector>

#include "fracflow/frac.hpp"

namespace fracflow::flow {

class DerivativeEngine {
  public:
    DerivativeEngine(frac::FractionalOrder order, int node_count, double step);
    ~DerivativeEngine();
    DerivativeEngine(const DerivativeEngine&) = delete;
    DerivativeEngine& operator=(const DerivativeEngine&) = delete;

    bool periodic() const { return order_.integer(); }
    int node_count() const { return n_; }
    double step() const { return h_; }

    // f has node_count entries; fills out[0..max_order-1] with the
    // derivatives of order 1..max_order
    void derivatives(const std::vector<double>& f, int max_order,
                     std::vector<std::vector<double>>& out) const;

  private:
    frac::FractionalOrder order_;
    int n_ = 0;
    double h_ = 0.0;
    frac::L1Weights l1_;
    // fftw state, kept as opaque pointers so the header stays light
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    double* rbuf_ = nullptr;
    void* cbuf_ = nullptr;

    void spectral_derivatives(const std::vector<double>& f, int max_order,
                              std::vector<std::vector<double>>& out) const;
    void caputo_derivatives(const std::vector<double>& f, int max_order,
                            std::vector<std::vector<double>>& out) const;
};

// centered difference helpers used by the deferred corrections and the
// high-frequency stabilizer; zero near the ends where the stencil is short
void centered_diff2(const std::vector<double>& f, std::vector<double>& out);
void centered_diff4(const std::vector<double>& f, std::vector<double>& out);
void centered_diff6(const std::vector<double>& f, std::vector<double>& out);

}  // namespace fracflow::flow
