#include "fracflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "fracflow/errors.hpp"

namespace fracflow::flow {

namespace {

// deferred-correction gate: full strength at alpha -> 1, off below 0.9 where
// the L1 truncation O(h^(2-a)) is smaller than the O(h) stencil being added
double correction_gate(double alpha) {
    const double g = (alpha - 0.9) / 0.1;
    return g < 0.0 ? 0.0 : (g > 1.0 ? 1.0 : g);
}

}  // namespace

DerivativeEngine::DerivativeEngine(frac::FractionalOrder order, int node_count,
                                   double step)
    : order_(order), n_(node_count), h_(step) {
    if (n_ < 8) throw config_error("derivative engine needs at least 8 nodes");
    if (!(h_ > 0.0)) throw config_error("derivative engine step must be positive");
    if (order_.integer()) {
        rbuf_ = fftw_alloc_real(static_cast<std::size_t>(n_));
        cbuf_ = fftw_alloc_complex(static_cast<std::size_t>(n_ / 2 + 1));
        auto* cb = static_cast<fftw_complex*>(cbuf_);
        plan_fwd_ = fftw_plan_dft_r2c_1d(n_, rbuf_, cb, FFTW_ESTIMATE);
        plan_bwd_ = fftw_plan_dft_c2r_1d(n_, cb, rbuf_, FFTW_ESTIMATE);
        if (plan_fwd_ == nullptr || plan_bwd_ == nullptr)
            throw numeric_error("fftw plan creation failed");
    } else {
        l1_ = frac::l1_weights(order_, h_, static_cast<std::size_t>(n_));
    }
}

DerivativeEngine::~DerivativeEngine() {
    if (plan_fwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    if (rbuf_ != nullptr) fftw_free(rbuf_);
    if (cbuf_ != nullptr) fftw_free(static_cast<fftw_complex*>(cbuf_));
}

void DerivativeEngine::derivatives(const std::vector<double>& f, int max_order,
                                   std::vector<std::vector<double>>& out) const {
    if (static_cast<int>(f.size()) != n_)
        throw config_error("derivative input has wrong node count");
    if (max_order < 1) throw config_error("derivative order must be >= 1");
    out.assign(static_cast<std::size_t>(max_order), std::vector<double>());
    if (order_.integer())
        spectral_derivatives(f, max_order, out);
    else
        caputo_derivatives(f, max_order, out);
}

void DerivativeEngine::spectral_derivatives(
    const std::vector<double>& f, int max_order,
    std::vector<std::vector<double>>& out) const {
    const int nc = n_ / 2 + 1;
    auto* cb = static_cast<fftw_complex*>(cbuf_);
    std::memcpy(rbuf_, f.data(), sizeof(double) * static_cast<std::size_t>(n_));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::vector<std::complex<double>> base(static_cast<std::size_t>(nc));
    for (int m = 0; m < nc; ++m) base[m] = {cb[m][0], cb[m][1]};

    const double k0 = 2.0 * M_PI / (h_ * n_);
    const double inv_n = 1.0 / n_;
    for (int j = 1; j <= max_order; ++j) {
        for (int m = 0; m < nc; ++m) {
            const double k = k0 * m;
            double kj = 1.0;
            for (int p = 0; p < j; ++p) kj *= k;
            // i^j cycle: 1, i, -1, -i
            std::complex<double> mult;
            switch (j & 3) {
                case 0: mult = {kj, 0.0}; break;
                case 1: mult = {0.0, kj}; break;
                case 2: mult = {-kj, 0.0}; break;
                default: mult = {0.0, -kj}; break;
            }
            // odd derivatives have no consistent real Nyquist image
            if ((j & 1) != 0 && n_ % 2 == 0 && m == n_ / 2) mult = 0.0;
            const std::complex<double> z = base[static_cast<std::size_t>(m)] * mult;
            cb[m][0] = z.real();
            cb[m][1] = z.imag();
        }
        fftw_execute(static_cast<fftw_plan>(plan_bwd_));
        auto& dst = out[static_cast<std::size_t>(j - 1)];
        dst.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) dst[static_cast<std::size_t>(i)] = rbuf_[i] * inv_n;
    }
}

void DerivativeEngine::caputo_derivatives(
    const std::vector<double>& f, int max_order,
    std::vector<std::vector<double>>& out) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    const double* prev = f.data();
    for (int j = 1; j <= max_order; ++j) {
        auto& u = out[static_cast<std::size_t>(j - 1)];
        u.assign(n, 0.0);
        // u[k] = scale * sum_{i=0}^{k-1} w[i] * (prev[k-i] - prev[k-i-1])
        for (std::size_t k = 1; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i)
                acc += l1_.w[i] * (prev[k - i] - prev[k - i - 1]);
            u[k] = l1_.scale * acc;
        }
        prev = u.data();
    }

    const double g = correction_gate(order_.value());
    if (g > 0.0) {
        std::vector<double> d;
        if (max_order >= 1) {
            centered_diff2(f, d);
            const double c = g * 0.5 / h_;  // (h/2) / h^2
            for (std::size_t k = 0; k < n; ++k) out[0][k] += c * d[k];
        }
        if (max_order >= 3) {
            centered_diff4(f, d);
            const double c = g * 1.5 / (h_ * h_ * h_);  // (3h/2) / h^4
            for (std::size_t k = 0; k < n; ++k) out[2][k] += c * d[k];
        }
    }
}

void centered_diff2(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t n = f.size();
    out.assign(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = f[j - 1] - 2.0 * f[j] + f[j + 1];
}

void centered_diff4(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t n = f.size();
    out.assign(n, 0.0);
    for (std::size_t j = 2; j + 2 < n; ++j)
        out[j] = f[j - 2] - 4.0 * f[j - 1] + 6.0 * f[j] - 4.0 * f[j + 1] + f[j + 2];
}

void centered_diff6(const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t n = f.size();
    out.assign(n, 0.0);
    for (std::size_t j = 3; j + 3 < n; ++j)
        out[j] = f[j - 3] - 6.0 * f[j - 2] + 15.0 * f[j - 1] - 20.0 * f[j] +
                 15.0 * f[j + 1] - 6.0 * f[j + 2] + f[j + 3];
}

}  // namespace fracflow::flow
