#pragma once
// Left Caputo derivative of order alpha in (0,1], lower terminal 0.
//
// Continuous definition (one smooth derivative taken inside the kernel):
//   D^a f(x) = 1/Gamma(1-a) * int_0^x (x-t)^(-a) f'(t) dt,   0 < a < 1,
// with the a = 1 limit being the ordinary derivative. On sampled data the
// integral is evaluated with the L1 scheme (piecewise-linear history), whose
// truncation error is O(h^(2-a)) for smooth f.

#include <cstddef>
#include <vector>

namespace fracflow::frac {

// Derivative order. Constructor validates 0 < alpha <= 1.
class FractionalOrder {
  public:
    explicit FractionalOrder(double alpha);
    double value() const { return alpha_; }
    bool integer() const { return alpha_ == 1.0; }

  private:
    double alpha_;
};

// c * x^p restricted to x >= 0.
struct PowerTerm {
    double coeff;
    double exponent;  // p >= 0
};

// Uniformly sampled f on [0, step*(values.size()-1)], lower terminal at 0.
struct SampledFunction {
    double step;
    std::vector<double> values;
};

double gamma_fn(double x);

// Closed form on power functions:
//   D^a (c x^p) = c * Gamma(p+1)/Gamma(p+1-a) * x^(p-a)   for p > 0,
//   D^a (c)     = 0.
// Throws config_error for p < 0, and for x = 0 when p - a < 0 (the value is
// singular at the terminal).
double caputo_power(const FractionalOrder& order, const PowerTerm& term, double x);

// L1 evaluation at node `index` of the sampled grid. Requires index >= 1 for
// a < 1 (no history at the terminal itself). For a = 1 falls back to exact
// integer calculus: centered second-order differences in the interior and
// one-sided second-order stencils at both ends (index 0 allowed).
double caputo_sampled(const FractionalOrder& order, const SampledFunction& f,
                      std::size_t index);

// x^(1-a) / Gamma(2-a): the factor relating the fractional differential to
// the coordinate differential. Equals 1 identically at a = 1 and vanishes at
// x = 0 for a < 1.
double frac_differential_coeff(const FractionalOrder& order, double x);

// Precomputed L1 convolution weights for repeated application on one grid:
//   D^a f(x_k) ~= scale * sum_{j=0}^{k-1} w[j] * (f[k-j] - f[k-j-1]),
// w[j] = (j+1)^(1-a) - j^(1-a), scale = h^(-a)/Gamma(2-a).
struct L1Weights {
    double scale;
    std::vector<double> w;
};
L1Weights l1_weights(const FractionalOrder& order, double step, std::size_t count);

}  // namespace fracflow::frac
