#include "fracflow/frac.hpp"

#include <cmath>
#include <string>

#include "fracflow/errors.hpp"

namespace fracflow::frac {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw config_error("fractional order must satisfy 0 < alpha <= 1, got " +
                           std::to_string(alpha));
}

double gamma_fn(double x) {
    if (!(x > 0.0)) throw config_error("gamma_fn requires positive argument");
    return std::tgamma(x);
}

double caputo_power(const FractionalOrder& order, const PowerTerm& term, double x) {
    if (x < 0.0) throw config_error("caputo_power: x must be >= 0");
    if (term.exponent < 0.0) throw config_error("caputo_power: exponent must be >= 0");
    const double p = term.exponent;
    if (p == 0.0) return 0.0;  // constants are annihilated
    const double a = order.value();
    if (order.integer()) {
        // exact first derivative c*p*x^(p-1)
        if (x == 0.0 && p < 1.0) throw config_error("caputo_power: singular at x = 0");
        return term.coeff * p * ((p == 1.0) ? 1.0 : std::pow(x, p - 1.0));
    }
    const double q = p - a;
    if (x == 0.0) {
        if (q < 0.0) throw config_error("caputo_power: singular at x = 0");
        if (q == 0.0) return term.coeff * gamma_fn(p + 1.0);
        return 0.0;
    }
    return term.coeff * gamma_fn(p + 1.0) / gamma_fn(p + 1.0 - a) * std::pow(x, q);
}

L1Weights l1_weights(const FractionalOrder& order, double step, std::size_t count) {
    if (!(step > 0.0)) throw config_error("l1_weights: step must be positive");
    const double a = order.value();
    L1Weights lw;
    lw.scale = std::pow(step, -a) / gamma_fn(2.0 - a);
    lw.w.resize(count);
    const double e = 1.0 - a;
    for (std::size_t j = 0; j < count; ++j)
        lw.w[j] = std::pow(double(j + 1), e) - std::pow(double(j), e);
    return lw;
}

double caputo_sampled(const FractionalOrder& order, const SampledFunction& f,
                      std::size_t index) {
    const std::size_t n = f.values.size();
    if (n < 3) throw config_error("caputo_sampled: need at least 3 samples");
    if (!(f.step > 0.0)) throw config_error("caputo_sampled: step must be positive");
    if (index >= n) throw config_error("caputo_sampled: index out of range");
    const double h = f.step;
    const auto& v = f.values;

    if (order.integer()) {
        // second-order finite differences; one-sided at both boundaries
        if (index == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        if (index == n - 1)
            return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        return (v[index + 1] - v[index - 1]) / (2.0 * h);
    }

    if (index < 1)
        throw config_error("caputo_sampled: index must be >= 1 for alpha < 1");
    const L1Weights lw = l1_weights(order, h, index);
    double acc = 0.0;
    for (std::size_t j = 0; j < index; ++j)
        acc += lw.w[j] * (v[index - j] - v[index - j - 1]);
    return lw.scale * acc;
}

double frac_differential_coeff(const FractionalOrder& order, double x) {
    if (x < 0.0) throw config_error("frac_differential_coeff: x must be >= 0");
    if (order.integer()) return 1.0;
    const double a = order.value();
    if (x == 0.0) return 0.0;
    return std::pow(x, 1.0 - a) / gamma_fn(2.0 - a);
}

}  // namespace fracflow::frac
