#include "fracflow/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracflow/errors.hpp"

namespace fracflow::geom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> counts_of(const ChartSpec& chart) {
    std::vector<int> r;
    r.reserve(chart.axes.size());
    for (const AxisSpec& a : chart.axes) r.push_back(a.count);
    return r;
}

// walk only the defined window [lo, count - hi) of every axis
template <typename F>
void for_each_window(const std::vector<int>& counts, const std::vector<int>& lo,
                     const std::vector<int>& hi, F&& fn) {
    std::vector<int> idx(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        idx[k] = lo[k];
        if (idx[k] >= counts[k] - hi[k]) return;
    }
    while (true) {
        fn(idx);
        int k = int(counts.size()) - 1;
        for (; k >= 0; --k) {
            if (++idx[k] < counts[k] - hi[k]) break;
            idx[k] = lo[k];
        }
        if (k < 0) return;
    }
}

bool structurally_zero(const GridField& f) {
    for (int l : f.lo)
        if (l) return false;
    for (int h : f.hi)
        if (h) return false;
    for (double x : f.raw())
        if (x != 0.0) return false;
    return true;
}

// elementwise accumulator; NaN margins propagate, margins merge
struct Accum {
    GridField f;
    explicit Accum(GridField init) : f(std::move(init)) {}
    void add(const GridField& x, double s) {
        for (std::size_t p = 0; p < f.size(); ++p) f.raw()[p] += s * x.raw()[p];
        f.absorb_margins(x);
    }
    void add_prod(const GridField& x, const GridField& y, double s) {
        for (std::size_t p = 0; p < f.size(); ++p)
            f.raw()[p] += s * x.raw()[p] * y.raw()[p];
        f.absorb_margins(x);
        f.absorb_margins(y);
    }
};

Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& a, const char* what) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (!std::isfinite(smax) || !(smin > 0.0) || smax / smin > 1e10)
        throw numeric_error(std::string(what) + ": metric block ill-conditioned");
    return svd.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace

std::size_t ChartSpec::node_count() const {
    std::size_t total = 1;
    for (const AxisSpec& a : axes) total *= std::size_t(a.count);
    return total;
}

void ChartSpec::validate() const {
    if (n < 1 || m < 1) throw config_error("chart: need n >= 1 and m >= 1");
    if (int(axes.size()) != n + m)
        throw config_error("chart: axis list must have n + m entries");
    for (const AxisSpec& a : axes) {
        if (!(a.step > 0.0)) throw config_error("chart: axis step must be positive");
        if (a.count < 5) throw config_error("chart: axis count must be at least 5");
    }
}

std::size_t flat_index(const std::vector<int>& counts, const std::vector<int>& idx) {
    std::size_t p = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        p = p * std::size_t(counts[k]) + std::size_t(idx[k]);
    return p;
}

bool advance_index(const std::vector<int>& counts, std::vector<int>& idx) {
    for (int k = int(counts.size()) - 1; k >= 0; --k) {
        if (++idx[std::size_t(k)] < counts[std::size_t(k)]) return true;
        idx[std::size_t(k)] = 0;
    }
    return false;
}

GridField::GridField(std::vector<int> counts, double value)
    : lo(counts.size(), 0), hi(counts.size(), 0), counts_(std::move(counts)) {
    std::size_t total = 1;
    for (int c : counts_) total *= std::size_t(c);
    v_.assign(total, value);
}

bool GridField::defined(const std::vector<int>& idx) const {
    for (std::size_t k = 0; k < counts_.size(); ++k)
        if (idx[k] < lo[k] || idx[k] >= counts_[k] - hi[k]) return false;
    return true;
}

void GridField::absorb_margins(const GridField& src) {
    for (std::size_t k = 0; k < lo.size(); ++k) {
        lo[k] = std::max(lo[k], src.lo[k]);
        hi[k] = std::max(hi[k], src.hi[k]);
    }
}

GridField coordinate_field(const ChartSpec& chart, int axis) {
    GridField f(counts_of(chart));
    std::vector<int> idx(chart.axes.size(), 0);
    do {
        f.at(idx) = chart.coord(axis, idx[std::size_t(axis)]);
    } while (advance_index(f.counts(), idx));
    return f;
}

GridField axis_derivative(const ChartSpec& chart, const GridField& f, int axis) {
    const std::vector<int>& counts = f.counts();
    const int cnt = counts[std::size_t(axis)];
    const int base_lo = f.lo[std::size_t(axis)];
    const bool integer = chart.order.integer();
    const int sub_len = cnt - base_lo;

    GridField out(counts, kNaN);
    out.lo = f.lo;
    out.hi = f.hi;
    out.lo[std::size_t(axis)] = base_lo + 1;
    if (integer) out.hi[std::size_t(axis)] = f.hi[std::size_t(axis)] + 1;
    const int k_lo = out.lo[std::size_t(axis)];
    const int k_hi = cnt - out.hi[std::size_t(axis)];
    if (sub_len < 3 || k_lo >= k_hi)
        throw numeric_error("axis_derivative: stencil exhausted along axis " +
                            std::to_string(axis));

    std::size_t stride = 1;
    for (std::size_t k = std::size_t(axis) + 1; k < counts.size(); ++k)
        stride *= std::size_t(counts[k]);

    frac::SampledFunction line{chart.axes[std::size_t(axis)].step,
                               std::vector<double>(std::size_t(sub_len))};

    std::vector<int> rcounts;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (int(k) != axis) rcounts.push_back(counts[k]);
    std::vector<int> ridx(rcounts.size(), 0);
    std::vector<int> full(counts.size(), 0);
    do {
        std::size_t t = 0;
        for (std::size_t k = 0; k < counts.size(); ++k)
            full[k] = (int(k) == axis) ? 0 : ridx[t++];
        const std::size_t base = flat_index(counts, full);
        for (int s = 0; s < sub_len; ++s)
            line.values[std::size_t(s)] =
                f.raw()[base + std::size_t(base_lo + s) * stride];
        for (int k = k_lo; k < k_hi; ++k)
            out.raw()[base + std::size_t(k) * stride] =
                frac::caputo_sampled(chart.order, line, std::size_t(k - base_lo));
    } while (advance_index(rcounts, ridx));
    return out;
}

GridField n_adapted_derivative(const ChartSpec& chart, const NConnection& nc,
                               const GridField& f, int direction) {
    if (direction < 0 || direction >= chart.dim())
        throw config_error("n_adapted_derivative: direction out of range");
    GridField out = axis_derivative(chart, f, direction);
    if (direction >= chart.n) return out;
    for (int a = 0; a < chart.m; ++a) {
        const GridField da = axis_derivative(chart, f, chart.n + a);
        const GridField& nf = nc.of(direction, a);
        for (std::size_t p = 0; p < out.size(); ++p)
            out.raw()[p] -= nf.raw()[p] * da.raw()[p];
        out.absorb_margins(da);
        out.absorb_margins(nf);
    }
    return out;
}

double n_adapted_derivative_at(const ChartSpec& chart, const NConnection& nc,
                               const GridField& f, int direction,
                               const std::vector<int>& node) {
    const GridField g = n_adapted_derivative(chart, nc, f, direction);
    if (!g.defined(node))
        throw config_error("n_adapted_derivative: stencil out of range at node");
    return g.at(node);
}

void DMetric::validate(const ChartSpec& chart) const {
    if (n != chart.n || m != chart.m)
        throw config_error("metric: dimension mismatch with chart");
    if (int(h.size()) != n * n || int(v.size()) != m * m)
        throw config_error("metric: block size mismatch");
    std::vector<int> idx(chart.axes.size(), 0);
    Eigen::MatrixXd gh(n, n), gv(m, m);
    const std::vector<int> counts = counts_of(chart);
    do {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double x = hof(j, k).at(idx);
                if (!std::isfinite(x)) throw config_error("metric: non-finite h entry");
                if (std::abs(x - hof(k, j).at(idx)) >
                    1e-12 * std::max(1.0, std::abs(x)))
                    throw config_error("metric: h block not symmetric");
                gh(j, k) = x;
            }
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                const double x = vof(b, c).at(idx);
                if (!std::isfinite(x)) throw config_error("metric: non-finite v entry");
                if (std::abs(x - vof(c, b).at(idx)) >
                    1e-12 * std::max(1.0, std::abs(x)))
                    throw config_error("metric: v block not symmetric");
                gv(b, c) = x;
            }
        if (std::abs(gh.determinant()) <= 1e-10 || std::abs(gv.determinant()) <= 1e-10)
            throw config_error("metric: near-singular block at a node");
    } while (advance_index(counts, idx));
}

DConnection canonical_dconnection(const ChartSpec& chart, const NConnection& nc,
                                  const DMetric& g) {
    chart.validate();
    g.validate(chart);
    const int n = chart.n, m = chart.m;
    const std::vector<int> counts = counts_of(chart);

    // derivative tables, all n-adapted (frame) derivatives
    std::vector<GridField> ehg_h(std::size_t(n) * n * n);  // e_k g_jr [(k*n+j)*n+r]
    std::vector<GridField> evg_h(std::size_t(m) * n * n);  // e_c g_jk [(c*n+j)*n+k]
    std::vector<GridField> ehg_v(std::size_t(n) * m * m);  // e_k g_bc [(k*m+b)*m+c]
    std::vector<GridField> evg_v(std::size_t(m) * m * m);  // e_c g_bd [(c*m+b)*m+d]
    std::vector<GridField> evn(std::size_t(m) * n * m);    // e_b N_k^d [(b*n+k)*m+d]

    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int r = j; r < n; ++r) {
                GridField fd = n_adapted_derivative(chart, nc, g.hof(j, r), k);
                if (r != j) ehg_h[std::size_t(k * n + r) * n + j] = fd;
                ehg_h[std::size_t(k * n + j) * n + r] = std::move(fd);
            }
    for (int c = 0; c < m; ++c)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                GridField fd =
                    n_adapted_derivative(chart, nc, g.hof(j, k), chart.n + c);
                if (k != j) evg_h[std::size_t(c * n + k) * n + j] = fd;
                evg_h[std::size_t(c * n + j) * n + k] = std::move(fd);
            }
    for (int k = 0; k < n; ++k)
        for (int b = 0; b < m; ++b)
            for (int c = b; c < m; ++c) {
                GridField fd = n_adapted_derivative(chart, nc, g.vof(b, c), k);
                if (c != b) ehg_v[std::size_t(k * m + c) * m + b] = fd;
                ehg_v[std::size_t(k * m + b) * m + c] = std::move(fd);
            }
    for (int c = 0; c < m; ++c)
        for (int b = 0; b < m; ++b)
            for (int e = b; e < m; ++e) {
                GridField fd =
                    n_adapted_derivative(chart, nc, g.vof(b, e), chart.n + c);
                if (e != b) evg_v[std::size_t(c * m + e) * m + b] = fd;
                evg_v[std::size_t(c * m + b) * m + e] = std::move(fd);
            }
    for (int b = 0; b < m; ++b)
        for (int k = 0; k < n; ++k)
            for (int d = 0; d < m; ++d)
                evn[std::size_t(b * n + k) * m + d] =
                    n_adapted_derivative(chart, nc, nc.of(k, d), chart.n + b);

    // common defined window of every table entry
    GridField window(counts, 0.0);
    auto widen = [&](const std::vector<GridField>& fs) {
        for (const GridField& f : fs) window.absorb_margins(f);
    };
    widen(ehg_h);
    widen(evg_h);
    widen(ehg_v);
    widen(evg_v);
    widen(evn);

    DConnection out;
    out.n = n;
    out.m = m;
    auto blank = [&](std::size_t sz) {
        std::vector<GridField> fs(sz, GridField(counts, kNaN));
        for (GridField& f : fs) {
            f.lo = window.lo;
            f.hi = window.hi;
        }
        return fs;
    };
    out.l_h = blank(std::size_t(n) * n * n);
    out.l_v = blank(std::size_t(m) * m * n);
    out.c_h = blank(std::size_t(n) * n * m);
    out.c_v = blank(std::size_t(m) * m * m);

    Eigen::MatrixXd gh(n, n), gv(m, m);
    for_each_window(counts, window.lo, window.hi, [&](const std::vector<int>& idx) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) gh(j, k) = g.hof(j, k).at(idx);
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) gv(b, c) = g.vof(b, c).at(idx);
        const Eigen::MatrixXd ghi = guarded_inverse(gh, "canonical_dconnection");
        const Eigen::MatrixXd gvi = guarded_inverse(gv, "canonical_dconnection");

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int r = 0; r < n; ++r)
                        s += ghi(i, r) *
                             (ehg_h[std::size_t(k * n + j) * n + r].at(idx) +
                              ehg_h[std::size_t(j * n + k) * n + r].at(idx) -
                              ehg_h[std::size_t(r * n + j) * n + k].at(idx));
                    out.l_h[std::size_t(i * n + j) * n + k].at(idx) = 0.5 * s;
                }

        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int c = 0; c < m; ++c) {
                        double t = ehg_v[std::size_t(k * m + b) * m + c].at(idx);
                        for (int d = 0; d < m; ++d) {
                            t -= gv(d, c) * evn[std::size_t(b * n + k) * m + d].at(idx);
                            t -= gv(d, b) * evn[std::size_t(c * n + k) * m + d].at(idx);
                        }
                        s += gvi(a, c) * t;
                    }
                    out.l_v[std::size_t(a * m + b) * n + k].at(idx) =
                        evn[std::size_t(b * n + k) * m + a].at(idx) + 0.5 * s;
                }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int c = 0; c < m; ++c) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k)
                        s += ghi(i, k) * evg_h[std::size_t(c * n + j) * n + k].at(idx);
                    out.c_h[std::size_t(i * n + j) * m + c].at(idx) = 0.5 * s;
                }

        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) {
                    double s = 0.0;
                    for (int d = 0; d < m; ++d)
                        s += gvi(a, d) *
                             (evg_v[std::size_t(c * m + b) * m + d].at(idx) +
                              evg_v[std::size_t(b * m + c) * m + d].at(idx) -
                              evg_v[std::size_t(d * m + b) * m + c].at(idx));
                    out.c_v[std::size_t(a * m + b) * m + c].at(idx) = 0.5 * s;
                }
    });
    return out;
}

std::vector<GridField> full_connection(const ChartSpec& chart, const DConnection& c) {
    const int n = chart.n, m = chart.m, d = chart.dim();
    const std::vector<int> counts = counts_of(chart);
    std::vector<GridField> full(std::size_t(d) * d * d, GridField(counts, 0.0));
    auto slot = [&](int t, int b, int g) -> GridField& {
        return full[(std::size_t(t) * d + std::size_t(b)) * d + std::size_t(g)];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k)
                slot(i, j, k) = c.l_h[std::size_t(i * n + j) * n + k];
            for (int e = 0; e < m; ++e)
                slot(i, j, n + e) = c.c_h[std::size_t(i * n + j) * m + e];
        }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            for (int k = 0; k < n; ++k)
                slot(n + a, n + b, k) = c.l_v[std::size_t(a * m + b) * n + k];
            for (int e = 0; e < m; ++e)
                slot(n + a, n + b, n + e) = c.c_v[std::size_t(a * m + b) * m + e];
        }
    return full;
}

std::vector<GridField> anholonomy(const ChartSpec& chart, const NConnection& nc) {
    const int d = chart.dim();
    const std::vector<int> counts = counts_of(chart);

    std::vector<GridField> frame(std::size_t(d) * d);  // M_s^dd = e_s(u^dd)
    for (int dd = 0; dd < d; ++dd) {
        const GridField u = coordinate_field(chart, dd);
        for (int s = 0; s < d; ++s)
            frame[std::size_t(s) * d + dd] = n_adapted_derivative(chart, nc, u, s);
    }

    GridField window(counts, 0.0);
    for (const GridField& f : frame) window.absorb_margins(f);

    // commutator values on coordinate functions, lower triangle b < g
    std::vector<GridField> comm(std::size_t(d) * d * d, GridField());
    for (int b = 0; b < d; ++b)
        for (int g = b + 1; g < d; ++g)
            for (int dd = 0; dd < d; ++dd) {
                GridField t1 = n_adapted_derivative(
                    chart, nc, frame[std::size_t(g) * d + dd], b);
                const GridField t2 = n_adapted_derivative(
                    chart, nc, frame[std::size_t(b) * d + dd], g);
                for (std::size_t p = 0; p < t1.size(); ++p)
                    t1.raw()[p] -= t2.raw()[p];
                t1.absorb_margins(t2);
                window.absorb_margins(t1);
                comm[(std::size_t(b) * d + std::size_t(g)) * d + std::size_t(dd)] =
                    std::move(t1);
            }

    std::vector<GridField> w(std::size_t(d) * d * d, GridField(counts, kNaN));
    for (GridField& f : w) {
        f.lo = window.lo;
        f.hi = window.hi;
    }
    auto wslot = [&](int s, int b, int g) -> GridField& {
        return w[(std::size_t(s) * d + std::size_t(b)) * d + std::size_t(g)];
    };

    Eigen::MatrixXd mt(d, d);
    Eigen::VectorXd cv(d);
    for_each_window(counts, window.lo, window.hi, [&](const std::vector<int>& idx) {
        for (int s = 0; s < d; ++s)
            for (int dd = 0; dd < d; ++dd)
                mt(dd, s) = frame[std::size_t(s) * d + dd].at(idx);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(mt);
        if (std::abs(lu.determinant()) < 1e-12)
            throw numeric_error("anholonomy: frame matrix singular at a node");
        for (int b = 0; b < d; ++b) {
            for (int g = b + 1; g < d; ++g) {
                for (int dd = 0; dd < d; ++dd)
                    cv(dd) =
                        comm[(std::size_t(b) * d + std::size_t(g)) * d + dd].at(idx);
                const Eigen::VectorXd sol = lu.solve(cv);
                for (int s = 0; s < d; ++s) {
                    wslot(s, b, g).at(idx) = sol(s);
                    wslot(s, g, b).at(idx) = -sol(s);
                }
            }
            wslot(b, b, b).at(idx) = 0.0;
            for (int s = 0; s < d; ++s) wslot(s, b, b).at(idx) = 0.0;
        }
    });
    return w;
}

std::vector<GridField> torsion(const ChartSpec& chart, const NConnection& nc,
                               const DConnection& conn) {
    const int d = chart.dim();
    const std::vector<GridField> gam = full_connection(chart, conn);
    const std::vector<GridField> w = anholonomy(chart, nc);
    auto at3 = [&](const std::vector<GridField>& v, int t, int b, int g)
        -> const GridField& {
        return v[(std::size_t(t) * d + std::size_t(b)) * d + std::size_t(g)];
    };
    std::vector<GridField> out;
    out.reserve(std::size_t(d) * d * d);
    for (int t = 0; t < d; ++t)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) {
                Accum acc(at3(gam, t, g, b));
                acc.add(at3(gam, t, b, g), -1.0);
                acc.add(at3(w, t, b, g), -1.0);
                out.push_back(std::move(acc.f));
            }
    return out;
}

std::vector<GridField> curvature(const ChartSpec& chart, const NConnection& nc,
                                 const DConnection& conn) {
    const int d = chart.dim();
    const std::vector<int> counts = counts_of(chart);
    const std::vector<GridField> gam = full_connection(chart, conn);
    const std::vector<GridField> w = anholonomy(chart, nc);
    auto at3 = [&](const std::vector<GridField>& v, int t, int b, int g)
        -> const GridField& {
        return v[(std::size_t(t) * d + std::size_t(b)) * d + std::size_t(g)];
    };

    // frame derivatives of every connection entry; zero blocks stay zero
    const GridField zero(counts, 0.0);
    std::vector<GridField> egam(std::size_t(d) * d * d * d);
    for (int dir = 0; dir < d; ++dir)
        for (std::size_t q = 0; q < gam.size(); ++q)
            egam[std::size_t(dir) * gam.size() + q] =
                structurally_zero(gam[q])
                    ? zero
                    : n_adapted_derivative(chart, nc, gam[q], dir);
    auto eg = [&](int dir, int t, int b, int g) -> const GridField& {
        return egam[std::size_t(dir) * gam.size() +
                    (std::size_t(t) * d + std::size_t(b)) * d + std::size_t(g)];
    };

    /*
      R^t_bgd = e_d(G^t_bg) - e_g(G^t_bd)
              + G^s_bg G^t_sd - G^s_bd G^t_sg + W^s_gd G^t_bs
    */
    std::vector<GridField> out;
    out.reserve(std::size_t(d) * d * d * d);
    for (int t = 0; t < d; ++t)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g)
                for (int dd = 0; dd < d; ++dd) {
                    Accum acc(eg(dd, t, b, g));
                    acc.add(eg(g, t, b, dd), -1.0);
                    for (int s = 0; s < d; ++s) {
                        acc.add_prod(at3(gam, s, b, g), at3(gam, t, s, dd), 1.0);
                        acc.add_prod(at3(gam, s, b, dd), at3(gam, t, s, g), -1.0);
                        acc.add_prod(at3(w, s, g, dd), at3(gam, t, b, s), 1.0);
                    }
                    out.push_back(std::move(acc.f));
                }
    return out;
}

RicciBlocks ricci_scalar_einstein(const ChartSpec& chart, const DMetric& g,
                                  const std::vector<GridField>& riemann) {
    const int n = chart.n, m = chart.m, d = chart.dim();
    const std::vector<int> counts = counts_of(chart);
    auto r4 = [&](int t, int b, int gg, int dd) -> const GridField& {
        return riemann[((std::size_t(t) * d + std::size_t(b)) * d + std::size_t(gg)) *
                           d +
                       std::size_t(dd)];
    };

    RicciBlocks out;
    out.ricci.reserve(std::size_t(d) * d);
    GridField window(counts, 0.0);
    for (int b = 0; b < d; ++b)
        for (int gg = 0; gg < d; ++gg) {
            Accum acc(r4(0, b, gg, 0));
            for (int t = 1; t < d; ++t) acc.add(r4(t, b, gg, t), 1.0);
            window.absorb_margins(acc.f);
            out.ricci.push_back(std::move(acc.f));
        }

    auto blank = [&]() {
        GridField f(counts, kNaN);
        f.lo = window.lo;
        f.hi = window.hi;
        return f;
    };
    out.ricci_h = blank();
    out.ricci_v = blank();
    out.scalar = blank();
    out.einstein.assign(std::size_t(d) * d, blank());

    Eigen::MatrixXd gh(n, n), gv(m, m);
    for_each_window(counts, window.lo, window.hi, [&](const std::vector<int>& idx) {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) gh(j, k) = g.hof(j, k).at(idx);
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) gv(b, c) = g.vof(b, c).at(idx);
        const Eigen::MatrixXd ghi = guarded_inverse(gh, "ricci_scalar_einstein");
        const Eigen::MatrixXd gvi = guarded_inverse(gv, "ricci_scalar_einstein");
        double hr = 0.0, vs = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                hr += ghi(i, j) * out.ricci[std::size_t(i) * d + j].at(idx);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                vs += gvi(a, b) *
                      out.ricci[std::size_t(n + a) * d + (n + b)].at(idx);
        out.ricci_h.at(idx) = hr;
        out.ricci_v.at(idx) = vs;
        const double sr = hr + vs;
        out.scalar.at(idx) = sr;
        for (int b = 0; b < d; ++b)
            for (int gg = 0; gg < d; ++gg) {
                double gbg = 0.0;
                if (b < n && gg < n) gbg = gh(b, gg);
                if (b >= n && gg >= n) gbg = gv(b - n, gg - n);
                out.einstein[std::size_t(b) * d + gg].at(idx) =
                    out.ricci[std::size_t(b) * d + gg].at(idx) - 0.5 * gbg * sr;
            }
    });
    return out;
}

CurvatureBundle analyze(const ChartSpec& chart, const NConnection& nc,
                        const DMetric& g) {
    const DConnection conn = canonical_dconnection(chart, nc, g);
    CurvatureBundle cb;
    cb.torsion = torsion(chart, nc, conn);
    cb.riemann = curvature(chart, nc, conn);
    cb.blocks = ricci_scalar_einstein(chart, g, cb.riemann);
    return cb;
}

double metric_compat_residual(const ChartSpec& chart, const NConnection& nc,
                              const DMetric& g, const DConnection& conn) {
    const int n = chart.n, m = chart.m;
    double worst = 0.0;
    auto track = [&](const GridField& f) {
        for_each_window(f.counts(), f.lo, f.hi, [&](const std::vector<int>& idx) {
            worst = std::max(worst, std::abs(f.at(idx)));
        });
    };

    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Accum acc(n_adapted_derivative(chart, nc, g.hof(i, j), k));
                for (int r = 0; r < n; ++r) {
                    acc.add_prod(conn.l_h[std::size_t(r * n + i) * n + k], g.hof(r, j),
                                 -1.0);
                    acc.add_prod(conn.l_h[std::size_t(r * n + j) * n + k], g.hof(i, r),
                                 -1.0);
                }
                track(acc.f);
            }
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                Accum acc(n_adapted_derivative(chart, nc, g.vof(a, b), k));
                for (int c = 0; c < m; ++c) {
                    acc.add_prod(conn.l_v[std::size_t(c * m + a) * n + k], g.vof(c, b),
                                 -1.0);
                    acc.add_prod(conn.l_v[std::size_t(c * m + b) * n + k], g.vof(a, c),
                                 -1.0);
                }
                track(acc.f);
            }
    }
    for (int c = 0; c < m; ++c) {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Accum acc(n_adapted_derivative(chart, nc, g.hof(i, j), n + c));
                for (int r = 0; r < n; ++r) {
                    acc.add_prod(conn.c_h[std::size_t(r * n + i) * m + c], g.hof(r, j),
                                 -1.0);
                    acc.add_prod(conn.c_h[std::size_t(r * n + j) * m + c], g.hof(i, r),
                                 -1.0);
                }
                track(acc.f);
            }
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                Accum acc(n_adapted_derivative(chart, nc, g.vof(a, b), n + c));
                for (int e = 0; e < m; ++e) {
                    acc.add_prod(conn.c_v[std::size_t(e * m + a) * m + c], g.vof(e, b),
                                 -1.0);
                    acc.add_prod(conn.c_v[std::size_t(e * m + b) * m + c], g.vof(a, e),
                                 -1.0);
                }
                track(acc.f);
            }
    }
    return worst;
}

std::vector<GridField> levi_civita_full(const ChartSpec& chart,
                                        const NConnection& nc, const DMetric& g) {
    const int n = chart.n, m = chart.m, d = chart.dim();
    const std::vector<int> counts = counts_of(chart);

    // lifted coordinate-frame metric
    std::vector<GridField> gf(std::size_t(d) * d, GridField(counts, 0.0));
    auto gslot = [&](int a, int b) -> GridField& {
        return gf[std::size_t(a) * d + std::size_t(b)];
    };
    std::vector<int> idx(counts.size(), 0);
    do {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = g.hof(i, j).at(idx);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        s += nc.of(i, a).at(idx) * nc.of(j, b).at(idx) *
                             g.vof(a, b).at(idx);
                gslot(i, j).at(idx) = s;
            }
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < m; ++a) {
                double s = 0.0;
                for (int b = 0; b < m; ++b)
                    s += nc.of(i, b).at(idx) * g.vof(b, a).at(idx);
                gslot(i, n + a).at(idx) = s;
                gslot(n + a, i).at(idx) = s;
            }
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                gslot(n + a, n + b).at(idx) = g.vof(a, b).at(idx);
    } while (advance_index(counts, idx));

    std::vector<GridField> dg(std::size_t(d) * d * d);  // [dir][(a,b)]
    GridField window(counts, 0.0);
    for (int dir = 0; dir < d; ++dir)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                GridField fd = axis_derivative(chart, gslot(a, b), dir);
                window.absorb_margins(fd);
                dg[(std::size_t(dir) * d + std::size_t(a)) * d + std::size_t(b)] =
                    std::move(fd);
            }
    auto dslot = [&](int dir, int a, int b) -> const GridField& {
        return dg[(std::size_t(dir) * d + std::size_t(a)) * d + std::size_t(b)];
    };

    std::vector<GridField> out(std::size_t(d) * d * d, GridField(counts, kNaN));
    for (GridField& f : out) {
        f.lo = window.lo;
        f.hi = window.hi;
    }
    Eigen::MatrixXd gm(d, d);
    for_each_window(counts, window.lo, window.hi, [&](const std::vector<int>& nidx) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) gm(a, b) = gslot(a, b).at(nidx);
        const Eigen::MatrixXd gi = guarded_inverse(gm, "levi_civita_full");
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c) {
                    double s = 0.0;
                    for (int e = 0; e < d; ++e)
                        s += gi(a, e) * (dslot(b, c, e).at(nidx) +
                                         dslot(c, b, e).at(nidx) -
                                         dslot(e, b, c).at(nidx));
                    out[(std::size_t(a) * d + std::size_t(b)) * d + std::size_t(c)]
                        .at(nidx) = 0.5 * s;
                }
    });
    return out;
}

GeometryFixture builtin_fixture(const std::string& name, double alpha) {
    GeometryFixture fx;
    auto init = [&](int n, int m, std::vector<AxisSpec> axes) {
        fx.chart = ChartSpec{n, m, std::move(axes), frac::FractionalOrder(alpha)};
        fx.chart.validate();
        const std::vector<int> counts = counts_of(fx.chart);
        fx.nconn = NConnection{n, m,
                               std::vector<GridField>(std::size_t(n) * m,
                                                      GridField(counts, 0.0))};
        fx.metric.n = n;
        fx.metric.m = m;
        fx.metric.h.assign(std::size_t(n) * n, GridField(counts, 0.0));
        fx.metric.v.assign(std::size_t(m) * m, GridField(counts, 0.0));
        for (int j = 0; j < n; ++j) fx.metric.hof(j, j) = GridField(counts, 1.0);
        for (int b = 0; b < m; ++b) fx.metric.vof(b, b) = GridField(counts, 1.0);
    };

    if (name == "flat") {
        init(2, 2, {{0.1, 5}, {0.1, 5}, {0.1, 5}, {0.1, 5}});
    } else if (name == "sphere") {
        init(2, 1, {{0.025, 33}, {0.025, 33}, {0.1, 5}});
        const std::vector<int> counts = counts_of(fx.chart);
        std::vector<int> idx(counts.size(), 0);
        do {
            const double x1 = fx.chart.coord(0, idx[0]);
            const double x2 = fx.chart.coord(1, idx[1]);
            const double r2 = x1 * x1 + x2 * x2;
            const double gg = 4.0 / ((1.0 + r2) * (1.0 + r2));
            fx.metric.hof(0, 0).at(idx) = gg;
            fx.metric.hof(1, 1).at(idx) = gg;
        } while (advance_index(counts, idx));
    } else if (name == "twisted") {
        init(2, 1, {{0.1, 7}, {0.1, 7}, {0.1, 5}});
        fx.nconn.of(0, 0) = coordinate_field(fx.chart, 1);  // N_1^1 = x2
    } else if (name == "vcurved") {
        init(2, 2, {{0.1, 5}, {0.1, 5}, {0.1, 9}, {0.1, 7}});
        const std::vector<int> counts = counts_of(fx.chart);
        std::vector<int> idx(counts.size(), 0);
        do {
            const double y1 = fx.chart.coord(2, idx[2]);
            const double f = 1.0 + y1 * y1;
            fx.metric.vof(1, 1).at(idx) = f * f;
        } while (advance_index(counts, idx));
    } else {
        throw config_error("unknown builtin fixture: " + name);
    }
    return fx;
}

namespace {

std::string cell(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void save_fixture(const GeometryFixture& fx, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open fixture file for writing: " + path);
    const int n = fx.chart.n, m = fx.chart.m;
    for (int i = 1; i <= n; ++i) os << "x" << i << '\t';
    for (int a = 1; a <= m; ++a) os << "y" << a << '\t';
    for (int i = 1; i <= n; ++i)
        for (int a = 1; a <= m; ++a) os << "N_" << i << "_" << a << '\t';
    bool first = true;
    for (int j = 1; j <= n; ++j)
        for (int k = j; k <= n; ++k) {
            os << (first ? "" : "\t") << "gh_" << j << "_" << k;
            first = false;
        }
    for (int b = 1; b <= m; ++b)
        for (int c = b; c <= m; ++c) os << "\tgv_" << b << "_" << c;
    os << '\n';

    const std::vector<int> counts = counts_of(fx.chart);
    std::vector<int> idx(counts.size(), 0);
    do {
        for (int k = 0; k < fx.chart.dim(); ++k)
            os << cell(fx.chart.coord(k, idx[std::size_t(k)])) << '\t';
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < m; ++a) os << cell(fx.nconn.of(i, a).at(idx)) << '\t';
        first = true;
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                os << (first ? "" : "\t") << cell(fx.metric.hof(j, k).at(idx));
                first = false;
            }
        for (int b = 0; b < m; ++b)
            for (int c = b; c < m; ++c) os << '\t' << cell(fx.metric.vof(b, c).at(idx));
        os << '\n';
    } while (advance_index(counts, idx));
    if (!os) throw io_error("write failed: " + path);
}

GeometryFixture load_fixture(const std::string& path, double alpha) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open fixture file: " + path);
    std::string header;
    if (!std::getline(is, header)) throw io_error("fixture file empty: " + path);

    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) cols.push_back(tok);
    }
    int n = 0, m = 0;
    for (const std::string& c : cols) {
        if (c.size() > 1 && c[0] == 'x') n = std::max(n, std::atoi(c.c_str() + 1));
        if (c.size() > 1 && c[0] == 'y') m = std::max(m, std::atoi(c.c_str() + 1));
    }
    if (n < 1 || m < 1) throw io_error("fixture header lacks coordinate columns");

    // expected column list in canonical order
    std::vector<std::string> expect;
    for (int i = 1; i <= n; ++i) expect.push_back("x" + std::to_string(i));
    for (int a = 1; a <= m; ++a) expect.push_back("y" + std::to_string(a));
    for (int i = 1; i <= n; ++i)
        for (int a = 1; a <= m; ++a)
            expect.push_back("N_" + std::to_string(i) + "_" + std::to_string(a));
    for (int j = 1; j <= n; ++j)
        for (int k = j; k <= n; ++k)
            expect.push_back("gh_" + std::to_string(j) + "_" + std::to_string(k));
    for (int b = 1; b <= m; ++b)
        for (int c = b; c <= m; ++c)
            expect.push_back("gv_" + std::to_string(b) + "_" + std::to_string(c));
    if (cols != expect)
        throw io_error("fixture header does not match the documented column order");

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (row.size() != cols.size())
            throw io_error("fixture row has wrong column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("fixture has no data rows");

    // infer per-axis grids from the coordinate columns
    const int d = n + m;
    std::vector<AxisSpec> axes(std::size_t(d), AxisSpec{});
    for (int k = 0; k < d; ++k) {
        std::vector<double> vals;
        for (const auto& r : rows) vals.push_back(r[std::size_t(k)]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   vals.end());
        if (vals.size() < 5 || std::abs(vals[0]) > 1e-12)
            throw io_error("fixture axis must be uniform with origin 0");
        const double step = vals[1] - vals[0];
        for (std::size_t q = 1; q < vals.size(); ++q)
            if (std::abs(vals[q] - double(q) * step) > 1e-9 * std::max(1.0, vals[q]))
                throw io_error("fixture axis is not uniformly spaced");
        axes[std::size_t(k)] = AxisSpec{step, int(vals.size())};
    }

    GeometryFixture fx;
    fx.chart = ChartSpec{n, m, axes, frac::FractionalOrder(alpha)};
    fx.chart.validate();
    if (rows.size() != fx.chart.node_count())
        throw io_error("fixture row count does not cover the grid once");

    const std::vector<int> counts = counts_of(fx.chart);
    fx.nconn = NConnection{
        n, m, std::vector<GridField>(std::size_t(n) * m, GridField(counts, 0.0))};
    fx.metric.n = n;
    fx.metric.m = m;
    fx.metric.h.assign(std::size_t(n) * n, GridField(counts, 0.0));
    fx.metric.v.assign(std::size_t(m) * m, GridField(counts, 0.0));

    std::vector<int> idx(counts.size(), 0);
    std::size_t rix = 0;
    do {
        const std::vector<double>& row = rows[rix++];
        std::size_t col = 0;
        for (int k = 0; k < d; ++k, ++col) {
            const double want = fx.chart.coord(k, idx[std::size_t(k)]);
            if (std::abs(row[col] - want) > 1e-9 * std::max(1.0, std::abs(want)))
                throw io_error("fixture rows are not in row-major node order");
        }
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < m; ++a, ++col) fx.nconn.of(i, a).at(idx) = row[col];
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k, ++col) {
                fx.metric.hof(j, k).at(idx) = row[col];
                fx.metric.hof(k, j).at(idx) = row[col];
            }
        for (int b = 0; b < m; ++b)
            for (int c = b; c < m; ++c, ++col) {
                fx.metric.vof(b, c).at(idx) = row[col];
                fx.metric.vof(c, b).at(idx) = row[col];
            }
    } while (advance_index(counts, idx));
    return fx;
}

void save_report(const ChartSpec& chart, const CurvatureBundle& cb,
                 const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open report file for writing: " + path);
    const int n = chart.n, m = chart.m, d = chart.dim();
    for (int i = 1; i <= n; ++i) os << "x" << i << '\t';
    for (int a = 1; a <= m; ++a) os << "y" << a << '\t';
    os << "sR\thR\tvS";
    for (int b = 1; b <= d; ++b)
        for (int g = 1; g <= d; ++g) os << "\tricci_" << b << "_" << g;
    for (int b = 1; b <= d; ++b)
        for (int g = 1; g <= d; ++g) os << "\teinstein_" << b << "_" << g;
    os << "\ttorsion_absmax\n";

    const std::vector<int> counts = counts_of(chart);
    std::vector<int> idx(counts.size(), 0);
    do {
        for (int k = 0; k < d; ++k)
            os << cell(chart.coord(k, idx[std::size_t(k)])) << '\t';
        os << cell(cb.blocks.scalar.at(idx)) << '\t'
           << cell(cb.blocks.ricci_h.at(idx)) << '\t'
           << cell(cb.blocks.ricci_v.at(idx));
        for (const GridField& f : cb.blocks.ricci) os << '\t' << cell(f.at(idx));
        for (const GridField& f : cb.blocks.einstein) os << '\t' << cell(f.at(idx));
        double tmax = 0.0;
        bool any = false;
        for (const GridField& f : cb.torsion)
            if (f.defined(idx)) {
                tmax = std::max(tmax, std::abs(f.at(idx)));
                any = true;
            }
        os << '\t' << cell(any ? tmax : kNaN) << '\n';
    } while (advance_index(counts, idx));
    if (!os) throw io_error("write failed: " + path);
}

}  // namespace fracflow::geom
