#include "fracflow/operators.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "fracflow/errors.hpp"

namespace fracflow::dp {

namespace {

ScalarPoly mono_poly(const Mono& m, const Rational& c = 1) {
    ScalarPoly p;
    p.add(m, c);
    return p;
}

// ---- exact dense linear algebra ------------------------------------------

// Gauss-Jordan over the rationals. Returns x with A x = b (free variables
// zeroed) or nullopt when the system is inconsistent.
std::optional<std::vector<Rational>> solve_exact(std::vector<std::vector<Rational>> a,
                                                 std::vector<Rational> b) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<int> pivot_row_of_col(cols, -1);
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pr = r;
        while (pr < rows && a[pr][c] == 0) ++pr;
        if (pr == rows) continue;
        std::swap(a[pr], a[r]);
        std::swap(b[pr], b[r]);
        const Rational piv = a[r][c];
        for (std::size_t cc = c; cc < cols; ++cc) a[r][cc] /= piv;
        b[r] /= piv;
        for (std::size_t rr = 0; rr < rows; ++rr) {
            if (rr == r || a[rr][c] == 0) continue;
            const Rational f = a[rr][c];
            for (std::size_t cc = c; cc < cols; ++cc) a[rr][cc] -= f * a[r][cc];
            b[rr] -= f * b[r];
        }
        pivot_row_of_col[c] = int(r);
        ++r;
    }
    for (std::size_t rr = r; rr < rows; ++rr)
        if (b[rr] != 0) return std::nullopt;
    std::vector<Rational> x(cols, Rational(0));
    for (std::size_t c = 0; c < cols; ++c)
        if (pivot_row_of_col[c] >= 0) x[c] = b[std::size_t(pivot_row_of_col[c])];
    return x;
}

// ---- monomial enumeration --------------------------------------------------

// All canonical monomials with `count` factors, total derivative order
// `order_sum`, and every jet order <= cap.
void gen_monos(const std::vector<Dot>& dots, const std::vector<int>& min_sum_suffix,
               std::size_t start, int count, int order_sum, Mono& cur,
               std::vector<Mono>& out) {
    if (count == 0) {
        if (order_sum == 0) out.push_back(cur);
        return;
    }
    if (start >= dots.size()) return;
    if (order_sum < count * min_sum_suffix[start]) return;
    for (std::size_t i = start; i < dots.size(); ++i) {
        const int s = dots[i].a + dots[i].b;
        if (s > order_sum) continue;
        cur.f.push_back(dots[i]);
        gen_monos(dots, min_sum_suffix, i, count - 1, order_sum - s, cur, out);
        cur.f.pop_back();
    }
}

std::vector<Mono> enumerate_monos(int count, int order_sum, int cap) {
    std::vector<Mono> out;
    if (count < 0 || order_sum < 0 || (count == 0 && order_sum > 0)) return out;
    if (cap < 0) return out;
    std::vector<Dot> dots;
    for (int a = 0; a <= cap; ++a)
        for (int b = a; b <= cap; ++b)
            if (a + b <= order_sum) dots.push_back(Dot{a, b});
    std::vector<int> min_sum_suffix(dots.size() + 1, 0);
    if (!dots.empty()) {
        min_sum_suffix[dots.size()] = 1 << 20;
        for (std::size_t i = dots.size(); i-- > 0;)
            min_sum_suffix[i] = std::min(min_sum_suffix[i + 1], dots[i].a + dots[i].b);
    }
    Mono cur;
    gen_monos(dots, min_sum_suffix, 0, count, order_sum, cur, out);
    return out;
}

struct Grade {
    int count;
    int order_sum;
    auto operator<=>(const Grade&) const = default;
};

}  // namespace

VectorPoly euler(const ScalarPoly& h) {
    // gradient per jet order, then alternating-sign total derivatives
    std::map<int, VectorPoly> grad;
    for (const auto& [m, c] : h.terms()) {
        for (std::size_t i = 0; i < m.f.size(); ++i) {
            const Mono rest = mono_erase_at(m, i);
            grad[m.f[i].a].add(VecTerm{rest, m.f[i].b}, c);
            grad[m.f[i].b].add(VecTerm{rest, m.f[i].a}, c);
        }
    }
    VectorPoly out;
    for (auto& [j, g] : grad) {
        VectorPoly term = d_iter(g, j);
        out = add(out, (j % 2 == 0) ? term : scale(term, -1));
    }
    return out;
}

ScalarPoly formal_integral(const ScalarPoly& p) {
    if (p.is_zero()) return {};
    if (!euler(p).is_zero())
        throw not_exact_error("formal_integral: argument is not a total derivative");

    std::map<Grade, ScalarPoly> groups;
    for (const auto& [m, c] : p.terms())
        groups[Grade{m.factor_count(), m.order_sum()}].add(m, c);

    ScalarPoly q;
    for (const auto& [g, part] : groups) {
        // constants are euler-invisible yet never total derivatives
        if (g.count == 0)
            throw not_exact_error("formal_integral: nonzero constant term");
        int top = 0;
        for (const auto& [m, c] : part.terms()) top = std::max(top, m.max_order());
        const std::vector<Mono> cand =
            enumerate_monos(g.count, g.order_sum - 1, top - 1);

        // row space: target monomials plus everything D(candidate) reaches
        std::map<Mono, std::size_t> row_of;
        auto row_id = [&](const Mono& m) {
            return row_of.emplace(m, row_of.size()).first->second;
        };
        for (const auto& [m, c] : part.terms()) row_id(m);
        std::vector<ScalarPoly> dcand(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
            dcand[i] = d(mono_poly(cand[i]));
            for (const auto& [m, c] : dcand[i].terms()) row_id(m);
        }
        std::vector<std::vector<Rational>> a(row_of.size(),
                                             std::vector<Rational>(cand.size(), 0));
        std::vector<Rational> b(row_of.size(), 0);
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (const auto& [m, c] : dcand[i].terms()) a[row_of[m]][i] = c;
        for (const auto& [m, c] : part.terms()) b[row_of[m]] = c;

        const auto x = solve_exact(std::move(a), std::move(b));
        if (!x)
            throw std::logic_error(
                "formal_integral: euler guard passed but no antiderivative found");
        for (std::size_t i = 0; i < cand.size(); ++i) q.add(cand[i], (*x)[i]);
    }
    return q;
}

WedgePoly formal_integral(const WedgePoly& p) {
    if (p.is_zero()) return {};
    std::map<Grade, std::vector<std::pair<WedgeTerm, Rational>>> groups;
    for (const auto& [k, c] : p.terms())
        groups[Grade{k.m.factor_count(), k.m.order_sum() + k.a + k.b}].emplace_back(k,
                                                                                    c);
    WedgePoly q;
    for (const auto& [g, part] : groups) {
        int top = 0;
        for (const auto& [k, c] : part)
            top = std::max({top, k.m.max_order(), k.b});
        // candidates: wedge pair (wa < wb) times a scalar monomial
        std::vector<WedgeTerm> cand;
        const int cap = top - 1;
        for (int wa = 0; wa <= cap; ++wa)
            for (int wb = wa + 1; wb <= cap; ++wb) {
                const int rest = g.order_sum - 1 - wa - wb;
                if (rest < 0) continue;
                for (const Mono& m : enumerate_monos(g.count, rest, cap))
                    cand.push_back(WedgeTerm{m, wa, wb});
            }

        std::map<WedgeTerm, std::size_t> row_of;
        auto row_id = [&](const WedgeTerm& k) {
            return row_of.emplace(k, row_of.size()).first->second;
        };
        for (const auto& [k, c] : part) row_id(k);
        std::vector<WedgePoly> dcand(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
            WedgePoly one;
            one.add(cand[i].m, cand[i].a, cand[i].b, 1);
            dcand[i] = d(one);
            for (const auto& [k, c] : dcand[i].terms()) row_id(k);
        }
        std::vector<std::vector<Rational>> a(row_of.size(),
                                             std::vector<Rational>(cand.size(), 0));
        std::vector<Rational> b(row_of.size(), 0);
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (const auto& [k, c] : dcand[i].terms()) a[row_of[k]][i] = c;
        for (const auto& [k, c] : part) b[row_of[k]] = c;

        const auto x = solve_exact(std::move(a), std::move(b));
        if (!x)
            throw not_exact_error(
                "formal_integral: wedge argument is not a total derivative");
        for (std::size_t i = 0; i < cand.size(); ++i)
            q.add(cand[i].m, cand[i].a, cand[i].b, (*x)[i]);
    }
    return q;
}

ScalarPoly ibp_normal_form(const ScalarPoly& p) {
    std::map<Grade, ScalarPoly> groups;
    for (const auto& [m, c] : p.terms())
        groups[Grade{m.factor_count(), m.order_sum()}].add(m, c);

    ScalarPoly out;
    for (const auto& [g, part] : groups) {
        int top = 0;
        for (const auto& [m, c] : part.terms()) top = std::max(top, m.max_order());
        // the class cannot drop below ceil(order_sum / (2*count))
        const int floor_order =
            g.count == 0 ? 0 : (g.order_sum + 2 * g.count - 1) / (2 * g.count);

        const std::vector<Mono> cand =
            enumerate_monos(g.count, g.order_sum - 1, top - 1);
        std::vector<ScalarPoly> dcand(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i)
            dcand[i] = d(mono_poly(cand[i]));

        bool reduced = false;
        for (int target = floor_order; target < top && !reduced; ++target) {
            // demand that every monomial above `target` cancels in p - D r
            std::map<Mono, std::size_t> row_of;
            auto row_id = [&](const Mono& m) {
                return row_of.emplace(m, row_of.size()).first->second;
            };
            for (const auto& [m, c] : part.terms())
                if (m.max_order() > target) row_id(m);
            for (const auto& dc : dcand)
                for (const auto& [m, c] : dc.terms())
                    if (m.max_order() > target) row_id(m);
            std::vector<std::vector<Rational>> a(
                row_of.size(), std::vector<Rational>(cand.size(), 0));
            std::vector<Rational> b(row_of.size(), 0);
            for (std::size_t i = 0; i < cand.size(); ++i)
                for (const auto& [m, c] : dcand[i].terms())
                    if (auto it = row_of.find(m); it != row_of.end())
                        a[it->second][i] = c;
            for (const auto& [m, c] : part.terms())
                if (auto it = row_of.find(m); it != row_of.end()) b[it->second] = c;

            if (const auto x = solve_exact(std::move(a), std::move(b))) {
                ScalarPoly res = part;
                for (std::size_t i = 0; i < cand.size(); ++i)
                    res = add(res, scale(dcand[i], -(*x)[i]));
                out = add(out, res);
                reduced = true;
            }
        }
        if (!reduced) out = add(out, part);
    }
    return out;
}

VectorPoly op_j(const VectorPoly& e_perp) {
    return add(d(e_perp),
               mul(formal_integral(contract_v(e_perp)), VectorPoly::jet(0)));
}

VectorPoly op_h(const VectorPoly& varpi) {
    return add(d(varpi), hook_v(formal_integral(wedge_v(varpi))));
}

VectorPoly op_r(const VectorPoly& e_perp) { return op_h(op_j(e_perp)); }

ScalarPoly hamiltonian_from_covector(const VectorPoly& varpi) {
    ScalarPoly raw;
    for (const auto& [k, c] : varpi.terms()) {
        const int degree = 2 * k.m.factor_count() + 1;
        raw.add(mono_with(k.m, make_dot(0, k.ord)), c / (degree + 1));
    }
    return ibp_normal_form(raw);
}

std::vector<HierarchyLevel> generate_hierarchy(int top_level) {
    if (top_level < 0) throw config_error("generate_hierarchy: negative level");
    std::vector<HierarchyLevel> levels;
    levels.reserve(std::size_t(top_level) + 1);
    HierarchyLevel l0;
    l0.flow = VectorPoly::jet(1);
    l0.covector = VectorPoly::jet(0);
    l0.hamiltonian = hamiltonian_from_covector(l0.covector);
    levels.push_back(std::move(l0));
    for (int k = 1; k <= top_level; ++k) {
        HierarchyLevel l;
        l.covector = op_j(levels.back().flow);
        l.flow = op_h(l.covector);
        l.hamiltonian = hamiltonian_from_covector(l.covector);
        levels.push_back(std::move(l));
    }
    return levels;
}

VectorPoly constant_curvature_shift(const VectorPoly& flow_up,
                                    const VectorPoly& flow, const Rational& c) {
    return add(flow_up, scale(flow, -c));
}

VectorPoly frechet(const VectorPoly& p, const VectorPoly& q) {
    int top = 0;
    for (const auto& [k, c] : p.terms()) {
        top = std::max(top, k.ord);
        for (const Dot& x : k.m.f) top = std::max(top, x.b);
    }
    std::vector<VectorPoly> dq(std::size_t(top) + 1);
    dq[0] = q;
    for (int j = 1; j <= top; ++j) dq[std::size_t(j)] = d(dq[std::size_t(j) - 1]);

    VectorPoly out;
    for (const auto& [k, c] : p.terms()) {
        // the bare jet slot
        out = add(out, scale(mul(mono_poly(k.m), dq[std::size_t(k.ord)]), c));
        // every dot slot
        for (std::size_t i = 0; i < k.m.f.size(); ++i) {
            const Mono rest = mono_erase_at(k.m, i);
            const Dot x = k.m.f[i];
            const ScalarPoly sa = contract_jet(dq[std::size_t(x.a)], x.b);
            const ScalarPoly sb = contract_jet(dq[std::size_t(x.b)], x.a);
            out = add(out, scale(mul(mul(mono_poly(rest), add(sa, sb)),
                                     VectorPoly::jet(k.ord)),
                                 c));
        }
    }
    return out;
}

}  // namespace fracflow::dp
