#include "fracflow/diffpoly.hpp"

#include <algorithm>
#include <sstream>

#include "fracflow/errors.hpp"

namespace fracflow::dp {

Dot make_dot(int a, int b) {
    if (a < 0 || b < 0) throw config_error("dot factor: negative jet order");
    if (a > b) std::swap(a, b);
    return Dot{a, b};
}

int Mono::weight() const {
    int w = 0;
    for (const Dot& x : f) w += 2 + x.a + x.b;
    return w;
}

int Mono::order_sum() const {
    int s = 0;
    for (const Dot& x : f) s += x.a + x.b;
    return s;
}

int Mono::max_order() const {
    int m = 0;
    for (const Dot& x : f) m = std::max(m, x.b);
    return m;
}

Mono mono_with(Mono m, Dot d) {
    m.f.insert(std::upper_bound(m.f.begin(), m.f.end(), d), d);
    return m;
}

Mono mono_mul(const Mono& x, const Mono& y) {
    Mono r = x;
    for (const Dot& d : y.f) r = mono_with(std::move(r), d);
    return r;
}

Mono mono_erase_at(Mono m, std::size_t pos) {
    m.f.erase(m.f.begin() + std::ptrdiff_t(pos));
    return m;
}

ScalarPoly ScalarPoly::dot(int a, int b) {
    ScalarPoly p;
    p.add(mono_with(Mono{}, make_dot(a, b)), 1);
    return p;
}

void ScalarPoly::add(const Mono& m, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = t_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) t_.erase(it);
    }
}

VectorPoly VectorPoly::jet(int ord) {
    VectorPoly p;
    p.add(VecTerm{Mono{}, ord}, 1);
    return p;
}

void VectorPoly::add(const VecTerm& k, const Rational& c) {
    if (c == 0) return;
    if (k.ord < 0) throw config_error("vector term: negative jet order");
    auto [it, fresh] = t_.emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) t_.erase(it);
    }
}

void WedgePoly::add(const Mono& m, int a, int b, const Rational& c) {
    if (c == 0 || a == b) return;
    if (a < 0 || b < 0) throw config_error("wedge term: negative jet order");
    Rational cc = c;
    if (a > b) {
        std::swap(a, b);
        cc = -cc;
    }
    auto [it, fresh] = t_.emplace(WedgeTerm{m, a, b}, cc);
    if (!fresh) {
        it->second += cc;
        if (it->second == 0) t_.erase(it);
    }
}

ScalarPoly add(const ScalarPoly& x, const ScalarPoly& y) {
    ScalarPoly r = x;
    for (const auto& [m, c] : y.terms()) r.add(m, c);
    return r;
}

ScalarPoly scale(const ScalarPoly& x, const Rational& c) {
    ScalarPoly r;
    for (const auto& [m, v] : x.terms()) r.add(m, v * c);
    return r;
}

ScalarPoly mul(const ScalarPoly& x, const ScalarPoly& y) {
    ScalarPoly r;
    for (const auto& [mx, cx] : x.terms())
        for (const auto& [my, cy] : y.terms()) r.add(mono_mul(mx, my), cx * cy);
    return r;
}

VectorPoly add(const VectorPoly& x, const VectorPoly& y) {
    VectorPoly r = x;
    for (const auto& [k, c] : y.terms()) r.add(k, c);
    return r;
}

VectorPoly scale(const VectorPoly& x, const Rational& c) {
    VectorPoly r;
    for (const auto& [k, v] : x.terms()) r.add(k, v * c);
    return r;
}

VectorPoly mul(const ScalarPoly& s, const VectorPoly& p) {
    VectorPoly r;
    for (const auto& [m, c] : s.terms())
        for (const auto& [k, v] : p.terms())
            r.add(VecTerm{mono_mul(m, k.m), k.ord}, c * v);
    return r;
}

WedgePoly add(const WedgePoly& x, const WedgePoly& y) {
    WedgePoly r = x;
    for (const auto& [k, c] : y.terms()) r.add(k.m, k.a, k.b, c);
    return r;
}

namespace {

// D of a bare monomial, emitted through a callback as (new mono, coeff 1 per
// raised slot). Raising slot a of <v_a, v_b> yields <v_{a+1}, v_b>.
template <typename F>
void d_mono(const Mono& m, F&& emit) {
    for (std::size_t i = 0; i < m.f.size(); ++i) {
        const Dot x = m.f[i];
        Mono rest = mono_erase_at(m, i);
        emit(mono_with(rest, make_dot(x.a + 1, x.b)));
        emit(mono_with(rest, make_dot(x.a, x.b + 1)));
    }
}

}  // namespace

ScalarPoly d(const ScalarPoly& p) {
    ScalarPoly r;
    for (const auto& [m, c] : p.terms())
        d_mono(m, [&](const Mono& nm) { r.add(nm, c); });
    return r;
}

VectorPoly d(const VectorPoly& p) {
    VectorPoly r;
    for (const auto& [k, c] : p.terms()) {
        d_mono(k.m, [&](const Mono& nm) { r.add(VecTerm{nm, k.ord}, c); });
        r.add(VecTerm{k.m, k.ord + 1}, c);
    }
    return r;
}

WedgePoly d(const WedgePoly& p) {
    WedgePoly r;
    for (const auto& [k, c] : p.terms()) {
        d_mono(k.m, [&](const Mono& nm) { r.add(nm, k.a, k.b, c); });
        r.add(k.m, k.a + 1, k.b, c);
        r.add(k.m, k.a, k.b + 1, c);
    }
    return r;
}

VectorPoly d_iter(const VectorPoly& p, int times) {
    VectorPoly r = p;
    for (int i = 0; i < times; ++i) r = d(r);
    return r;
}

ScalarPoly contract_v(const VectorPoly& p) { return contract_jet(p, 0); }

ScalarPoly contract_jet(const VectorPoly& p, int j) {
    ScalarPoly r;
    for (const auto& [k, c] : p.terms())
        r.add(mono_with(k.m, make_dot(j, k.ord)), c);
    return r;
}

WedgePoly wedge_v(const VectorPoly& p) {
    WedgePoly r;
    for (const auto& [k, c] : p.terms()) r.add(k.m, 0, k.ord, c);
    return r;
}

VectorPoly hook_v(const WedgePoly& w) {
    // v_0 _| (A ^ B) = <v_0, A> B - <v_0, B> A on each term
    VectorPoly r;
    for (const auto& [k, c] : w.terms()) {
        r.add(VecTerm{mono_with(k.m, make_dot(0, k.a)), k.b}, c);
        r.add(VecTerm{mono_with(k.m, make_dot(0, k.b)), k.a}, -c);
    }
    return r;
}

std::optional<int> scaling_weight(const ScalarPoly& p) {
    std::optional<int> w;
    for (const auto& [m, c] : p.terms()) {
        const int tw = m.weight();
        if (w && *w != tw) return std::nullopt;
        w = tw;
    }
    return w ? w : std::optional<int>(0);
}

std::optional<int> scaling_weight(const VectorPoly& p) {
    std::optional<int> w;
    for (const auto& [k, c] : p.terms()) {
        const int tw = k.m.weight() + 1 + k.ord;
        if (w && *w != tw) return std::nullopt;
        w = tw;
    }
    return w ? w : std::optional<int>(0);
}

namespace {

std::string rat_text(const Rational& c) {
    std::ostringstream os;
    os << c;
    return os.str();
}

std::string mono_text(const Mono& m) {
    std::string s;
    for (std::size_t i = 0; i < m.f.size(); ++i) {
        if (i) s += "*";
        s += "<v" + std::to_string(m.f[i].a) + ",v" + std::to_string(m.f[i].b) + ">";
    }
    return s;
}

// joins pre-rendered (coefficient, body) terms with signs
std::string join_terms(const std::vector<std::pair<Rational, std::string>>& ts) {
    if (ts.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const Rational& c = ts[i].first;
        const Rational mag = c < 0 ? Rational(-c) : c;
        if (i == 0)
            out += (c < 0) ? "-" : "";
        else
            out += (c < 0) ? " - " : " + ";
        if (mag != 1) out += rat_text(mag) + "*";
        out += ts[i].second;
    }
    return out;
}

}  // namespace

std::string to_text(const ScalarPoly& p) {
    std::vector<std::pair<Rational, std::string>> ts;
    std::vector<const std::pair<const Mono, Rational>*> order;
    for (const auto& t : p.terms()) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) {
        if (x->first.max_order() != y->first.max_order())
            return x->first.max_order() > y->first.max_order();
        return x->first < y->first;
    });
    for (auto* t : order) ts.emplace_back(t->second, mono_text(t->first));
    return join_terms(ts);
}

std::string to_text(const VectorPoly& p) {
    std::vector<std::pair<Rational, std::string>> ts;
    std::vector<const std::pair<const VecTerm, Rational>*> order;
    for (const auto& t : p.terms()) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) {
        if (x->first.ord != y->first.ord) return x->first.ord > y->first.ord;
        return x->first.m < y->first.m;
    });
    for (auto* t : order) {
        std::string body = mono_text(t->first.m);
        if (!body.empty()) body += "*";
        body += "v" + std::to_string(t->first.ord);
        ts.emplace_back(t->second, body);
    }
    return join_terms(ts);
}

std::map<std::vector<int>, Rational> specialize_scalar(const ScalarPoly& p) {
    std::map<std::vector<int>, Rational> r;
    for (const auto& [m, c] : p.terms()) {
        std::vector<int> key;
        for (const Dot& x : m.f) {
            key.push_back(x.a);
            key.push_back(x.b);
        }
        std::sort(key.begin(), key.end());
        r[key] += c;
        if (r[key] == 0) r.erase(key);
    }
    return r;
}

std::map<std::vector<int>, Rational> specialize_scalar(const VectorPoly& p) {
    std::map<std::vector<int>, Rational> r;
    for (const auto& [k, c] : p.terms()) {
        std::vector<int> key;
        for (const Dot& x : k.m.f) {
            key.push_back(x.a);
            key.push_back(x.b);
        }
        key.push_back(k.ord);
        std::sort(key.begin(), key.end());
        r[key] += c;
        if (r[key] == 0) r.erase(key);
    }
    return r;
}

}  // namespace fracflow::dp
