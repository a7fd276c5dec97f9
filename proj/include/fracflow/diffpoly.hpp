#pragma once
// Differential polynomials in the derivative jets of one curve-invariant
// vector variable v = v_0, v_1 = Dv, v_2 = D^2 v, ... with O(C)-invariant
// scalar coefficients. Three term shapes arise:
//
//   scalar : rational * product of dot factors <v_a, v_b>
//   vector : scalar monomial * one bare jet v_j
//   wedge  : scalar monomial * (v_a ^ v_b), a < b
//
// All containers keep a canonical form: factors sorted, like terms merged,
// zero coefficients dropped. Coefficients are exact rationals so printed
// hierarchy output and golden files are reproducible bit for bit.

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracflow::dp {

using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(long long n, long long d = 1) { return Rational(n) / d; }

// One invariant factor <v_a, v_b>, stored with a <= b.
struct Dot {
    int a;
    int b;
    auto operator<=>(const Dot&) const = default;
};
Dot make_dot(int a, int b);

// Sorted multiset of dot factors; the empty product is 1.
struct Mono {
    std::vector<Dot> f;
    auto operator<=>(const Mono&) const = default;
    int weight() const;     // each factor contributes 2 + a + b
    int order_sum() const;  // each factor contributes a + b
    int max_order() const;
    int factor_count() const { return int(f.size()); }
};
Mono mono_with(Mono m, Dot d);          // insert keeping sort order
Mono mono_mul(const Mono&, const Mono&);
Mono mono_erase_at(Mono m, std::size_t pos);

class ScalarPoly {
  public:
    static ScalarPoly dot(int a, int b);
    void add(const Mono& m, const Rational& c);
    const std::map<Mono, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool operator==(const ScalarPoly&) const = default;

  private:
    std::map<Mono, Rational> t_;
};

struct VecTerm {
    Mono m;
    int ord;  // the bare jet v_ord
    auto operator<=>(const VecTerm&) const = default;
};

class VectorPoly {
  public:
    static VectorPoly jet(int ord);  // the single term v_ord
    void add(const VecTerm& k, const Rational& c);
    const std::map<VecTerm, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool operator==(const VectorPoly&) const = default;

  private:
    std::map<VecTerm, Rational> t_;
};

struct WedgeTerm {
    Mono m;
    int a;  // v_a ^ v_b with a < b
    int b;
    auto operator<=>(const WedgeTerm&) const = default;
};

class WedgePoly {
  public:
    // adds c * m * (v_a ^ v_b); normalizes orientation, drops a == b
    void add(const Mono& m, int a, int b, const Rational& c);
    const std::map<WedgeTerm, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

  private:
    std::map<WedgeTerm, Rational> t_;
};

ScalarPoly add(const ScalarPoly&, const ScalarPoly&);
ScalarPoly scale(const ScalarPoly&, const Rational&);
ScalarPoly mul(const ScalarPoly&, const ScalarPoly&);
VectorPoly add(const VectorPoly&, const VectorPoly&);
VectorPoly scale(const VectorPoly&, const Rational&);
VectorPoly mul(const ScalarPoly&, const VectorPoly&);
WedgePoly add(const WedgePoly&, const WedgePoly&);

// Total derivative D (Leibniz over every jet slot).
ScalarPoly d(const ScalarPoly&);
VectorPoly d(const VectorPoly&);
WedgePoly d(const WedgePoly&);
VectorPoly d_iter(const VectorPoly&, int times);

// Contractions with the base jet v_0.
ScalarPoly contract_v(const VectorPoly&);           // <v_0, P>
ScalarPoly contract_jet(const VectorPoly&, int j);  // <v_j, P>
WedgePoly wedge_v(const VectorPoly&);               // v_0 ^ P
VectorPoly hook_v(const WedgePoly&);                // v_0 _| W

// Scaling weight: v_j carries weight 1 + j; returns nullopt when terms mix
// weights. The zero polynomial reports weight 0.
std::optional<int> scaling_weight(const ScalarPoly&);
std::optional<int> scaling_weight(const VectorPoly&);

// Canonical text form, e.g. "v3 + 3/2*<v0,v0>*v1". Deterministic term
// order: vector terms by jet order descending, scalars by top derivative
// order descending, ties by factor list.
std::string to_text(const ScalarPoly&);
std::string to_text(const VectorPoly&);

// Specialization to one component: <v_a, v_b> -> u_a u_b as a commutative
// product; keys are sorted multisets of jet orders (vector terms append
// their bare jet). Used to compare against scalar-equation references.
std::map<std::vector<int>, Rational> specialize_scalar(const ScalarPoly&);
std::map<std::vector<int>, Rational> specialize_scalar(const VectorPoly&);

}  // namespace fracflow::dp
