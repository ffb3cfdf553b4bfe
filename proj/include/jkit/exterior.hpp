#pragma once

#include <string>
#include <vector>

#include "jkit/tensor.hpp"

namespace jkit {

template <class K>
using Mv = Tensor<K>;
template <class K>
using Form = Tensor<K>;

using MvP = Tensor<Polynomial>;
using FormP = Tensor<Polynomial>;
using MvE = Tensor<ExpCoeff>;
using FormE = Tensor<ExpCoeff>;

template <class K>
Tensor<K> mv_zero(const ChartPtr& c, int degree, bool ext = false) {
    return Tensor<K>::zero(c, Kind::MV, ext, degree);
}

template <class K>
Tensor<K> form_zero(const ChartPtr& c, int degree, bool ext = false) {
    return Tensor<K>::zero(c, Kind::FORM, ext, degree);
}

template <class K>
Tensor<K> basis_vector(const ChartPtr& c, int i, bool ext = false) {
    return Tensor<K>::basis(c, Kind::MV, ext, i);
}

template <class K>
Tensor<K> basis_covector(const ChartPtr& c, int i, bool ext = false) {
    return Tensor<K>::basis(c, Kind::FORM, ext, i);
}

/// Builds the extended degree-k tensor identified with the pair (p, q),
/// p of degree k and q of degree k-1: p plus the extra odd slot wedged onto
/// q from the left. In stored keys the extra slot sits last, so q's key J
/// lands on J + {dim} with sign (-1)^|J|.
template <class K>
Tensor<K> make_ext(const Tensor<K>& p, const Tensor<K>& q) {
    require_same_chart(p.chart(), q.chart());
    if (p.ext() || q.ext()) throw StructuralError("pair components must be plain tensors");
    if (p.degree() != q.degree() + 1 && !(p.degree() == 0 && q.is_zero() && q.degree() == 0))
        throw DegreeError("pair component degrees must differ by one");
    if (p.kind() != q.kind() && p.degree() > 0 && q.degree() > 0)
        throw StructuralError("pair components must share a kind");
    Tensor<K> r(p.chart(), p.degree() > 0 ? p.kind() : q.kind(), true, p.degree());
    for (const auto& [k, c] : p.terms()) r.add_term(k, c);
    const int e = p.chart()->dim();
    for (const auto& [k, c] : q.terms()) {
        Key nk = k;
        nk.push_back(e);
        r.add_term(nk, (k.size() % 2 == 0) ? c : -c);
    }
    return r;
}

/// Degree-0 pairs are identified with bare scalars.
template <class K>
Tensor<K> make_ext_scalar(const ChartPtr& c, Kind kind, const K& v) {
    return Tensor<K>::scalar(c, kind, true, v);
}

/// First (same-degree) component of an extended tensor.
template <class K>
Tensor<K> ext_first(const Tensor<K>& t) {
    if (!t.ext()) throw StructuralError("not an extended tensor");
    Tensor<K> r(t.chart(), t.kind(), false, t.degree());
    const int e = t.chart()->dim();
    for (const auto& [k, c] : t.terms())
        if (k.empty() || k.back() != e) r.add_term(k, c);
    return r;
}

/// Second (degree-lowered) component of an extended tensor; degree-0 input
/// has none and yields the zero scalar.
template <class K>
Tensor<K> ext_second(const Tensor<K>& t) {
    if (!t.ext()) throw StructuralError("not an extended tensor");
    int d = t.degree() == 0 ? 0 : t.degree() - 1;
    Tensor<K> r(t.chart(), t.kind(), false, d);
    if (t.degree() == 0) return r;
    const int e = t.chart()->dim();
    for (const auto& [k, c] : t.terms()) {
        if (k.empty() || k.back() != e) continue;
        Key nk(k.begin(), k.end() - 1);
        r.add_term(nk, (nk.size() % 2 == 0) ? c : -c);
    }
    return r;
}

/// Plain tensor -> extended tensor with zero second component.
template <class K>
Tensor<K> as_ext(const Tensor<K>& p) {
    if (p.ext()) return p;
    if (p.degree() == 0) return Tensor<K>::scalar(p.chart(), p.kind(), true, p.scalar_value());
    return make_ext(p, Tensor<K>::zero(p.chart(), p.kind(), false, p.degree() - 1));
}

/// The distinguished degree-1 extended covector (0, 1): the unit on the
/// extra slot.
template <class K>
Tensor<K> unit_cocycle(const ChartPtr& c) {
    return Tensor<K>::basis(c, Kind::FORM, true, c->dim());
}

/// The distinguished degree-1 extended vector (0, 1).
template <class K>
Tensor<K> unit_section(const ChartPtr& c) {
    return Tensor<K>::basis(c, Kind::MV, true, c->dim());
}

/// Extended degree-1 vector (x, f).
template <class K>
Tensor<K> ext_vec(const Tensor<K>& x, const K& f) {
    return make_ext(x, Tensor<K>::scalar(x.chart(), Kind::MV, false, f));
}

/// Extended degree-1 covector (a, g).
template <class K>
Tensor<K> ext_cov(const Tensor<K>& a, const K& g) {
    return make_ext(a, Tensor<K>::scalar(a.chart(), Kind::FORM, false, g));
}

/// Evaluation of an extended degree-k form on k extended degree-1 vectors.
/// Equals eta(X_1,...,X_k) plus the alternating-sign scalar pickups
/// sum_i (-1)^(i+1) f_i xi(X_1,...,^X_i,...,X_k).
template <class K>
K ext_eval(const Tensor<K>& w, const std::vector<Tensor<K>>& args) {
    for (const auto& a : args)
        if (!a.ext() || a.degree() != 1)
            throw StructuralError("evaluation arguments must be extended degree-1 vectors");
    return eval_on(w, args);
}

/// Partial evaluation: k-1 arguments plugged into a degree-k extended form,
/// leaving a degree-1 extended form.
template <class K>
Tensor<K> ext_partial_eval(const Tensor<K>& w, const std::vector<Tensor<K>>& args) {
    if (w.degree() < 1) throw DegreeError("partial evaluation needs degree >= 1");
    if (static_cast<int>(args.size()) != w.degree() - 1)
        throw StructuralError("partial evaluation arity mismatch");
    Tensor<K> cur = w;
    for (const auto& a : args) cur = contract1(a, cur);
    return cur;
}

/// Section of the extended double bundle: an extended degree-1 vector plus
/// an extended degree-1 covector.
template <class K>
struct E1Section {
    Tensor<K> v;  // extended degree-1 multivector (x, f)
    Tensor<K> a;  // extended degree-1 form (alpha, g)

    E1Section(Tensor<K> vv, Tensor<K> aa) : v(std::move(vv)), a(std::move(aa)) {
        require_same_chart(v.chart(), a.chart());
        if (!v.ext() || v.degree() != 1 || v.kind() != Kind::MV)
            throw StructuralError("section vector part must be an extended degree-1 multivector");
        if (!a.ext() || a.degree() != 1 || a.kind() != Kind::FORM)
            throw StructuralError("section form part must be an extended degree-1 form");
    }

    static E1Section zero(const ChartPtr& c) {
        return E1Section(Tensor<K>::zero(c, Kind::MV, true, 1),
                         Tensor<K>::zero(c, Kind::FORM, true, 1));
    }

    const ChartPtr& chart() const { return v.chart(); }

    friend E1Section operator+(const E1Section& x, const E1Section& y) {
        return E1Section(x.v + y.v, x.a + y.a);
    }
    friend E1Section operator-(const E1Section& x, const E1Section& y) {
        return E1Section(x.v - y.v, x.a - y.a);
    }
    friend E1Section operator-(const E1Section& x) { return E1Section(-x.v, -x.a); }
    friend E1Section operator*(const K& s, const E1Section& x) {
        return E1Section(s * x.v, s * x.a);
    }
    friend bool operator==(const E1Section& x, const E1Section& y) {
        return x.v == y.v && x.a == y.a;
    }
    friend bool operator!=(const E1Section& x, const E1Section& y) { return !(x == y); }
    bool is_zero() const { return v.is_zero() && a.is_zero(); }
};

/// Canonical text form. Plain tensors print directly; extended tensors print
/// through their pair components so output re-parses via the constructors.
template <class K>
std::string tensor_str(const Tensor<K>& t) {
    if (!t.ext()) return t.str();
    if (t.degree() == 0) return ext_first(t).str();
    const char* ctor = (t.kind() == Kind::MV) ? "extmv" : "extform";
    return std::string(ctor) + "(" + ext_first(t).str() + ", " + ext_second(t).str() + ")";
}

template <class K>
std::string section_str(const E1Section<K>& e) {
    return "e1(" + tensor_str(e.v) + ", " + tensor_str(e.a) + ")";
}

/// Lifts a plain-flavor tensor on a base chart to the exponential flavor on
/// the lifted chart: same keys (base coordinates keep their indices), each
/// coefficient embedded at weight zero.
inline Tensor<ExpCoeff> lift_tensor(const Tensor<Polynomial>& t, const ChartPtr& lifted) {
    if (t.ext())
        throw StructuralError("lift pair components separately");
    Tensor<ExpCoeff> r(lifted, t.kind(), false, t.degree());
    for (const auto& [k, c] : t.terms()) r.add_term(k, lift_coeff(c, lifted));
    return r;
}

}  // namespace jkit
