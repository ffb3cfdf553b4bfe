#pragma once

#include <vector>

#include "jkit/exterior.hpp"
#include "jkit/tensor.hpp"

namespace jkit {

namespace detail {

/// Visits every strictly increasing key of length k over slots 0..n_slots-1.
template <class F>
void for_each_key(int n_slots, int k, F&& fn) {
    if (k < 0 || k > n_slots) return;
    Key key(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) key[static_cast<std::size_t>(i)] = i;
    while (true) {
        fn(key);
        int i = k - 1;
        while (i >= 0 && key[static_cast<std::size_t>(i)] == n_slots - k + i) --i;
        if (i < 0) break;
        ++key[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            key[static_cast<std::size_t>(j)] = key[static_cast<std::size_t>(j - 1)] + 1;
    }
}

template <class K>
void require_cocycle(const Tensor<K>& w, const Tensor<K>& phi) {
    require_same_chart(w.chart(), phi.chart());
    if (phi.kind() != Kind::FORM || phi.degree() != 1 || phi.ext() != w.ext())
        throw StructuralError("cocycle must be a degree-1 form of the same flavor");
}

}  // namespace detail

/// Differential of a coefficient function as a plain degree-1 form.
template <class K>
Tensor<K> differential(const ChartPtr& c, const K& f) {
    return de_rham(Tensor<K>::scalar(c, Kind::FORM, false, f));
}

/// Directional derivative of a coefficient function along a plain degree-1
/// vector field: x.f.
template <class K>
K vec_apply(const Tensor<K>& x, const K& f) {
    if (x.ext() || x.degree() != 1 || x.kind() != Kind::MV)
        throw StructuralError("vec_apply needs a plain degree-1 multivector");
    Tensor<K> df = differential(x.chart(), f);
    if (df.is_zero()) return K::zero(x.chart());
    return pairing(df, x);
}

/// De Rham differential shifted by a degree-1 cocycle: d_mod(w) = dw + phi^w.
template <class K>
Tensor<K> d_mod(const Tensor<K>& w, const Tensor<K>& phi) {
    if (w.kind() != Kind::FORM) throw StructuralError("d_mod acts on forms");
    detail::require_cocycle(w, phi);
    return de_rham(w) + wedge(phi, w);
}

/// Differential of the extended complex: acts on pairs (eta, xi) as
/// (d eta, eta - d xi). Equals the de Rham differential shifted by the unit
/// cocycle of the extra slot.
template <class K>
Tensor<K> d01(const Tensor<K>& w) {
    if (w.kind() != Kind::FORM || !w.ext())
        throw StructuralError("d01 acts on extended forms");
    return d_mod(w, unit_cocycle<K>(w.chart()));
}

/// Schouten bracket deformed by a degree-1 cocycle phi:
///   [p,q]_mod = [p,q] + (|p|-1) p ^ i_phi(q) + (-1)^|p| (|q|-1) i_phi(p) ^ q.
/// A correction term is dropped when its integer factor vanishes or when the
/// contracted argument has degree 0 (so i_phi is undefined but the factor is
/// already forced to pair with an absent slot).
template <class K>
Tensor<K> sn_bracket_mod(const Tensor<K>& p, const Tensor<K>& q, const Tensor<K>& phi) {
    if (p.kind() != Kind::MV || q.kind() != Kind::MV)
        throw StructuralError("sn_bracket_mod acts on multivectors");
    detail::require_cocycle(p, phi);
    detail::require_cocycle(q, phi);
    Tensor<K> out = sn_bracket(p, q);
    const int pd = p.degree(), qd = q.degree();
    if (pd != 1 && qd >= 1)
        out = out + Rat(pd - 1) * wedge(p, contract1(phi, q));
    if (qd != 1 && pd >= 1) {
        Rat c = Rat(qd - 1);
        if (pd % 2 != 0) c = -c;
        out = out + c * wedge(contract1(phi, p), q);
    }
    return out;
}

/// Schouten bracket of the extended complex (deformation by the unit
/// cocycle). On degree-1 pairs this is the bracket
///   [(x,f),(y,g)] = ([x,y], x.g - y.f).
template <class K>
Tensor<K> sn_bracket01(const Tensor<K>& p, const Tensor<K>& q) {
    if (!p.ext() || !q.ext())
        throw StructuralError("sn_bracket01 acts on extended multivectors");
    return sn_bracket_mod(p, q, unit_cocycle<K>(p.chart()));
}

/// Lie derivative along a degree-1 multivector with the phi-shifted
/// differential: i_x d_mod + d_mod i_x (degree-0 forms take only the first
/// term).
template <class K>
Tensor<K> lie_mod(const Tensor<K>& x, const Tensor<K>& w, const Tensor<K>& phi) {
    if (x.kind() != Kind::MV || x.degree() != 1)
        throw StructuralError("lie_mod needs a degree-1 multivector");
    if (w.kind() != Kind::FORM || x.ext() != w.ext())
        throw StructuralError("lie_mod acts on forms of the same flavor");
    Tensor<K> out = contract1(x, d_mod(w, phi));
    if (w.degree() > 0) out = out + d_mod(contract1(x, w), phi);
    return out;
}

/// Lie derivative of the extended complex; on degree-0 this is the anchor
/// action (x,f).h = x.h + f h.
template <class K>
Tensor<K> lie01(const Tensor<K>& x, const Tensor<K>& w) {
    if (!x.ext() || !w.ext())
        throw StructuralError("lie01 acts on extended tensors");
    return lie_mod(x, w, unit_cocycle<K>(x.chart()));
}

/// Bundle map of a degree-2 multivector s applied to a degree-1 form:
/// sharp1(s, a) = i_a(s). For an extended pair s = (lambda, e) this is
/// (lambda#alpha + g e, -i_e alpha) on a = (alpha, g).
template <class K>
Tensor<K> sharp1(const Tensor<K>& s, const Tensor<K>& a) {
    if (s.kind() != Kind::MV || s.degree() != 2)
        throw StructuralError("sharp1 needs a degree-2 multivector");
    if (a.kind() != Kind::FORM || a.degree() != 1 || a.ext() != s.ext())
        throw StructuralError("sharp1 applies to a degree-1 form of the same flavor");
    return contract1(a, s);
}

/// Extension of the bundle map to all form degrees:
///   (s# w)(b^{k_1},...,b^{k_m}) = (-1)^m w(s# b^{k_1},..., s# b^{k_m})
/// over basis covectors b^j of the flavor (the extra slot included when
/// extended). Degree 0 passes through unchanged.
template <class K>
Tensor<K> sharp_extend(const Tensor<K>& s, const Tensor<K>& w) {
    if (s.kind() != Kind::MV || s.degree() != 2)
        throw StructuralError("sharp_extend needs a degree-2 multivector");
    if (w.kind() != Kind::FORM || w.ext() != s.ext())
        throw StructuralError("sharp_extend applies to a form of the same flavor");
    require_same_chart(s.chart(), w.chart());
    const ChartPtr& c = s.chart();
    const int k = w.degree();
    if (k == 0) return Tensor<K>::scalar(c, Kind::MV, s.ext(), w.scalar_value());

    std::vector<Tensor<K>> sh;
    sh.reserve(static_cast<std::size_t>(s.n_slots()));
    for (int j = 0; j < s.n_slots(); ++j)
        sh.push_back(sharp1(s, Tensor<K>::basis(c, Kind::FORM, s.ext(), j)));

    Tensor<K> out(c, Kind::MV, s.ext(), k);
    const Rat sign = (k % 2 == 0) ? Rat(1) : Rat(-1);
    detail::for_each_key(s.n_slots(), k, [&](const Key& key) {
        std::vector<Tensor<K>> args;
        args.reserve(static_cast<std::size_t>(k));
        for (int idx : key) args.push_back(sh[static_cast<std::size_t>(idx)]);
        K coeff = sign * eval_on(w, args);
        if (!coeff.is_zero()) out.add_term(key, coeff);
    });
    return out;
}

/// Bundle map applied to every slot of w except the last, which is
/// contracted with the degree-1 multivector v. Supported on degree-2 and
/// degree-3 forms; the sign convention (+ in degree 2, - in degree 3) is the
/// one under which a closed twist transports through the bracket identities,
/// and is frozen by the structure tests.
template <class K>
Tensor<K> sharp_hold_last(const Tensor<K>& s, const Tensor<K>& w, const Tensor<K>& v) {
    if (s.kind() != Kind::MV || s.degree() != 2)
        throw StructuralError("sharp_hold_last needs a degree-2 multivector");
    if (w.kind() != Kind::FORM || (w.degree() != 2 && w.degree() != 3))
        throw StructuralError("sharp_hold_last applies to degree-2 or degree-3 forms");
    if (v.kind() != Kind::MV || v.degree() != 1)
        throw StructuralError("sharp_hold_last contracts a degree-1 multivector");
    if (s.ext() != w.ext() || s.ext() != v.ext())
        throw StructuralError("sharp_hold_last needs one flavor throughout");
    require_same_chart(s.chart(), w.chart());
    require_same_chart(s.chart(), v.chart());
    const ChartPtr& c = s.chart();
    const int k = w.degree() - 1;

    std::vector<Tensor<K>> sh;
    sh.reserve(static_cast<std::size_t>(s.n_slots()));
    for (int j = 0; j < s.n_slots(); ++j)
        sh.push_back(sharp1(s, Tensor<K>::basis(c, Kind::FORM, s.ext(), j)));

    Tensor<K> out(c, Kind::MV, s.ext(), k);
    const Rat sign = (k == 1) ? Rat(1) : Rat(-1);
    detail::for_each_key(s.n_slots(), k, [&](const Key& key) {
        std::vector<Tensor<K>> args;
        args.reserve(static_cast<std::size_t>(k + 1));
        for (int idx : key) args.push_back(sh[static_cast<std::size_t>(idx)]);
        args.push_back(v);
        K coeff = sign * eval_on(w, args);
        if (!coeff.is_zero()) out.add_term(key, coeff);
    });
    return out;
}

/// Two-structure symmetrization of sharp_hold_last on a degree-3 form:
///   (a,b) -> w(s1# b^a, s2# b^b, v) + w(s2# b^a, s1# b^b, v)
/// with no overall sign. This is the cross term that appears when the
/// bracket of two different degree-2 multivectors meets a twist.
template <class K>
Tensor<K> mixed_sharp_hold_last(const Tensor<K>& s1, const Tensor<K>& s2,
                                const Tensor<K>& w, const Tensor<K>& v) {
    if (s1.kind() != Kind::MV || s1.degree() != 2 || s2.kind() != Kind::MV ||
        s2.degree() != 2)
        throw StructuralError("mixed_sharp_hold_last needs degree-2 multivectors");
    if (w.kind() != Kind::FORM || w.degree() != 3)
        throw StructuralError("mixed_sharp_hold_last applies to degree-3 forms");
    if (v.kind() != Kind::MV || v.degree() != 1)
        throw StructuralError("mixed_sharp_hold_last contracts a degree-1 multivector");
    if (s1.ext() != s2.ext() || s1.ext() != w.ext() || s1.ext() != v.ext())
        throw StructuralError("mixed_sharp_hold_last needs one flavor throughout");
    require_same_chart(s1.chart(), s2.chart());
    require_same_chart(s1.chart(), w.chart());
    require_same_chart(s1.chart(), v.chart());
    const ChartPtr& c = s1.chart();

    std::vector<Tensor<K>> sh1, sh2;
    sh1.reserve(static_cast<std::size_t>(s1.n_slots()));
    sh2.reserve(static_cast<std::size_t>(s1.n_slots()));
    for (int j = 0; j < s1.n_slots(); ++j) {
        Tensor<K> b = Tensor<K>::basis(c, Kind::FORM, s1.ext(), j);
        sh1.push_back(sharp1(s1, b));
        sh2.push_back(sharp1(s2, b));
    }

    Tensor<K> out(c, Kind::MV, s1.ext(), 2);
    detail::for_each_key(s1.n_slots(), 2, [&](const Key& key) {
        const auto a = static_cast<std::size_t>(key[0]);
        const auto b = static_cast<std::size_t>(key[1]);
        K coeff = eval_on(w, {sh1[a], sh2[b], v}) + eval_on(w, {sh2[a], sh1[b], v});
        if (!coeff.is_zero()) out.add_term(key, coeff);
    });
    return out;
}

}  // namespace jkit
