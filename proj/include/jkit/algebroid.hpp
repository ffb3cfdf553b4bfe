#pragma once

#include <string>
#include <vector>

#include "jkit/calculus.hpp"
#include "jkit/dirac.hpp"
#include "jkit/jacobi.hpp"
#include "jkit/report.hpp"

namespace jkit {

namespace detail {

template <class K>
void require_form_pair1(const Tensor<K>& a, const char* who) {
    if (!a.ext() || a.kind() != Kind::FORM || a.degree() != 1)
        throw StructuralError(std::string(who) + " needs extended degree-1 forms");
}

/// The negated structure field as a degree-1 multivector pair (-e, 0).
template <class K>
Tensor<K> shift_cocycle(const TwistedJacobiStructure<K>& s) {
    return make_ext(-s.e, Tensor<K>::zero(s.chart(), Kind::MV, false, 0));
}

}  // namespace detail

/// Bracket of degree-1 form pairs (alpha,f), (beta,g) generated by the
/// structure. The form leg collects the Lie derivatives along both images and
/// the field, the scalar leg the evaluation terms:
///   form:   L_{#a}b - L_{#b}a - d(lambda(a,b)) + f L_e b - g L_e a - i_e(a^b)
///   scalar: -lambda(a,b) + lambda(a,dg) - lambda(b,df) + f e.g - g e.f
template <class K>
Tensor<K> cotangent_bracket(const TwistedJacobiStructure<K>& s, const Tensor<K>& a,
                            const Tensor<K>& b) {
    detail::require_form_pair1(a, "cotangent_bracket");
    detail::require_form_pair1(b, "cotangent_bracket");
    require_same_chart(s.chart(), a.chart());
    require_same_chart(s.chart(), b.chart());
    const ChartPtr& c = s.chart();

    Tensor<K> alpha = ext_first(a), beta = ext_first(b);
    K f = ext_second(a).scalar_value(), g = ext_second(b).scalar_value();
    Tensor<K> la = contract1(alpha, s.lambda);
    Tensor<K> lb = contract1(beta, s.lambda);
    K lab = eval_on(s.lambda, {alpha, beta});

    Tensor<K> form = lie_form(la, beta) - lie_form(lb, alpha) -
                     differential(c, lab) + f * lie_form(s.e, beta) -
                     g * lie_form(s.e, alpha) - contract1(s.e, wedge(alpha, beta));
    K scalar = -lab + eval_on(s.lambda, {alpha, differential(c, g)}) -
               eval_on(s.lambda, {beta, differential(c, f)}) +
               f * vec_apply(s.e, g) - g * vec_apply(s.e, f);
    return make_ext(form, Tensor<K>::scalar(c, Kind::FORM, false, scalar));
}

/// Conformally twisted form-pair bracket: the base bracket plus the twist
/// pair evaluated through the bundle map on both arguments.
template <class K>
Tensor<K> cotangent_bracket_omega(const TwistedJacobiStructure<K>& s, const Tensor<K>& a,
                                  const Tensor<K>& b) {
    return cotangent_bracket(s, a, b) +
           ext_partial_eval(s.twist(), {sharp1(s.pair(), a), sharp1(s.pair(), b)});
}

/// Anchor of the form-pair algebroid: the plain vector leg of the sharp.
template <class K>
Tensor<K> form_pair_anchor(const TwistedJacobiStructure<K>& s, const Tensor<K>& a) {
    detail::require_form_pair1(a, "form_pair_anchor");
    return ext_first(sharp1(s.pair(), a));
}

/// Differential generated by the twisted form-pair bracket, on functions
/// (degree-0 multivector pairs) and on degree-1 multivector pairs. Defined by
/// the usual derivation formula over the form-pair basis, so every sign is
/// inherited from the bracket and the anchor.
template <class K>
Tensor<K> structure_diff(const TwistedJacobiStructure<K>& s, const Tensor<K>& m) {
    if (!m.ext() || m.kind() != Kind::MV || m.degree() > 1)
        throw StructuralError("structure_diff acts on extended multivectors of degree at most 1");
    require_same_chart(s.chart(), m.chart());
    const ChartPtr& c = s.chart();
    const int slots = c->dim() + 1;

    std::vector<Tensor<K>> basis;
    std::vector<Tensor<K>> anchor;
    basis.reserve(static_cast<std::size_t>(slots));
    anchor.reserve(static_cast<std::size_t>(slots));
    for (int j = 0; j < slots; ++j) {
        basis.push_back(Tensor<K>::basis(c, Kind::FORM, true, j));
        anchor.push_back(form_pair_anchor(s, basis.back()));
    }

    if (m.degree() == 0) {
        K f = m.scalar_value();
        Tensor<K> out(c, Kind::MV, true, 1);
        for (int j = 0; j < slots; ++j) {
            K v = vec_apply(anchor[static_cast<std::size_t>(j)], f);
            if (!v.is_zero()) out.add_term({j}, v);
        }
        return out;
    }

    std::vector<K> values;
    values.reserve(static_cast<std::size_t>(slots));
    for (int j = 0; j < slots; ++j)
        values.push_back(pairing(basis[static_cast<std::size_t>(j)], m));

    Tensor<K> out(c, Kind::MV, true, 2);
    for (int p = 0; p < slots; ++p)
        for (int q = p + 1; q < slots; ++q) {
            const auto a = static_cast<std::size_t>(p), b = static_cast<std::size_t>(q);
            K v = vec_apply(anchor[a], values[b]) - vec_apply(anchor[b], values[a]) -
                  pairing(cotangent_bracket_omega(s, basis[a], basis[b]), m);
            if (!v.is_zero()) out.add_term({p, q}, v);
        }
    return out;
}

/// The differential shifted by its degree-1 cocycle, the negated field pair:
/// on functions -#(df,f), on sections the bracket with the structure pair
/// plus the held twist.
template <class K>
Tensor<K> structure_diff_shifted(const TwistedJacobiStructure<K>& s, const Tensor<K>& m) {
    return structure_diff(s, m) + wedge(detail::shift_cocycle(s), m);
}

/// Twist-corrected bracket of multivector pairs through degree 2. Degree-1
/// pairs take the sharp of the twist evaluated on both; a degree-2 pair
/// against a degree-1 pair symmetrizes the two bundle maps over the twist.
/// Corrections vanish against degree-0 arguments.
template <class K>
Tensor<K> primed_bracket01(const TwistedJacobiStructure<K>& s, const Tensor<K>& p,
                           const Tensor<K>& q) {
    if (!p.ext() || !q.ext() || p.kind() != Kind::MV || q.kind() != Kind::MV)
        throw StructuralError("primed_bracket01 acts on extended multivectors");
    require_same_chart(s.chart(), p.chart());
    require_same_chart(s.chart(), q.chart());
    const int pd = p.degree(), qd = q.degree();
    if (pd == 0 || qd == 0) return sn_bracket01(p, q);
    if (pd == 1 && qd == 1)
        return sn_bracket01(p, q) - sharp1(s.pair(), ext_partial_eval(s.twist(), {p, q}));
    if (pd == 2 && qd == 1)
        return sn_bracket01(p, q) - mixed_sharp_hold_last(s.pair(), p, s.twist(), q);
    if (pd == 1 && qd == 2) return -primed_bracket01(s, q, p);
    throw UnsupportedError("primed_bracket01 is implemented through degree 2");
}

/// Quasi-differential on form pairs determined by the twist-corrected bracket
/// and the plain anchor, in any degree:
///   dw(u_0..u_k) = sum_i (-1)^i u_i.(w(..^i..))
///               + sum_{i<j} (-1)^{i+j} w([u_i,u_j]', ..^i..^j..)
template <class K>
Tensor<K> quasi_diff(const TwistedJacobiStructure<K>& s, const Tensor<K>& w) {
    if (!w.ext() || w.kind() != Kind::FORM)
        throw StructuralError("quasi_diff acts on extended forms");
    require_same_chart(s.chart(), w.chart());
    const ChartPtr& c = s.chart();
    const int slots = c->dim() + 1;
    const int k = w.degree();

    std::vector<Tensor<K>> basis;
    basis.reserve(static_cast<std::size_t>(slots));
    for (int j = 0; j < slots; ++j) basis.push_back(Tensor<K>::basis(c, Kind::MV, true, j));

    std::vector<std::vector<Tensor<K>>> br(static_cast<std::size_t>(slots));
    for (int p = 0; p < slots; ++p)
        for (int q = p + 1; q < slots; ++q)
            br[static_cast<std::size_t>(p)].push_back(primed_bracket01(
                s, basis[static_cast<std::size_t>(p)], basis[static_cast<std::size_t>(q)]));

    Tensor<K> out(c, Kind::FORM, true, k + 1);
    detail::for_each_key(slots, k + 1, [&](const Key& key) {
        K total = K::zero(c);
        for (int i = 0; i <= k; ++i) {
            std::vector<Tensor<K>> rest;
            rest.reserve(static_cast<std::size_t>(k));
            for (int j = 0; j <= k; ++j)
                if (j != i) rest.push_back(basis[static_cast<std::size_t>(key[static_cast<std::size_t>(j)])]);
            K inner = (k == 0) ? w.scalar_value() : eval_on(w, rest);
            Tensor<K> x = ext_first(basis[static_cast<std::size_t>(key[static_cast<std::size_t>(i)])]);
            K term = x.is_zero() ? K::zero(c) : vec_apply(x, inner);
            total = (i % 2 == 0) ? total + term : total - term;
        }
        for (int i = 0; i <= k; ++i)
            for (int j = i + 1; j <= k; ++j) {
                const int pi = key[static_cast<std::size_t>(i)];
                const int pj = key[static_cast<std::size_t>(j)];
                std::vector<Tensor<K>> args;
                args.reserve(static_cast<std::size_t>(k));
                args.push_back(br[static_cast<std::size_t>(pi)]
                                 [static_cast<std::size_t>(pj - pi - 1)]);
                for (int l = 0; l <= k; ++l)
                    if (l != i && l != j)
                        args.push_back(basis[static_cast<std::size_t>(key[static_cast<std::size_t>(l)])]);
                K term = eval_on(w, args);
                total = ((i + j) % 2 == 1) ? total - term : total + term;
            }
        if (!total.is_zero()) out.add_term(key, total);
    });
    return out;
}

/// The quasi-differential shifted by the unit cocycle of the extra slot.
template <class K>
Tensor<K> quasi_diff01(const TwistedJacobiStructure<K>& s, const Tensor<K>& w) {
    return quasi_diff(s, w) + wedge(unit_cocycle<K>(w.chart()), w);
}

/// Lie derivative of multivector pairs along a form pair, generated by the
/// shifted structure differential.
template <class K>
Tensor<K> lie_star(const TwistedJacobiStructure<K>& s, const Tensor<K>& a,
                   const Tensor<K>& u) {
    detail::require_form_pair1(a, "lie_star");
    Tensor<K> out = contract1(a, structure_diff_shifted(s, u));
    if (u.degree() > 0) out = out + structure_diff_shifted(s, contract1(a, u));
    return out;
}

/// Lie derivative of form pairs along a multivector pair, generated by the
/// shifted quasi-differential.
template <class K>
Tensor<K> lie_quasi(const TwistedJacobiStructure<K>& s, const Tensor<K>& u,
                    const Tensor<K>& w) {
    if (!u.ext() || u.kind() != Kind::MV || u.degree() != 1)
        throw StructuralError("lie_quasi needs an extended degree-1 multivector");
    Tensor<K> out = contract1(u, quasi_diff01(s, w));
    if (w.degree() > 0) out = out + quasi_diff01(s, contract1(u, w));
    return out;
}

/// Function bracket induced by the two one-sided differentials:
/// the shifted quasi-differential of f paired against the shifted structure
/// differential of g.
template <class K>
K hamiltonian_pair_bracket(const TwistedJacobiStructure<K>& s, const K& f, const K& g) {
    const ChartPtr& c = s.chart();
    Tensor<K> df = quasi_diff01(s, Tensor<K>::scalar(c, Kind::FORM, true, f));
    Tensor<K> dg = structure_diff_shifted(s, Tensor<K>::scalar(c, Kind::MV, true, g));
    return pairing(df, dg);
}

/// Checks the six compatibility conditions that make the structure's pair of
/// one-sided calculi a consistent two-sided package: module rule and anchor
/// morphism for the corrected bracket, the jacobiator transfer through the
/// twist, the two cocycle conditions on the twist itself, and the derivation
/// property of the shifted differential in its three degree families.
template <class K>
VerificationReport check_quasi_jacobi(const TwistedJacobiStructure<K>& s,
                                      const std::vector<Tensor<K>>& sections,
                                      const std::vector<K>& functions) {
    if (sections.empty() || functions.empty())
        throw UsageError("check_quasi_jacobi needs sections and functions");
    for (const auto& u : sections) {
        if (!u.ext() || u.kind() != Kind::MV || u.degree() != 1)
            throw StructuralError("quasi-jacobi sections are extended degree-1 multivectors");
        require_same_chart(s.chart(), u.chart());
    }
    const ChartPtr& c = s.chart();
    const std::size_t m = sections.size();
    Tensor<K> tw = s.twist();

    VerificationReport rep;
    rep.name = "quasi-jacobi";

    std::vector<Tensor<K>> diffs;
    diffs.reserve(m);
    for (const auto& u : sections) diffs.push_back(structure_diff_shifted(s, u));

    detail::FirstFailure leibniz;
    for (const auto& u : sections)
        for (const auto& v : sections)
            for (const K& f : functions) {
                Tensor<K> lhs = primed_bracket01(s, u, f * v);
                Tensor<K> rhs = f * primed_bracket01(s, u, v) +
                                vec_apply(ext_first(u), f) * v;
                Tensor<K> r = lhs - rhs;
                leibniz.check(r.is_zero(), [&] { return tensor_str(r); });
            }
    rep.add("module-leibniz", 1, leibniz.expr, leibniz.all_zero);

    detail::FirstFailure morphism;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            Tensor<K> lhs = ext_first(primed_bracket01(s, sections[i], sections[j]));
            Tensor<K> rhs = sn_bracket(ext_first(sections[i]), ext_first(sections[j])) -
                            form_pair_anchor(s, ext_partial_eval(tw, {sections[i], sections[j]}));
            Tensor<K> r = lhs - rhs;
            morphism.check(r.is_zero(), [&] { return tensor_str(r); });
        }
    rep.add("anchor-morphism", 1, morphism.expr, morphism.all_zero);

    detail::FirstFailure transfer;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                const Tensor<K>&u = sections[i], &v = sections[j], &w = sections[k];
                Tensor<K> jac = primed_bracket01(s, primed_bracket01(s, u, v), w) +
                                primed_bracket01(s, primed_bracket01(s, v, w), u) +
                                primed_bracket01(s, primed_bracket01(s, w, u), v);
                Tensor<K> scalar = structure_diff_shifted(
                    s, Tensor<K>::scalar(c, Kind::MV, true, ext_eval(tw, {u, v, w})));
                Tensor<K> held = contract1(ext_partial_eval(tw, {u, v}), diffs[k]) +
                                 contract1(ext_partial_eval(tw, {v, w}), diffs[i]) +
                                 contract1(ext_partial_eval(tw, {w, u}), diffs[j]);
                Tensor<K> r = jac + scalar + held;
                transfer.check(r.is_zero(), [&] { return tensor_str(r); });
            }
    rep.add("jacobiator-transfer", 1, transfer.expr, transfer.all_zero);

    Tensor<K> unit_twist = quasi_diff(s, unit_cocycle<K>(c)) -
                           contract1(detail::shift_cocycle(s), tw);
    rep.add("unit-twist", 2, unit_twist.is_zero() ? "0" : tensor_str(unit_twist),
            unit_twist.is_zero());

    Tensor<K> closed = quasi_diff01(s, tw);
    rep.add("twist-closedness", 4, closed.is_zero() ? "0" : tensor_str(closed),
            closed.is_zero());

    detail::FirstFailure fam_fn;
    for (const K& f : functions)
        for (const K& g : functions) {
            Tensor<K> wf = structure_diff_shifted(s, Tensor<K>::scalar(c, Kind::MV, true, f));
            Tensor<K> wg = structure_diff_shifted(s, Tensor<K>::scalar(c, Kind::MV, true, g));
            Tensor<K> ge = Tensor<K>::scalar(c, Kind::MV, true, g);
            Tensor<K> fe = Tensor<K>::scalar(c, Kind::MV, true, f);
            Tensor<K> r = primed_bracket01(s, wf, ge) - primed_bracket01(s, fe, wg);
            fam_fn.check(r.is_zero(), [&] { return tensor_str(r); });
        }
    rep.add("derivation-functions", 0, fam_fn.expr, fam_fn.all_zero);

    detail::FirstFailure fam_mixed;
    for (std::size_t i = 0; i < m; ++i)
        for (const K& g : functions) {
            Tensor<K> ge = Tensor<K>::scalar(c, Kind::MV, true, g);
            Tensor<K> wg = structure_diff_shifted(s, ge);
            Tensor<K> lhs = structure_diff_shifted(s, primed_bracket01(s, sections[i], ge));
            Tensor<K> rhs = primed_bracket01(s, sections[i], wg) +
                            primed_bracket01(s, diffs[i], ge);
            Tensor<K> r = lhs - rhs;
            fam_mixed.check(r.is_zero(), [&] { return tensor_str(r); });
        }
    rep.add("derivation-mixed", 1, fam_mixed.expr, fam_mixed.all_zero);

    detail::FirstFailure fam_sec;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            Tensor<K> lhs = structure_diff_shifted(
                s, primed_bracket01(s, sections[i], sections[j]));
            Tensor<K> rhs = primed_bracket01(s, diffs[i], sections[j]) +
                            primed_bracket01(s, sections[i], diffs[j]);
            Tensor<K> r = lhs - rhs;
            fam_sec.check(r.is_zero(), [&] { return tensor_str(r); });
        }
    rep.add("derivation-sections", 2, fam_sec.expr, fam_sec.all_zero);

    return rep;
}

/// Scalar coupling of the two-sided package against a double section:
/// the vector-pair scalar minus the field paired into the form leg.
template <class K>
K theta_pair_value(const TwistedJacobiStructure<K>& s, const E1Section<K>& e) {
    return ext_second(e.v).scalar_value() - pairing(ext_first(e.a), s.e);
}

/// First-order action of a double section on functions: the vector legs of
/// both sides act as derivations, the scalar coupling multiplies.
template <class K>
K double_anchor_apply(const TwistedJacobiStructure<K>& s, const E1Section<K>& e,
                      const K& h) {
    Tensor<K> x = ext_first(e.v) + form_pair_anchor(s, e.a);
    return vec_apply(x, h) + theta_pair_value(s, e) * h;
}

/// Derivation section of the double: both one-sided differentials of f.
template <class K>
E1Section<K> double_derivation(const TwistedJacobiStructure<K>& s, const K& f) {
    const ChartPtr& c = s.chart();
    return {structure_diff_shifted(s, Tensor<K>::scalar(c, Kind::MV, true, f)),
            quasi_diff01(s, Tensor<K>::scalar(c, Kind::FORM, true, f))};
}

/// Bracket on the two-sided double: each leg takes its own bracket, the Lie
/// derivatives along the other side, and the skew pairing through its own
/// differential; the twist feeds the form leg.
template <class K>
E1Section<K> double_bracket(const TwistedJacobiStructure<K>& s, const E1Section<K>& e1,
                            const E1Section<K>& e2) {
    require_same_chart(s.chart(), e1.chart());
    require_same_chart(s.chart(), e2.chart());
    const ChartPtr& c = s.chart();
    K minus = pairing(e1, e2, -1);

    Tensor<K> v = primed_bracket01(s, e1.v, e2.v) + lie_star(s, e1.a, e2.v) -
                  lie_star(s, e2.a, e1.v) -
                  structure_diff_shifted(s, Tensor<K>::scalar(c, Kind::MV, true, minus));
    Tensor<K> a = cotangent_bracket_omega(s, e1.a, e2.a) + lie_quasi(s, e1.v, e2.a) -
                  lie_quasi(s, e2.v, e1.a) +
                  quasi_diff01(s, Tensor<K>::scalar(c, Kind::FORM, true, minus)) +
                  ext_partial_eval(s.twist(), {e1.v, e2.v});
    return {v, a};
}

/// Checks the bracket axioms of the two-sided double on the supplied test
/// sections and functions: scalar-coupling compatibility of the anchor, the
/// jacobiator against the derivation of the twisted torsion, the commutator
/// property of the first-order action, invariance of the symmetric pairing,
/// and isotropy of the derivation sections.
template <class K>
VerificationReport check_double_courant_jacobi(const TwistedJacobiStructure<K>& s,
                                               const std::vector<E1Section<K>>& sections,
                                               const std::vector<K>& functions) {
    if (sections.empty() || functions.empty())
        throw UsageError("check_double_courant_jacobi needs sections and functions");
    for (const auto& e : sections) require_same_chart(s.chart(), e.chart());
    const std::size_t m = sections.size();

    std::vector<std::vector<E1Section<K>>> cache(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            cache[i].push_back(double_bracket(s, sections[i], sections[j]));
    auto bracket_of = [&](std::size_t i, std::size_t j) -> E1Section<K> {
        if (i < j) return cache[i][j - i - 1];
        return -cache[j][i - j - 1];
    };
    auto rho = [&](const E1Section<K>& e, const K& h) -> K {
        Tensor<K> x = ext_first(e.v) + form_pair_anchor(s, e.a);
        return vec_apply(x, h);
    };

    VerificationReport rep;
    rep.name = "double";

    detail::FirstFailure coupling;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            K lhs = theta_pair_value(s, bracket_of(i, j));
            K rhs = rho(sections[i], theta_pair_value(s, sections[j])) -
                    rho(sections[j], theta_pair_value(s, sections[i]));
            K r = lhs - rhs;
            coupling.check(r.is_zero(), [&] { return r.str(); });
        }
    rep.add("anchor-pairing", 0, coupling.expr, coupling.all_zero);

    detail::FirstFailure jacobiator;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                E1Section<K> jac = double_bracket(s, bracket_of(i, j), sections[k]) +
                                   double_bracket(s, bracket_of(j, k), sections[i]) +
                                   double_bracket(s, bracket_of(k, i), sections[j]);
                K torsion = Rat(1) / 3 *
                            (pairing(bracket_of(i, j), sections[k], 1) +
                             pairing(bracket_of(j, k), sections[i], 1) +
                             pairing(bracket_of(k, i), sections[j], 1));
                E1Section<K> r = jac - double_derivation(s, torsion);
                jacobiator.check(r.is_zero(), [&] { return section_str(r); });
            }
    rep.add("jacobiator", 1, jacobiator.expr, jacobiator.all_zero);

    detail::FirstFailure anchor;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (const K& h : functions) {
                K lhs = double_anchor_apply(s, bracket_of(i, j), h);
                K rhs = double_anchor_apply(s, sections[i],
                                            double_anchor_apply(s, sections[j], h)) -
                        double_anchor_apply(s, sections[j],
                                            double_anchor_apply(s, sections[i], h));
                K r = lhs - rhs;
                anchor.check(r.is_zero(), [&] { return r.str(); });
            }
    rep.add("anchor-bracket", 0, anchor.expr, anchor.all_zero);

    detail::FirstFailure invariance;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = j; k < m; ++k) {
                if (i == j || i == k) continue;
                K plus_jk = pairing(sections[j], sections[k], 1);
                E1Section<K> left =
                    bracket_of(i, j) + double_derivation(s, pairing(sections[i], sections[j], 1));
                E1Section<K> right =
                    bracket_of(i, k) + double_derivation(s, pairing(sections[i], sections[k], 1));
                K r = double_anchor_apply(s, sections[i], plus_jk) -
                      pairing(left, sections[k], 1) - pairing(sections[j], right, 1);
                invariance.check(r.is_zero(), [&] { return r.str(); });
            }
    rep.add("pairing-invariance", 0, invariance.expr, invariance.all_zero);

    detail::FirstFailure isotropy;
    for (const K& f : functions)
        for (const K& g : functions) {
            K r = pairing(double_derivation(s, f), double_derivation(s, g), 1);
            isotropy.check(r.is_zero(), [&] { return r.str(); });
        }
    rep.add("derivation-isotropy", 0, isotropy.expr, isotropy.all_zero);

    return rep;
}

}  // namespace jkit
