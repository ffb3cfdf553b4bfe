#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "jkit/jacobi.hpp"

namespace jkit {

/// A pair of twisting forms (phi, omega) for the extended bracket. phi is
/// not required to be the differential of omega; coboundary() measures the
/// gap and vanishes exactly when it is.
template <class K>
struct TwistData {
    Tensor<K> phi;    // plain degree-3 form
    Tensor<K> omega;  // plain degree-2 form

    TwistData(Tensor<K> p, Tensor<K> om) : phi(std::move(p)), omega(std::move(om)) {
        require_same_chart(phi.chart(), omega.chart());
        if (phi.ext() || phi.kind() != Kind::FORM || phi.degree() != 3)
            throw StructuralError("twist needs a plain degree-3 form");
        if (omega.ext() || omega.kind() != Kind::FORM || omega.degree() != 2)
            throw StructuralError("twist needs a plain degree-2 form");
    }

    static TwistData exact(const Tensor<K>& omega) { return {de_rham(omega), omega}; }

    static TwistData none(const ChartPtr& c) {
        return {form_zero<K>(c, 3), form_zero<K>(c, 2)};
    }

    const ChartPtr& chart() const { return phi.chart(); }

    /// The extended degree-3 form (phi, omega).
    Tensor<K> pair() const { return make_ext(phi, omega); }

    /// d01 of the pair: (d phi, phi - d omega), zero iff phi = d omega.
    Tensor<K> coboundary() const { return d01(pair()); }
};

/// Symmetric (sign=+1) or antisymmetric (sign=-1) canonical pairing of two
/// sections of the extended double bundle.
template <class K>
K pairing(const E1Section<K>& e1, const E1Section<K>& e2, int sign) {
    if (sign != 1 && sign != -1) throw UsageError("pairing sign must be +1 or -1");
    K t1 = pairing(e1.a, e2.v);
    K t2 = pairing(e2.a, e1.v);
    return Rat(1) / 2 * (sign > 0 ? t1 + t2 : t1 - t2);
}

/// The skew bracket on sections of the extended double bundle: the extended
/// bracket of the vector pairs together with the extended Lie derivatives of
/// the form pairs and the differential of the antisymmetric pairing.
template <class K>
E1Section<K> e1_bracket(const E1Section<K>& e1, const E1Section<K>& e2) {
    Tensor<K> v = sn_bracket01(e1.v, e2.v);
    K minus = pairing(e1, e2, -1);
    Tensor<K> a = lie01(e1.v, e2.a) - lie01(e2.v, e1.a) +
                  d01(make_ext_scalar(e1.chart(), Kind::FORM, minus));
    return {v, a};
}

/// The twisted bracket: the skew bracket plus the twist pair evaluated on
/// the two vector pairs.
template <class K>
E1Section<K> twisted_bracket(const TwistData<K>& tw, const E1Section<K>& e1,
                             const E1Section<K>& e2) {
    require_same_chart(tw.chart(), e1.chart());
    E1Section<K> b = e1_bracket(e1, e2);
    return {b.v, b.a + ext_partial_eval(tw.pair(), {e1.v, e2.v})};
}

/// The modified anchor action on functions: (x, f) acts as h -> x.h + f h.
template <class K>
K anchor_apply(const E1Section<K>& e, const K& h) {
    return vec_apply(ext_first(e.v), h) + ext_second(e.v).scalar_value() * h;
}

/// The derivation sending a function into the bundle: zero vector pair and
/// form pair (df, f). Pairs with any section to half the anchor action.
template <class K>
E1Section<K> theta_derivation(const ChartPtr& c, const K& f) {
    return {Tensor<K>::zero(c, Kind::MV, true, 1),
            d01(make_ext_scalar(c, Kind::FORM, f))};
}

namespace detail {

/// Collects many instances of one residual family: remembers whether all
/// were zero and renders only the first failure.
struct FirstFailure {
    std::string expr = "0";
    bool all_zero = true;

    template <class F>
    void check(bool zero, F&& render) {
        if (all_zero && !zero) {
            expr = render();
            all_zero = false;
        }
    }
};

}  // namespace detail

/// Verifies the bracket/pairing/anchor axioms on the given test sections and
/// functions. The jacobiator residual includes the coboundary correction of
/// the twist pair, so it vanishes for every twist, exact or not; the other
/// residuals are the axioms verbatim.
template <class K>
VerificationReport check_courant_jacobi_axioms(const TwistData<K>& tw,
                                               const std::vector<E1Section<K>>& sections,
                                               const std::vector<K>& functions) {
    if (sections.empty() || functions.empty())
        throw UsageError("axiom check needs nonempty section and function sets");
    const ChartPtr& c = tw.chart();
    for (const auto& s : sections) require_same_chart(c, s.chart());

    const int m = static_cast<int>(sections.size());
    Tensor<K> dtw = tw.coboundary();

    // Pairwise brackets, cached; bracket(j, i) = -bracket(i, j).
    std::vector<std::vector<std::optional<E1Section<K>>>> cache(
        m, std::vector<std::optional<E1Section<K>>>(m));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            cache[i][j] = twisted_bracket(tw, sections[i], sections[j]);
    auto bracket = [&](int i, int j) -> E1Section<K> {
        if (i == j) return E1Section<K>::zero(c);
        return i < j ? *cache[i][j] : -*cache[j][i];
    };

    detail::FirstFailure pre, ax1, ax2, ax3, ax4;

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            E1Section<K> b = bracket(i, j);
            K fb = ext_second(b.v).scalar_value();
            K want = vec_apply(ext_first(sections[i].v),
                               ext_second(sections[j].v).scalar_value()) -
                     vec_apply(ext_first(sections[j].v),
                               ext_second(sections[i].v).scalar_value());
            K pr = fb - want;
            pre.check(pr.is_zero(), [&] { return pr.str(); });

            for (const K& h : functions) {
                K r = anchor_apply(b, h) - anchor_apply(sections[i], anchor_apply(sections[j], h)) +
                      anchor_apply(sections[j], anchor_apply(sections[i], h));
                ax2.check(r.is_zero(), [&] { return r.str(); });
            }
        }
    }

    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k) {
                E1Section<K> jac = twisted_bracket(tw, bracket(i, j), sections[k]) +
                                   twisted_bracket(tw, bracket(j, k), sections[i]) +
                                   twisted_bracket(tw, bracket(k, i), sections[j]);
                K t = Rat(1) / 3 *
                      (pairing(bracket(i, j), sections[k], 1) +
                       pairing(bracket(j, k), sections[i], 1) +
                       pairing(bracket(k, i), sections[j], 1));
                Tensor<K> corr = ext_partial_eval(
                    dtw, {sections[i].v, sections[j].v, sections[k].v});
                E1Section<K> r = jac - theta_derivation(c, t) +
                                 E1Section<K>(Tensor<K>::zero(c, Kind::MV, true, 1), corr);
                ax1.check(r.is_zero(), [&] { return section_str(r); });
            }

    for (int a = 0; a < m; ++a)
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const E1Section<K>& e = sections[a];
                K lhs = anchor_apply(e, pairing(sections[i], sections[j], 1));
                E1Section<K> t1 = bracket(a, i) + theta_derivation(c, pairing(e, sections[i], 1));
                E1Section<K> t2 = bracket(a, j) + theta_derivation(c, pairing(e, sections[j], 1));
                K r = lhs - pairing(t1, sections[j], 1) - pairing(sections[i], t2, 1);
                ax3.check(r.is_zero(), [&] { return r.str(); });
            }

    for (std::size_t i = 0; i < functions.size(); ++i)
        for (std::size_t j = i; j < functions.size(); ++j) {
            K r = pairing(theta_derivation(c, functions[i]),
                          theta_derivation(c, functions[j]), 1);
            ax4.check(r.is_zero(), [&] { return r.str(); });
        }

    VerificationReport rep;
    rep.name = "courant-jacobi";
    rep.add("anchor-pairing", 0, pre.expr, pre.all_zero);
    rep.add("jacobiator", 1, ax1.expr, ax1.all_zero);
    rep.add("anchor-bracket", 0, ax2.expr, ax2.all_zero);
    rep.add("pairing-invariance", 0, ax3.expr, ax3.all_zero);
    rep.add("derivation-isotropy", 0, ax4.expr, ax4.all_zero);
    return rep;
}

/// Graph-type Dirac sub-bundle of the classical double bundle TM + T*M:
/// either the graph of a bivector (forms are free) or of a 2-form (vectors
/// are free).
template <class K>
struct CourantDiracSpec {
    enum class Type { GraphBivector, GraphTwoForm };
    Type type;
    Tensor<K> data;  // bivector for GraphBivector, 2-form for GraphTwoForm

    CourantDiracSpec(Type t, Tensor<K> d) : type(t), data(std::move(d)) {
        Kind want = (type == Type::GraphBivector) ? Kind::MV : Kind::FORM;
        if (data.ext() || data.kind() != want || data.degree() != 2)
            throw StructuralError("graph data must be a plain degree-2 tensor of the graph kind");
    }

    const ChartPtr& chart() const { return data.chart(); }
};

/// The five parametrized sub-bundle families of the extended double bundle.
template <class K>
struct GraphSharpBundle {
    TwistedJacobiStructure<K> s;
};

template <class K>
struct GraphFlatBundle {
    Tensor<K> eta;    // plain degree-2 form
    Tensor<K> gamma;  // plain degree-1 form

    GraphFlatBundle(Tensor<K> et, Tensor<K> ga) : eta(std::move(et)), gamma(std::move(ga)) {
        require_same_chart(eta.chart(), gamma.chart());
        if (eta.ext() || eta.kind() != Kind::FORM || eta.degree() != 2)
            throw StructuralError("flat graph needs a plain degree-2 form");
        if (gamma.ext() || gamma.kind() != Kind::FORM || gamma.degree() != 1)
            throw StructuralError("flat graph needs a plain degree-1 form");
    }

    Tensor<K> pair() const { return make_ext(eta, gamma); }
};

template <class K>
struct CourantShiftBundle {
    CourantDiracSpec<K> l;
    Tensor<K> omega;  // plain degree-2 form shifted out of the form leg

    CourantShiftBundle(CourantDiracSpec<K> ll, Tensor<K> om)
        : l(std::move(ll)), omega(std::move(om)) {
        require_same_chart(l.chart(), omega.chart());
        if (omega.ext() || omega.kind() != Kind::FORM || omega.degree() != 2)
            throw StructuralError("shift needs a plain degree-2 form");
    }
};

template <class K>
struct TlcsBundle {
    TlcsStructure<K> t;
};

template <class K>
struct HomogPoissonBundle {
    HomogeneousTwistedPoisson<K> h;
};

template <class K>
using SubBundleSpec = std::variant<GraphSharpBundle<K>, GraphFlatBundle<K>,
                                   CourantShiftBundle<K>, TlcsBundle<K>, HomogPoissonBundle<K>>;

namespace detail {

template <class K>
const ChartPtr& spec_chart(const GraphSharpBundle<K>& b) {
    return b.s.chart();
}
template <class K>
const ChartPtr& spec_chart(const GraphFlatBundle<K>& b) {
    return b.eta.chart();
}
template <class K>
const ChartPtr& spec_chart(const CourantShiftBundle<K>& b) {
    return b.l.chart();
}
template <class K>
const ChartPtr& spec_chart(const TlcsBundle<K>& b) {
    return b.t.chart();
}
template <class K>
const ChartPtr& spec_chart(const HomogPoissonBundle<K>& b) {
    return b.h.chart();
}

/// Rebuilds the section determined by the family's free parameter: a plain
/// degree-1 tensor (kind depending on the family) and a scalar.
template <class K>
E1Section<K> from_params(const GraphSharpBundle<K>& b, const Tensor<K>& a, const K& g) {
    return {sharp1(b.s.pair(), ext_cov(a, g)), ext_cov(a, g)};
}

template <class K>
E1Section<K> from_params(const GraphFlatBundle<K>& b, const Tensor<K>& x, const K& f) {
    Tensor<K> v = ext_vec(x, f);
    return {v, contract1(v, b.pair())};
}

template <class K>
E1Section<K> from_params(const CourantShiftBundle<K>& b, const Tensor<K>& p, const K& f) {
    using Type = typename CourantDiracSpec<K>::Type;
    if (b.l.type == Type::GraphBivector) {
        Tensor<K> x = contract1(p, b.l.data);
        return {ext_vec(x, K::zero(p.chart())), ext_cov(p - contract1(x, b.omega), f)};
    }
    Tensor<K> a = contract1(p, b.l.data - b.omega);
    return {ext_vec(p, K::zero(p.chart())), ext_cov(a, f)};
}

template <class K>
E1Section<K> from_params(const TlcsBundle<K>& b, const Tensor<K>& x, const K& f) {
    K fx = contract1(x, b.t.lee).scalar_value();
    return {ext_vec(x, fx), ext_cov(contract1(x, b.t.theta) - f * b.t.lee, f)};
}

template <class K>
E1Section<K> from_params(const HomogPoissonBundle<K>& b, const Tensor<K>& a, const K& f) {
    Tensor<K> x = contract1(a, b.h.lambda) - f * b.h.z;
    return {ext_vec(x, f), ext_cov(a, contract1(b.h.z, a).scalar_value())};
}

/// Recovers the free parameter from an arbitrary section; for members this
/// inverts from_params.
template <class K>
std::pair<Tensor<K>, K> to_params(const GraphSharpBundle<K>&, const E1Section<K>& e) {
    return {ext_first(e.a), ext_second(e.a).scalar_value()};
}

template <class K>
std::pair<Tensor<K>, K> to_params(const GraphFlatBundle<K>&, const E1Section<K>& e) {
    return {ext_first(e.v), ext_second(e.v).scalar_value()};
}

template <class K>
std::pair<Tensor<K>, K> to_params(const CourantShiftBundle<K>& b, const E1Section<K>& e) {
    using Type = typename CourantDiracSpec<K>::Type;
    K f = ext_second(e.a).scalar_value();
    if (b.l.type == Type::GraphBivector)
        return {ext_first(e.a) + contract1(ext_first(e.v), b.omega), f};
    return {ext_first(e.v), f};
}

template <class K>
std::pair<Tensor<K>, K> to_params(const TlcsBundle<K>&, const E1Section<K>& e) {
    return {ext_first(e.v), ext_second(e.a).scalar_value()};
}

template <class K>
std::pair<Tensor<K>, K> to_params(const HomogPoissonBundle<K>&, const E1Section<K>& e) {
    return {ext_first(e.a), ext_second(e.v).scalar_value()};
}

/// Kind of the degree-1 parameter tensor for each family.
template <class K>
Kind param_kind(const SubBundleSpec<K>& spec) {
    return std::visit(
        [](const auto& b) -> Kind {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, GraphSharpBundle<K>> ||
                          std::is_same_v<B, HomogPoissonBundle<K>>) {
                return Kind::FORM;
            } else if constexpr (std::is_same_v<B, CourantShiftBundle<K>>) {
                return b.l.type == CourantDiracSpec<K>::Type::GraphBivector ? Kind::FORM
                                                                            : Kind::MV;
            } else {
                (void)b;
                return Kind::MV;
            }
        },
        spec);
}

}  // namespace detail

template <class K>
ChartPtr chart_of(const SubBundleSpec<K>& spec) {
    return std::visit([](const auto& b) -> ChartPtr { return detail::spec_chart(b); }, spec);
}

/// The defect of e against the family's parametrization: extract the free
/// parameter, rebuild the section it determines, subtract. Zero exactly for
/// members.
template <class K>
E1Section<K> membership_residual(const SubBundleSpec<K>& spec, const E1Section<K>& e) {
    return std::visit(
        [&](const auto& b) {
            auto [p, s] = detail::to_params(b, e);
            return e - detail::from_params(b, p, s);
        },
        spec);
}

template <class K>
bool membership(const SubBundleSpec<K>& spec, const E1Section<K>& e) {
    return membership_residual(spec, e).is_zero();
}

/// Spanning sections: the parametrization applied to each basis degree-1
/// tensor of the parameter kind and to the unit scalar. Always dim+1 of
/// them, matching the rank of a maximal isotropic sub-bundle.
template <class K>
std::vector<E1Section<K>> generators(const SubBundleSpec<K>& spec) {
    ChartPtr c = chart_of(spec);
    Kind pk = detail::param_kind(spec);
    std::vector<E1Section<K>> out;
    out.reserve(static_cast<std::size_t>(c->dim()) + 1);
    return std::visit(
        [&](const auto& b) {
            for (int i = 0; i < c->dim(); ++i) {
                Tensor<K> p = pk == Kind::MV ? basis_vector<K>(c, i) : basis_covector<K>(c, i);
                out.push_back(detail::from_params(b, p, K::zero(c)));
            }
            out.push_back(detail::from_params(
                b, Tensor<K>::zero(c, pk, false, 1), K::one(c)));
            return out;
        },
        spec);
}

/// Isotropy, rank, and bracket closure of the family under the twisted
/// bracket. Closure is tested on generator pairs and on generator pairs
/// rescaled by the multiplier functions (all chart coordinates by default),
/// with membership of every result checked against the parametrization.
template <class K>
VerificationReport check_closure(const SubBundleSpec<K>& spec, const TwistData<K>& tw,
                                 std::vector<K> multipliers = {}) {
    ChartPtr c = chart_of(spec);
    require_same_chart(c, tw.chart());
    if (multipliers.empty())
        for (int i = 0; i < c->dim(); ++i) multipliers.push_back(K::variable(c, i));

    auto gens = generators(spec);
    const int m = static_cast<int>(gens.size());

    detail::FirstFailure iso;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            K p = pairing(gens[i], gens[j], 1);
            iso.check(p.is_zero(), [&] { return p.str(); });
        }

    bool count_ok = m == c->dim() + 1;

    detail::FirstFailure closed;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            E1Section<K> r = membership_residual(spec, twisted_bracket(tw, gens[i], gens[j]));
            closed.check(r.is_zero(), [&] { return section_str(r); });
        }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (const K& f : multipliers) {
                E1Section<K> r = membership_residual(
                    spec, twisted_bracket(tw, gens[i], f * gens[j]));
                closed.check(r.is_zero(), [&] { return section_str(r); });
            }

    VerificationReport rep;
    rep.name = "closure";
    rep.add("isotropy", 0, iso.expr, iso.all_zero);
    rep.add("generator-count", 0, count_ok ? "0" : std::to_string(m - c->dim() - 1), count_ok);
    rep.add("bracket-closure", 1, closed.expr, closed.all_zero);
    return rep;
}

/// Gauge shift by an extended degree-2 form pair g = (eta, gamma): the form
/// leg gains the contraction of the vector pair into g; the vector leg is
/// untouched.
template <class K>
E1Section<K> gauge_transform(const Tensor<K>& g, const E1Section<K>& e) {
    if (!g.ext() || g.kind() != Kind::FORM || g.degree() != 2)
        throw StructuralError("gauge parameter must be an extended degree-2 form");
    return {e.v, e.a + contract1(e.v, g)};
}

/// The three structural facts about gauge shifts plus additivity: pairings
/// are preserved, the anchor (the vector pair) is preserved, the shift
/// intertwines the tw-twisted bracket with the bracket twisted by
/// tw - d01(g), and applying the shift twice equals shifting by 2g.
template <class K>
VerificationReport check_gauge_proposition(const Tensor<K>& g, const TwistData<K>& tw,
                                           const std::vector<E1Section<K>>& sections) {
    if (sections.empty()) throw UsageError("gauge check needs a nonempty section set");
    if (!g.ext() || g.kind() != Kind::FORM || g.degree() != 2)
        throw StructuralError("gauge parameter must be an extended degree-2 form");
    require_same_chart(g.chart(), tw.chart());

    Tensor<K> eta = ext_first(g);
    Tensor<K> gamma = ext_second(g);
    TwistData<K> shifted{tw.phi - de_rham(eta), tw.omega - eta + de_rham(gamma)};

    const int m = static_cast<int>(sections.size());
    std::vector<E1Section<K>> moved;
    moved.reserve(sections.size());
    for (const auto& e : sections) moved.push_back(gauge_transform(g, e));

    detail::FirstFailure pairs, anchor, inter, comp;
    for (int i = 0; i < m; ++i) {
        Tensor<K> av = moved[i].v - sections[i].v;
        anchor.check(av.is_zero(), [&] { return tensor_str(av); });
        E1Section<K> tw2 = gauge_transform(g, gauge_transform(g, sections[i])) -
                           gauge_transform(Rat(2) * g, sections[i]);
        comp.check(tw2.is_zero(), [&] { return section_str(tw2); });
        for (int j = i; j < m; ++j) {
            K dp = pairing(moved[i], moved[j], 1) - pairing(sections[i], sections[j], 1);
            pairs.check(dp.is_zero(), [&] { return dp.str(); });
        }
        for (int j = i + 1; j < m; ++j) {
            E1Section<K> r = twisted_bracket(shifted, moved[i], moved[j]) -
                             gauge_transform(g, twisted_bracket(tw, sections[i], sections[j]));
            inter.check(r.is_zero(), [&] { return section_str(r); });
        }
    }

    VerificationReport rep;
    rep.name = "gauge";
    rep.add("pairing-preservation", 0, pairs.expr, pairs.all_zero);
    rep.add("anchor-preservation", 1, anchor.expr, anchor.all_zero);
    rep.add("bracket-intertwining", 1, inter.expr, inter.all_zero);
    rep.add("composition", 1, comp.expr, comp.all_zero);
    return rep;
}

/// A section x + a of the classical double bundle TM + T*M.
template <class K>
struct CourantSection {
    Tensor<K> x;  // plain degree-1 multivector
    Tensor<K> a;  // plain degree-1 form

    CourantSection(Tensor<K> xx, Tensor<K> aa) : x(std::move(xx)), a(std::move(aa)) {
        require_same_chart(x.chart(), a.chart());
        if (x.ext() || x.kind() != Kind::MV || x.degree() != 1)
            throw StructuralError("section vector must be a plain degree-1 multivector");
        if (a.ext() || a.kind() != Kind::FORM || a.degree() != 1)
            throw StructuralError("section form must be a plain degree-1 form");
    }

    const ChartPtr& chart() const { return x.chart(); }

    friend CourantSection operator+(const CourantSection& p, const CourantSection& q) {
        return {p.x + q.x, p.a + q.a};
    }
    friend CourantSection operator-(const CourantSection& p, const CourantSection& q) {
        return {p.x - q.x, p.a - q.a};
    }
    friend CourantSection operator-(const CourantSection& p) { return {-p.x, -p.a}; }
    friend CourantSection operator*(const K& s, const CourantSection& p) {
        return {s * p.x, s * p.a};
    }
    friend bool operator==(const CourantSection& p, const CourantSection& q) {
        return p.x == q.x && p.a == q.a;
    }
    friend bool operator!=(const CourantSection& p, const CourantSection& q) {
        return !(p == q);
    }
    bool is_zero() const { return x.is_zero() && a.is_zero(); }
};

template <class K>
std::string section_str(const CourantSection<K>& e) {
    return "e1(" + e.x.str() + ", " + e.a.str() + ")";
}

template <class K>
K courant_pairing(const CourantSection<K>& e1, const CourantSection<K>& e2, int sign) {
    if (sign != 1 && sign != -1) throw UsageError("pairing sign must be +1 or -1");
    K t1 = pairing(e1.a, e2.x);
    K t2 = pairing(e2.a, e1.x);
    return Rat(1) / 2 * (sign > 0 ? t1 + t2 : t1 - t2);
}

/// The classical skew bracket on TM + T*M, optionally twisted by a 3-form:
/// [x+a, y+b] = [x,y] + L_x b - L_y a + (1/2) d(i_y a - i_x b) + phi3(x,y,.).
template <class K>
CourantSection<K> courant_bracket(const CourantSection<K>& e1, const CourantSection<K>& e2,
                                  const std::optional<Tensor<K>>& phi3 = std::nullopt) {
    Tensor<K> x = sn_bracket(e1.x, e2.x);
    K half = Rat(1) / 2 * (pairing(e1.a, e2.x) - pairing(e2.a, e1.x));
    Tensor<K> a = lie_form(e1.x, e2.a) - lie_form(e2.x, e1.a) +
                  differential(e1.chart(), half);
    if (phi3) {
        if (phi3->ext() || phi3->kind() != Kind::FORM || phi3->degree() != 3)
            throw StructuralError("bracket twist must be a plain degree-3 form");
        a = a + contract1(e2.x, contract1(e1.x, *phi3));
    }
    return {x, a};
}

/// Which product-lift of a sub-bundle to build: the variant that shifts the
/// form leg by the 2-form and closes under the untwisted bracket, or the
/// plain exponential rescaling that closes under the bracket twisted by the
/// differential of the weighted 2-form.
enum class LiftVariant { OmegaShifted, ExactTwisted };

namespace detail {

template <class K2>
SubBundleSpec<ExpCoeff> lift_bundle(const GraphSharpBundle<K2>& b, const ChartPtr& l) {
    return GraphSharpBundle<ExpCoeff>{TwistedJacobiStructure<ExpCoeff>(
        lift_tensor(b.s.lambda, l), lift_tensor(b.s.e, l), lift_tensor(b.s.omega, l))};
}
template <class K2>
SubBundleSpec<ExpCoeff> lift_bundle(const GraphFlatBundle<K2>& b, const ChartPtr& l) {
    return GraphFlatBundle<ExpCoeff>(lift_tensor(b.eta, l), lift_tensor(b.gamma, l));
}
template <class K2>
SubBundleSpec<ExpCoeff> lift_bundle(const CourantShiftBundle<K2>& b, const ChartPtr& l) {
    return CourantShiftBundle<ExpCoeff>(
        CourantDiracSpec<ExpCoeff>(b.l.type == CourantDiracSpec<K2>::Type::GraphBivector
                                       ? CourantDiracSpec<ExpCoeff>::Type::GraphBivector
                                       : CourantDiracSpec<ExpCoeff>::Type::GraphTwoForm,
                                   lift_tensor(b.l.data, l)),
        lift_tensor(b.omega, l));
}
template <class K2>
SubBundleSpec<ExpCoeff> lift_bundle(const TlcsBundle<K2>& b, const ChartPtr& l) {
    return TlcsBundle<ExpCoeff>{TlcsStructure<ExpCoeff>(
        lift_tensor(b.t.theta, l), lift_tensor(b.t.lee, l), lift_tensor(b.t.omega, l))};
}
template <class K2>
SubBundleSpec<ExpCoeff> lift_bundle(const HomogPoissonBundle<K2>& b, const ChartPtr& l) {
    return HomogPoissonBundle<ExpCoeff>{HomogeneousTwistedPoisson<ExpCoeff>(
        lift_tensor(b.h.lambda, l), lift_tensor(b.h.z, l), lift_tensor(b.h.omega, l))};
}

}  // namespace detail

inline SubBundleSpec<ExpCoeff> lift_spec(const SubBundleSpec<Polynomial>& spec,
                                         const ChartPtr& lifted) {
    return std::visit([&](const auto& b) { return detail::lift_bundle(b, lifted); }, spec);
}

/// Lift of one section to the product chart: the scalar of the vector pair
/// becomes the weight-direction component, the form pair is exponentially
/// rescaled (after the 2-form shift when that variant is selected).
inline CourantSection<ExpCoeff> lift_section(const E1Section<Polynomial>& e,
                                             const Tensor<ExpCoeff>& omega_lift,
                                             LiftVariant variant) {
    const ChartPtr& l = omega_lift.chart();
    const int ti = l->dim() - 1;
    Tensor<ExpCoeff> x = lift_tensor(ext_first(e.v), l) +
                         lift_coeff(ext_second(e.v).scalar_value(), l) *
                             basis_vector<ExpCoeff>(l, ti);
    Tensor<ExpCoeff> base = lift_tensor(ext_first(e.a), l);
    if (variant == LiftVariant::OmegaShifted) base = base + contract1(x, omega_lift);
    base = base + lift_coeff(ext_second(e.a).scalar_value(), l) *
                      basis_covector<ExpCoeff>(l, ti);
    return {x, ExpCoeff::exp_weight(l, 1) * base};
}

/// Generators of the lifted sub-bundle on the product chart.
inline std::vector<CourantSection<ExpCoeff>> lift_to_product(
    const SubBundleSpec<Polynomial>& spec, const TwistData<Polynomial>& tw,
    LiftVariant variant, const std::string& tname = "t") {
    ChartPtr l = Chart::lift(chart_of(spec), tname);
    Tensor<ExpCoeff> om = lift_tensor(tw.omega, l);
    std::vector<CourantSection<ExpCoeff>> out;
    for (const auto& e : generators(spec)) out.push_back(lift_section(e, om, variant));
    return out;
}

namespace detail {

/// Splits a lifted classical section back into base parameters and runs the
/// base membership residual with lifted structure data.
inline E1Section<ExpCoeff> lifted_membership_residual(const SubBundleSpec<ExpCoeff>& lspec,
                                                      const Tensor<ExpCoeff>& omega_lift,
                                                      LiftVariant variant,
                                                      const CourantSection<ExpCoeff>& s) {
    const ChartPtr& l = omega_lift.chart();
    const int ti = l->dim() - 1;
    ExpCoeff down = ExpCoeff::exp_weight(l, -1);
    ExpCoeff f = s.x.coefficient({ti});
    Tensor<ExpCoeff> x = s.x - f * basis_vector<ExpCoeff>(l, ti);
    ExpCoeff acoef = s.a.coefficient({ti});
    ExpCoeff g = down * acoef;
    Tensor<ExpCoeff> alpha = down * (s.a - acoef * basis_covector<ExpCoeff>(l, ti));
    if (variant == LiftVariant::OmegaShifted) alpha = alpha - contract1(x, omega_lift);
    return membership_residual(lspec, E1Section<ExpCoeff>(ext_vec(x, f), ext_cov(alpha, g)));
}

}  // namespace detail

/// Isotropy and bracket closure of the lifted generators on the product
/// chart, with membership decided through the lifted parametrization. The
/// shifted variant closes under the untwisted classical bracket, the other
/// under the bracket twisted by the differential of the weighted 2-form;
/// both exactly when the base family is closed.
inline VerificationReport check_lift(const SubBundleSpec<Polynomial>& spec,
                                     const TwistData<Polynomial>& tw, LiftVariant variant,
                                     const std::string& tname = "t") {
    ChartPtr l = Chart::lift(chart_of(spec), tname);
    Tensor<ExpCoeff> om = lift_tensor(tw.omega, l);
    SubBundleSpec<ExpCoeff> lspec = lift_spec(spec, l);
    std::vector<CourantSection<ExpCoeff>> gens;
    for (const auto& e : generators(spec)) gens.push_back(lift_section(e, om, variant));
    const int m = static_cast<int>(gens.size());

    std::optional<Tensor<ExpCoeff>> phi3;
    if (variant == LiftVariant::ExactTwisted)
        phi3 = de_rham(ExpCoeff::exp_weight(l, 1) * om);

    detail::FirstFailure iso;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            ExpCoeff p = courant_pairing(gens[i], gens[j], 1);
            iso.check(p.is_zero(), [&] { return p.str(); });
        }

    std::vector<ExpCoeff> multipliers;
    for (int i = 0; i < l->dim(); ++i) multipliers.push_back(ExpCoeff::variable(l, i));
    multipliers.push_back(ExpCoeff::exp_weight(l, 1));

    detail::FirstFailure closed;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            auto r = detail::lifted_membership_residual(
                lspec, om, variant, courant_bracket(gens[i], gens[j], phi3));
            closed.check(r.is_zero(), [&] { return section_str(r); });
        }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (const ExpCoeff& f : multipliers) {
                auto r = detail::lifted_membership_residual(
                    lspec, om, variant, courant_bracket(gens[i], f * gens[j], phi3));
                closed.check(r.is_zero(), [&] { return section_str(r); });
            }

    VerificationReport rep;
    rep.name = "lift";
    rep.add("isotropy", 0, iso.expr, iso.all_zero);
    rep.add("bracket-closure", 1, closed.expr, closed.all_zero);
    return rep;
}

}  // namespace jkit
