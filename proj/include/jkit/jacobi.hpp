#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jkit/calculus.hpp"
#include "jkit/report.hpp"

namespace jkit {

/// A bivector/vector/2-form triple on one chart. Validity (the twisted
/// compatibility identities) is never assumed; call check_twisted_jacobi.
template <class K>
struct TwistedJacobiStructure {
    Tensor<K> lambda;  // plain degree-2 multivector
    Tensor<K> e;       // plain degree-1 multivector
    Tensor<K> omega;   // plain degree-2 form

    TwistedJacobiStructure(Tensor<K> l, Tensor<K> ee, Tensor<K> om)
        : lambda(std::move(l)), e(std::move(ee)), omega(std::move(om)) {
        require_same_chart(lambda.chart(), e.chart());
        require_same_chart(lambda.chart(), omega.chart());
        if (lambda.ext() || lambda.kind() != Kind::MV || lambda.degree() != 2)
            throw StructuralError("structure bivector must be a plain degree-2 multivector");
        if (e.ext() || e.kind() != Kind::MV || e.degree() != 1)
            throw StructuralError("structure field must be a plain degree-1 multivector");
        if (omega.ext() || omega.kind() != Kind::FORM || omega.degree() != 2)
            throw StructuralError("structure twist must be a plain degree-2 form");
    }

    const ChartPtr& chart() const { return lambda.chart(); }

    /// The bivector/field pair as one extended bivector.
    Tensor<K> pair() const { return make_ext(lambda, e); }

    /// The exact extended 3-form built from the twist: (d omega, omega).
    Tensor<K> twist() const { return make_ext(de_rham(omega), omega); }
};

/// A bivector, a homogeneity field and a 2-form; used for the graded Poisson
/// picture on a product with a line (exponential flavor) but meaningful for
/// any coefficient flavor.
template <class K>
struct HomogeneousTwistedPoisson {
    Tensor<K> lambda;  // plain degree-2 multivector
    Tensor<K> z;       // plain degree-1 multivector
    Tensor<K> omega;   // plain degree-2 form

    HomogeneousTwistedPoisson(Tensor<K> l, Tensor<K> zz, Tensor<K> om)
        : lambda(std::move(l)), z(std::move(zz)), omega(std::move(om)) {
        require_same_chart(lambda.chart(), z.chart());
        require_same_chart(lambda.chart(), omega.chart());
        if (lambda.ext() || lambda.kind() != Kind::MV || lambda.degree() != 2)
            throw StructuralError("bivector must be a plain degree-2 multivector");
        if (z.ext() || z.kind() != Kind::MV || z.degree() != 1)
            throw StructuralError("homogeneity field must be a plain degree-1 multivector");
        if (omega.ext() || omega.kind() != Kind::FORM || omega.degree() != 2)
            throw StructuralError("twist must be a plain degree-2 form");
    }

    const ChartPtr& chart() const { return lambda.chart(); }
};

/// Two 2-forms and a 1-form: a locally conformal presymplectic candidate
/// together with its twist.
template <class K>
struct TlcsStructure {
    Tensor<K> theta;  // plain degree-2 form
    Tensor<K> lee;    // plain degree-1 form
    Tensor<K> omega;  // plain degree-2 form

    TlcsStructure(Tensor<K> th, Tensor<K> le, Tensor<K> om)
        : theta(std::move(th)), lee(std::move(le)), omega(std::move(om)) {
        require_same_chart(theta.chart(), lee.chart());
        require_same_chart(theta.chart(), omega.chart());
        if (theta.ext() || theta.kind() != Kind::FORM || theta.degree() != 2)
            throw StructuralError("presymplectic form must be a plain degree-2 form");
        if (lee.ext() || lee.kind() != Kind::FORM || lee.degree() != 1)
            throw StructuralError("conformal form must be a plain degree-1 form");
        if (omega.ext() || omega.kind() != Kind::FORM || omega.degree() != 2)
            throw StructuralError("twist must be a plain degree-2 form");
    }

    const ChartPtr& chart() const { return theta.chart(); }
};

/// Compatibility check for a TwistedJacobiStructure. The trivector and
/// bivector residuals are the two componentwise identities with phi = d omega;
/// the pair-route residual re-derives both from the extended bracket of the
/// embedded pair against the sharpened twist and must always vanish, for
/// valid and invalid structures alike.
template <class K>
VerificationReport check_twisted_jacobi(const TwistedJacobiStructure<K>& s) {
    Tensor<K> phi = de_rham(s.omega);
    Tensor<K> r3 = sn_bracket(s.lambda, s.lambda) + Rat(2) * wedge(s.e, s.lambda) -
                   Rat(2) * sharp_extend(s.lambda, phi) -
                   Rat(2) * wedge(sharp_extend(s.lambda, s.omega), s.e);
    Tensor<K> r2 = sn_bracket(s.e, s.lambda) - sharp_hold_last(s.lambda, phi, s.e) +
                   wedge(sharp_hold_last(s.lambda, s.omega, s.e), s.e);

    Tensor<K> pr = sn_bracket01(s.pair(), s.pair()) -
                   Rat(2) * sharp_extend(s.pair(), s.twist());
    Tensor<K> cross = pr - make_ext(r3, Rat(2) * r2);

    VerificationReport rep;
    rep.name = "twisted-jacobi";
    rep.add("trivector-part", 3, r3.str(), r3.is_zero());
    rep.add("bivector-part", 2, r2.str(), r2.is_zero());
    rep.add("pair-route", 3, tensor_str(cross), cross.is_zero());
    return rep;
}

/// The function bracket {f,g} = lambda(df,dg) + f e.g - g e.f.
template <class K>
K jacobi_bracket(const TwistedJacobiStructure<K>& s, const K& f, const K& g) {
    const ChartPtr& c = s.chart();
    K out = eval_on(s.lambda, {differential(c, f), differential(c, g)});
    out = out + f * vec_apply(s.e, g) - g * vec_apply(s.e, f);
    return out;
}

/// The sharpened extended differential of a function: the extended degree-1
/// multivector whose plain part is the hamiltonian field of f.
template <class K>
Tensor<K> sharp_d(const TwistedJacobiStructure<K>& s, const K& f) {
    Tensor<K> fe = make_ext_scalar(s.chart(), Kind::FORM, f);
    return sharp1(s.pair(), d01(fe));
}

/// Hamiltonian field of f: lambda#(df) + f e.
template <class K>
Tensor<K> hamiltonian_field(const TwistedJacobiStructure<K>& s, const K& f) {
    return ext_first(sharp_d(s, f));
}

/// Both sides of the Jacobiator identity for the function bracket: the lhs
/// is the cyclic sum {f,{g,h}} + c.p., the rhs is minus the twist evaluated
/// on the three sharpened differentials. Equal exactly for valid structures.
template <class K>
std::pair<K, K> jacobiator_defect(const TwistedJacobiStructure<K>& s, const K& f, const K& g,
                                  const K& h) {
    K lhs = jacobi_bracket(s, f, jacobi_bracket(s, g, h)) +
            jacobi_bracket(s, g, jacobi_bracket(s, h, f)) +
            jacobi_bracket(s, h, jacobi_bracket(s, f, g));
    K rhs = -ext_eval(s.twist(), {sharp_d(s, f), sharp_d(s, g), sharp_d(s, h)});
    return {lhs, rhs};
}

/// Both sides of the hamiltonian commutator identity: lhs = [X_f, X_g],
/// rhs = X_{{f,g}} plus the projected sharp of the twist contracted with the
/// two sharpened differentials. Equal exactly for valid structures.
template <class K>
std::pair<Tensor<K>, Tensor<K>> hamiltonian_commutator_defect(
    const TwistedJacobiStructure<K>& s, const K& f, const K& g) {
    Tensor<K> lhs = sn_bracket(hamiltonian_field(s, f), hamiltonian_field(s, g));
    Tensor<K> slot = ext_partial_eval(s.twist(), {sharp_d(s, f), sharp_d(s, g)});
    Tensor<K> rhs = hamiltonian_field(s, jacobi_bracket(s, f, g)) +
                    ext_first(sharp1(s.pair(), slot));
    return {lhs, rhs};
}

/// Closedness of the conformal form and the twisted closedness of the
/// shifted presymplectic form.
template <class K>
VerificationReport check_tlcs(const TlcsStructure<K>& t) {
    Tensor<K> r1 = de_rham(t.lee);
    Tensor<K> shifted = t.theta + t.omega;
    Tensor<K> r2 = de_rham(shifted) + wedge(t.lee, shifted);

    VerificationReport rep;
    rep.name = "tlcs";
    rep.add("conformal-closedness", 2, r1.str(), r1.is_zero());
    rep.add("twisted-closedness", 3, r2.str(), r2.is_zero());
    return rep;
}

namespace detail {

/// Inverse of a square rational matrix by Gauss-Jordan elimination, or
/// nothing when singular.
inline std::optional<std::vector<std::vector<Rat>>> invert_matrix(
    std::vector<std::vector<Rat>> m) {
    const std::size_t n = m.size();
    std::vector<std::vector<Rat>> inv(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && rat_is_zero(m[piv][col])) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        Rat d = m[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || rat_is_zero(m[r][col])) continue;
            Rat factor = m[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                m[r][j] -= factor * m[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    return inv;
}

}  // namespace detail

/// Inverts a constant-coefficient nondegenerate presymplectic form into the
/// bivector/field/2-form triple whose validity matches the input's: under
/// this library's first-slot interior product the defining relations read
/// i_e theta = lee and i_{lambda# a} theta = a for every covector a (texts
/// using the opposite contraction slot print these with minus signs).
/// Nonconstant coefficients are unsupported; a degenerate form is a
/// singularity.
template <class K>
TwistedJacobiStructure<K> tlcs_to_twisted_jacobi(const TlcsStructure<K>& t) {
    const ChartPtr& c = t.chart();
    const std::size_t n = static_cast<std::size_t>(c->dim());
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n, Rat(0)));
    for (const auto& [key, coeff] : t.theta.terms()) {
        if (!coeff.is_constant())
            throw UnsupportedError("inversion needs a constant-coefficient form");
        Rat v = coeff.constant_value();
        m[static_cast<std::size_t>(key[0])][static_cast<std::size_t>(key[1])] = v;
        m[static_cast<std::size_t>(key[1])][static_cast<std::size_t>(key[0])] = -v;
    }
    auto inv = detail::invert_matrix(m);
    if (!inv) throw SingularityError("presymplectic form is degenerate");

    // lambda's coefficient matrix is theta's inverse; the opposite sign
    // satisfies the mirrored contraction relations but breaks validity
    // transport, which is the load-bearing property here.
    Tensor<K> lambda(c, Kind::MV, false, 2);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            Rat v = (*inv)[a][b];
            if (!rat_is_zero(v))
                lambda.add_term({static_cast<int>(a), static_cast<int>(b)},
                                K::constant(c, v));
        }
    return TwistedJacobiStructure<K>(lambda, contract1(t.lee, lambda), t.omega);
}

/// The three homogeneity identities: the bracket square against the twist,
/// the field's degree action on the bivector, and the conformal action on
/// the form.
template <class K>
VerificationReport check_homogeneous_twisted_poisson(const HomogeneousTwistedPoisson<K>& h) {
    Tensor<K> r1 = sn_bracket(h.lambda, h.lambda) -
                   Rat(2) * sharp_extend(h.lambda, de_rham(h.omega));
    Tensor<K> r2 = sn_bracket(h.z, h.lambda) + h.lambda;
    Tensor<K> r3 = lie_form(h.z, h.omega) - h.omega;

    VerificationReport rep;
    rep.name = "homog-poisson";
    rep.add("schouten-square", 3, r1.str(), r1.is_zero());
    rep.add("homogeneity", 2, r2.str(), r2.is_zero());
    rep.add("conformal-form", 2, r3.str(), r3.is_zero());
    return rep;
}

/// Lift of a structure to the product with a line: the bivector absorbs the
/// field behind a weight -1 factor, the form gains weight +1, and the
/// homogeneity field is the new coordinate direction.
inline HomogeneousTwistedPoisson<ExpCoeff> poissonize(
    const TwistedJacobiStructure<Polynomial>& s, const std::string& tname = "t") {
    ChartPtr lifted = Chart::lift(s.chart(), tname);
    int ti = lifted->dim() - 1;
    Tensor<ExpCoeff> dt = basis_vector<ExpCoeff>(lifted, ti);
    Tensor<ExpCoeff> lam =
        ExpCoeff::exp_weight(lifted, -1) *
        (lift_tensor(s.lambda, lifted) + wedge(dt, lift_tensor(s.e, lifted)));
    Tensor<ExpCoeff> om = ExpCoeff::exp_weight(lifted, 1) * lift_tensor(s.omega, lifted);
    return HomogeneousTwistedPoisson<ExpCoeff>(lam, dt, om);
}

}  // namespace jkit
