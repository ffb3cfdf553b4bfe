#pragma once

#include <random>

#include "jkit/calculus.hpp"

namespace jkit::testing {

using TP = Tensor<Polynomial>;

/// Reference twisted structure on the default dim-5 chart:
///   lambda = x4*d0^d4 + d1^d3 + d2^d4, e = d0, omega = dx1^dx3.
struct RefStructure {
    ChartPtr c;
    TP lambda;
    TP e;
    TP omega;
};

inline RefStructure make_ref() {
    auto c = Chart::make_default(5);
    TP lambda(c, Kind::MV, false, 2);
    lambda.add_term({1, 3}, Polynomial::one(c));
    lambda.add_term({2, 4}, Polynomial::one(c));
    lambda.add_term({0, 4}, Polynomial::variable(c, 4));
    TP e = basis_vector<Polynomial>(c, 0);
    TP omega(c, Kind::FORM, false, 2);
    omega.add_term({1, 3}, Polynomial::one(c));
    return {c, lambda, e, omega};
}

/// Members of the valid family around make_ref: the {1,3} and {2,4} planes
/// scaled by a and b, the x4-weighted {0,4} term and the field scaled by c,
/// and the twist scaled by 1/a. Valid for every a != 0.
inline RefStructure make_family(const Rat& a, const Rat& b, const Rat& c) {
    auto ch = Chart::make_default(5);
    TP lambda(ch, Kind::MV, false, 2);
    if (!rat_is_zero(a)) lambda.add_term({1, 3}, Polynomial::constant(ch, a));
    if (!rat_is_zero(b)) lambda.add_term({2, 4}, Polynomial::constant(ch, b));
    if (!rat_is_zero(c)) lambda.add_term({0, 4}, c * Polynomial::variable(ch, 4));
    TP e = c * basis_vector<Polynomial>(ch, 0);
    TP omega(ch, Kind::FORM, false, 2);
    omega.add_term({1, 3}, Polynomial::constant(ch, Rat(1) / a));
    return {ch, lambda, e, omega};
}

/// Degree <= 1 polynomial with coefficients in -2..2.
inline Polynomial random_poly(std::mt19937_64& rng, const ChartPtr& c) {
    std::uniform_int_distribution<int> coeff(-2, 2);
    Polynomial p = Polynomial::constant(c, coeff(rng));
    for (int i = 0; i < c->dim(); ++i) {
        int a = coeff(rng);
        if (a != 0) p = p + Rat(a) * Polynomial::variable(c, i);
    }
    return p;
}

/// Degree <= 2 polynomial: a random_poly plus a few quadratic monomials.
inline Polynomial random_poly2(std::mt19937_64& rng, const ChartPtr& c) {
    std::uniform_int_distribution<int> coeff(-2, 2);
    std::uniform_int_distribution<int> var(0, c->dim() - 1);
    Polynomial p = random_poly(rng, c);
    for (int k = 0; k < 2; ++k) {
        int a = coeff(rng);
        if (a != 0)
            p = p + Rat(a) * Polynomial::variable(c, var(rng)) *
                        Polynomial::variable(c, var(rng));
    }
    return p;
}

/// Tensor with random_poly coefficients on every key.
inline TP random_tensor(std::mt19937_64& rng, const ChartPtr& c, Kind kind, bool ext,
                        int degree) {
    TP t(c, kind, ext, degree);
    detail::for_each_key(c->dim() + (ext ? 1 : 0), degree, [&](const Key& key) {
        Polynomial p = random_poly(rng, c);
        if (!p.is_zero()) t.add_term(key, p);
    });
    return t;
}

}  // namespace jkit::testing
