#include "doctest.h"
#include "helpers.hpp"
#include "jkit/jacobi.hpp"

using namespace jkit;
using namespace jkit::testing;

namespace {

TwistedJacobiStructure<Polynomial> ref_structure() {
    auto r = make_ref();
    return {r.lambda, r.e, r.omega};
}

TwistedJacobiStructure<Polynomial> random_structure(std::mt19937_64& rng, int dim) {
    auto c = Chart::make_default(dim);
    return {random_tensor(rng, c, Kind::MV, false, 2),
            random_tensor(rng, c, Kind::MV, false, 1),
            random_tensor(rng, c, Kind::FORM, false, 2)};
}

/// Contact-type structure on a 3-dim chart: a genuine untwisted pair.
TwistedJacobiStructure<Polynomial> contact_structure() {
    auto c = Chart::make_default(3);
    TP reeb_dual = basis_vector<Polynomial>(c, 0) +
                   Polynomial::variable(c, 1) * basis_vector<Polynomial>(c, 2);
    TP lambda = wedge(reeb_dual, basis_vector<Polynomial>(c, 1));
    TP e = basis_vector<Polynomial>(c, 2);
    return {lambda, e, form_zero<Polynomial>(c, 2)};
}

}  // namespace

TEST_CASE("structure check: reference and degenerate cases") {
    auto rep = check_twisted_jacobi(ref_structure());
    CHECK(rep.name == "twisted-jacobi");
    REQUIRE(rep.residuals.size() == 3);
    CHECK(rep.pass);
    CHECK(rep.residuals[0].label == "trivector-part");
    CHECK(rep.residuals[0].degree == 3);
    CHECK(rep.residuals[0].expr == "0");
    CHECK(rep.residuals[1].label == "bivector-part");
    CHECK(rep.residuals[2].label == "pair-route");

    std::mt19937_64 rng(11);
    auto c = Chart::make_default(4);
    TwistedJacobiStructure<Polynomial> zero{mv_zero<Polynomial>(c, 2),
                                            mv_zero<Polynomial>(c, 1),
                                            random_tensor(rng, c, Kind::FORM, false, 2)};
    CHECK(check_twisted_jacobi(zero).pass);
}

TEST_CASE("structure check: failing pair leaves the exact residual") {
    auto c = Chart::make_default(5);
    TP lambda(c, Kind::MV, false, 2);
    lambda.add_term({1, 3}, Polynomial::one(c));
    TwistedJacobiStructure<Polynomial> s{lambda, basis_vector<Polynomial>(c, 0),
                                         form_zero<Polynomial>(c, 2)};
    auto rep = check_twisted_jacobi(s);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.residuals[0].zero);
    CHECK(rep.residuals[0].expr == "2*d0^d1^d3");
    CHECK(rep.residuals[1].zero);
    CHECK(rep.residuals[2].zero);
}

TEST_CASE("structure check: scaled family stays valid") {
    for (auto [a, b, c] : {std::tuple<Rat, Rat, Rat>{2, 3, 5},
                           {Rat(1) / 2, -1, 7},
                           {-3, 0, Rat(1) / 5},
                           {5, Rat(-2) / 3, 0}}) {
        auto f = make_family(a, b, c);
        CHECK(check_twisted_jacobi(TwistedJacobiStructure<Polynomial>{f.lambda, f.e, f.omega})
                  .pass);
    }
}

TEST_CASE("structure check: pair route agrees on arbitrary data") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        auto s = random_structure(rng, 3 + i % 3);
        auto rep = check_twisted_jacobi(s);
        CHECK(rep.residuals[2].zero);
        CHECK(rep.pass == (rep.residuals[0].zero && rep.residuals[1].zero));
    }
}

TEST_CASE("function bracket values and identities") {
    auto s = ref_structure();
    const auto& c = s.chart();
    Polynomial x0 = Polynomial::variable(c, 0);
    Polynomial x1 = Polynomial::variable(c, 1);
    Polynomial x3 = Polynomial::variable(c, 3);

    CHECK(jacobi_bracket(s, x1, x3) == Rat(1));
    CHECK(jacobi_bracket(s, x0, x1) == -x1);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 5; ++i) {
        Polynomial f = random_poly2(rng, c);
        Polynomial g = random_poly2(rng, c);
        Polynomial h = random_poly2(rng, c);
        CHECK(jacobi_bracket(s, f, f).is_zero());
        Polynomial lhs = jacobi_bracket(s, f, g * h);
        Polynomial rhs = g * jacobi_bracket(s, f, h) + h * jacobi_bracket(s, f, g) -
                         g * h * jacobi_bracket(s, f, Polynomial::one(c));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("jacobiator defect matches the twist evaluation") {
    auto s = ref_structure();
    const auto& c = s.chart();
    Polynomial x0 = Polynomial::variable(c, 0);
    Polynomial x1 = Polynomial::variable(c, 1);
    Polynomial x3 = Polynomial::variable(c, 3);

    auto [lhs, rhs] = jacobiator_defect(s, x1, x3, x0);
    CHECK(lhs == Rat(1));
    CHECK(rhs == Rat(1));

    auto [l1, r1] = jacobiator_defect(s, Polynomial::one(c), Polynomial::one(c),
                                      Polynomial::one(c));
    CHECK(l1.is_zero());
    CHECK(r1.is_zero());

    std::mt19937_64 rng(13);
    for (int i = 0; i < 4; ++i) {
        auto f = make_family(Rat(i + 1), Rat(2 - i), Rat(i));
        TwistedJacobiStructure<Polynomial> fam{f.lambda, f.e, f.omega};
        auto [lf, rf] = jacobiator_defect(fam, random_poly2(rng, f.c), random_poly2(rng, f.c),
                                          random_poly2(rng, f.c));
        CHECK(lf == rf);
    }

    auto contact = contact_structure();
    CHECK(check_twisted_jacobi(contact).pass);
    for (int i = 0; i < 4; ++i) {
        auto [lc, rc] = jacobiator_defect(contact, random_poly2(rng, contact.chart()),
                                          random_poly2(rng, contact.chart()),
                                          random_poly2(rng, contact.chart()));
        CHECK(lc.is_zero());
        CHECK(rc.is_zero());
    }
}

TEST_CASE("hamiltonian fields on the reference structure") {
    auto s = ref_structure();
    const auto& c = s.chart();
    Polynomial x0 = Polynomial::variable(c, 0);
    Polynomial x1 = Polynomial::variable(c, 1);
    Polynomial x3 = Polynomial::variable(c, 3);

    CHECK(hamiltonian_field(s, Polynomial::one(c)) == basis_vector<Polynomial>(c, 0));
    CHECK(hamiltonian_field(s, x1).str() == "x1*d0 + d3");
    CHECK(hamiltonian_field(s, x0).str() == "x0*d0 + x4*d4");
}

TEST_CASE("hamiltonian commutator identity") {
    auto s = ref_structure();
    const auto& c = s.chart();
    Polynomial x1 = Polynomial::variable(c, 1);
    Polynomial x3 = Polynomial::variable(c, 3);

    auto [lhs, rhs] = hamiltonian_commutator_defect(s, x1, x3);
    CHECK(lhs == rhs);
    CHECK(lhs.str() == "2*d0");
    TP defect = rhs - hamiltonian_field(s, jacobi_bracket(s, x1, x3));
    CHECK(defect == basis_vector<Polynomial>(c, 0));

    auto [l1, r1] = hamiltonian_commutator_defect(s, Polynomial::one(c), Polynomial::one(c));
    CHECK(l1.is_zero());
    CHECK(r1.is_zero());

    // Untwisted structure: the commutator closes on the bracket alone.
    auto contact = contact_structure();
    std::mt19937_64 rng(17);
    for (int i = 0; i < 4; ++i) {
        Polynomial f = random_poly2(rng, contact.chart());
        Polynomial g = random_poly2(rng, contact.chart());
        auto [lc, rc] = hamiltonian_commutator_defect(contact, f, g);
        CHECK(lc == rc);
        CHECK(rc == hamiltonian_field(contact, jacobi_bracket(contact, f, g)));
    }
}

TEST_CASE("presymplectic check and inversion") {
    auto c = Chart::make_default(4);
    TP theta(c, Kind::FORM, false, 2);
    theta.add_term({0, 1}, Polynomial::one(c));
    theta.add_term({2, 3}, Polynomial::one(c));
    TP zero1 = form_zero<Polynomial>(c, 1);
    TP zero2 = form_zero<Polynomial>(c, 2);

    SUBCASE("symplectic case converts to a flat pair") {
        TlcsStructure<Polynomial> t{theta, zero1, zero2};
        CHECK(check_tlcs(t).pass);
        auto s = tlcs_to_twisted_jacobi(t);
        CHECK(s.e.is_zero());
        TP expected(c, Kind::MV, false, 2);
        expected.add_term({0, 1}, -Polynomial::one(c));
        expected.add_term({2, 3}, -Polynomial::one(c));
        CHECK(s.lambda == expected);
        CHECK(check_twisted_jacobi(s).pass);
    }

    SUBCASE("twisted fixture with a conformal direction") {
        TP lee = basis_covector<Polynomial>(c, 0);
        TP omega(c, Kind::FORM, false, 2);
        omega.add_term({2, 3}, -Polynomial::one(c));
        TlcsStructure<Polynomial> t{theta, lee, omega};
        CHECK(check_tlcs(t).pass);
        auto s = tlcs_to_twisted_jacobi(t);
        CHECK(check_twisted_jacobi(s).pass);
        // First-slot contraction relations carried by the inversion.
        CHECK(contract1(s.e, theta) == lee);
        for (int k = 0; k < 4; ++k) {
            TP a = basis_covector<Polynomial>(c, k);
            CHECK(contract1(contract1(a, s.lambda), theta) == a);
        }
    }

    SUBCASE("shifted closedness residual is reported") {
        TP lee = basis_covector<Polynomial>(c, 0);
        TlcsStructure<Polynomial> t{theta, lee, zero2};
        auto rep = check_tlcs(t);
        CHECK_FALSE(rep.pass);
        CHECK(rep.residuals[0].zero);
        CHECK(rep.residuals[1].expr == "dx0^dx2^dx3");
    }

    SUBCASE("conformal form must be closed") {
        TP lee = Polynomial::variable(c, 1) * basis_covector<Polynomial>(c, 0);
        TlcsStructure<Polynomial> t{theta, lee, zero2};
        auto rep = check_tlcs(t);
        CHECK_FALSE(rep.residuals[0].zero);
        CHECK(rep.residuals[0].expr == "-dx0^dx1");
    }

    SUBCASE("nonconstant coefficients are rejected") {
        TP bad = theta;
        bad.add_term({0, 2}, Polynomial::variable(c, 0));
        TlcsStructure<Polynomial> t{bad, zero1, zero2};
        CHECK_THROWS_AS(tlcs_to_twisted_jacobi(t), UnsupportedError);
    }

    SUBCASE("degenerate forms are singular") {
        TP flat(c, Kind::FORM, false, 2);
        flat.add_term({0, 1}, Polynomial::one(c));
        TlcsStructure<Polynomial> t{flat, zero1, zero2};
        CHECK_THROWS_AS(tlcs_to_twisted_jacobi(t), SingularityError);

        auto c3 = Chart::make_default(3);
        TP odd(c3, Kind::FORM, false, 2);
        odd.add_term({0, 1}, Polynomial::one(c3));
        TlcsStructure<Polynomial> t3{odd, form_zero<Polynomial>(c3, 1),
                                     form_zero<Polynomial>(c3, 2)};
        CHECK_THROWS_AS(tlcs_to_twisted_jacobi(t3), SingularityError);
    }
}

TEST_CASE("product lift of the reference structure") {
    auto s = ref_structure();
    auto h = poissonize(s);
    const auto& lc = h.chart();
    CHECK(lc->dim() == 6);
    CHECK(lc->lifted);
    CHECK(lc->coords.back() == "t");

    ExpCoeff down = ExpCoeff::exp_weight(lc, -1);
    CHECK(h.lambda.coefficient({1, 3}) == down);
    CHECK(h.lambda.coefficient({2, 4}) == down);
    CHECK(h.lambda.coefficient({0, 5}) == -down);
    CHECK(h.lambda.coefficient({0, 4}) == down * ExpCoeff::variable(lc, 4));
    CHECK(h.z == basis_vector<ExpCoeff>(lc, 5));
    CHECK(h.omega.coefficient({1, 3}) == ExpCoeff::exp_weight(lc, 1));

    auto rep = check_homogeneous_twisted_poisson(h);
    CHECK(rep.name == "homog-poisson");
    REQUIRE(rep.residuals.size() == 3);
    CHECK(rep.pass);
}

TEST_CASE("homogeneity identities hold for every lift") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 5; ++i) {
        auto s = random_structure(rng, 3);
        auto h = poissonize(s);
        CHECK(sn_bracket(h.z, h.lambda) == -h.lambda);
        CHECK(lie_form(h.z, h.omega) == h.omega);
    }
}

TEST_CASE("lift validity follows structure validity") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> pick(-3, 3);
    int valid_seen = 0;
    for (int i = 0; i < 6; ++i) {
        Rat a(pick(rng) == 0 ? 1 : pick(rng));
        if (rat_is_zero(a)) a = 1;
        auto f = make_family(a, Rat(pick(rng)), Rat(pick(rng)));
        TwistedJacobiStructure<Polynomial> s{f.lambda, f.e, f.omega};
        if (check_twisted_jacobi(s).pass) {
            ++valid_seen;
            CHECK(check_homogeneous_twisted_poisson(poissonize(s)).pass);
        }
    }
    CHECK(valid_seen > 0);

    auto c2 = Chart::make_default(2);
    TP lam(c2, Kind::MV, false, 2);
    lam.add_term({0, 1}, Polynomial::one(c2));
    HomogeneousTwistedPoisson<Polynomial> bad{lam, mv_zero<Polynomial>(c2, 1),
                                              form_zero<Polynomial>(c2, 2)};
    auto rep = check_homogeneous_twisted_poisson(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.residuals[0].zero);
    CHECK_FALSE(rep.residuals[1].zero);
    CHECK(rep.residuals[1].expr == "d0^d1");
    CHECK(rep.residuals[2].zero);
}
