#include "doctest.h"
#include "helpers.hpp"
#include "jkit/calculus.hpp"

using namespace jkit;
using jkit::testing::TP;

namespace {

TP dv(const ChartPtr& c, int i) { return basis_vector<Polynomial>(c, i); }
TP dx(const ChartPtr& c, int i) { return basis_covector<Polynomial>(c, i); }

}  // namespace

TEST_CASE("extended differential acts on pairs componentwise") {
    auto c = Chart::make_default(4);
    std::mt19937_64 rng(31);
    for (int deg = 1; deg <= 3; ++deg) {
        auto eta = jkit::testing::random_tensor(rng, c, Kind::FORM, false, deg);
        auto xi = jkit::testing::random_tensor(rng, c, Kind::FORM, false, deg - 1);
        auto w = make_ext(eta, xi);
        CHECK(d01(w) == make_ext(de_rham(eta), eta - de_rham(xi)));
        CHECK(d01(d01(w)).is_zero());
    }
    // degree 0: d01 f = (df, f)
    auto f = jkit::testing::random_poly(rng, c);
    auto fs = Tensor<Polynomial>::scalar(c, Kind::FORM, true, f);
    auto df = de_rham(Tensor<Polynomial>::scalar(c, Kind::FORM, false, f));
    CHECK(d01(fs) == ext_cov(df, f));
}

TEST_CASE("shifted differential squares to the curvature term") {
    auto c = Chart::make_default(3);
    auto phi = Polynomial::variable(c, 0) * dx(c, 1);
    std::mt19937_64 rng(32);
    auto w = jkit::testing::random_tensor(rng, c, Kind::FORM, false, 1);
    CHECK(d_mod(d_mod(w, phi), phi) == wedge(de_rham(phi), w));
    auto phic = dx(c, 1);  // closed
    CHECK(d_mod(d_mod(w, phic), phic).is_zero());
}

TEST_CASE("extended Schouten bracket on degree-1 pairs") {
    auto c = Chart::make_default(3);
    std::mt19937_64 rng(33);
    auto x = jkit::testing::random_tensor(rng, c, Kind::MV, false, 1);
    auto y = jkit::testing::random_tensor(rng, c, Kind::MV, false, 1);
    auto f = jkit::testing::random_poly(rng, c);
    auto g = jkit::testing::random_poly(rng, c);

    // [(x,f),(y,g)] = ([x,y], x.g - y.f)
    auto lhs = sn_bracket01(ext_vec(x, f), ext_vec(y, g));
    auto xg = sn_bracket(x, TP::scalar(c, Kind::MV, false, g)).scalar_value();
    auto yf = sn_bracket(y, TP::scalar(c, Kind::MV, false, f)).scalar_value();
    CHECK(lhs == ext_vec(sn_bracket(x, y), xg - yf));

    // [(x,f), g] = x.g + f g
    auto mixed = sn_bracket01(ext_vec(x, f), make_ext_scalar(c, Kind::MV, g));
    CHECK(mixed == make_ext_scalar(c, Kind::MV, xg + f * g));
}

TEST_CASE("bracketing a function against a degree-2 pair sharpens its graph") {
    // [(lambda,e), f] = -(lambda,e)# (df, f) for every pair, no closure needed
    auto c = Chart::make_default(4);
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 8; ++trial) {
        auto lambda = jkit::testing::random_tensor(rng, c, Kind::MV, false, 2);
        auto e = jkit::testing::random_tensor(rng, c, Kind::MV, false, 1);
        auto f = jkit::testing::random_poly(rng, c);
        auto s = make_ext(lambda, e);
        auto lhs = sn_bracket01(s, make_ext_scalar(c, Kind::MV, f));
        auto rhs = -sharp1(s, d01(make_ext_scalar(c, Kind::FORM, f)));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("sharp of a degree-1 pair, componentwise") {
    auto c = Chart::make_default(4);
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 8; ++trial) {
        auto lambda = jkit::testing::random_tensor(rng, c, Kind::MV, false, 2);
        auto e = jkit::testing::random_tensor(rng, c, Kind::MV, false, 1);
        auto alpha = jkit::testing::random_tensor(rng, c, Kind::FORM, false, 1);
        auto g = jkit::testing::random_poly(rng, c);
        auto s = make_ext(lambda, e);
        auto out = sharp1(s, ext_cov(alpha, g));
        CHECK(ext_first(out) == contract1(alpha, lambda) + g * e);
        CHECK(ext_second(out).scalar_value() == -contract1(e, alpha).scalar_value());
    }
}

TEST_CASE("sharp extension agrees with the anchor map in degree 1") {
    auto r = jkit::testing::make_ref();
    std::mt19937_64 rng(36);
    auto alpha = jkit::testing::random_tensor(rng, r.c, Kind::FORM, false, 1);
    CHECK(sharp_extend(r.lambda, alpha) == contract1(alpha, r.lambda));

    auto s = make_ext(r.lambda, r.e);
    auto g = jkit::testing::random_poly(rng, r.c);
    auto a = ext_cov(alpha, g);
    CHECK(sharp_extend(s, a) == sharp1(s, a));
}

TEST_CASE("sharp extension is multiplicative") {
    auto c = Chart::make_default(4);
    std::mt19937_64 rng(37);
    auto lambda = jkit::testing::random_tensor(rng, c, Kind::MV, false, 2);
    auto a = jkit::testing::random_tensor(rng, c, Kind::FORM, false, 1);
    auto b = jkit::testing::random_tensor(rng, c, Kind::FORM, false, 1);
    CHECK(sharp_extend(lambda, wedge(a, b)) ==
          wedge(sharp_extend(lambda, a), sharp_extend(lambda, b)));
}

TEST_CASE("reference structure satisfies the pair identity") {
    auto r = jkit::testing::make_ref();
    auto s = make_ext(r.lambda, r.e);
    auto tw = make_ext(de_rham(r.omega), r.omega);  // d omega vanishes here
    CHECK(de_rham(r.omega).is_zero());

    auto bracket = sn_bracket01(s, s);
    auto expected =
        make_ext(rat(2) * wedge(wedge(dv(r.c, 0), dv(r.c, 1)), dv(r.c, 3)),
                 mv_zero<Polynomial>(r.c, 2));
    CHECK(bracket == expected);
    CHECK(bracket == rat(2) * sharp_extend(s, tw));

    // bivector part of the graph of a plain 2-form
    auto w2 = make_ext(r.omega, form_zero<Polynomial>(r.c, 1));
    CHECK(ext_first(sharp_extend(s, w2)) == sharp_extend(r.lambda, r.omega));
    CHECK(sharp_extend(r.lambda, r.omega) == wedge(dv(r.c, 1), dv(r.c, 3)));
}

TEST_CASE("holding the last slot of a twist") {
    auto r = jkit::testing::make_ref();
    // omega(lambda# dx^a, e) vanishes: e has no dx1/dx3 pairing partners
    CHECK(sharp_hold_last(r.lambda, r.omega, r.e).is_zero());

    auto phi3 = wedge(wedge(dx(r.c, 0), dx(r.c, 1)), dx(r.c, 3));
    auto st = sharp_hold_last(r.lambda, phi3, r.e);
    CHECK(st == -wedge(dv(r.c, 1), dv(r.c, 3)));

    // the mixed symmetrization collapses to twice the one-structure value
    auto c = r.c;
    std::mt19937_64 rng(38);
    auto s1 = make_ext(r.lambda, r.e);
    auto tw = make_ext(form_zero<Polynomial>(c, 3), r.omega);
    auto v = ext_vec(jkit::testing::random_tensor(rng, c, Kind::MV, false, 1),
                     jkit::testing::random_poly(rng, c));
    CHECK(mixed_sharp_hold_last(s1, s1, tw, v) == rat(-2) * sharp_hold_last(s1, tw, v));

    auto s2 = make_ext(jkit::testing::random_tensor(rng, c, Kind::MV, false, 2),
                       jkit::testing::random_tensor(rng, c, Kind::MV, false, 1));
    CHECK(mixed_sharp_hold_last(s1, s2, tw, v) == mixed_sharp_hold_last(s2, s1, tw, v));
}

TEST_CASE("shifted Lie derivative routes agree") {
    auto c = Chart::make_default(3);
    std::mt19937_64 rng(39);
    auto x = jkit::testing::random_tensor(rng, c, Kind::MV, true, 1);
    for (int deg = 0; deg <= 2; ++deg) {
        auto w = jkit::testing::random_tensor(rng, c, Kind::FORM, true, deg);
        auto pickup = contract1(x, unit_cocycle<Polynomial>(c)).scalar_value();
        CHECK(lie01(x, w) == lie_form(x, w) + pickup * w);
    }

    // degree 0 is the anchor action: (x,f).g = x.g + f g
    auto xv = jkit::testing::random_tensor(rng, c, Kind::MV, false, 1);
    auto f = jkit::testing::random_poly(rng, c);
    auto g = jkit::testing::random_poly(rng, c);
    auto gs = Tensor<Polynomial>::scalar(c, Kind::FORM, true, g);
    auto xg = sn_bracket(xv, TP::scalar(c, Kind::MV, false, g)).scalar_value();
    CHECK(lie01(ext_vec(xv, f), gs).scalar_value() == xg + f * g);
}
