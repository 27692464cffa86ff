#include <doctest.h>

#include <random>

#include "cyclestab/control.hpp"
#include "cyclestab/errors.hpp"

using namespace cyclestab;

namespace {

BigDec D(const char* s) { return BigDec::from_string(s); }

constexpr int P = 60;

BigDec tol(int k) { return pow10(k - P); }

bool close(const BigDec& a, const BigDec& b, const BigDec& t) { return abs(a - b) < t; }

void check_theta(const ControlPolynomial& c, const std::vector<BigDec>& want, int k = 5) {
    REQUIRE(c.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        INFO("theta_", i + 1, " = ", c[i].to_short_string(20));
        CHECK(close(c[i], want[i], tol(k)));
    }
}

BigDec modulus(const ComplexPair& z) { return z.modulus(); }

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// max |mu r(mu)| over a 10^3-point grid of [lo, hi].
BigDec grid_max(const ControlPolynomial& c, const BigDec& lo, const BigDec& hi) {
    BigDec best(0);
    for (int k = 0; k <= 1000; ++k) {
        BigDec mu = lo + (hi - lo) * BigDec(k) / BigDec(1000);
        BigDec v = modulus(stability_value(c, mu, 1));
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

TEST_CASE("exact multipliers") {
    PrecisionGuard g(P);
    ControlPolynomial a = from_exact_multipliers({D("-1.99")});
    check_theta(a, {D("1.99") / D("2.99"), BigDec(1) / D("2.99")});
    check_theta(from_exact_multipliers({BigDec(0)}), {BigDec(0), BigDec(1)});
    check_theta(from_exact_multipliers({BigDec(-2), BigDec(-3)}),
                {BigDec(1) / BigDec(2), BigDec(5) / BigDec(12), BigDec(1) / BigDec(12)});
    CHECK(modulus(evaluate_r(a, D("-1.99"))) < tol(5));
    CHECK(close(evaluate_r(a, BigDec(1)).re, BigDec(1), tol(5)));
    CHECK(modulus(stability_value(a, D("-1.99"), 7)) < tol(5));

    std::vector<ComplexPair> mus{{D("-0.5"), D("1.5")}, {D("-0.5"), D("-1.5")}, D("2.5")};
    ControlPolynomial b = from_exact_multipliers(mus);
    CHECK(b.size() == 4);
    for (const auto& mu : mus) CHECK(modulus(evaluate_r(b, mu)) < tol(5));
    CHECK(abs(b.sum() - 1) < tol(5));

    CHECK_THROWS_AS(from_exact_multipliers({BigDec(1)}), NonStabilizableError);
    CHECK_THROWS_AS(from_exact_multipliers({ComplexPair(D("-1"), D("1"))}), ValidationError);
}

TEST_CASE("left half-plane estimates") {
    PrecisionGuard g(P);
    ControlPolynomial a = from_left_half_plane({{D("-1.99"), D("0.01")}});
    check_theta(a, from_exact_multipliers({D("-1.99")}).coefficients());
    check_theta(from_left_half_plane({{BigDec(-1), BigDec(0)}}), {BigDec(1) / BigDec(2), BigDec(1) / BigDec(2)});
    ControlPolynomial c = from_left_half_plane({{ComplexPair(BigDec(-1), BigDec(1)), BigDec(0)},
                                                {ComplexPair(BigDec(-1), BigDec(-1)), BigDec(0)}});
    check_theta(c, {D("0.4"), D("0.4"), D("0.2")});
    ControlPolynomial d = from_left_half_plane({{D("-0.3"), D("0")}, {D("-4"), D("0")}, {D("-7.5"), D("0")}});
    for (const auto& t : d.coefficients()) CHECK(t.sign() > 0);
    CHECK_THROWS_AS(from_left_half_plane({{D("0.2"), D("0")}}), PreconditionError);
}

TEST_CASE("polyak coefficients") {
    PrecisionGuard g(P);
    ControlPolynomial a = polyak_coefficients(D("-1.99"), 3, D("0.5"), 1);
    BigDec eps = D("0.125837165525447441912001985693581096859231030195092367435402251167773118799827611528677488");
    check_theta(a, {BigDec(1), eps, -eps}, 3);
    CHECK(a.sum() == BigDec(1));
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        BigDec mu = BigDec::from_double(uniform(rng, 1.5, 20)) * (k % 2 ? 1 : -1);
        ControlPolynomial c = polyak_coefficients(mu, 3 + k % 4, BigDec::from_double(uniform(rng, 0.1, 0.9)), 1 + k % 5,
                                                  k % 3 ? PolyakBranch::Minus : PolyakBranch::Plus);
        CHECK(c.sum() == BigDec(1));
        CHECK(close(evaluate_r(c, BigDec(1)).re, BigDec(1), tol(5)));
    }
    CHECK_THROWS(polyak_coefficients(BigDec(1), 3, D("0.5"), 1));
}

TEST_CASE("complex pair") {
    PrecisionGuard g(P);
    check_theta(from_complex_pair(BigDec(2), pi()), {BigDec(4) / BigDec(9), BigDec(4) / BigDec(9), BigDec(1) / BigDec(9)});
    check_theta(from_complex_pair(BigDec(1), pi() / 2), {D("0.5"), BigDec(0), D("0.5")});
    CHECK_THROWS_AS(from_complex_pair(BigDec(1), BigDec(0)), NonStabilizableError);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        BigDec rho = BigDec::from_double(uniform(rng, 0.1, 5));
        BigDec phi = BigDec::from_double(uniform(rng, 0.2, 3.1));
        ControlPolynomial c = from_complex_pair(rho, phi);
        CHECK(modulus(evaluate_r(c, polar(rho, phi))) < tol(5));
        CHECK(modulus(evaluate_r(c, polar(rho, -phi))) < tol(5));
        CHECK(close(evaluate_r(c, BigDec(1)).re, BigDec(1), tol(5)));
        if (cos(phi).is_negative())
            for (const auto& t : c.coefficients()) CHECK(t.sign() > 0);
    }
}

TEST_CASE("chebyshev coefficients") {
    PrecisionGuard g(P);
    CHECK(chebyshev_coeffs(0) == std::vector<BigDec>{BigDec(1)});
    CHECK(chebyshev_coeffs(3) == std::vector<BigDec>{BigDec(0), BigDec(-3), BigDec(0), BigDec(4)});
    for (int n = 0; n <= 20; ++n) {
        BigDec s(0);
        for (const auto& c : chebyshev_coeffs(n)) s += c;
        CHECK(s == BigDec(1));
    }
}

TEST_CASE("symmetric chebyshev control") {
    PrecisionGuard g(P);
    ChebyshevControl c3 = chebyshev_symmetric(3);
    check_theta(c3.theta, {D("1.5"), BigDec(0), D("-0.5")});
    CHECK(close(c3.mu_star_bound, BigDec(2), tol(5)));
    ChebyshevControl c5 = chebyshev_symmetric(5);
    CHECK(close(c5.mu_star_bound,
                D("3.23606797749978969640917366873127623544061835961152572427089724541052092563780489941441441"),
                tol(5)));
    for (int n : {3, 5, 7, 9}) {
        ChebyshevControl c = chebyshev_symmetric(n);
        CHECK(close(evaluate_r(c.theta, BigDec(1)).re, BigDec(1), tol(5)));
        CHECK(grid_max(c.theta, -c.mu_star_bound, c.mu_star_bound) <= 1 + tol(10));
    }
    // asymptotics (2/pi) N
    ChebyshevControl c41 = chebyshev_symmetric(41);
    CHECK(abs(c41.mu_star_bound / (BigDec(2) * BigDec(41) / pi()) - 1) < D("0.01"));
    CHECK_THROWS_AS(chebyshev_symmetric(4), ValidationError);
}

TEST_CASE("one-sided chebyshev control") {
    PrecisionGuard g(P);
    ChebyshevControl c2 = chebyshev_one_sided(2);
    check_theta(c2.theta,
                {D("0.828427124746190097603377448419396157139343750753896146353359475981464956924214077700775069"),
                 D("0.171572875253809902396622551580603842860656249246103853646640524018535043075785922299224931")});
    CHECK(close(c2.mu_star_bound,
                D("5.82842712474619009760337744841939615713934375075389614635335947598146495692421407770077507"),
                tol(5)));
    for (int n : {2, 3, 4, 6}) {
        ChebyshevControl c = chebyshev_one_sided(n);
        CHECK(close(evaluate_r(c.theta, BigDec(1)).re, BigDec(1), tol(5)));
        CHECK(grid_max(c.theta, -c.mu_star_bound, BigDec(1)) <= 1 + tol(10));
    }
    CHECK_THROWS_AS(chebyshev_one_sided(1), ValidationError);
}

TEST_CASE("stability value") {
    PrecisionGuard g(P);
    ControlPolynomial c({D("0.5"), D("0.3"), D("0.2")});
    CHECK(modulus(stability_value(c, BigDec(0), 3)).is_zero());
    ComplexPair z = stability_value(c, D("-2"), 2);
    // r(-2) = 0.5 - 0.6 + 0.8 = 0.7
    CHECK(close(z.re, D("-0.98"), tol(5)));
    CHECK(close(modulus(stability_value(ControlPolynomial(), ComplexPair(BigDec(0), BigDec(2)), 4)), BigDec(2), tol(5)));
}

TEST_CASE("control polynomial validation") {
    PrecisionGuard g(P);
    CHECK_THROWS_AS(ControlPolynomial(std::vector<BigDec>{}), ValidationError);
    CHECK_THROWS_AS(ControlPolynomial({D("0.5"), D("0.4")}), ValidationError);
    CHECK_THROWS_AS(ControlPolynomial({BigDec(1), BigDec(0)}), ValidationError);
    ControlPolynomial s = ControlPolynomial::from_scalar_theta(BigDec(3));
    check_theta(s, {D("0.75"), D("0.25")});
}
