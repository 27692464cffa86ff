#include <doctest.h>

#include <random>

#include "cyclestab/analysis.hpp"
#include "cyclestab/engine.hpp"

using namespace cyclestab;

namespace {

BigDec D(const char* s) { return BigDec::from_string(s); }

constexpr int P = 50;

bool close(const BigDec& a, const BigDec& b, const BigDec& t) { return abs(a - b) < t; }

BigDec draw(std::mt19937_64& rng, double lo, double hi) {
    return BigDec::from_double(std::uniform_real_distribution<double>(lo, hi)(rng));
}

SmallMatrix random_matrix(std::mt19937_64& rng) {
    return {draw(rng, -2, 2), draw(rng, -2, 2), draw(rng, -2, 2), draw(rng, -2, 2)};
}

MapDef logistic399() { return catalog().find("logistic").with_parameters({{"h", D("3.99")}}); }

}  // namespace

TEST_CASE("cycle jacobian") {
    PrecisionGuard g(P);
    MapDef m = logistic399();
    State fixed{BigDec(1) - BigDec(1) / D("3.99")};
    CHECK(close(cycle_jacobian(m, {fixed})(0, 0), D("-1.99"), pow10(3 - P)));

    const MapDef& h = catalog().find("henon");
    State a{D("0.3"), D("0.1")};
    State b = step(h, a);
    SmallMatrix J = cycle_jacobian(h, {a, b});
    CHECK(max_abs_diff(J, jacobian(h, b) * jacobian(h, a)).is_zero());

    UserMapSpec spec;
    spec.name = "identity";
    spec.variables = {"x"};
    spec.step = {"x"};
    spec.initial_grid = {{BigDec(0)}};
    CHECK(cycle_jacobian(make_user_map(spec), {{D("0.7")}})(0, 0) == BigDec(1));
}

TEST_CASE("closed form basics") {
    PrecisionGuard g(P);
    std::mt19937_64 rng(5);
    SmallMatrix J = random_matrix(rng);
    CHECK(max_abs_diff(controlled_jacobian_closed_form(J, ControlPolynomial(), 4), J) < pow10(5 - P));
    ControlPolynomial th({D("0.5"), D("0.3"), D("0.2")});
    SmallMatrix s = controlled_jacobian_closed_form(SmallMatrix(D("-1.7")), th, 3);
    CHECK(close(s(0, 0), stability_value(th, D("-1.7"), 3).re, pow10(5 - P)));
}

TEST_CASE("closed form equals the direct chain-rule product") {
    PrecisionGuard g(P);
    std::mt19937_64 rng(17);
    ControlPolynomial th({D("0.5"), D("0.3"), D("0.2")});
    std::vector<SmallMatrix> factors{random_matrix(rng), random_matrix(rng), random_matrix(rng)};
    SmallMatrix J = cycle_jacobian(factors);
    CHECK(max_abs_diff(controlled_jacobian_closed_form(J, th, 3), controlled_jacobian_direct(factors, th)) <
          pow10(20 - P));
    CHECK(max_abs_diff(controlled_jacobian_direct(factors, ControlPolynomial()), J) < pow10(20 - P));

    std::vector<SmallMatrix> two{SmallMatrix(0, 1, 1, 0), SmallMatrix(2, 0, 0, 3)};
    ControlPolynomial half({D("0.5"), D("0.5")});
    CHECK(max_abs_diff(controlled_jacobian_closed_form(cycle_jacobian(two), half, 2),
                       controlled_jacobian_direct(two, half)) < pow10(20 - P));

    std::vector<SmallMatrix> singular{SmallMatrix(1, 2, 2, 4), SmallMatrix(D("0.5"), 1, -1, D("1.5"))};
    CHECK(cycle_jacobian(singular).determinant().is_zero());
    CHECK(max_abs_diff(controlled_jacobian_closed_form(cycle_jacobian(singular), th, 2),
                       controlled_jacobian_direct(singular, th)) < pow10(20 - P));
}

TEST_CASE("direct product on a map cycle") {
    PrecisionGuard g(P);
    MapDef m = logistic399();
    BigDec h = D("3.99"), root = sqrt((h + 1) * (h - 3));
    std::vector<State> cyc{{(h + 1 + root) / (2 * h)}, {(h + 1 - root) / (2 * h)}};
    ControlPolynomial th({D("0.6"), D("0.4")});
    SmallMatrix J = cycle_jacobian(m, cyc);
    // 2-cycle multiplier 4 + 2h - h^2
    CHECK(close(J(0, 0), 4 + 2 * h - h * h, pow10(5 - P)));
    CHECK(max_abs_diff(controlled_jacobian_direct(m, th, cyc), controlled_jacobian_closed_form(J, th, 2)) <
          pow10(20 - P));
}

TEST_CASE("multipliers") {
    PrecisionGuard g(P);
    auto one = multipliers(SmallMatrix(D("-1.99")));
    REQUIRE(one.size() == 1u);
    CHECK(one[0].re == D("-1.99"));
    auto rot = multipliers(SmallMatrix(0, 1, -1, 0));
    REQUIRE(rot.size() == 2u);
    CHECK(rot[0].re.is_zero());
    CHECK(rot[0].im == BigDec(1));
    CHECK(rot[1].im == BigDec(-1));
    auto real = multipliers(SmallMatrix(2, 0, 0, -3));
    CHECK(close(real[0].re, BigDec(-3), pow10(5 - P)));
    CHECK(close(real[1].re, BigDec(2), pow10(5 - P)));
    CHECK(real[0].is_real());
}

TEST_CASE("eigenvalue coherence on random matrices") {
    PrecisionGuard g(P);
    std::mt19937_64 rng(23);
    for (int k = 0; k < 20; ++k) {
        SmallMatrix J = random_matrix(rng);
        ControlPolynomial th({D("0.4"), D("0.35"), D("0.25")});
        auto lam = multipliers(controlled_jacobian_closed_form(J, th, 1 + k % 4));
        auto mus = multipliers(J);
        for (const auto& mu : mus) {
            ComplexPair v = stability_value(th, mu, 1 + k % 4);
            BigDec best = (v - lam[0]).modulus();
            BigDec other = (v - lam[1]).modulus();
            if (other < best) best = other;
            CHECK(best < pow10(10 - P));
        }
    }
}

TEST_CASE("contraction on the unit disk (weak form)") {
    // |mu r(mu)^T| <= |mu| holds for convex theta since |r(mu)| <= 1 on the disk
    PrecisionGuard g(P);
    std::mt19937_64 rng(29);
    for (int t = 0; t < 20; ++t) {
        std::vector<BigDec> w;
        BigDec sum(0);
        for (int j = 0; j < 1 + t % 4; ++j) {
            w.push_back(draw(rng, 0.01, 1));
            sum += w.back();
        }
        for (auto& x : w) x = x / sum;
        ControlPolynomial th = ControlPolynomial::unchecked(w);
        for (int k = 0; k < 100; ++k) {
            ComplexPair mu = polar(draw(rng, 0, 0.999), draw(rng, -3.14, 3.14));
            for (int T : {1, 2, 5}) CHECK(stability_value(th, mu, T).modulus() <= mu.modulus() + pow10(5 - P));
        }
    }
}

TEST_CASE("stability verdict") {
    PrecisionGuard g(P);
    MapDef m = logistic399();
    std::vector<State> fixed{{BigDec(1) - BigDec(1) / D("3.99")}};
    ControlPolynomial exact = from_exact_multipliers({jacobian(m, fixed[0])(0, 0)});
    StabilityReport rep = stability_verdict(m, fixed, exact, 1);
    CHECK(rep.verdict == Verdict::Stable);
    CHECK(rep.open_loop_unstable());
    CHECK(rep.controlled[0].modulus() < pow10(5 - P));
    CHECK(rep.coherent);
    CHECK(rep.lemma1_residual < pow10(20 - P));

    StabilityReport open = stability_verdict(m, fixed, ControlPolynomial(), 1);
    CHECK(open.verdict == Verdict::Unstable);
    CHECK(close(open.controlled[0].re, open.open_loop[0].re, pow10(5 - P)));

    // r(-1.99) = 1/1.99 puts mu r(mu) at -1
    BigDec b = D("0.99") / (D("1.99") * D("2.99"));
    ControlPolynomial marginal({1 - b, b});
    CHECK(stability_verdict(m, fixed, marginal, 1).verdict == Verdict::Marginal);
    CHECK(verdict_name(Verdict::Marginal) == "marginal");
}

TEST_CASE("lemma 1 randomized check") {
    PrecisionGuard g(P);
    Lemma1Summary s = verify_lemma1(50, 1);
    CHECK(s.trials.size() == 50u);
    CHECK(s.passed);
    CHECK(s.max_residual < pow10(20 - P));
    Lemma1Summary again = verify_lemma1(50, 1);
    CHECK(again.max_residual == s.max_residual);
}
