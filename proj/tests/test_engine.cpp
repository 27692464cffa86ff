#include <doctest.h>

#include "cyclestab/engine.hpp"
#include "cyclestab/errors.hpp"

using namespace cyclestab;

namespace {

BigDec D(const char* s) { return BigDec::from_string(s); }

bool close(const BigDec& a, const BigDec& b, const BigDec& t) { return abs(a - b) < t; }

MapDef logistic399() { return catalog().find("logistic").with_parameters({{"h", D("3.99")}}); }

// Period-2 orbit of the logistic map, computed at the current precision.
std::vector<State> logistic_two_cycle(const BigDec& h) {
    BigDec root = sqrt((h + 1) * (h - 3));
    return {{(h + 1 + root) / (2 * h)}, {(h + 1 - root) / (2 * h)}};
}

MapDef negation_map() {
    UserMapSpec spec;
    spec.name = "negation";
    spec.variables = {"x"};
    spec.step = {"-x"};
    spec.initial_grid = {{D("0.3")}};
    spec.period = 2;
    return make_user_map(spec);
}

SearchConfig burgers_config() {
    const MapDef& m = catalog().find("burgers");
    SearchConfig cfg;
    cfg.map = m;
    cfg.period = 28;
    cfg.scalar_theta = BigDec(680);
    cfg.initial_states = m.initial_grid(2);
    return cfg;
}

}  // namespace

TEST_CASE("combination step") {
    PrecisionGuard g(80);
    MapDef m = logistic399();
    State s{D("0.3")};
    CHECK(controlled_step_combination(m, ControlPolynomial(), 5, s) == step(m, s));
    ControlPolynomial th({D("1.99") / D("2.99"), BigDec(1) / D("2.99")});
    State r = controlled_step_combination(m, th, 1, s);
    BigDec oracle =
        D("0.738915426120401337792642140468227424749163879598662207357859531772575250836120401337792642");
    CHECK(close(r[0], oracle, pow10(3 - 80)));
}

TEST_CASE("pre-averaged step") {
    PrecisionGuard g(80);
    MapDef m = logistic399();
    State s{D("0.3")};
    CHECK(controlled_step_preaveraged(m, ControlPolynomial(), 5, s) == step(m, s));
    ControlPolynomial th({D("1.99") / D("2.99"), BigDec(1) / D("2.99")});
    State r = controlled_step_preaveraged(m, th, 1, s);
    BigDec oracle =
        D("0.995887946454737642755673873894028031006364582051654903189002360152571000324381159047437948");
    CHECK(close(r[0], oracle, pow10(3 - 80)));

    // two coefficients theta/(1+theta), 1/(1+theta) reproduce the scalar scheme
    const MapDef& h = catalog().find("henon");
    State p{D("0.2"), D("0.1")};
    BigDec theta = D("37.5");
    State a = controlled_step_preaveraged(h, ControlPolynomial::from_scalar_theta(theta), 3, p);
    State b = controlled_step_scalar_theta(h, theta, 3, p);
    for (int i = 0; i < 2; ++i) CHECK(close(a[i], b[i], pow10(3 - 80)));
}

TEST_CASE("scalar theta step") {
    PrecisionGuard g(60);
    const MapDef& m = catalog().find("lozi");
    State s{D("0.4"), D("-0.1")};
    CHECK(controlled_step_scalar_theta(m, BigDec(0), 4, s) == iterate(m, s, 5));
}

TEST_CASE("controlled steps preserve a cycle") {
    PrecisionGuard g(60);
    MapDef m = logistic399();
    std::vector<State> cyc = logistic_two_cycle(D("3.99"));
    for (const auto& eta : cyc) {
        // rounding leaves a cycle defect of a few EPSILON; the bound scales with it
        BigDec defect = abs(iterate(m, eta, 2)[0] - eta[0]);
        BigDec tol = 10 * (defect > epsilon() ? defect : epsilon());
        State f = step(m, eta);
        CHECK(close(controlled_step_combination(m, ControlPolynomial({D("0.5"), D("0.5")}), 2, eta)[0], f[0], tol));
        CHECK(close(controlled_step_preaveraged(m, ControlPolynomial({D("0.5"), D("0.5")}), 2, eta)[0], f[0], tol));
        CHECK(close(controlled_step_scalar_theta(m, D("0.75"), 2, eta)[0], f[0], tol));
    }
    MapDef neg = negation_map();
    ControlPolynomial th({D("0.2"), D("0.5"), D("0.3")});
    State x{D("0.3")};
    CHECK(controlled_step_combination(neg, th, 2, x) == step(neg, x));
    CHECK(controlled_step_preaveraged(neg, th, 2, x) == step(neg, x));
    CHECK(controlled_step_scalar_theta(neg, BigDec(1000), 2, x) == step(neg, x));
}

TEST_CASE("evaluation counts") {
    PrecisionGuard g(50);
    const MapDef& m = catalog().find("henon");
    State s{D("0.1"), D("0.1")};
    ControlPolynomial th({D("0.5"), D("0.3"), D("0.2")});
    const int N = 3, T = 5;
    EvaluationCounter comb, pre, scal;
    controlled_step_combination(m, th, T, s, &comb);
    controlled_step_preaveraged(m, th, T, s, &pre);
    controlled_step_scalar_theta(m, BigDec(2), T, s, &scal);
    // both schemes need the iterates up to f^((N-1)T) plus one more application
    CHECK(comb.evaluations == static_cast<std::uint64_t>((N - 1) * T + 1));
    CHECK(pre.evaluations == static_cast<std::uint64_t>((N - 1) * T + 1));
    CHECK(scal.evaluations == static_cast<std::uint64_t>(T + 1));
}

TEST_CASE("adaptive step at the logistic fixed point") {
    PrecisionGuard g(60);
    MapDef m = logistic399();
    State x{BigDec(1) - BigDec(1) / D("3.99")};
    State a = adaptive_scalar_step(m, 1, x);
    State b = adaptive_scalar_step(m, 1, x, true);
    CHECK(close(a[0], x[0], pow10(3 - 60)));
    // derivative product is negative here, so both variants agree
    CHECK(a == b);
    CHECK_THROWS_AS(adaptive_scalar_step(catalog().find("henon"), 1, {D("0.1"), D("0.1")}), ValidationError);
}

TEST_CASE("adaptive search finds a logistic 101-cycle") {
    PrecisionGuard g(250);
    SearchConfig cfg;
    cfg.map = catalog().find("logistic");
    cfg.period = 101;
    cfg.scheme = Scheme::Adaptive;
    cfg.initial_states = {{D("0.1")}};
    SearchResult r = run_search(cfg);
    REQUIRE(r.found());
    const CycleRecord& rec = *r.states[0].record;
    CHECK(rec.verified);
    CHECK(rec.minimal_period == 101);
    CHECK(rec.sweep <= 2);
}

TEST_CASE("exactly periodic start is detected at the first comparison") {
    PrecisionGuard g(50);
    MapDef neg = negation_map();
    for (Scheme sc : {Scheme::ScalarTheta, Scheme::Combination, Scheme::PreAveraged}) {
        SearchConfig cfg;
        cfg.map = neg;
        cfg.period = 2;
        cfg.scheme = sc;
        cfg.scalar_theta = BigDec(5);
        cfg.theta = ControlPolynomial({D("0.5"), D("0.5")});
        cfg.initial_states = {{D("0.3")}};
        SearchResult r = run_search(cfg);
        REQUIRE(r.found());
        const CycleRecord& rec = *r.states[0].record;
        CHECK(rec.sweep == 0);
        CHECK(rec.step == 1);
        CHECK(rec.residual.is_zero());
        CHECK(rec.minimal_period == 2);
    }
}

TEST_CASE("fixed point has minimal period 1") {
    PrecisionGuard g(50);
    std::vector<State> pts(4, State{D("0.25")});
    CHECK(minimal_period(pts, epsilon()) == 1);
    std::vector<State> two{{D("0.1")}, {D("0.2")}, {D("0.1")}, {D("0.2")}};
    CHECK(minimal_period(two, epsilon()) == 2);
    std::vector<State> three{{D("0.1")}, {D("0.2")}, {D("0.3")}};
    CHECK(minimal_period(three, epsilon()) == 3);
}

TEST_CASE("search is deterministic and independent per state") {
    PrecisionGuard g(60);
    SearchConfig cfg = burgers_config();
    cfg.stop_on_first = false;
    SearchResult a = run_search(cfg);
    SearchResult b = run_search(cfg);
    REQUIRE(a.found());
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        REQUIRE(a.states[i].record.has_value() == b.states[i].record.has_value());
        if (!a.states[i].record) continue;
        CHECK(a.states[i].record->points == b.states[i].record->points);
        CHECK(a.states[i].record->sweep == b.states[i].record->sweep);
        CHECK(a.states[i].record->residual == b.states[i].record->residual);
    }
    cfg.workers = 2;
    SearchResult par = run_search(cfg);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        SearchConfig one = cfg;
        one.workers = 1;
        one.initial_states = {cfg.initial_states[i]};
        SearchResult alone = run_search(one);
        CHECK(alone.states[0].outcome == a.states[i].outcome);
        CHECK(par.states[i].outcome == a.states[i].outcome);
        if (a.states[i].record) {
            CHECK(alone.states[0].record->points == a.states[i].record->points);
            CHECK(alone.states[0].record->sweep == a.states[i].record->sweep);
            CHECK(par.states[i].record->points == a.states[i].record->points);
        }
    }
}

TEST_CASE("verified records satisfy the open-loop checks") {
    PrecisionGuard g(60);
    SearchResult r = run_search(burgers_config());
    REQUIRE(r.found());
    for (const auto& rec : r.records()) {
        CHECK(rec.verified);
        CHECK(rec.residual < rec.tolerance);
        CHECK(rec.residual == stepwise_residual(catalog().find("burgers"), rec.points));
        CHECK(rec.points.size() == 28u);
        CHECK(rec.minimal_period == 28);
    }
}

TEST_CASE("escaping trajectories are reported") {
    PrecisionGuard g(50);
    SearchConfig cfg;
    cfg.map = catalog().find("logistic").with_parameters({{"h", BigDec(5)}});
    cfg.period = 3;
    cfg.scalar_theta = BigDec(10);
    cfg.initial_states = {{D("0.3")}, {D("0.7")}};
    SearchResult r = run_search(cfg);
    CHECK(!r.found());
    CHECK(r.only_divergence());
    for (const auto& s : r.states) {
        CHECK(s.outcome == Outcome::Escaped);
        CHECK(!s.message.empty());
    }
}

TEST_CASE("config validation") {
    SearchConfig cfg = burgers_config();
    cfg.period = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = burgers_config();
    cfg.initial_states = {{D("0.1")}};
    CHECK_THROWS_AS(run_search(cfg), ValidationError);
    cfg = burgers_config();
    cfg.scalar_theta = BigDec(-1);
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = burgers_config();
    cfg.scheme = Scheme::Adaptive;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    CHECK(parse_scheme("pre-averaged") == Scheme::PreAveraged);
    CHECK(scheme_name(Scheme::AdaptiveAbs) == "adaptive-abs");
    CHECK_THROWS_AS(parse_scheme("bogus"), ValidationError);
}

TEST_CASE("theta doubling") {
    // window ((2/3)|mu| - 1/3, 2|mu| + 1) for |mu| = 5 is (3, 11); doubling from 1 first lands at 4
    PrecisionGuard g(60);
    BigDec mu(-5), lo = BigDec(2) * BigDec(5) / BigDec(3) - BigDec(1) / BigDec(3), hi = BigDec(11);
    CHECK(close(lo, BigDec(3), pow10(-55)));
    int k = 0;
    while (!(BigDec(1) * pow_int(BigDec(2), k) > lo && pow_int(BigDec(2), k) < hi)) ++k;
    CHECK(k == 2);
    // inside the window |r(mu)| < 1/2, so mu r(mu)^T shrinks with T; below it, it does not
    CHECK(stability_value(ControlPolynomial::from_scalar_theta(BigDec(4)), mu, 8).modulus() < BigDec(1));
    CHECK(stability_value(ControlPolynomial::from_scalar_theta(BigDec(2)), mu, 8).modulus() > BigDec(1));

    SearchConfig inner = burgers_config();
    DoublingResult d = theta_doubling_search(inner.map, 28, BigDec(680), 3, inner);
    CHECK(d.found);
    CHECK(d.k == 0);
    CHECK(d.theta == BigDec(680));
    CHECK(d.attempts.size() == 1u);

    SearchConfig bad = inner;
    bad.map = catalog().find("logistic").with_parameters({{"h", BigDec(5)}});
    bad.initial_states = {{D("0.3")}};
    DoublingResult none = theta_doubling_search(bad.map, 3, BigDec(1), 2, bad);
    CHECK(!none.found);
    CHECK(none.attempts.size() == 3u);
}

TEST_CASE("henon T=28 doubling from 2^10") {
    PrecisionGuard g(250);
    const MapDef& m = catalog().find("henon");
    SearchConfig inner;
    inner.map = m;
    inner.period = 28;
    inner.initial_states = m.initial_grid(10);
    DoublingResult d = theta_doubling_search(m, 28, BigDec(1024), 4, inner);
    REQUIRE(d.found);
    CHECK(d.theta <= BigDec(16384));
    for (const auto& rec : d.records) CHECK(rec.verified);
}
