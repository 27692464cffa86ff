#include "cyclestab/analysis.hpp"

#include <random>

#include "cyclestab/errors.hpp"

namespace cyclestab {

namespace {

std::vector<SmallMatrix> point_jacobians(const MapDef& map, const std::vector<State>& cycle) {
    std::vector<SmallMatrix> out;
    out.reserve(cycle.size());
    for (const auto& p : cycle) out.push_back(map.jacobian(p));
    return out;
}

// J_{k+T-1} * ... * J_k, indices cyclic.
SmallMatrix cyclic_product(const std::vector<SmallMatrix>& f, std::size_t k) {
    const std::size_t T = f.size();
    SmallMatrix p = f[k % T];
    for (std::size_t n = 1; n < T; ++n) p = f[(k + n) % T] * p;
    return p;
}

BigDec max(const BigDec& a, const BigDec& b) { return a < b ? b : a; }

BigDec distance(const ComplexPair& a, const ComplexPair& b) { return (a - b).modulus(); }

BigDec multiset_distance(const std::vector<ComplexPair>& a, const std::vector<ComplexPair>& b) {
    if (a.size() == 1) return distance(a[0], b[0]);
    BigDec straight = max(distance(a[0], b[0]), distance(a[1], b[1]));
    BigDec crossed = max(distance(a[0], b[1]), distance(a[1], b[0]));
    return straight < crossed ? straight : crossed;
}

BigDec round_out(const BigDec& x, int P) { return round_to(x, P); }

ComplexPair round_out(const ComplexPair& z, int P) { return {round_to(z.re, P), round_to(z.im, P)}; }

SmallMatrix round_out(const SmallMatrix& m, int P) {
    SmallMatrix out(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) out(i, j) = round_to(m(i, j), P);
    return out;
}

BigDec random_decimal(std::mt19937_64& rng, int lo, int hi) {
    // uniform on a 10^-12 lattice in [lo, hi]
    const std::uint64_t scale = 1000000000000ULL;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) * scale + 1;
    std::int64_t k = static_cast<std::int64_t>(rng() % span) + static_cast<std::int64_t>(lo) * static_cast<std::int64_t>(scale);
    return BigDec::from_parts(k < 0, mpz_class(std::to_string(k < 0 ? -k : k)), -12);
}

}  // namespace

SmallMatrix cycle_jacobian(const std::vector<SmallMatrix>& factors) {
    if (factors.empty()) throw ValidationError("cycle must have at least one point");
    return cyclic_product(factors, 0);
}

SmallMatrix cycle_jacobian(const MapDef& map, const std::vector<State>& cycle) {
    return cycle_jacobian(point_jacobians(map, cycle));
}

SmallMatrix controlled_jacobian_closed_form(const SmallMatrix& J, const ControlPolynomial& theta, int T) {
    if (T < 1) throw ValidationError("period must be positive");
    const int m = J.dim();
    const auto& c = theta.coefficients();
    SmallMatrix r = SmallMatrix::identity(m).scaled(c.back());
    for (std::size_t j = c.size() - 1; j-- > 0;) r = r * J + SmallMatrix::identity(m).scaled(c[j]);
    return J * matrix_power(r, T);
}

SmallMatrix controlled_jacobian_direct(const std::vector<SmallMatrix>& factors, const ControlPolynomial& theta) {
    if (factors.empty()) throw ValidationError("cycle must have at least one point");
    const std::size_t T = factors.size();
    const int m = factors[0].dim();
    std::vector<SmallMatrix> B;
    if (theta.size() > 1)
        for (std::size_t k = 0; k < T; ++k) B.push_back(cyclic_product(factors, k));
    SmallMatrix total = SmallMatrix::identity(m);
    for (std::size_t i = 0; i < T; ++i) {
        // D f^((j-1)T+1)(eta_i) = B_(i+1)^(j-1) J_i
        SmallMatrix D = factors[i];
        SmallMatrix Fp = D.scaled(theta[0]);
        for (std::size_t j = 1; j < theta.size(); ++j) {
            D = B[(i + 1) % T] * D;
            Fp = Fp + D.scaled(theta[j]);
        }
        total = Fp * total;
    }
    return total;
}

SmallMatrix controlled_jacobian_direct(const MapDef& map, const ControlPolynomial& theta,
                                       const std::vector<State>& cycle) {
    return controlled_jacobian_direct(point_jacobians(map, cycle), theta);
}

std::vector<ComplexPair> multipliers(const SmallMatrix& J) {
    if (J.dim() == 1) return {ComplexPair(J(0, 0))};
    BigDec tr = J.trace();
    BigDec det = J.determinant();
    BigDec disc = tr * tr - BigDec(4) * det;
    BigDec half = BigDec::from_string("0.5");
    if (disc.is_negative()) {
        BigDec im = sqrt(-disc) * half;
        BigDec re = tr * half;
        return {ComplexPair(re, im), ComplexPair(re, -im)};
    }
    BigDec s = sqrt(disc);
    BigDec big = (tr.is_negative() ? tr - s : tr + s) * half;
    if (big.is_zero()) return {ComplexPair(BigDec(0)), ComplexPair(BigDec(0))};
    return {ComplexPair(big), ComplexPair(det / big)};
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "stable";
        case Verdict::Marginal: return "marginal";
        case Verdict::Unstable: return "unstable";
    }
    return "?";
}

bool StabilityReport::open_loop_unstable() const {
    for (const auto& mu : open_loop)
        if (mu.modulus() >= BigDec(1)) return true;
    return false;
}

StabilityReport stability_verdict(const MapDef& map, const std::vector<State>& cycle, const ControlPolynomial& theta,
                                  int T) {
    if (cycle.empty()) throw ValidationError("cycle must have at least one point");
    if (T < 1) throw ValidationError("period must be positive");
    const int P = precision();
    StabilityReport rep;
    rep.period = T;
    rep.precision = P;
    rep.theta = theta;
    {
        PrecisionGuard g(2 * P + 20);
        auto factors = point_jacobians(map, cycle);
        SmallMatrix J = cycle_jacobian(factors);
        SmallMatrix closed = controlled_jacobian_closed_form(J, theta, T);
        SmallMatrix direct = controlled_jacobian_direct(factors, theta);
        auto mus = multipliers(J);
        auto lambdas = multipliers(closed);
        std::vector<ComplexPair> values;
        for (const auto& mu : mus) values.push_back(stability_value(theta, mu, T));
        BigDec coherence = multiset_distance(lambdas, values);
        BigDec scale = max(BigDec(1), closed.max_abs());

        rep.cycle_jacobian = round_out(J, P);
        rep.controlled_jacobian = round_out(closed, P);
        for (const auto& z : mus) rep.open_loop.push_back(round_out(z, P));
        for (const auto& z : lambdas) rep.controlled.push_back(round_out(z, P));
        for (const auto& z : values) rep.stability_values.push_back(round_out(z, P));
        for (const auto& z : lambdas) rep.controlled_moduli.push_back(round_out(z.modulus(), P));
        rep.lemma1_residual = round_out(max_abs_diff(closed, direct), P);
        rep.coherence_residual = round_out(coherence, P);
        rep.coherence_tolerance = round_out(pow10(10 - P) * scale, P);
    }
    rep.coherent = rep.coherence_residual < rep.coherence_tolerance;
    const BigDec margin = BigDec::from_string("1e-10");
    const BigDec lo = BigDec(1) - margin, hi = BigDec(1) + margin;
    bool stable = true, marginal = false;
    for (const auto& r : rep.controlled_moduli) {
        if (!(r < lo)) stable = false;
        if (r >= lo && r <= hi) marginal = true;
    }
    rep.verdict = stable ? Verdict::Stable : marginal ? Verdict::Marginal : Verdict::Unstable;
    return rep;
}

Lemma1Summary verify_lemma1(int trials, std::uint64_t seed) {
    if (trials < 1) throw ValidationError("trials must be positive");
    std::mt19937_64 rng(seed);
    Lemma1Summary out;
    out.tolerance = pow10(20 - precision());
    out.max_residual = BigDec(0);
    for (int t = 0; t < trials; ++t) {
        Lemma1Trial trial;
        int T = 1 + static_cast<int>(rng() % 4);
        int N = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < T; ++k)
            trial.factors.emplace_back(random_decimal(rng, -2, 2), random_decimal(rng, -2, 2),
                                       random_decimal(rng, -2, 2), random_decimal(rng, -2, 2));
        std::vector<BigDec> th;
        for (;;) {
            th.clear();
            BigDec rest(1);
            for (int j = 0; j + 1 < N; ++j) {
                th.push_back(random_decimal(rng, -1, 1));
                rest = rest - th.back();  // exact: 12-digit lattice values
            }
            th.push_back(rest);
            if (!rest.is_zero()) break;
        }
        trial.theta = ControlPolynomial(th);
        SmallMatrix J = cycle_jacobian(trial.factors);
        trial.residual = max_abs_diff(controlled_jacobian_closed_form(J, trial.theta, T),
                                      controlled_jacobian_direct(trial.factors, trial.theta));
        if (trial.residual > out.max_residual) out.max_residual = trial.residual;
        out.trials.push_back(std::move(trial));
    }
    out.passed = out.max_residual < out.tolerance;
    return out;
}

}  // namespace cyclestab
