#include "cyclestab/control.hpp"

#include <algorithm>

#include "cyclestab/errors.hpp"

namespace cyclestab {

namespace {

// Sum without rounding.
BigDec exact_sum(const std::vector<BigDec>& v) {
    BigDec s(0);
    for (const auto& x : v) {
        if (x.is_zero()) continue;
        std::int64_t hi = std::max(s.is_zero() ? x.adjusted() : s.adjusted(), x.adjusted()) + 2;
        std::int64_t lo = std::min(s.is_zero() ? x.exponent() : s.exponent(), x.exponent());
        s = add(s, x, static_cast<int>(std::max<std::int64_t>(1, hi - lo + 2)));
    }
    return s;
}

bool is_one(const ComplexPair& z) { return z.re == BigDec(1) && z.im.is_zero(); }

void require_conjugate_pairs(const std::vector<ComplexPair>& mus) {
    std::vector<bool> used(mus.size(), false);
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (mus[i].is_real() || used[i]) continue;
        bool found = false;
        for (std::size_t j = 0; j < mus.size() && !found; ++j) {
            if (j == i || used[j]) continue;
            if (mus[j].re == mus[i].re && mus[j].im == -mus[i].im) {
                used[i] = used[j] = true;
                found = true;
            }
        }
        if (!found)
            throw ValidationError("complex multiplier " + mus[i].to_string() + " has no conjugate partner");
    }
}

// Coefficients of prod (mu - mu_k) / prod (1 - mu_k), lowest degree first.
std::vector<BigDec> expand_normalized(const std::vector<ComplexPair>& roots) {
    std::vector<ComplexPair> poly{ComplexPair(BigDec(1))};
    ComplexPair norm(BigDec(1));
    for (const auto& r : roots) {
        std::vector<ComplexPair> next(poly.size() + 1, ComplexPair(BigDec(0)));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] = next[i + 1] + poly[i];
            next[i] = next[i] - r * poly[i];
        }
        poly = std::move(next);
        norm = norm * (ComplexPair(BigDec(1)) - r);
    }
    if (!norm.im.is_zero() && abs(norm.im) > abs(norm.re) * pow10(5 - precision()))
        throw ValidationError("multipliers do not produce real coefficients");
    std::vector<BigDec> theta;
    for (const auto& c : poly) theta.push_back(c.re / norm.re);
    return theta;
}

}  // namespace

std::string ComplexPair::to_string() const {
    if (is_real()) return re.to_string();
    return "(" + re.to_string() + (im.is_negative() ? " - " : " + ") + abs(im).to_string() + "i)";
}

ComplexPair operator+(const ComplexPair& a, const ComplexPair& b) { return {a.re + b.re, a.im + b.im}; }

ComplexPair operator-(const ComplexPair& a, const ComplexPair& b) { return {a.re - b.re, a.im - b.im}; }

ComplexPair operator*(const ComplexPair& a, const ComplexPair& b) {
    if (a.is_real() && b.is_real()) return {a.re * b.re, BigDec(0)};
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

ComplexPair operator/(const ComplexPair& a, const ComplexPair& b) {
    if (b.is_real()) return {a.re / b.re, a.im / b.re};
    BigDec d = b.norm2();
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

ComplexPair complex_pow(const ComplexPair& z, long k) {
    if (k < 0) return ComplexPair(BigDec(1)) / complex_pow(z, -k);
    ComplexPair result(BigDec(1)), base = z;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

ComplexPair polar(const BigDec& rho, const BigDec& phi) { return {rho * cos(phi), rho * sin(phi)}; }

ControlPolynomial::ControlPolynomial(std::vector<BigDec> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw ValidationError("control polynomial needs at least one coefficient");
    if (theta_.back().is_zero()) throw ValidationError("leading coefficient theta_N must be nonzero");
    if (abs(sum() - BigDec(1)) >= pow10(5 - precision()))
        throw ValidationError("coefficients must sum to 1 (sum is " + sum().to_short_string(20) + ")");
}

ControlPolynomial ControlPolynomial::unchecked(std::vector<BigDec> theta) {
    ControlPolynomial p;
    p.theta_ = std::move(theta);
    return p;
}

ControlPolynomial ControlPolynomial::from_scalar_theta(const BigDec& theta) {
    BigDec t1 = theta + BigDec(1);
    if (t1.is_zero()) throw ValidationError("theta = -1 is not allowed");
    return ControlPolynomial({theta / t1, BigDec(1) / t1});
}

BigDec ControlPolynomial::sum() const { return exact_sum(theta_); }

ControlPolynomial from_exact_multipliers(const std::vector<ComplexPair>& mus) {
    if (mus.empty()) throw ValidationError("need at least one multiplier");
    for (const auto& m : mus)
        if (is_one(m)) throw NonStabilizableError("multiplier 1 cannot be moved by predictive control");
    require_conjugate_pairs(mus);
    return ControlPolynomial(expand_normalized(mus));
}

ControlPolynomial from_left_half_plane(const std::vector<MultiplierEstimate>& estimates) {
    if (estimates.empty()) throw ValidationError("need at least one estimate");
    std::vector<ComplexPair> roots;
    for (const auto& e : estimates) {
        if (e.radius.is_negative()) throw ValidationError("localization radius must be non-negative");
        if (e.value.re > BigDec(0))
            throw PreconditionError("estimate " + e.value.to_string() + " is not in the closed left half-plane");
        roots.push_back(e.value);
    }
    require_conjugate_pairs(roots);
    return ControlPolynomial(expand_normalized(roots));
}

ControlPolynomial polyak_coefficients(const BigDec& mu_star, int N, const BigDec& rho, int T, PolyakBranch branch) {
    if (N < 3) throw ValidationError("Polyak coefficients need N >= 3");
    if (T < 1) throw ValidationError("period must be positive");
    if (mu_star == BigDec(1)) throw ArithmeticError("mu* = 1 makes the Polyak denominator vanish");
    if (!(abs(mu_star) > BigDec(1))) throw PreconditionError("Polyak coefficients need |mu*| > 1");
    if (!(rho > BigDec(0) && rho < BigDec(1))) throw PreconditionError("rho must lie in (0, 1)");
    BigDec q = BigDec(1) / nth_root(abs(mu_star) / rho, T, precision());
    BigDec num = branch == PolyakBranch::Minus ? BigDec(1) - q : BigDec(1) + q;
    BigDec eps = num / (pow_int(mu_star, N - 2) * (mu_star - BigDec(1)));
    std::vector<BigDec> theta(static_cast<std::size_t>(N), BigDec(0));
    theta[0] = BigDec(1);
    theta[static_cast<std::size_t>(N - 2)] = eps;
    theta[static_cast<std::size_t>(N - 1)] = -eps;
    return ControlPolynomial(std::move(theta));
}

ControlPolynomial from_complex_pair(const BigDec& rho, const BigDec& phi) {
    BigDec c = cos(phi);
    BigDec d = rho * rho - BigDec(2) * rho * c + BigDec(1);
    if (d.is_zero()) throw NonStabilizableError("rho*exp(i*phi) = 1 cannot be stabilized");
    return ControlPolynomial({rho * rho / d, -(BigDec(2) * rho * c) / d, BigDec(1) / d});
}

std::vector<BigDec> chebyshev_coeffs(int N) {
    if (N < 0) throw ValidationError("Chebyshev degree must be non-negative");
    std::vector<mpz_class> prev{1}, cur{0, 1};
    if (N == 0) return {BigDec(1)};
    for (int n = 1; n < N; ++n) {
        std::vector<mpz_class> next(cur.size() + 1, 0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    std::vector<BigDec> out;
    for (const auto& c : cur) out.push_back(BigDec::from_integer(c));
    return out;
}

ChebyshevControl chebyshev_symmetric(int N) {
    if (N < 3 || N % 2 == 0) throw ValidationError("symmetric Chebyshev construction needs odd N >= 3");
    const int P = precision();
    std::vector<BigDec> theta;
    BigDec bound;
    {
        PrecisionGuard g(P + 20);
        BigDec s = sin(pi() / BigDec(2 * N));
        auto c = chebyshev_coeffs(N);
        BigDec sign = ((N - 1) / 2) % 2 ? BigDec(-1) : BigDec(1);
        for (int j = 1; j <= N; ++j) theta.push_back(round_to(sign * c[static_cast<std::size_t>(j)] * pow_int(s, j), P));
        bound = round_to(BigDec(1) / s, P);
    }
    return {ControlPolynomial(std::move(theta)), bound};
}

ChebyshevControl chebyshev_one_sided(int N) {
    if (N < 2) throw ValidationError("one-sided Chebyshev construction needs N >= 2");
    const int P = precision();
    std::vector<BigDec> theta;
    BigDec bound;
    {
        PrecisionGuard g(P + 2 * N + 20);
        BigDec b = cos(pi() / BigDec(2 * N));
        BigDec a = BigDec(1) - b;
        auto c = chebyshev_coeffs(N);
        std::vector<BigDec> apow{BigDec(1)}, bpow{BigDec(1)};
        for (int k = 1; k <= N; ++k) {
            apow.push_back(apow.back() * a);
            bpow.push_back(bpow.back() * b);
        }
        for (int j = 1; j <= N; ++j) {
            BigDec acc(0);
            mpz_class binom = 1;  // C(k, j) starting at k = j
            for (int k = j; k <= N; ++k) {
                if (k > j) binom = binom * k / (k - j);
                const BigDec& ck = c[static_cast<std::size_t>(k)];
                if (!ck.is_zero())
                    acc = acc + ck * BigDec::from_integer(binom) * bpow[static_cast<std::size_t>(k - j)];
            }
            theta.push_back(round_to(acc * apow[static_cast<std::size_t>(j)], P));
        }
        BigDec t = pi() / BigDec(4 * N);
        BigDec cot = cos(t) / sin(t);
        bound = round_to(cot * cot, P);
    }
    return {ControlPolynomial(std::move(theta)), bound};
}

ComplexPair evaluate_r(const ControlPolynomial& theta, const ComplexPair& mu) {
    const auto& c = theta.coefficients();
    ComplexPair r(c.back());
    for (std::size_t j = c.size() - 1; j-- > 0;) r = r * mu + ComplexPair(c[j]);
    return r;
}

ComplexPair stability_value(const ControlPolynomial& theta, const ComplexPair& mu, int T) {
    if (T < 1) throw ValidationError("period must be positive");
    return mu * complex_pow(evaluate_r(theta, mu), T);
}

}  // namespace cyclestab
