#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cyclestab/bignum.hpp"
#include "cyclestab/errors.hpp"

namespace cyclestab {

namespace {

// The plain series needs about e*|x| terms; beyond this the kernel is not usable.
constexpr double kMaxTrigArgument = 1e4;

BigDec taylor_trig(const BigDec& x, bool is_sin) {
    const int P = precision();
    const int w = P + 2;
    if (std::fabs(x.to_double()) > kMaxTrigArgument)
        throw ArithmeticError("sin/cos argument outside the series range: " + x.to_short_string());
    long i = is_sin ? 1 : 0;
    BigDec lasts(0);
    BigDec s = is_sin ? x : BigDec(1);
    BigDec num = s;
    mpz_class fact(1);
    int sign = 1;
    const BigDec xx = mul(x, x, w);
    while (s != lasts) {
        lasts = s;
        i += 2;
        fact *= i * (i - 1);
        num = mul(num, xx, w);
        sign = -sign;
        BigDec term = div(num, BigDec::from_integer(fact), w);
        s = sign > 0 ? add(s, term, w) : sub(s, term, w);
    }
    return round_to(s, P);
}

// Taylor sum of e^a for a >= 0 at working precision w; n receives the term count.
BigDec exp_series(const BigDec& a, int w, long& n) {
    BigDec s(1), t(1);
    n = 0;
    for (long i = 1;; ++i) {
        t = div(mul(t, a, w), BigDec(i), w);
        BigDec next = add(s, t, w);
        ++n;
        if (next == s) break;
        s = std::move(next);
    }
    return s;
}

mpz_class atan_inv(unsigned long k, const mpz_class& scale) {
    mpz_class x = scale / k;
    mpz_class sum = x;
    const unsigned long k2 = k * k;
    for (unsigned long n = 1;; ++n) {
        x /= k2;
        mpz_class term = x / (2 * n + 1);
        if (term == 0) break;
        if (n % 2) {
            sum -= term;
        } else {
            sum += term;
        }
    }
    return sum;
}

}  // namespace

BigDec sin(const BigDec& x) { return taylor_trig(x, true); }

BigDec cos(const BigDec& x) { return taylor_trig(x, false); }

BigDec exp(const BigDec& x) {
    const int P = precision();
    if (x.is_zero()) return BigDec(1);
    double xd = x.to_double();
    if (xd > 2.31e6) throw OverflowError("exp overflow: " + x.to_short_string());
    if (xd < -2.31e6) return BigDec(0);
    BigDec a = x.is_negative() ? -x : x;
    // exp(a) = exp(a / 2^k)^(2^k); squaring doubles the relative error, so widen the guard by k bits.
    const double ad = std::fabs(xd);
    const int k = ad > 1e-3 ? std::max(0, static_cast<int>(std::ceil(std::log2(ad))) + 10) : 0;
    for (int guard = 12;; guard *= 2) {
        const int w = P + guard + static_cast<int>(std::ceil(0.302 * k));
        long n = 0;
        BigDec r = k ? div(a, pow_int(BigDec(2), k, w), w) : a;
        BigDec s = exp_series(r, w, n);
        for (int i = 0; i < k; ++i) s = mul(s, s, w);
        if (x.is_negative()) s = div(BigDec(1), s, w);
        BigDec err = mul(mul(pow10(s.adjusted() + 1 - w), BigDec(3 * n + 12), w), pow_int(BigDec(2), k + 1, w), w);
        BigDec lo = round_to(sub(s, err, w + 4), P);
        BigDec hi = round_to(add(s, err, w + 4), P);
        if (lo == hi && lo.digits() == hi.digits() && lo.exponent() == hi.exponent()) return hi;
        if (guard > 4 * P + 1000) return round_to(s, P);
    }
}

BigDec pi() {
    const int P = precision();
    static std::mutex mu;
    static std::map<int, BigDec> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(P);
        if (it != cache.end()) return it->second;
    }
    const int w = P + 20;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(w));
    mpz_class v = 16 * atan_inv(5, scale) - 4 * atan_inv(239, scale);
    BigDec r = round_to(BigDec::from_parts(false, v, -w), P);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(P, r);
    return r;
}

}  // namespace cyclestab
