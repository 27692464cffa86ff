#include "cyclestab/bignum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <vector>

#include "cyclestab/errors.hpp"

namespace cyclestab {

namespace {

std::atomic<int> g_default_precision{250};
thread_local int tl_precision = 0;

constexpr std::int64_t kEmax = 999999;
constexpr std::int64_t kEmin = -999999;

const mpz_class& p10(std::size_t k) {
    thread_local std::vector<mpz_class> cache{mpz_class(1)};
    if (k < cache.size()) return cache[k];
    if (k > 20000) {
        thread_local mpz_class big;
        mpz_ui_pow_ui(big.get_mpz_t(), 10, k);
        return big;
    }
    while (cache.size() <= k) cache.push_back(cache.back() * 10);
    return cache[k];
}

int ndigits(const mpz_class& c) {
    if (c == 0) return 1;
    std::size_t s = mpz_sizeinbase(c.get_mpz_t(), 10);
    if (s > 1 && mpz_cmpabs(c.get_mpz_t(), p10(s - 1).get_mpz_t()) < 0) --s;
    return static_cast<int>(s);
}

void check_prec(int prec) {
    if (prec < 1) throw ValidationError("precision must be at least 1 digit");
}

}  // namespace

int precision() { return tl_precision > 0 ? tl_precision : g_default_precision.load(); }

int default_precision() { return g_default_precision.load(); }

void set_default_precision(int digits) {
    check_prec(digits);
    g_default_precision.store(digits);
}

PrecisionGuard::PrecisionGuard(int digits) : saved_(tl_precision) {
    check_prec(digits);
    tl_precision = digits;
}

PrecisionGuard::~PrecisionGuard() { tl_precision = saved_; }

struct Rounding {
    // Round coefficient to at most prec digits, half-even, then check exponent limits.
    static void fix(BigDec& r, int prec) {
        mpz_class& c = r.coeff_;
        int d = ndigits(c);
        if (d > prec) {
            int k = d - prec;
            mpz_class q, rem;
            mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), c.get_mpz_t(), p10(k).get_mpz_t());
            mpz_mul_2exp(rem.get_mpz_t(), rem.get_mpz_t(), 1);
            int cmp = mpz_cmp(rem.get_mpz_t(), p10(k).get_mpz_t());
            if (cmp > 0 || (cmp == 0 && mpz_odd_p(q.get_mpz_t()))) {
                q += 1;
                if (q == p10(prec)) {
                    q = p10(prec - 1);
                    r.exp_ += 1;
                }
            }
            c.swap(q);
            r.exp_ += k;
        }
        if (c == 0) {
            r.neg_ = false;
            return;
        }
        std::int64_t adj = r.exp_ + ndigits(c) - 1;
        if (adj > kEmax) throw OverflowError("decimal exponent overflow");
        if (adj < kEmin) {
            c = 0;
            r.neg_ = false;
        }
    }

    // Append a sticky digit below c when the discarded remainder was nonzero.
    static void fix_sticky(BigDec& r, bool sticky, int prec) {
        if (sticky) {
            r.coeff_ = r.coeff_ * 10 + 1;
            r.exp_ -= 1;
        }
        fix(r, prec);
    }

    static BigDec add(const BigDec& a, const BigDec& b, bool negate_b, int prec) {
        check_prec(prec);
        bool bneg = b.neg_ != negate_b;
        if (a.is_zero() && b.is_zero()) {
            BigDec z;
            z.exp_ = std::min(a.exp_, b.exp_);
            return z;
        }
        if (a.is_zero() || b.is_zero()) {
            BigDec r = a.is_zero() ? b : a;
            if (a.is_zero()) r.neg_ = bneg;
            fix(r, prec);
            return r;
        }
        // Operand with the larger exponent is scaled; a far smaller one collapses to a sticky unit.
        const BigDec* tmp = &a;
        const BigDec* oth = &b;
        bool tneg = a.neg_, oneg = bneg;
        if (a.exp_ < b.exp_) {
            std::swap(tmp, oth);
            std::swap(tneg, oneg);
        }
        int tmp_len = ndigits(tmp->coeff_);
        int oth_len = ndigits(oth->coeff_);
        std::int64_t e = tmp->exp_ + std::min<std::int64_t>(-1, tmp_len - prec - 2);
        mpz_class oc;
        std::int64_t oe;
        if (oth_len + oth->exp_ - 1 < e) {
            oc = 1;
            oe = e;
        } else {
            oc = oth->coeff_;
            oe = oth->exp_;
        }
        mpz_class tc = tmp->coeff_ * p10(static_cast<std::size_t>(tmp->exp_ - oe));
        BigDec r;
        r.exp_ = oe;
        if (tneg == oneg) {
            r.coeff_ = tc + oc;
            r.neg_ = tneg;
        } else {
            int c = cmp(tc, oc);
            if (c == 0) {
                r.coeff_ = 0;
                return r;
            }
            if (c > 0) {
                r.coeff_ = tc - oc;
                r.neg_ = tneg;
            } else {
                r.coeff_ = oc - tc;
                r.neg_ = oneg;
            }
        }
        fix(r, prec);
        return r;
    }

    static BigDec mul(const BigDec& a, const BigDec& b, int prec) {
        check_prec(prec);
        BigDec r;
        r.exp_ = a.exp_ + b.exp_;
        if (a.is_zero() || b.is_zero()) return r;
        mpz_mul(r.coeff_.get_mpz_t(), a.coeff_.get_mpz_t(), b.coeff_.get_mpz_t());
        r.neg_ = a.neg_ != b.neg_;
        fix(r, prec);
        return r;
    }

    static BigDec div(const BigDec& a, const BigDec& b, int prec) {
        check_prec(prec);
        if (b.is_zero()) throw ArithmeticError("division by zero");
        BigDec r;
        if (a.is_zero()) {
            r.exp_ = a.exp_ - b.exp_;
            return r;
        }
        r.neg_ = a.neg_ != b.neg_;
        std::int64_t shift = static_cast<std::int64_t>(ndigits(b.coeff_)) - ndigits(a.coeff_) + prec + 1;
        r.exp_ = a.exp_ - b.exp_ - shift;
        mpz_class rem;
        if (shift >= 0) {
            mpz_class n = a.coeff_ * p10(static_cast<std::size_t>(shift));
            mpz_tdiv_qr(r.coeff_.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t(), b.coeff_.get_mpz_t());
        } else {
            mpz_class dd = b.coeff_ * p10(static_cast<std::size_t>(-shift));
            mpz_tdiv_qr(r.coeff_.get_mpz_t(), rem.get_mpz_t(), a.coeff_.get_mpz_t(), dd.get_mpz_t());
        }
        if (rem != 0) {
            if (mpz_divisible_ui_p(r.coeff_.get_mpz_t(), 5)) r.coeff_ += 1;
        } else {
            std::int64_t ideal = a.exp_ - b.exp_;
            while (r.exp_ < ideal && mpz_divisible_ui_p(r.coeff_.get_mpz_t(), 10)) {
                r.coeff_ /= 10;
                r.exp_ += 1;
            }
        }
        fix(r, prec);
        return r;
    }

    static BigDec sqrt(const BigDec& x, int prec) {
        check_prec(prec);
        if (x.is_negative()) throw ArithmeticError("square root of a negative number");
        BigDec r;
        if (x.is_zero()) {
            r.exp_ = x.exp_ / 2;
            return r;
        }
        std::int64_t s = std::max<std::int64_t>(0, 2 * (prec + 2) - ndigits(x.coeff_));
        if (((x.exp_ - s) % 2 + 2) % 2 != 0) s += 1;
        mpz_class n = x.coeff_ * p10(static_cast<std::size_t>(s));
        mpz_class rem;
        mpz_sqrtrem(r.coeff_.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
        r.exp_ = (x.exp_ - s) / 2;
        fix_sticky(r, rem != 0, prec);
        return r;
    }

    static BigDec root(const BigDec& x, long n, int prec) {
        check_prec(prec);
        if (n < 1) throw ValidationError("root degree must be positive");
        if (x.is_negative() || x.is_zero()) throw ArithmeticError("root of a non-positive number");
        std::int64_t s = std::max<std::int64_t>(0, static_cast<std::int64_t>(n) * (prec + 2) - ndigits(x.coeff_));
        while (((x.exp_ - s) % n + n) % n != 0) s += 1;
        mpz_class v = x.coeff_ * p10(static_cast<std::size_t>(s));
        BigDec r;
        mpz_class rem;
        mpz_rootrem(r.coeff_.get_mpz_t(), rem.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(n));
        r.exp_ = (x.exp_ - s) / n;
        fix_sticky(r, rem != 0, prec);
        return r;
    }

    static BigDec negate(const BigDec& a) {
        BigDec r = a;
        if (!r.is_zero()) r.neg_ = !r.neg_;
        return r;
    }

    static BigDec magnitude(const BigDec& a) {
        BigDec r = a;
        r.neg_ = false;
        return r;
    }
};

BigDec BigDec::from_parts(bool negative, mpz_class coeff, std::int64_t exp) {
    if (coeff < 0) throw ValidationError("coefficient must be non-negative");
    BigDec r;
    r.coeff_ = std::move(coeff);
    r.exp_ = exp;
    r.neg_ = negative && r.coeff_ != 0;
    return r;
}

BigDec BigDec::from_integer(const mpz_class& z) {
    return from_parts(z < 0, mpz_class(abs(z)), 0);
}

BigDec BigDec::from_double(double d) {
    if (!std::isfinite(d)) throw ValidationError("non-finite binary64 value");
    if (d == 0.0) return BigDec();
    int e = 0;
    double m = std::frexp(std::fabs(d), &e);
    auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
    e -= 53;
    while ((mant & 1U) == 0 && e < 0) {
        mant >>= 1;
        ++e;
    }
    mpz_class c;
    mpz_import(c.get_mpz_t(), 1, 1, sizeof(mant), 0, 0, &mant);
    if (e >= 0) {
        c <<= e;
        return from_parts(d < 0, c, 0);
    }
    mpz_class five;
    mpz_ui_pow_ui(five.get_mpz_t(), 5, static_cast<unsigned long>(-e));
    return from_parts(d < 0, c * five, e);
}

BigDec BigDec::from_string(std::string_view s) {
    auto bad = [&]() { return ValidationError("invalid decimal literal '" + std::string(s) + "'"); };
    std::size_t i = 0, n = s.size();
    while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    while (n > i && std::isspace(static_cast<unsigned char>(s[n - 1]))) --n;
    bool neg = false;
    if (i < n && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    std::string digits;
    std::int64_t exp = 0;
    bool any = false, dot = false;
    for (; i < n; ++i) {
        char ch = s[i];
        if (ch >= '0' && ch <= '9') {
            digits.push_back(ch);
            any = true;
            if (dot) --exp;
        } else if (ch == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!any) throw bad();
    if (i < n) {
        if (s[i] != 'e' && s[i] != 'E') throw bad();
        ++i;
        bool eneg = false;
        if (i < n && (s[i] == '+' || s[i] == '-')) eneg = s[i++] == '-';
        if (i >= n) throw bad();
        std::int64_t ev = 0;
        for (; i < n; ++i) {
            if (s[i] < '0' || s[i] > '9') throw bad();
            if (ev > 1000000000) throw bad();
            ev = ev * 10 + (s[i] - '0');
        }
        exp += eneg ? -ev : ev;
    }
    mpz_class c(digits, 10);
    return from_parts(neg, c, exp);
}

std::string BigDec::to_string() const {
    std::string c = coeff_.get_str(10);
    std::int64_t left = exp_ + static_cast<std::int64_t>(c.size());
    std::int64_t dot;
    if (exp_ <= 0 && left > -6) {
        dot = left;
    } else {
        dot = 1;
    }
    std::string out = neg_ ? "-" : "";
    if (dot <= 0) {
        out += "0." + std::string(static_cast<std::size_t>(-dot), '0') + c;
    } else if (dot >= static_cast<std::int64_t>(c.size())) {
        out += c + std::string(static_cast<std::size_t>(dot - static_cast<std::int64_t>(c.size())), '0');
    } else {
        out += c.substr(0, static_cast<std::size_t>(dot)) + "." + c.substr(static_cast<std::size_t>(dot));
    }
    if (left != dot) {
        std::int64_t ex = left - dot;
        out += (ex < 0 ? "E-" : "E+") + std::to_string(ex < 0 ? -ex : ex);
    }
    return out;
}

std::string BigDec::to_plain_string() const {
    std::string c = coeff_.get_str(10);
    std::string out = neg_ ? "-" : "";
    if (exp_ >= 0) {
        out += c;
        if (!is_zero()) out += std::string(static_cast<std::size_t>(exp_), '0');
        return out;
    }
    auto frac = static_cast<std::size_t>(-exp_);
    if (c.size() <= frac) {
        out += "0." + std::string(frac - c.size(), '0') + c;
    } else {
        out += c.substr(0, c.size() - frac) + "." + c.substr(c.size() - frac);
    }
    return out;
}

std::string BigDec::to_short_string(int digits) const {
    if (is_zero()) return "0";
    if (this->digits() > digits) return round_to(*this, std::max(1, digits)).to_short_string(digits);
    std::string c = coeff_.get_str(10);
    while (c.size() > 1 && c.back() == '0') c.pop_back();
    std::string out = neg_ ? "-" : "";
    out += c.substr(0, 1);
    if (c.size() > 1) out += "." + c.substr(1);
    std::int64_t adj = adjusted();
    if (adj != 0) out += "e" + std::to_string(adj);
    return out;
}

double BigDec::to_double() const {
    if (is_zero()) return 0.0;
    std::string c = coeff_.get_str(10);
    std::string s = (neg_ ? "-" : "") + c.substr(0, 1) + "." + c.substr(1) + "e" + std::to_string(adjusted());
    return std::strtod(s.c_str(), nullptr);
}

std::int64_t BigDec::adjusted() const { return exp_ + ndigits(coeff_) - 1; }

int BigDec::digits() const { return ndigits(coeff_); }

BigDec BigDec::operator-() const { return neg(*this); }

BigDec& BigDec::operator+=(const BigDec& o) { return *this = add(*this, o, precision()); }
BigDec& BigDec::operator-=(const BigDec& o) { return *this = sub(*this, o, precision()); }
BigDec& BigDec::operator*=(const BigDec& o) { return *this = mul(*this, o, precision()); }
BigDec& BigDec::operator/=(const BigDec& o) { return *this = div(*this, o, precision()); }

BigDec round_to(const BigDec& a, int prec) {
    check_prec(prec);
    BigDec r = a;
    Rounding::fix(r, prec);
    return r;
}

BigDec add(const BigDec& a, const BigDec& b, int prec) { return Rounding::add(a, b, false, prec); }
BigDec sub(const BigDec& a, const BigDec& b, int prec) { return Rounding::add(a, b, true, prec); }
BigDec mul(const BigDec& a, const BigDec& b, int prec) { return Rounding::mul(a, b, prec); }
BigDec div(const BigDec& a, const BigDec& b, int prec) { return Rounding::div(a, b, prec); }
BigDec sqrt(const BigDec& x, int prec) { return Rounding::sqrt(x, prec); }
BigDec nth_root(const BigDec& x, long n, int prec) { return Rounding::root(x, n, prec); }

BigDec pow_int(const BigDec& x, long long k, int prec) {
    check_prec(prec);
    if (k == 0) {
        if (x.is_zero()) throw ArithmeticError("0 ** 0 is undefined");
        return BigDec(1);
    }
    unsigned long long n = k < 0 ? 0ULL - static_cast<unsigned long long>(k) : static_cast<unsigned long long>(k);
    int work = prec + static_cast<int>(std::to_string(n).size()) + 2;
    BigDec base = x;
    if (k < 0) {
        work += 1;
        base = div(BigDec(1), x, work);
    }
    BigDec r = base;
    unsigned long long bit = 1ULL << (63 - __builtin_clzll(n));
    while ((bit >>= 1) != 0) {
        r = mul(r, r, work);
        if (n & bit) r = mul(r, base, work);
    }
    return round_to(r, prec);
}

BigDec operator+(const BigDec& a, const BigDec& b) { return add(a, b, precision()); }
BigDec operator-(const BigDec& a, const BigDec& b) { return sub(a, b, precision()); }
BigDec operator*(const BigDec& a, const BigDec& b) { return mul(a, b, precision()); }
BigDec operator/(const BigDec& a, const BigDec& b) { return div(a, b, precision()); }

BigDec abs(const BigDec& a) { return round_to(Rounding::magnitude(a), precision()); }
BigDec neg(const BigDec& a) { return round_to(Rounding::negate(a), precision()); }
BigDec pow_int(const BigDec& x, long long k) { return pow_int(x, k, precision()); }
BigDec sqrt(const BigDec& x) { return sqrt(x, precision()); }

int compare(const BigDec& a, const BigDec& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    int mag;
    std::int64_t aa = a.adjusted(), ab = b.adjusted();
    if (aa != ab) {
        mag = aa < ab ? -1 : 1;
    } else if (a.exponent() == b.exponent()) {
        mag = cmp(a.coefficient(), b.coefficient());
    } else if (a.exponent() > b.exponent()) {
        mag = cmp(a.coefficient() * p10(static_cast<std::size_t>(a.exponent() - b.exponent())), b.coefficient());
    } else {
        mag = cmp(a.coefficient(), b.coefficient() * p10(static_cast<std::size_t>(b.exponent() - a.exponent())));
    }
    mag = mag < 0 ? -1 : (mag > 0 ? 1 : 0);
    return sa < 0 ? -mag : mag;
}

BigDec pow10(std::int64_t k) { return BigDec::from_parts(false, mpz_class(1), k); }

BigDec epsilon(int prec) {
    check_prec(prec);
    double d = std::strtod(("1e-" + std::to_string(prec)).c_str(), nullptr);
    if (std::fpclassify(d) == FP_NORMAL) return BigDec::from_double(d);
    return pow10(-prec);
}

BigDec epsilon() { return epsilon(precision()); }

std::ostream& operator<<(std::ostream& os, const BigDec& x) { return os << x.to_string(); }

}  // namespace cyclestab
