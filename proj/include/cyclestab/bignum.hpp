#pragma once

#include <gmpxx.h>

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace cyclestab {

// Working precision in significant decimal digits. Thread local; new threads start
// from the process default.
int precision();
void set_default_precision(int digits);
int default_precision();

class PrecisionGuard {
  public:
    explicit PrecisionGuard(int digits);
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

  private:
    int saved_;
};

// Signed decimal floating point number: (-1)^neg * coeff * 10^exp.
// Arithmetic rounds half-even to precision() significant digits, like a Python
// decimal context with that precision.
class BigDec {
  public:
    BigDec() = default;
    template <std::integral I>
    BigDec(I v) : coeff_(0), exp_(0), neg_(v < 0) {  // NOLINT(implicit)
        if constexpr (std::is_signed_v<I>) {
            long long w = v;
            if (w < 0) {
                coeff_ = static_cast<unsigned long>(-(w + 1));
                coeff_ += 1;
            } else {
                coeff_ = static_cast<unsigned long>(w);
            }
        } else {
            coeff_ = static_cast<unsigned long>(v);
        }
    }

    // Exact value of a binary64 number (like Decimal(float)).
    static BigDec from_double(double d);
    // Exact parse of plain or scientific notation. Throws ValidationError.
    static BigDec from_string(std::string_view s);
    static BigDec from_integer(const mpz_class& z);
    static BigDec from_parts(bool negative, mpz_class coeff, std::int64_t exp);

    // Python str(Decimal) formatting. Exact, round-trips through from_string.
    std::string to_string() const;
    // Positional notation without exponent.
    std::string to_plain_string() const;
    // Scientific notation with at most `digits` significant digits, truncated (for display).
    std::string to_short_string(int digits = 17) const;
    double to_double() const;

    bool is_zero() const { return coeff_ == 0; }
    bool is_negative() const { return neg_ && !is_zero(); }
    int sign() const { return is_zero() ? 0 : (neg_ ? -1 : 1); }
    const mpz_class& coefficient() const { return coeff_; }
    std::int64_t exponent() const { return exp_; }
    // Exponent of the most significant digit.
    std::int64_t adjusted() const;
    int digits() const;

    BigDec operator-() const;

    BigDec& operator+=(const BigDec& o);
    BigDec& operator-=(const BigDec& o);
    BigDec& operator*=(const BigDec& o);
    BigDec& operator/=(const BigDec& o);

  private:
    friend struct Rounding;
    mpz_class coeff_{0};
    std::int64_t exp_ = 0;
    bool neg_ = false;
};

// Explicit-precision operations.
BigDec round_to(const BigDec& a, int prec);
BigDec add(const BigDec& a, const BigDec& b, int prec);
BigDec sub(const BigDec& a, const BigDec& b, int prec);
BigDec mul(const BigDec& a, const BigDec& b, int prec);
BigDec div(const BigDec& a, const BigDec& b, int prec);
// x**k with libmpdec semantics: square-and-multiply at prec+digits(k)+2, one final rounding.
BigDec pow_int(const BigDec& x, long long k, int prec);
BigDec sqrt(const BigDec& x, int prec);
// Positive real n-th root of x > 0, correctly rounded.
BigDec nth_root(const BigDec& x, long n, int prec);

BigDec operator+(const BigDec& a, const BigDec& b);
BigDec operator-(const BigDec& a, const BigDec& b);
BigDec operator*(const BigDec& a, const BigDec& b);
BigDec operator/(const BigDec& a, const BigDec& b);

// abs and neg round to the context like Python's unary operators.
BigDec abs(const BigDec& a);
BigDec neg(const BigDec& a);
BigDec pow_int(const BigDec& x, long long k);
BigDec sqrt(const BigDec& x);

// Taylor kernels. sin/cos sum at precision()+2 until the partial sum is stationary.
BigDec sin(const BigDec& x);
BigDec cos(const BigDec& x);
// Correctly rounded exponential.
BigDec exp(const BigDec& x);
BigDec pi();

int compare(const BigDec& a, const BigDec& b);
inline bool operator==(const BigDec& a, const BigDec& b) { return compare(a, b) == 0; }
inline std::strong_ordering operator<=>(const BigDec& a, const BigDec& b) {
    int c = compare(a, b);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

// 10^k exactly.
BigDec pow10(std::int64_t k);

// Cycle detection threshold at the current precision: the binary64 number nearest
// 10^-P written out exactly, or 10^-P itself when that underflows binary64.
BigDec epsilon();
BigDec epsilon(int prec);

std::ostream& operator<<(std::ostream& os, const BigDec& x);

}  // namespace cyclestab
