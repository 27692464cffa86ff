#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cyclestab/bignum.hpp"

namespace cyclestab {

// Complex number as a (re, im) pair of decimals.
struct ComplexPair {
    BigDec re, im;

    ComplexPair() = default;
    ComplexPair(BigDec r, BigDec i = BigDec(0)) : re(std::move(r)), im(std::move(i)) {}  // NOLINT(implicit)

    bool is_real() const { return im.is_zero(); }
    ComplexPair conj() const { return {re, -im}; }
    BigDec norm2() const { return re * re + im * im; }
    BigDec modulus() const { return sqrt(norm2()); }
    std::string to_string() const;
};

ComplexPair operator+(const ComplexPair& a, const ComplexPair& b);
ComplexPair operator-(const ComplexPair& a, const ComplexPair& b);
ComplexPair operator*(const ComplexPair& a, const ComplexPair& b);
ComplexPair operator/(const ComplexPair& a, const ComplexPair& b);
ComplexPair complex_pow(const ComplexPair& z, long k);
ComplexPair polar(const BigDec& rho, const BigDec& phi);

// theta_1..theta_N of r(mu) = sum theta_j mu^(j-1).
class ControlPolynomial {
  public:
    ControlPolynomial() : theta_{BigDec(1)} {}
    // Validates N >= 1, theta_N != 0 and |sum - 1| < 10^(5-P).
    explicit ControlPolynomial(std::vector<BigDec> theta);
    // Same, without the normalization check (for reporting arbitrary vectors).
    static ControlPolynomial unchecked(std::vector<BigDec> theta);
    // theta/(1+theta), 1/(1+theta): the scalar two-term scheme as a polynomial.
    static ControlPolynomial from_scalar_theta(const BigDec& theta);

    const std::vector<BigDec>& coefficients() const { return theta_; }
    std::size_t size() const { return theta_.size(); }
    const BigDec& operator[](std::size_t i) const { return theta_[i]; }
    BigDec sum() const;

  private:
    std::vector<BigDec> theta_;
};

struct MultiplierEstimate {
    ComplexPair value;
    BigDec radius;  // localization uncertainty delta >= 0
};

ControlPolynomial from_exact_multipliers(const std::vector<ComplexPair>& mus);
ControlPolynomial from_left_half_plane(const std::vector<MultiplierEstimate>& estimates);

enum class PolyakBranch { Minus, Plus };
ControlPolynomial polyak_coefficients(const BigDec& mu_star, int N, const BigDec& rho, int T,
                                      PolyakBranch branch = PolyakBranch::Minus);

ControlPolynomial from_complex_pair(const BigDec& rho, const BigDec& phi);

struct ChebyshevControl {
    ControlPolynomial theta;
    BigDec mu_star_bound;
};

ChebyshevControl chebyshev_symmetric(int N);
ChebyshevControl chebyshev_one_sided(int N);
// Monomial coefficients of T_N, lowest degree first.
std::vector<BigDec> chebyshev_coeffs(int N);

ComplexPair evaluate_r(const ControlPolynomial& theta, const ComplexPair& mu);
// mu * r(mu)^T
ComplexPair stability_value(const ControlPolynomial& theta, const ComplexPair& mu, int T);

}  // namespace cyclestab
