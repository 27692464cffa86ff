#pragma once

#include <array>
#include <string>

#include "cyclestab/bignum.hpp"

namespace cyclestab {

// Square matrix of order 1 or 2.
class SmallMatrix {
  public:
    explicit SmallMatrix(int m = 1);
    SmallMatrix(const BigDec& a);  // NOLINT(implicit) 1x1
    SmallMatrix(const BigDec& a, const BigDec& b, const BigDec& c, const BigDec& d);

    static SmallMatrix identity(int m);

    int dim() const { return m_; }
    BigDec& operator()(int i, int j) { return e_[static_cast<std::size_t>(i * m_ + j)]; }
    const BigDec& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * m_ + j)]; }

    SmallMatrix operator*(const SmallMatrix& o) const;
    SmallMatrix operator+(const SmallMatrix& o) const;
    SmallMatrix operator-(const SmallMatrix& o) const;
    SmallMatrix scaled(const BigDec& k) const;

    BigDec trace() const;
    BigDec determinant() const;
    BigDec max_abs() const;

    std::string to_string() const;

  private:
    int m_;
    std::array<BigDec, 4> e_;
};

SmallMatrix matrix_power(const SmallMatrix& a, long k);
BigDec max_abs_diff(const SmallMatrix& a, const SmallMatrix& b);

}  // namespace cyclestab
