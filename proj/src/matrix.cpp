#include "cyclestab/matrix.hpp"

#include "cyclestab/errors.hpp"

namespace cyclestab {

SmallMatrix::SmallMatrix(int m) : m_(m) {
    if (m != 1 && m != 2) throw ValidationError("matrix order must be 1 or 2");
}

SmallMatrix::SmallMatrix(const BigDec& a) : m_(1) { e_[0] = a; }

SmallMatrix::SmallMatrix(const BigDec& a, const BigDec& b, const BigDec& c, const BigDec& d) : m_(2) {
    e_ = {a, b, c, d};
}

SmallMatrix SmallMatrix::identity(int m) {
    SmallMatrix r(m);
    for (int i = 0; i < m; ++i) r(i, i) = BigDec(1);
    return r;
}

SmallMatrix SmallMatrix::operator*(const SmallMatrix& o) const {
    if (m_ != o.m_) throw ValidationError("matrix order mismatch");
    if (m_ == 1) return SmallMatrix(e_[0] * o.e_[0]);
    const auto& a = e_;
    const auto& b = o.e_;
    return SmallMatrix(a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                       a[2] * b[1] + a[3] * b[3]);
}

SmallMatrix SmallMatrix::operator+(const SmallMatrix& o) const {
    if (m_ != o.m_) throw ValidationError("matrix order mismatch");
    SmallMatrix r(m_);
    for (int i = 0; i < m_ * m_; ++i) r.e_[static_cast<std::size_t>(i)] = e_[static_cast<std::size_t>(i)] + o.e_[static_cast<std::size_t>(i)];
    return r;
}

SmallMatrix SmallMatrix::operator-(const SmallMatrix& o) const {
    if (m_ != o.m_) throw ValidationError("matrix order mismatch");
    SmallMatrix r(m_);
    for (int i = 0; i < m_ * m_; ++i) r.e_[static_cast<std::size_t>(i)] = e_[static_cast<std::size_t>(i)] - o.e_[static_cast<std::size_t>(i)];
    return r;
}

SmallMatrix SmallMatrix::scaled(const BigDec& k) const {
    SmallMatrix r(m_);
    for (int i = 0; i < m_ * m_; ++i) r.e_[static_cast<std::size_t>(i)] = k * e_[static_cast<std::size_t>(i)];
    return r;
}

BigDec SmallMatrix::trace() const { return m_ == 1 ? e_[0] : e_[0] + e_[3]; }

BigDec SmallMatrix::determinant() const { return m_ == 1 ? e_[0] : e_[0] * e_[3] - e_[1] * e_[2]; }

BigDec SmallMatrix::max_abs() const {
    BigDec best(0);
    for (int i = 0; i < m_ * m_; ++i) {
        BigDec v = abs(e_[static_cast<std::size_t>(i)]);
        if (v > best) best = v;
    }
    return best;
}

std::string SmallMatrix::to_string() const {
    std::string s = "[";
    for (int i = 0; i < m_; ++i) {
        s += i ? ", [" : "[";
        for (int j = 0; j < m_; ++j) s += (j ? ", " : "") + (*this)(i, j).to_short_string();
        s += "]";
    }
    return s + "]";
}

SmallMatrix matrix_power(const SmallMatrix& a, long k) {
    if (k < 0) throw ValidationError("negative matrix power");
    SmallMatrix result = SmallMatrix::identity(a.dim());
    SmallMatrix base = a;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return result;
}

BigDec max_abs_diff(const SmallMatrix& a, const SmallMatrix& b) { return (a - b).max_abs(); }

}  // namespace cyclestab
