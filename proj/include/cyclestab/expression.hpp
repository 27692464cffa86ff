#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cyclestab/bignum.hpp"

namespace cyclestab {

// Parsed arithmetic expression over named symbols.
// Grammar: + - * / ^integer (also **), unary minus, abs sin cos exp, parentheses,
// decimal literals (exact) and identifiers.
class Expression {
  public:
    struct Node;

    // `symbols` lists every identifier the expression may reference; the index of a
    // symbol in this list is its slot in the value vector passed to evaluate().
    static Expression parse(std::string_view text, const std::vector<std::string>& symbols);

    BigDec evaluate(const std::vector<BigDec>& values) const;
    // Value and partial derivatives with respect to symbols [0, nvars).
    BigDec evaluate_with_gradient(const std::vector<BigDec>& values, int nvars, std::vector<BigDec>& grad) const;

    const std::string& text() const { return text_; }

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace cyclestab
