#include "cyclestab/expression.hpp"

#include <cctype>

#include "cyclestab/errors.hpp"
#include "cyclestab/maps.hpp"

namespace cyclestab {

struct Expression::Node {
    enum Kind { Number, Symbol, Add, Sub, Mul, Div, Pow, Neg, Abs, Sin, Cos, Exp } kind;
    BigDec number;
    int slot = -1;
    long long power = 0;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
  public:
    Parser(std::string_view text, const std::vector<std::string>& symbols) : s_(text), symbols_(symbols) {}

    NodeP parse() {
        NodeP n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("expression '" + std::string(s_) + "' at column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    static NodeP make(Node::Kind k, NodeP a, NodeP b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }

    NodeP expr() {
        NodeP n = term();
        for (;;) {
            if (accept("+")) {
                n = make(Node::Add, n, term());
            } else if (accept("-")) {
                n = make(Node::Sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodeP term() {
        NodeP n = unary();
        for (;;) {
            skip();
            if (s_.substr(pos_, 2) == "**") return n;
            if (accept("*") || accept("×")) {
                n = make(Node::Mul, n, unary());
            } else if (accept("/")) {
                n = make(Node::Div, n, unary());
            } else {
                return n;
            }
        }
    }

    NodeP unary() {
        if (accept("-") || accept("−")) return make(Node::Neg, unary());
        if (accept("+")) return unary();
        return power();
    }

    NodeP power() {
        NodeP base = primary();
        if (accept("^") || accept("**")) {
            skip();
            bool negative = accept("-");
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be an integer literal");
            if (pos_ - start > 9) fail("exponent too large");
            auto n = std::make_shared<Node>();
            n->kind = Node::Pow;
            n->lhs = base;
            n->power = std::stoll(std::string(s_.substr(start, pos_ - start)));
            if (negative) n->power = -n->power;
            return n;
        }
        return base;
    }

    NodeP primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (accept("(")) {
            NodeP n = expr();
            if (!accept(")")) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                std::size_t save = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            auto n = std::make_shared<Node>();
            n->kind = Node::Number;
            n->number = BigDec::from_string(s_.substr(start, pos_ - start));
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(') {
                Node::Kind k;
                if (id == "abs") k = Node::Abs;
                else if (id == "sin") k = Node::Sin;
                else if (id == "cos") k = Node::Cos;
                else if (id == "exp") k = Node::Exp;
                else fail("unknown function '" + id + "'");
                accept("(");
                NodeP arg = expr();
                if (!accept(")")) fail("expected ')'");
                return make(k, arg);
            }
            for (std::size_t i = 0; i < symbols_.size(); ++i) {
                if (symbols_[i] == id) {
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Symbol;
                    n->slot = static_cast<int>(i);
                    return n;
                }
            }
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    const std::vector<std::string>& symbols_;
    std::size_t pos_ = 0;
};

BigDec eval(const Node& n, const std::vector<BigDec>& v) {
    switch (n.kind) {
        case Node::Number: return n.number;
        case Node::Symbol: return v[static_cast<std::size_t>(n.slot)];
        case Node::Add: return eval(*n.lhs, v) + eval(*n.rhs, v);
        case Node::Sub: return eval(*n.lhs, v) - eval(*n.rhs, v);
        case Node::Mul: return eval(*n.lhs, v) * eval(*n.rhs, v);
        case Node::Div: return eval(*n.lhs, v) / eval(*n.rhs, v);
        case Node::Pow: return pow_int(eval(*n.lhs, v), n.power);
        case Node::Neg: return -eval(*n.lhs, v);
        case Node::Abs: return abs(eval(*n.lhs, v));
        case Node::Sin: return sin(eval(*n.lhs, v));
        case Node::Cos: return cos(eval(*n.lhs, v));
        case Node::Exp: return exp(eval(*n.lhs, v));
    }
    return BigDec();
}

// Forward-mode evaluation; g receives d(node)/d(symbol k) for k < nvars.
BigDec eval_grad(const Node& n, const std::vector<BigDec>& v, int nvars, std::vector<BigDec>& g) {
    g.assign(static_cast<std::size_t>(nvars), BigDec(0));
    std::vector<BigDec> ga, gb;
    switch (n.kind) {
        case Node::Number: return n.number;
        case Node::Symbol:
            if (n.slot < nvars) g[static_cast<std::size_t>(n.slot)] = BigDec(1);
            return v[static_cast<std::size_t>(n.slot)];
        default: break;
    }
    BigDec a = eval_grad(*n.lhs, v, nvars, ga);
    BigDec b;
    if (n.rhs) b = eval_grad(*n.rhs, v, nvars, gb);
    BigDec val;
    for (int k = 0; k < nvars; ++k) {
        auto K = static_cast<std::size_t>(k);
        switch (n.kind) {
            case Node::Add: g[K] = ga[K] + gb[K]; break;
            case Node::Sub: g[K] = ga[K] - gb[K]; break;
            case Node::Mul: g[K] = ga[K] * b + a * gb[K]; break;
            case Node::Div: g[K] = (ga[K] * b - a * gb[K]) / (b * b); break;
            case Node::Pow:
                g[K] = n.power == 0 ? BigDec(0) : BigDec(n.power) * pow_int(a, n.power - 1) * ga[K];
                break;
            case Node::Neg: g[K] = -ga[K]; break;
            case Node::Abs: g[K] = a.is_negative() ? -ga[K] : ga[K]; break;
            case Node::Sin: g[K] = cos(a) * ga[K]; break;
            case Node::Cos: g[K] = -(sin(a) * ga[K]); break;
            case Node::Exp: g[K] = exp(a) * ga[K]; break;
            default: break;
        }
    }
    switch (n.kind) {
        case Node::Add: val = a + b; break;
        case Node::Sub: val = a - b; break;
        case Node::Mul: val = a * b; break;
        case Node::Div: val = a / b; break;
        case Node::Pow: val = pow_int(a, n.power); break;
        case Node::Neg: val = -a; break;
        case Node::Abs: val = abs(a); break;
        case Node::Sin: val = sin(a); break;
        case Node::Cos: val = cos(a); break;
        case Node::Exp: val = exp(a); break;
        default: break;
    }
    return val;
}

class ExpressionKernel : public MapKernel {
  public:
    ExpressionKernel(std::vector<Expression> comps, std::size_t nvars) : comps_(std::move(comps)), nvars_(nvars) {}

    State step(const std::vector<BigDec>& p, const State& s) const override {
        std::vector<BigDec> values = slots(p, s);
        State out;
        for (const auto& e : comps_) out.push_back(e.evaluate(values));
        return out;
    }

    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        std::vector<BigDec> values = slots(p, s);
        SmallMatrix J(static_cast<int>(nvars_));
        std::vector<BigDec> grad;
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            comps_[i].evaluate_with_gradient(values, static_cast<int>(nvars_), grad);
            for (std::size_t j = 0; j < nvars_; ++j) J(static_cast<int>(i), static_cast<int>(j)) = grad[j];
        }
        return J;
    }

  private:
    std::vector<BigDec> slots(const std::vector<BigDec>& p, const State& s) const {
        std::vector<BigDec> v(s.begin(), s.end());
        v.insert(v.end(), p.begin(), p.end());
        return v;
    }

    std::vector<Expression> comps_;
    std::size_t nvars_;
};

}  // namespace

Expression Expression::parse(std::string_view text, const std::vector<std::string>& symbols) {
    Expression e;
    e.root_ = Parser(text, symbols).parse();
    e.text_ = std::string(text);
    return e;
}

BigDec Expression::evaluate(const std::vector<BigDec>& values) const { return eval(*root_, values); }

BigDec Expression::evaluate_with_gradient(const std::vector<BigDec>& values, int nvars, std::vector<BigDec>& grad) const {
    return eval_grad(*root_, values, nvars, grad);
}

MapDef make_user_map(const UserMapSpec& spec) {
    const std::string where = "user map '" + spec.name + "'";
    if (spec.name.empty()) throw ValidationError("user map needs a name");
    std::size_t m = spec.variables.size();
    if (m != 1 && m != 2) throw ValidationError(where + ": dimension must be 1 or 2");
    if (spec.step.size() != m) throw ValidationError(where + ": need one step expression per coordinate");
    std::vector<std::string> symbols = spec.variables;
    std::vector<std::string> pnames;
    std::vector<BigDec> pvalues;
    for (const auto& [k, v] : spec.parameters) {
        pnames.push_back(k);
        pvalues.push_back(v);
        symbols.push_back(k);
    }
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        static const char* reserved[] = {"abs", "sin", "cos", "exp"};
        for (const char* r : reserved)
            if (symbols[i] == r) throw ValidationError(where + ": '" + symbols[i] + "' is a reserved name");
        for (std::size_t j = 0; j < i; ++j)
            if (symbols[i] == symbols[j]) throw ValidationError(where + ": duplicate identifier '" + symbols[i] + "'");
    }
    std::vector<Expression> comps;
    for (const auto& s : spec.step) comps.push_back(Expression::parse(s, symbols));
    if (spec.initial_grid.empty()) throw ValidationError(where + ": initial grid is empty");
    for (const auto& st : spec.initial_grid)
        if (st.size() != m) throw ValidationError(where + ": initial state has wrong dimension");
    if (spec.period < 1) throw ValidationError(where + ": period must be positive");
    auto grid = spec.initial_grid;
    GridFn gf = [grid](const std::vector<BigDec>&, int count) {
        if (count > static_cast<int>(grid.size()))
            throw ValidationError("user map defines only " + std::to_string(grid.size()) + " initial states");
        return std::vector<State>(grid.begin(), grid.begin() + count);
    };
    std::vector<Preset> presets{Preset{spec.period, spec.theta, static_cast<int>(grid.size()), precision(), true}};
    return MapDef(spec.name, static_cast<int>(m), pnames, pvalues, std::make_shared<ExpressionKernel>(comps, m), gf,
                  presets, 0);
}

}  // namespace cyclestab
