#include "leraykit/expression.hpp"

#include <cctype>
#include <cmath>

namespace leray {

struct Expression::Node {
    enum Kind { Num, Var, U, Add, Sub, Mul, Div, Neg, Pow, Fn } kind;
    double value = 0;
    cd cvalue{0, 0};
    int var = 0;
    std::string fn;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;
using N = Expression::Node;

struct Parser {
    const std::string& s;
    size_t pos = 0;
    int max_var = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("expression: " + what + " at offset " + std::to_string(pos) + " in '" + s + "'");
    }

    NodeP make(N::Kind k, NodeP a = nullptr, NodeP b = nullptr) {
        auto n = std::make_shared<N>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodeP expr() {
        NodeP left = term();
        for (;;) {
            if (accept('+')) left = make(N::Add, left, term());
            else if (accept('-')) left = make(N::Sub, left, term());
            else return left;
        }
    }
    NodeP term() {
        NodeP left = unary();
        for (;;) {
            if (accept('*')) left = make(N::Mul, left, unary());
            else if (accept('/')) left = make(N::Div, left, unary());
            else return left;
        }
    }
    NodeP unary() {
        if (accept('-')) return make(N::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }
    NodeP power() {
        NodeP base = atom();
        if (accept('^')) return make(N::Pow, base, unary());
        return base;
    }
    NodeP atom() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        char c = s[pos];
        if (accept('(')) {
            NodeP e = expr();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = 0;
            try {
                v = std::stod(s.substr(pos), &used);
            } catch (...) {
                fail("bad number");
            }
            pos += used;
            auto n = std::make_shared<N>();
            n->kind = N::Num;
            n->cvalue = cd(v, 0);
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos;
            while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
            std::string name = s.substr(start, pos - start);
            static const char* fns[] = {"abs2", "re", "im", "conj", "exp"};
            for (const char* f : fns) {
                if (name == f) {
                    if (!accept('(')) fail("expected '(' after " + name);
                    auto n = std::make_shared<N>();
                    n->kind = N::Fn;
                    n->fn = name;
                    n->a = expr();
                    if (!accept(')')) fail("missing ')'");
                    return n;
                }
            }
            auto n = std::make_shared<N>();
            if (name == "i") {
                n->kind = N::Num;
                n->cvalue = cd(0, 1);
            } else if (name == "pi") {
                n->kind = N::Num;
                n->cvalue = cd(kPi, 0);
            } else if (name == "u") {
                n->kind = N::U;
            } else if (name == "z") {
                n->kind = N::Var;
                n->var = 0;
                max_var = std::max(max_var, 1);
            } else if (name.size() == 2 && name[0] == 'z' && name[1] >= '1' && name[1] <= '9') {
                n->kind = N::Var;
                n->var = name[1] - '1';
                max_var = std::max(max_var, n->var + 1);
            } else {
                fail("unknown name '" + name + "'");
            }
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

template <class T>
bool is_real_zero(const T& x) {
    return std::abs(x) == 0.0;
}

template <class T>
Cx<T> power(Cx<T> a, Cx<T> e) {
    if (!is_real_zero(e.im)) throw NumericalError("expression: complex exponent");
    double p = std::real(e.re);
    double rp = std::round(p);
    if (std::abs(p - rp) < 1e-14 && std::abs(rp) <= 64) {
        int k = static_cast<int>(rp);
        Cx<T> acc(T(1), T(0));
        Cx<T> base = a;
        if (k < 0) {
            base = Cx<T>(T(1), T(0)) / a;
            k = -k;
        }
        for (int j = 0; j < k; ++j) acc = acc * base;
        return acc;
    }
    // fractional powers only of real positive quantities
    if (std::abs(std::real(a.im)) > 1e-300 || std::real(a.re) <= 0)
        throw NumericalError("expression: fractional power of a non-positive or complex base");
    return {std::pow(a.re, T(p)), T(0)};
}

template <class T>
Cx<T> evaluate(const N& n, const std::vector<Cx<T>>& z, T u) {
    switch (n.kind) {
    case N::Num: return from_cd<T>(n.cvalue);
    case N::Var:
        if (n.var >= static_cast<int>(z.size())) throw NumericalError("expression: variable out of range");
        return z[n.var];
    case N::U: return {u, T(0)};
    case N::Add: return evaluate(*n.a, z, u) + evaluate(*n.b, z, u);
    case N::Sub: return evaluate(*n.a, z, u) - evaluate(*n.b, z, u);
    case N::Mul: return evaluate(*n.a, z, u) * evaluate(*n.b, z, u);
    case N::Div: return evaluate(*n.a, z, u) / evaluate(*n.b, z, u);
    case N::Neg: return -evaluate(*n.a, z, u);
    case N::Pow: return power(evaluate(*n.a, z, u), evaluate(*n.b, z, u));
    case N::Fn: {
        Cx<T> a = evaluate(*n.a, z, u);
        if (n.fn == "abs2") return {abs2(a), T(0)};
        if (n.fn == "re") return {a.re, T(0)};
        if (n.fn == "im") return {a.im, T(0)};
        if (n.fn == "conj") return conj(a);
        T m = std::exp(a.re);
        return {m * std::cos(a.im), m * std::sin(a.im)};
    }
    }
    return {};
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser p{text};
    NodeP root = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    Expression e;
    e.root_ = root;
    e.max_var_ = p.max_var;
    e.text_ = text;
    return e;
}

Cx<double> Expression::eval(const std::vector<Cx<double>>& z, double u) const {
    return evaluate<double>(*root_, z, u);
}

Cx<cd> Expression::eval(const std::vector<Cx<cd>>& z, cd u) const {
    return evaluate<cd>(*root_, z, u);
}

}  // namespace leray
