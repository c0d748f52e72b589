#pragma once

#include "leraykit/core.hpp"

#include <map>
#include <memory>
#include <string>

namespace leray {

// Small arithmetic grammar for user-supplied graphs and Beltrami fields.
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
// names: i, pi, z, z1..z9, u ; functions: abs2 re im conj exp
class Expression {
public:
    struct Node;

    static Expression parse(const std::string& text);

    Cx<double> eval(const std::vector<Cx<double>>& z, double u = 0.0) const;
    Cx<cd> eval(const std::vector<Cx<cd>>& z, cd u = cd(0.0)) const;

    // largest zK index referenced (plain z counts as z1)
    int max_variable() const { return max_var_; }
    const std::string& text() const { return text_; }

private:
    std::shared_ptr<const Node> root_;
    int max_var_ = 0;
    std::string text_;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace leray
