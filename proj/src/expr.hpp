#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace hhinvex {

enum class NodeKind : std::uint8_t {
    Number,
    Variable,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call,
};

// "sign" is not part of the input grammar but is produced by
// differentiation of abs and accepted back by the parser so that every
// derivative renders to parseable text.
enum class FuncId : std::uint8_t { Exp, Log, Sin, Cos, Abs, Sqrt, Sign, Min, Max };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double number = 0.0;       // Number
    int var = -1;              // Variable: index into the declared variable list
    std::string name;          // Variable: declared name
    FuncId func = FuncId::Exp; // Call
    std::vector<NodePtr> args; // operands (1 for unary, 2 for binary)
};

// Immutable parsed expression over an ordered set of declared variables.
// Values are bound positionally: evaluate() takes one double per declared
// variable, in declaration order.
class Expression {
public:
    Expression() = default;

    static Expression parse(std::string_view source, std::vector<std::string> variables);

    double evaluate(std::span<const double> values) const;
    double evaluate1(double x) const;  // single-variable convenience

    Expression differentiate(std::string_view wrt) const;

    // Text form that parses back to a structurally identical tree.
    std::string render() const;
    // Lisp-style dump, e.g. "(+ (^ x 2) (* 3 x))".
    std::string sexpr() const;

    const std::vector<std::string>& variables() const { return vars_; }
    const NodePtr& root() const { return root_; }
    bool valid() const { return root_ != nullptr; }

    bool structurally_equal(const Expression& other) const;

    // Construct directly from a tree (used by differentiate and tests).
    Expression(NodePtr root, std::vector<std::string> vars)
        : root_(std::move(root)), vars_(std::move(vars)) {}

private:
    NodePtr root_;
    std::vector<std::string> vars_;
};

// Node factories with constant folding (used when building derivatives; the
// parser itself never folds so that render/parse round-trips exactly).
namespace ast {
NodePtr num(double v);
NodePtr var(int index, std::string name);
NodePtr neg(NodePtr a);
NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr div(NodePtr a, NodePtr b);
NodePtr pow(NodePtr a, NodePtr b);
NodePtr call(FuncId f, std::vector<NodePtr> args);
}  // namespace ast

}  // namespace hhinvex
