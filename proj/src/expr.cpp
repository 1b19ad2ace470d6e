#include "expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace hhinvex {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok : std::uint8_t {
    Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End
};

struct Token {
    Tok kind;
    std::size_t offset;
    double number = 0.0;
    std::string_view text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        cur_.offset = pos_;
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
            case '+': cur_.kind = Tok::Plus;   ++pos_; return;
            case '-': cur_.kind = Tok::Minus;  ++pos_; return;
            case '*': cur_.kind = Tok::Star;   ++pos_; return;
            case '/': cur_.kind = Tok::Slash;  ++pos_; return;
            case '^': cur_.kind = Tok::Caret;  ++pos_; return;
            case '(': cur_.kind = Tok::LParen; ++pos_; return;
            case ')': cur_.kind = Tok::RParen; ++pos_; return;
            case ',': cur_.kind = Tok::Comma;  ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            cur_.kind = Tok::Ident;
            cur_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    void lex_number() {
        std::size_t start = pos_;
        bool saw_digit = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
            saw_digit = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                saw_digit = true;
            }
        }
        if (!saw_digit) throw ParseError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // "2e" is the number 2 followed by identifier e
            }
        }
        double value = 0.0;
        auto text = src_.substr(start, pos_ - start);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ParseError("malformed number", start);
        cur_.kind = Tok::Number;
        cur_.number = value;
        cur_.text = text;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token cur_{};
};

// ---------------------------------------------------------------------------
// Parser (grammar is classic precedence-layered recursive descent; power is
// right-associative and binds tighter than unary minus on its left operand).

struct FuncInfo {
    std::string_view name;
    FuncId id;
    int arity;
};

constexpr std::array<FuncInfo, 9> kFunctions = {{
    {"exp", FuncId::Exp, 1},
    {"log", FuncId::Log, 1},
    {"sin", FuncId::Sin, 1},
    {"cos", FuncId::Cos, 1},
    {"abs", FuncId::Abs, 1},
    {"sqrt", FuncId::Sqrt, 1},
    {"sign", FuncId::Sign, 1},
    {"min", FuncId::Min, 2},
    {"max", FuncId::Max, 2},
}};

const FuncInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (f.name == name) return &f;
    return nullptr;
}

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars)
        : lex_(src), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = parse_expr();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End)
            throw ParseError("unexpected trailing input", t.offset);
        return e;
    }

private:
    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k != Tok::Plus && k != Tok::Minus) return lhs;
            lex_.take();
            NodePtr rhs = parse_term();
            Node n;
            n.kind = (k == Tok::Plus) ? NodeKind::Add : NodeKind::Sub;
            n.args = {std::move(lhs), std::move(rhs)};
            lhs = make_node(std::move(n));
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k != Tok::Star && k != Tok::Slash) return lhs;
            lex_.take();
            NodePtr rhs = parse_factor();
            Node n;
            n.kind = (k == Tok::Star) ? NodeKind::Mul : NodeKind::Div;
            n.args = {std::move(lhs), std::move(rhs)};
            lhs = make_node(std::move(n));
        }
    }

    NodePtr parse_factor() {
        NodePtr base = parse_unary();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            NodePtr expo = parse_factor();  // right-associative
            Node n;
            n.kind = NodeKind::Pow;
            n.args = {std::move(base), std::move(expo)};
            return make_node(std::move(n));
        }
        return base;
    }

    NodePtr parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            NodePtr inner = parse_unary();
            Node n;
            n.kind = NodeKind::Negate;
            n.args = {std::move(inner)};
            return make_node(std::move(n));
        }
        return parse_atom();
    }

    NodePtr parse_atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Number: {
                Node n;
                n.kind = NodeKind::Number;
                n.number = t.number;
                return make_node(std::move(n));
            }
            case Tok::Ident: {
                if (lex_.peek().kind == Tok::LParen) return parse_call(t);
                auto it = std::find(vars_.begin(), vars_.end(), std::string(t.text));
                if (it == vars_.end())
                    throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
                Node n;
                n.kind = NodeKind::Variable;
                n.var = static_cast<int>(it - vars_.begin());
                n.name = *it;
                return make_node(std::move(n));
            }
            case Tok::LParen: {
                NodePtr e = parse_expr();
                expect(Tok::RParen, "expected ')'");
                return e;
            }
            default:
                throw ParseError("expected number, identifier, or '('", t.offset);
        }
    }

    NodePtr parse_call(const Token& name) {
        const FuncInfo* fn = find_function(name.text);
        if (!fn)
            throw ParseError("unknown function '" + std::string(name.text) + "'", name.offset);
        lex_.take();  // '('
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            args.push_back(parse_expr());
        }
        expect(Tok::RParen, "expected ')'");
        if (static_cast<int>(args.size()) != fn->arity)
            throw ParseError("function '" + std::string(name.text) + "' expects " +
                                 std::to_string(fn->arity) + " argument(s), got " +
                                 std::to_string(args.size()),
                             name.offset);
        Node n;
        n.kind = NodeKind::Call;
        n.func = fn->id;
        n.args = std::move(args);
        return make_node(std::move(n));
    }

    void expect(Tok k, const char* msg) {
        const Token& t = lex_.peek();
        if (t.kind != k) throw ParseError(msg, t.offset);
        lex_.take();
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
};

// ---------------------------------------------------------------------------
// Evaluation

bool is_integral(double v) {
    return std::isfinite(v) && v == std::floor(v) && std::fabs(v) <= 1e15;
}

double check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
    return v;
}

// Integer exponents go through repeated multiplication so that negative
// bases work; non-integer exponents require a positive base.
double eval_pow(double base, double expo) {
    if (is_integral(expo)) {
        long long n = static_cast<long long>(expo);
        if (n < 0 && base == 0.0) throw DomainError("zero raised to a negative power");
        bool invert = n < 0;
        unsigned long long k = invert ? static_cast<unsigned long long>(-n)
                                      : static_cast<unsigned long long>(n);
        double acc = 1.0, b = base;
        while (k) {
            if (k & 1ull) acc *= b;
            b *= b;
            k >>= 1;
        }
        return check_finite(invert ? 1.0 / acc : acc, "power");
    }
    if (base <= 0.0) throw DomainError("non-integer power of a non-positive base");
    return check_finite(std::pow(base, expo), "power");
}

double eval_node(const Node& n, std::span<const double> values) {
    switch (n.kind) {
        case NodeKind::Number:
            return n.number;
        case NodeKind::Variable:
            return values[static_cast<std::size_t>(n.var)];
        case NodeKind::Negate:
            return -eval_node(*n.args[0], values);
        case NodeKind::Add:
            return check_finite(eval_node(*n.args[0], values) + eval_node(*n.args[1], values), "addition");
        case NodeKind::Sub:
            return check_finite(eval_node(*n.args[0], values) - eval_node(*n.args[1], values), "subtraction");
        case NodeKind::Mul:
            return check_finite(eval_node(*n.args[0], values) * eval_node(*n.args[1], values), "multiplication");
        case NodeKind::Div: {
            double num = eval_node(*n.args[0], values);
            double den = eval_node(*n.args[1], values);
            if (den == 0.0) throw DomainError("division by zero");
            return check_finite(num / den, "division");
        }
        case NodeKind::Pow:
            return eval_pow(eval_node(*n.args[0], values), eval_node(*n.args[1], values));
        case NodeKind::Call: {
            double a = eval_node(*n.args[0], values);
            switch (n.func) {
                case FuncId::Exp: return check_finite(std::exp(a), "exp");
                case FuncId::Log:
                    if (a <= 0.0) throw DomainError("log of a non-positive value");
                    return check_finite(std::log(a), "log");
                case FuncId::Sin: return std::sin(a);
                case FuncId::Cos: return std::cos(a);
                case FuncId::Abs: return std::fabs(a);
                case FuncId::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of a negative value");
                    return std::sqrt(a);
                case FuncId::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
                case FuncId::Min: return std::min(a, eval_node(*n.args[1], values));
                case FuncId::Max: return std::max(a, eval_node(*n.args[1], values));
            }
            throw Error("unreachable function id");
        }
    }
    throw Error("unreachable node kind");
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }
    return std::string(buf, ptr);
}

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;  // atoms
    }
}

const char* func_name(FuncId f) {
    for (const auto& info : kFunctions)
        if (info.id == f) return info.name.data();
    return "?";
}

void render_node(const Node& n, std::string& out);

void render_child(const Node& child, bool need_parens, std::string& out) {
    if (need_parens) {
        out += '(';
        render_node(child, out);
        out += ')';
    } else {
        render_node(child, out);
    }
}

void render_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number:
            out += render_number(n.number);
            return;
        case NodeKind::Variable:
            out += n.name;
            return;
        case NodeKind::Negate: {
            // The operand of unary minus is a unary production: only atoms
            // and further negations stay bare.
            const Node& c = *n.args[0];
            out += '-';
            render_child(c, precedence(c) < 5 && c.kind != NodeKind::Negate, out);
            return;
        }
        case NodeKind::Add:
        case NodeKind::Sub: {
            const Node& l = *n.args[0];
            const Node& r = *n.args[1];
            render_child(l, false, out);
            out += (n.kind == NodeKind::Add) ? " + " : " - ";
            // Right operand must reparse as a single term.
            render_child(r, precedence(r) == 1, out);
            return;
        }
        case NodeKind::Mul:
        case NodeKind::Div: {
            const Node& l = *n.args[0];
            const Node& r = *n.args[1];
            render_child(l, precedence(l) < 2, out);
            out += (n.kind == NodeKind::Mul) ? "*" : "/";
            render_child(r, precedence(r) <= 2, out);
            return;
        }
        case NodeKind::Pow: {
            const Node& l = *n.args[0];
            const Node& r = *n.args[1];
            render_child(l, precedence(l) < 5, out);
            out += '^';
            // Exponent position accepts a unary or another power.
            render_child(r, precedence(r) < 3, out);
            return;
        }
        case NodeKind::Call: {
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                render_node(*n.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

void sexpr_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number: out += render_number(n.number); return;
        case NodeKind::Variable: out += n.name; return;
        case NodeKind::Negate:
            out += "(neg ";
            sexpr_node(*n.args[0], out);
            out += ')';
            return;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow: {
            const char* op = n.kind == NodeKind::Add   ? "+"
                             : n.kind == NodeKind::Sub ? "-"
                             : n.kind == NodeKind::Mul ? "*"
                             : n.kind == NodeKind::Div ? "/"
                                                       : "^";
            out += '(';
            out += op;
            for (const auto& a : n.args) {
                out += ' ';
                sexpr_node(*a, out);
            }
            out += ')';
            return;
        }
        case NodeKind::Call:
            out += '(';
            out += func_name(n.func);
            for (const auto& a : n.args) {
                out += ' ';
                sexpr_node(*a, out);
            }
            out += ')';
            return;
    }
}

bool nodes_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Number:
            return std::bit_cast<std::uint64_t>(a.number) == std::bit_cast<std::uint64_t>(b.number);
        case NodeKind::Variable:
            return a.var == b.var && a.name == b.name;
        case NodeKind::Call:
            if (a.func != b.func) return false;
            break;
        default:
            break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!nodes_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Differentiation

struct Deriv {
    int wrt;

    NodePtr operator()(const NodePtr& n) const {
        using namespace ast;
        switch (n->kind) {
            case NodeKind::Number:
                return num(0.0);
            case NodeKind::Variable:
                return num(n->var == wrt ? 1.0 : 0.0);
            case NodeKind::Negate:
                return neg((*this)(n->args[0]));
            case NodeKind::Add:
                return add((*this)(n->args[0]), (*this)(n->args[1]));
            case NodeKind::Sub:
                return sub((*this)(n->args[0]), (*this)(n->args[1]));
            case NodeKind::Mul:
                return add(mul((*this)(n->args[0]), n->args[1]),
                           mul(n->args[0], (*this)(n->args[1])));
            case NodeKind::Div:
                return div(sub(mul((*this)(n->args[0]), n->args[1]),
                               mul(n->args[0], (*this)(n->args[1]))),
                           pow(n->args[1], num(2.0)));
            case NodeKind::Pow: {
                const NodePtr& base = n->args[0];
                const NodePtr& expo = n->args[1];
                if (expo->kind == NodeKind::Number) {
                    double c = expo->number;
                    return mul(mul(num(c), pow(base, num(c - 1.0))), (*this)(base));
                }
                // General case: u^w * (w' log u + w u'/u).
                return mul(pow(base, expo),
                           add(mul((*this)(expo), call(FuncId::Log, {base})),
                               mul(expo, div((*this)(base), base))));
            }
            case NodeKind::Call: {
                const NodePtr& u = n->args[0];
                NodePtr du = nullptr;
                switch (n->func) {
                    case FuncId::Exp:
                        du = mul(call(FuncId::Exp, {u}), (*this)(u));
                        break;
                    case FuncId::Log:
                        du = div((*this)(u), u);
                        break;
                    case FuncId::Sin:
                        du = mul(call(FuncId::Cos, {u}), (*this)(u));
                        break;
                    case FuncId::Cos:
                        du = neg(mul(call(FuncId::Sin, {u}), (*this)(u)));
                        break;
                    case FuncId::Abs:
                        // Convention: sign(0) = 0, so abs'(0) evaluates to 0.
                        du = mul(call(FuncId::Sign, {u}), (*this)(u));
                        break;
                    case FuncId::Sqrt:
                        du = div((*this)(u), mul(num(2.0), call(FuncId::Sqrt, {u})));
                        break;
                    case FuncId::Sign:
                        du = num(0.0);  // piecewise constant
                        break;
                    case FuncId::Min:
                    case FuncId::Max:
                        throw NonDifferentiableError(
                            std::string("cannot differentiate '") + func_name(n->func) + "'");
                }
                return du;
            }
        }
        throw Error("unreachable node kind");
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// ast factories

namespace ast {

NodePtr num(double v) {
    if (v < 0.0 || (v == 0.0 && std::signbit(v))) return neg(num(-v));
    Node n;
    n.kind = NodeKind::Number;
    n.number = v;
    return make_node(std::move(n));
}

NodePtr var(int index, std::string name) {
    Node n;
    n.kind = NodeKind::Variable;
    n.var = index;
    n.name = std::move(name);
    return make_node(std::move(n));
}

static bool is_num(const NodePtr& n, double v) {
    return n->kind == NodeKind::Number && n->number == v;
}

NodePtr neg(NodePtr a) {
    if (a->kind == NodeKind::Negate) return a->args[0];
    if (is_num(a, 0.0)) return a;
    Node n;
    n.kind = NodeKind::Negate;
    n.args = {std::move(a)};
    return make_node(std::move(n));
}

NodePtr add(NodePtr a, NodePtr b) {
    if (is_num(a, 0.0)) return b;
    if (is_num(b, 0.0)) return a;
    if (a->kind == NodeKind::Number && b->kind == NodeKind::Number)
        return num(a->number + b->number);
    Node n;
    n.kind = NodeKind::Add;
    n.args = {std::move(a), std::move(b)};
    return make_node(std::move(n));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_num(b, 0.0)) return a;
    if (is_num(a, 0.0)) return neg(std::move(b));
    if (a->kind == NodeKind::Number && b->kind == NodeKind::Number)
        return num(a->number - b->number);
    Node n;
    n.kind = NodeKind::Sub;
    n.args = {std::move(a), std::move(b)};
    return make_node(std::move(n));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
    if (is_num(a, 1.0)) return b;
    if (is_num(b, 1.0)) return a;
    if (a->kind == NodeKind::Number && b->kind == NodeKind::Number)
        return num(a->number * b->number);
    Node n;
    n.kind = NodeKind::Mul;
    n.args = {std::move(a), std::move(b)};
    return make_node(std::move(n));
}

NodePtr div(NodePtr a, NodePtr b) {
    if (is_num(b, 1.0)) return a;
    Node n;
    n.kind = NodeKind::Div;
    n.args = {std::move(a), std::move(b)};
    return make_node(std::move(n));
}

NodePtr pow(NodePtr a, NodePtr b) {
    Node n;
    n.kind = NodeKind::Pow;
    n.args = {std::move(a), std::move(b)};
    return make_node(std::move(n));
}

NodePtr call(FuncId f, std::vector<NodePtr> args) {
    Node n;
    n.kind = NodeKind::Call;
    n.func = f;
    n.args = std::move(args);
    return make_node(std::move(n));
}

}  // namespace ast

// ---------------------------------------------------------------------------
// Expression

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
    if (variables.empty()) throw ParseError("variable list must not be empty", 0);
    for (std::size_t i = 0; i < variables.size(); ++i)
        for (std::size_t j = i + 1; j < variables.size(); ++j)
            if (variables[i] == variables[j])
                throw ParseError("duplicate variable '" + variables[i] + "'", 0);
    for (const auto& v : variables)
        if (find_function(v))
            throw ParseError("variable '" + v + "' shadows a reserved function name", 0);
    Parser p(source, variables);
    NodePtr root = p.parse();  // must finish before variables is moved out
    return Expression(std::move(root), std::move(variables));
}

double Expression::evaluate(std::span<const double> values) const {
    if (!root_) throw Error("empty expression");
    if (values.size() != vars_.size())
        throw DomainError("expected " + std::to_string(vars_.size()) + " variable value(s), got " +
                          std::to_string(values.size()));
    return eval_node(*root_, values);
}

double Expression::evaluate1(double x) const {
    return evaluate(std::span<const double>(&x, 1));
}

Expression Expression::differentiate(std::string_view wrt) const {
    auto it = std::find(vars_.begin(), vars_.end(), std::string(wrt));
    if (it == vars_.end())
        throw Error("cannot differentiate with respect to undeclared variable '" +
                    std::string(wrt) + "'");
    Deriv d{static_cast<int>(it - vars_.begin())};
    return Expression(d(root_), vars_);
}

std::string Expression::render() const {
    std::string out;
    if (root_) render_node(*root_, out);
    return out;
}

std::string Expression::sexpr() const {
    std::string out;
    if (root_) sexpr_node(*root_, out);
    return out;
}

bool Expression::structurally_equal(const Expression& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return nodes_equal(*root_, *other.root_);
}

}  // namespace hhinvex
