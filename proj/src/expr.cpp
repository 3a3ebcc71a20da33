#include "mmreach/expr.hpp"

#include "mmreach/errors.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>

namespace mmreach {

using expr_detail::Instr;
using expr_detail::Node;
using expr_detail::Op;
using NodePtr = std::shared_ptr<const Node>;

ParseError::ParseError(const std::string& message, std::string source, int column, std::string expected)
    : Error([&] {
          std::string text = message + " at column " + std::to_string(column) + "\n  " + source + "\n  " +
                             std::string(static_cast<std::size_t>(std::max(column - 1, 0)), ' ') + "^";
          if (!expected.empty())
              text += "\n  expected: " + expected;
          return text;
      }()),
      source_(std::move(source)), column_(column), expected_(std::move(expected))
{
}

namespace {

constexpr int kMaxDepth = 256;

struct FuncInfo {
    std::string_view name;
    Op op;
    int min_args;
    int max_args; // -1 = unbounded
};

constexpr std::array kFunctions{
    FuncInfo{"sin", Op::Sin, 1, 1},  FuncInfo{"cos", Op::Cos, 1, 1},   FuncInfo{"tan", Op::Tan, 1, 1},
    FuncInfo{"exp", Op::Exp, 1, 1},  FuncInfo{"abs", Op::Abs, 1, 1},   FuncInfo{"sqrt", Op::Sqrt, 1, 1},
    FuncInfo{"min", Op::Min, 2, -1}, FuncInfo{"max", Op::Max, 2, -1},
};

const FuncInfo* find_function(std::string_view name)
{
    for (const auto& f : kFunctions)
        if (f.name == name)
            return &f;
    return nullptr;
}

std::string_view op_name(Op op)
{
    for (const auto& f : kFunctions)
        if (f.op == op)
            return f.name;
    return "?";
}

NodePtr make(Op op, std::vector<NodePtr> args = {})
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    for (const auto& a : n->args)
        n->height = std::max(n->height, a->height + 1);
    return n;
}

NodePtr make_const(double v)
{
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
}

class Parser {
public:
    Parser(std::string_view src, int n, int m, bool hats) : src_(src), n_(n), m_(m), hats_(hats) {}

    NodePtr run()
    {
        skip_ws();
        if (pos_ >= src_.size())
            fail("empty expression", "expression");
        NodePtr e = expression();
        skip_ws();
        if (pos_ < src_.size())
            fail("unexpected '" + std::string(1, src_[pos_]) + "'", "operator, ')' or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, const std::string& expected, std::size_t at)
    {
        throw ParseError(msg, std::string(src_), static_cast<int>(at) + 1, expected);
    }
    [[noreturn]] void fail(const std::string& msg, const std::string& expected) { fail(msg, expected, pos_); }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const std::string& expected)
    {
        if (!accept(c)) {
            if (pos_ >= src_.size())
                fail("unexpected end of input", expected);
            fail("unexpected '" + std::string(1, src_[pos_]) + "'", expected);
        }
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser)
        {
            if (++p.depth_ > kMaxDepth)
                p.fail("expression nesting exceeds " + std::to_string(kMaxDepth), "shallower expression");
        }
        ~DepthGuard() { --p.depth_; }
    };

    NodePtr grow(NodePtr n)
    {
        if (n->height > kMaxDepth)
            fail("expression tree depth exceeds " + std::to_string(kMaxDepth), "shallower expression");
        return n;
    }

    NodePtr expression()
    {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = grow(make(Op::Add, {lhs, term()}));
            else if (accept('-'))
                lhs = grow(make(Op::Sub, {lhs, term()}));
            else
                return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = grow(make(Op::Mul, {lhs, unary()}));
            else if (accept('/'))
                lhs = grow(make(Op::Div, {lhs, unary()}));
            else
                return lhs;
        }
    }

    NodePtr unary()
    {
        DepthGuard guard(*this);
        if (accept('-'))
            return grow(make(Op::Neg, {unary()}));
        return power();
    }

    NodePtr power()
    {
        NodePtr base = atom();
        if (accept('^'))
            return grow(make(Op::Pow, {base, unary()}));
        return base;
    }

    NodePtr atom()
    {
        skip_ws();
        static const std::string kAtom = "number, variable, function call or '('";
        if (pos_ >= src_.size())
            fail("unexpected end of input", kAtom);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        if (accept('(')) {
            NodePtr e = expression();
            expect(')', "')'");
            return e;
        }
        fail("unexpected '" + std::string(1, c) + "'", kAtom);
    }

    NodePtr number()
    {
        const std::size_t start = pos_;
        std::string text(src_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        const auto consumed = static_cast<std::size_t>(end - text.c_str());
        if (consumed == 0)
            fail("malformed number", "number", start);
        if (!std::isfinite(v))
            fail("numeric literal out of range", "finite number", start);
        pos_ += consumed;
        return make_const(v);
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        if (const FuncInfo* f = find_function(name)) {
            expect('(', "'(' after function name");
            std::vector<NodePtr> args{expression()};
            while (accept(','))
                args.push_back(expression());
            expect(')', "',' or ')'");
            const int count = static_cast<int>(args.size());
            if (count < f->min_args || (f->max_args >= 0 && count > f->max_args))
                fail(std::string(name) + " takes " +
                         (f->max_args < 0 ? "at least " + std::to_string(f->min_args)
                                          : std::to_string(f->min_args)) +
                         " argument(s), got " + std::to_string(count),
                     "matching argument count", start);
            return grow(make(f->op, std::move(args)));
        }
        if (name == "pi")
            return make_const(std::numbers::pi);

        if (auto var = variable(name, start))
            return var;
        fail("unknown identifier '" + std::string(name) + "'", expected_identifiers(), start);
    }

    std::string expected_identifiers() const
    {
        std::string s = "x1..x" + std::to_string(n_);
        s += m_ > 0 ? ", w1..w" + std::to_string(m_) : std::string{};
        if (hats_)
            s += ", xh1..xh" + std::to_string(n_) + (m_ > 0 ? ", wh1..wh" + std::to_string(m_) : std::string{});
        s += ", pi, sin, cos, tan, exp, abs, sqrt, min, max";
        return s;
    }

    NodePtr variable(std::string_view name, std::size_t start)
    {
        struct Prefix {
            std::string_view text;
            VarKind kind;
            bool hat;
        };
        static constexpr std::array kPrefixes{Prefix{"xh", VarKind::StateHat, true},
                                              Prefix{"wh", VarKind::DisturbanceHat, true},
                                              Prefix{"x", VarKind::State, false},
                                              Prefix{"w", VarKind::Disturbance, false}};
        for (const auto& p : kPrefixes) {
            if (name.size() <= p.text.size() || name.substr(0, p.text.size()) != p.text)
                continue;
            const std::string_view digits = name.substr(p.text.size());
            bool all_digits = digits.front() != '0';
            for (char d : digits)
                all_digits = all_digits && std::isdigit(static_cast<unsigned char>(d));
            if (!all_digits)
                continue;
            if (p.hat && !hats_)
                fail("hatted variable '" + std::string(name) + "' is only allowed in decomposition expressions",
                     expected_identifiers(), start);
            const long idx = std::strtol(std::string(digits).c_str(), nullptr, 10);
            const bool state = p.kind == VarKind::State || p.kind == VarKind::StateHat;
            const int limit = state ? n_ : m_;
            if (idx < 1 || idx > limit)
                fail("variable '" + std::string(name) + "' index out of range (declared " +
                         (state ? "n = " : "m = ") + std::to_string(limit) + ")",
                     expected_identifiers(), start);
            auto node = std::make_shared<Node>();
            node->op = Op::Var;
            node->kind = p.kind;
            node->index = static_cast<int>(idx - 1);
            return node;
        }
        return nullptr;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int n_;
    int m_;
    bool hats_;
    int depth_ = 0;
};

void compile(const NodePtr& node, std::vector<Instr>& out, std::size_t depth, std::size_t& max_stack)
{
    std::size_t slot = depth;
    for (const auto& a : node->args)
        compile(a, out, slot++, max_stack);
    max_stack = std::max(max_stack, depth + 1);
    out.push_back(Instr{node->op, node->kind, static_cast<std::uint16_t>(node->args.size()), node->index,
                        node->value});
}

double read_var(const Bindings& b, VarKind kind, int index)
{
    switch (kind) {
    case VarKind::State: return b.x[static_cast<std::size_t>(index)];
    case VarKind::Disturbance: return b.w[static_cast<std::size_t>(index)];
    case VarKind::StateHat: return b.xh[static_cast<std::size_t>(index)];
    case VarKind::DisturbanceHat: return b.wh[static_cast<std::size_t>(index)];
    }
    return 0.0;
}

inline double apply_unary(Op op, double a)
{
    switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan: return std::tan(a);
    case Op::Exp: return std::exp(a);
    case Op::Abs: return std::abs(a);
    case Op::Sqrt: return std::sqrt(a);
    default: return 0.0;
    }
}

inline double apply_binary(Op op, double a, double b)
{
    switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return std::pow(a, b);
    default: return 0.0;
    }
}

// Precedence used by the printer: larger binds tighter.
int precedence(const Node& n)
{
    switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
    default: return 5;
    }
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string var_name(const Node& n)
{
    static constexpr std::array<std::string_view, 4> kNames{"x", "w", "xh", "wh"};
    return std::string(kNames[static_cast<std::size_t>(n.kind)]) + std::to_string(n.index + 1);
}

std::string print(const Node& n);

std::string print_child(const Node& child, int min_prec)
{
    std::string s = print(child);
    return precedence(child) < min_prec ? "(" + s + ")" : s;
}

std::string print(const Node& n)
{
    switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: return var_name(n);
    case Op::Neg: return "-" + print_child(*n.args[0], 3);
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
        const int p = precedence(n);
        static constexpr std::array<std::string_view, 4> kSym{" + ", " - ", " * ", " / "};
        const auto sym = kSym[static_cast<std::size_t>(n.op) - static_cast<std::size_t>(Op::Add)];
        return print_child(*n.args[0], p) + std::string(sym) + print_child(*n.args[1], p + 1);
    }
    case Op::Pow: return print_child(*n.args[0], 5) + "^" + print_child(*n.args[1], 3);
    default: {
        std::string s(op_name(n.op));
        s += "(";
        for (std::size_t i = 0; i < n.args.size(); ++i)
            s += (i ? ", " : "") + print(*n.args[i]);
        return s + ")";
    }
    }
}

// Recomputes `n` and returns the first (innermost) non-finite subexpression.
const Node* find_nonfinite(const Node& n, const Bindings& b, double& value)
{
    std::vector<double> vals;
    for (const auto& a : n.args) {
        double v = 0.0;
        if (const Node* bad = find_nonfinite(*a, b, v))
            return bad;
        vals.push_back(v);
    }
    switch (n.op) {
    case Op::Const: value = n.value; break;
    case Op::Var: value = read_var(b, n.kind, n.index); break;
    case Op::Min:
    case Op::Max:
        value = vals[0];
        for (std::size_t i = 1; i < vals.size(); ++i)
            value = n.op == Op::Min ? std::min(value, vals[i]) : std::max(value, vals[i]);
        break;
    default: value = vals.size() == 1 ? apply_unary(n.op, vals[0]) : apply_binary(n.op, vals[0], vals[1]);
    }
    return std::isfinite(value) ? nullptr : &n;
}

} // namespace

Expr::Expr(NodePtr root, int n, int m) : root_(std::move(root)), n_(n), m_(m)
{
    compile(root_, program_, 0, max_stack_);
}

Expr Expr::parse(std::string_view src, int n, int m)
{
    if (n < 0 || m < 0)
        throw DimensionError("negative dimensions for expression");
    return Expr(Parser(src, n, m, false).run(), n, m);
}

Expr Expr::parse_decomposition(std::string_view src, int n, int m)
{
    if (n < 0 || m < 0)
        throw DimensionError("negative dimensions for expression");
    return Expr(Parser(src, n, m, true).run(), n, m);
}

Expr Expr::constant(double value) { return Expr(make_const(value), 0, 0); }

Expr Expr::negated() const { return Expr(make(Op::Neg, {root_}), n_, m_); }

std::string Expr::str() const { return print(*root_); }

double Expr::run(const Bindings& b, bool& finite) const
{
    constexpr std::size_t kInline = 64;
    std::array<double, kInline> inline_stack;
    std::vector<double> heap;
    double* stack = inline_stack.data();
    if (max_stack_ > kInline) {
        heap.resize(max_stack_);
        stack = heap.data();
    }
    std::size_t top = 0;
    bool ok = true;
    for (const Instr& in : program_) {
        double v;
        switch (in.op) {
        case Op::Const: v = in.value; break;
        case Op::Var: v = read_var(b, in.kind, in.index); break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow:
            top -= 2;
            v = apply_binary(in.op, stack[top], stack[top + 1]);
            break;
        case Op::Min:
        case Op::Max: {
            top -= in.argc;
            v = stack[top];
            for (std::size_t i = 1; i < in.argc; ++i)
                v = in.op == Op::Min ? std::min(v, stack[top + i]) : std::max(v, stack[top + i]);
            break;
        }
        default:
            top -= 1;
            v = apply_unary(in.op, stack[top]);
        }
        ok = ok && std::isfinite(v);
        stack[top++] = v;
    }
    finite = ok;
    return stack[0];
}

double Expr::eval(const Bindings& b) const
{
    if (b.x.size() < static_cast<std::size_t>(n_) || b.w.size() < static_cast<std::size_t>(m_))
        throw DimensionError("expression '" + str() + "' needs " + std::to_string(n_) + " states and " +
                             std::to_string(m_) + " disturbances, got " + std::to_string(b.x.size()) + " and " +
                             std::to_string(b.w.size()));
    bool finite = true;
    const double v = run(b, finite);
    if (!finite) {
        double bad_value = 0.0;
        const Node* bad = find_nonfinite(*root_, b, bad_value);
        const std::string where = bad ? print(*bad) : str();
        throw NumericError("non-finite value (" + format_number(bad_value) + ") in subexpression '" + where +
                           "' of '" + str() + "'");
    }
    return v;
}

double partial(const Expr& e, VarKind kind, int j, std::span<const double> x, std::span<const double> w, double h)
{
    if (!(h > 0.0))
        throw NumericError("finite-difference step must be positive");
    if (kind != VarKind::State && kind != VarKind::Disturbance)
        throw DimensionError("partial: field expressions only have state and disturbance variables");
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> wp(w.begin(), w.end());
    std::vector<double>& target = kind == VarKind::State ? xp : wp;
    if (j < 0 || static_cast<std::size_t>(j) >= target.size())
        throw DimensionError("partial: variable index out of range");
    const double base = target[static_cast<std::size_t>(j)];
    const double step = h * std::max(1.0, std::abs(base));
    target[static_cast<std::size_t>(j)] = base + step;
    const double up = e.eval(xp, wp);
    target[static_cast<std::size_t>(j)] = base - step;
    const double down = e.eval(xp, wp);
    return (up - down) / (2.0 * step);
}

} // namespace mmreach
