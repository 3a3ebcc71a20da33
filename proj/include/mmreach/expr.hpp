#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmreach {

/// Which argument block a variable reads from. The hatted kinds only appear
/// in closed-form decomposition expressions d(x, w, xh, wh).
enum class VarKind : std::uint8_t { State, Disturbance, StateHat, DisturbanceHat };

/// Values bound to the four variable blocks during evaluation. Unused blocks
/// may be empty.
struct Bindings {
    std::span<const double> x;
    std::span<const double> w;
    std::span<const double> xh{};
    std::span<const double> wh{};
};

namespace expr_detail {

enum class Op : std::uint8_t {
    Const,
    Var,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Abs,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
};

struct Node {
    Op op;
    double value = 0.0;
    VarKind kind = VarKind::State;
    int index = 0; // zero-based
    int height = 1;
    std::vector<std::shared_ptr<const Node>> args;
};

struct Instr {
    Op op;
    VarKind kind;
    std::uint16_t argc;
    int index;
    double value;
};

} // namespace expr_detail

/// Immutable arithmetic expression over x1..xn, w1..wm (and, for
/// decomposition expressions, xh1..xhn, wh1..whm).
///
/// Grammar, loosest to tightest binding:
///
///     expr   := term (('+' | '-') term)*
///     term   := unary (('*' | '/') unary)*
///     unary  := '-' unary | power
///     power  := atom ('^' unary)?
///     atom   := number | 'pi' | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
///
/// so `^` binds tighter than unary minus and associates to the right.
class Expr {
public:
    /// Parses a field expression over x1..xn and w1..wm.
    static Expr parse(std::string_view src, int n, int m);
    /// Parses a decomposition expression that may also use xh1..xhn, wh1..whm.
    static Expr parse_decomposition(std::string_view src, int n, int m);
    static Expr constant(double value);

    int state_dim() const noexcept { return n_; }
    int disturbance_dim() const noexcept { return m_; }

    /// Evaluates with full non-finite checking; throws NumericError naming the
    /// first non-finite subexpression.
    double eval(const Bindings& b) const;
    double eval(std::span<const double> x, std::span<const double> w) const { return eval(Bindings{x, w}); }

    /// Canonical text with minimal parentheses; re-parses to the same tree.
    std::string str() const;

    Expr negated() const;

    std::size_t node_count() const noexcept { return program_.size(); }

private:
    Expr(std::shared_ptr<const expr_detail::Node> root, int n, int m);

    double run(const Bindings& b, bool& finite) const;

    std::shared_ptr<const expr_detail::Node> root_;
    std::vector<expr_detail::Instr> program_;
    std::size_t max_stack_ = 0;
    int n_ = 0;
    int m_ = 0;
};

/// Default finite-difference step; scaled by max(1, |coordinate|).
inline constexpr double kDefaultFdStep = 1e-6;

inline Expr parse(std::string_view src, int n, int m) { return Expr::parse(src, n, m); }
inline double eval(const Expr& e, std::span<const double> x, std::span<const double> w) { return e.eval(x, w); }

/// Central finite difference of `e` with respect to variable j of the given
/// block. Throws NumericError when either probe is non-finite.
double partial(const Expr& e, VarKind kind, int j, std::span<const double> x, std::span<const double> w,
               double h = kDefaultFdStep);

} // namespace mmreach
