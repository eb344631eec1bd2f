#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace impvar {

/// Compiled closed-form expression in the variables `t` and `u`.
///
/// Grammar (precedence `^` > unary minus > `* /` > `+ -`, `^` right-assoc):
///
///     expr    := term { ("+" | "-") term }
///     term    := unary { ("*" | "/") unary }
///     unary   := ("-" | "+") unary | power
///     power   := primary [ "^" unary ]
///     primary := number | "t" | "u" | "pi" | func "(" expr ")" | "(" expr ")"
///     func    := abs | sign | sin | cos | exp | ln | sqrt
///
/// Evaluation is a postfix stack machine. At `u == 0` exactly the tree is
/// evaluated with leading-order tracking so that `abs(u)^(-1/2)*u` gives 0
/// rather than NaN. Domain violations raise EvalError naming the node.
class Expr {
public:
    enum class Op : std::uint8_t {
        Const, VarT, VarU, Neg, Abs, Sign, Sin, Cos, Exp, Ln, Sqrt,
        Add, Sub, Mul, Div, Pow
    };

    struct Node {
        Op op;
        double value = 0.0;  // Const only
        int lhs = -1;
        int rhs = -1;
        std::size_t offset = 0;
    };

    /// The constant 0.
    Expr();

    static Expr parse(std::string_view text);
    static Expr constant(double c);

    double operator()(double t, double u) const;
    double eval(double t, double u) const { return (*this)(t, u); }

    /// Fully parenthesised canonical text; parse(print()) evaluates identically.
    std::string print() const;
    const std::string& source() const;

    bool depends_on_u() const;
    bool depends_on_t() const;
    /// True when the expression is a literal zero.
    bool is_zero() const;

    const std::vector<Node>& nodes() const;
    int root() const;

private:
    struct Impl;
    explicit Expr(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

Expr parse(std::string_view text);
std::string print(const Expr& e);
double eval(const Expr& e, double t, double u);

/// \int_0^u e(t, s) ds by adaptive Gauss-Kronrod, absolute tolerance `tol`.
double antiderivative_in_u(const Expr& e, double t, double u, double tol = 1e-12);

}  // namespace impvar
