#include "impvar/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "impvar/errors.hpp"
#include "impvar/quadrature.hpp"

namespace impvar {

using Op = Expr::Op;
using Node = Expr::Node;

struct Expr::Impl {
    std::string source;
    std::vector<Node> nodes;
    int root = 0;
    std::vector<int> program;  // post-order node indices
    int max_depth = 0;
    bool uses_u = false;
    bool uses_t = false;
};

namespace {

const char* func_name(Op op) {
    switch (op) {
        case Op::Abs: return "abs";
        case Op::Sign: return "sign";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Ln: return "ln";
        case Op::Sqrt: return "sqrt";
        default: return "";
    }
}

class Parser {
public:
    Parser(std::string_view src, std::vector<Node>& nodes) : src_(src), nodes_(nodes) {}

    int parse_all() {
        const int r = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Op op, std::size_t off, int lhs = -1, int rhs = -1, double value = 0.0) {
        nodes_.push_back(Node{op, value, lhs, rhs, off});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int expr() {
        int lhs = term();
        while (true) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('+')) lhs = add(Op::Add, off, lhs, term());
            else if (accept('-')) lhs = add(Op::Sub, off, lhs, term());
            else return lhs;
        }
    }

    int term() {
        int lhs = unary();
        while (true) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('*')) lhs = add(Op::Mul, off, lhs, unary());
            else if (accept('/')) lhs = add(Op::Div, off, lhs, unary());
            else return lhs;
        }
    }

    int unary() {
        skip_ws();
        const std::size_t off = pos_;
        if (accept('-')) return add(Op::Neg, off, unary());
        if (accept('+')) return unary();
        return power();
    }

    int power() {
        const int base = primary();
        skip_ws();
        const std::size_t off = pos_;
        if (accept('^')) return add(Op::Pow, off, base, unary());
        return base;
    }

    int primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const std::size_t off = pos_;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (accept('(')) {
            const int inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            const std::string name(src_.substr(pos_, end - pos_));
            pos_ = end;
            if (name == "t") return add(Op::VarT, off);
            if (name == "u") return add(Op::VarU, off);
            if (name == "pi") return add(Op::Const, off, -1, -1, std::numbers::pi);
            static const std::array<std::pair<const char*, Op>, 7> funcs = {{
                {"abs", Op::Abs}, {"sign", Op::Sign}, {"sin", Op::Sin}, {"cos", Op::Cos},
                {"exp", Op::Exp}, {"ln", Op::Ln}, {"sqrt", Op::Sqrt}}};
            for (const auto& [fname, op] : funcs) {
                if (name == fname) {
                    if (!accept('(')) fail("expected '(' after " + name);
                    const int arg = expr();
                    if (!accept(')')) fail("expected ')'");
                    return add(op, off, arg);
                }
            }
            pos_ = off;
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    int number() {
        const std::size_t off = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        };
        digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            digits();
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t k = end + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                end = k;
                digits();
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(src_.data() + off, src_.data() + end, v);
        if (res.ec != std::errc() || res.ptr != src_.data() + end) fail("malformed number");
        pos_ = end;
        return add(Op::Const, off, -1, -1, v);
    }

    std::string_view src_;
    std::vector<Node>& nodes_;
    std::size_t pos_ = 0;
};

void post_order(const std::vector<Node>& nodes, int i, std::vector<int>& out, int depth, int& max_depth) {
    const Node& n = nodes[i];
    if (n.lhs >= 0) post_order(nodes, n.lhs, out, depth, max_depth);
    if (n.rhs >= 0) post_order(nodes, n.rhs, out, depth + 1, max_depth);
    max_depth = std::max(max_depth, depth + 1);
    out.push_back(i);
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void print_node(const std::vector<Node>& nodes, int i, std::string& out) {
    const Node& n = nodes[i];
    switch (n.op) {
        case Op::Const:
            if (n.value < 0) out += "(" + fmt_double(n.value) + ")";
            else out += fmt_double(n.value);
            return;
        case Op::VarT: out += "t"; return;
        case Op::VarU: out += "u"; return;
        case Op::Neg:
            out += "(-";
            print_node(nodes, n.lhs, out);
            out += ")";
            return;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: {
            static constexpr const char* sym[] = {" + ", " - ", " * ", " / ", " ^ "};
            out += "(";
            print_node(nodes, n.lhs, out);
            out += sym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
            print_node(nodes, n.rhs, out);
            out += ")";
            return;
        }
        default:
            out += func_name(n.op);
            out += "(";
            print_node(nodes, n.lhs, out);
            out += ")";
            return;
    }
}

std::string node_text(const std::vector<Node>& nodes, int i) {
    std::string s;
    print_node(nodes, i, s);
    return s;
}

[[noreturn]] void domain_error(const std::vector<Node>& nodes, int i, double t, double u,
                               const std::string& why) {
    std::ostringstream os;
    os.precision(17);
    os << "domain error in " << node_text(nodes, i) << " (byte " << nodes[i].offset << ") at t=" << t
       << ", u=" << u << ": " << why;
    throw EvalError(os.str());
}

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

// Tree evaluation with explicit domain checks; used to report failures.
double checked(const std::vector<Node>& nodes, int i, double t, double u) {
    const Node& n = nodes[i];
    auto err = [&](const std::string& why) { domain_error(nodes, i, t, u, why); };
    double r = 0.0;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::VarT: return t;
        case Op::VarU: return u;
        default: break;
    }
    const double a = checked(nodes, n.lhs, t, u);
    switch (n.op) {
        case Op::Neg: r = -a; break;
        case Op::Abs: r = std::abs(a); break;
        case Op::Sign: r = (a > 0) - (a < 0); break;
        case Op::Sin: r = std::sin(a); break;
        case Op::Cos: r = std::cos(a); break;
        case Op::Exp: r = std::exp(a); break;
        case Op::Ln:
            if (!(a > 0)) err("logarithm of non-positive value " + fmt_double(a));
            r = std::log(a);
            break;
        case Op::Sqrt:
            if (a < 0) err("square root of negative value " + fmt_double(a));
            r = std::sqrt(a);
            break;
        default: {
            const double b = checked(nodes, n.rhs, t, u);
            switch (n.op) {
                case Op::Add: r = a + b; break;
                case Op::Sub: r = a - b; break;
                case Op::Mul: r = a * b; break;
                case Op::Div:
                    if (b == 0) err("division by zero");
                    r = a / b;
                    break;
                case Op::Pow:
                    if (a < 0 && !is_integer(b))
                        err("negative base " + fmt_double(a) + " with non-integer exponent");
                    if (a == 0 && b < 0) err("zero base with negative exponent");
                    r = std::pow(a, b);
                    break;
                default: break;
            }
        }
    }
    if (!std::isfinite(r)) err("non-finite result");
    return r;
}

// Leading behaviour coef*|u|^order as u -> 0; order = +inf marks an exact zero.
struct Lead {
    double coef;
    double order;
};

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOrderTol = 1e-12;

Lead norm(Lead l) {
    if (l.coef == 0.0) return {0.0, kInf};
    return l;
}

bool zero_order(double o) { return std::abs(o) <= kOrderTol; }

Lead lead(const std::vector<Node>& nodes, int i, double t) {
    const Node& n = nodes[i];
    auto err = [&](const std::string& why) { domain_error(nodes, i, t, 0.0, why); };
    switch (n.op) {
        case Op::Const: return norm({n.value, 0.0});
        case Op::VarT: return norm({t, 0.0});
        case Op::VarU: return {1.0, 1.0};
        default: break;
    }
    const Lead a = lead(nodes, n.lhs, t);
    const bool vanishing = a.order > kOrderTol;
    const bool blowup = a.order < -kOrderTol;
    switch (n.op) {
        case Op::Neg: return norm({-a.coef, a.order});
        case Op::Abs: return norm({std::abs(a.coef), a.order});
        case Op::Sign:
            if (blowup) err("sign of unbounded value");
            if (vanishing) return {0.0, kInf};
            return norm({static_cast<double>((a.coef > 0) - (a.coef < 0)), 0.0});
        case Op::Sin:
            if (blowup) err("sin of unbounded value");
            if (vanishing) return a;
            return norm({std::sin(a.coef), 0.0});
        case Op::Cos:
            if (blowup) err("cos of unbounded value");
            if (vanishing) return {1.0, 0.0};
            return norm({std::cos(a.coef), 0.0});
        case Op::Exp:
            if (blowup) err("exp of unbounded value");
            if (vanishing) return {1.0, 0.0};
            return norm({std::exp(a.coef), 0.0});
        case Op::Ln:
            if (vanishing || blowup || !(a.coef > 0)) err("logarithm at zero or of non-positive value");
            return norm({std::log(a.coef), 0.0});
        case Op::Sqrt:
            if (!vanishing && a.coef < 0) err("square root of negative value");
            if (a.order == kInf) return a;
            return norm({std::sqrt(std::abs(a.coef)), 0.5 * a.order});
        default: break;
    }
    const Lead b = lead(nodes, n.rhs, t);
    switch (n.op) {
        case Op::Add:
        case Op::Sub: {
            const Lead bb{n.op == Op::Sub ? -b.coef : b.coef, b.order};
            if (a.order == kInf) return bb;
            if (bb.order == kInf) return a;
            if (std::abs(a.order - bb.order) <= kOrderTol) return norm({a.coef + bb.coef, a.order});
            return a.order < bb.order ? a : bb;
        }
        case Op::Mul:
            if (a.order == kInf || b.order == kInf) return {0.0, kInf};
            return norm({a.coef * b.coef, a.order + b.order});
        case Op::Div:
            if (b.order == kInf) err("division by zero");
            if (a.order == kInf) return {0.0, kInf};
            return norm({a.coef / b.coef, a.order - b.order});
        case Op::Pow: {
            if (b.order < -kOrderTol) err("unbounded exponent");
            const double e = b.order > kOrderTol ? 0.0 : b.coef;
            if (e == 0.0) return {1.0, 0.0};
            if (a.order == kInf) {
                if (e < 0) err("zero base with negative exponent");
                return {0.0, kInf};
            }
            if (zero_order(a.order)) {
                if (a.coef < 0 && !is_integer(e)) err("negative base with non-integer exponent");
                const double r = std::pow(a.coef, e);
                if (!std::isfinite(r)) err("non-finite power");
                return norm({r, 0.0});
            }
            const double c = (a.coef < 0 && is_integer(e)) ? std::pow(a.coef, e)
                                                            : std::pow(std::abs(a.coef), e);
            return norm({c, a.order * e});
        }
        default: break;
    }
    return {0.0, kInf};
}

double eval_at_zero(const std::vector<Node>& nodes, int root, double t) {
    const Lead l = lead(nodes, root, t);
    if (l.order == kInf || l.order > kOrderTol) return 0.0;
    if (zero_order(l.order)) {
        if (!std::isfinite(l.coef)) domain_error(nodes, root, t, 0.0, "non-finite result");
        return l.coef;
    }
    domain_error(nodes, root, t, 0.0, "expression is unbounded as u -> 0");
}

}  // namespace

Expr::Expr() : Expr(parse("0")) {}

Expr::Expr(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Expr Expr::parse(std::string_view text) {
    auto impl = std::make_shared<Impl>();
    impl->source = std::string(text);
    Parser p(text, impl->nodes);
    impl->root = p.parse_all();
    post_order(impl->nodes, impl->root, impl->program, 0, impl->max_depth);
    for (const auto& n : impl->nodes) {
        impl->uses_u |= n.op == Op::VarU;
        impl->uses_t |= n.op == Op::VarT;
    }
    return Expr(std::move(impl));
}

Expr Expr::constant(double c) {
    std::ostringstream os;
    os.precision(17);
    os << c;
    return parse(os.str());
}

double Expr::operator()(double t, double u) const {
    const Impl& im = *impl_;
    if (u == 0.0 && im.uses_u) return eval_at_zero(im.nodes, im.root, t);
    std::array<double, 64> small;
    std::vector<double> big;
    double* st = small.data();
    if (im.max_depth > static_cast<int>(small.size())) {
        big.resize(im.max_depth);
        st = big.data();
    }
    int sp = 0;
    bool ok = true;
    for (const int idx : im.program) {
        const Node& n = im.nodes[idx];
        double r;
        switch (n.op) {
            case Op::Const: r = n.value; break;
            case Op::VarT: r = t; break;
            case Op::VarU: r = u; break;
            case Op::Neg: r = -st[--sp]; break;
            case Op::Abs: r = std::abs(st[--sp]); break;
            case Op::Sign: {
                const double a = st[--sp];
                r = (a > 0) - (a < 0);
                break;
            }
            case Op::Sin: r = std::sin(st[--sp]); break;
            case Op::Cos: r = std::cos(st[--sp]); break;
            case Op::Exp: r = std::exp(st[--sp]); break;
            case Op::Ln: r = std::log(st[--sp]); break;
            case Op::Sqrt: r = std::sqrt(st[--sp]); break;
            default: {
                const double b = st[--sp];
                const double a = st[--sp];
                switch (n.op) {
                    case Op::Add: r = a + b; break;
                    case Op::Sub: r = a - b; break;
                    case Op::Mul: r = a * b; break;
                    case Op::Div: r = a / b; break;
                    default: r = std::pow(a, b); break;
                }
            }
        }
        ok &= std::isfinite(r);
        st[sp++] = r;
    }
    if (!ok) return checked(im.nodes, im.root, t, u);
    return st[0];
}

std::string Expr::print() const { return node_text(impl_->nodes, impl_->root); }
const std::string& Expr::source() const { return impl_->source; }
bool Expr::depends_on_u() const { return impl_->uses_u; }
bool Expr::depends_on_t() const { return impl_->uses_t; }
bool Expr::is_zero() const {
    const Node& r = impl_->nodes[impl_->root];
    return r.op == Op::Const && r.value == 0.0;
}
const std::vector<Node>& Expr::nodes() const { return impl_->nodes; }
int Expr::root() const { return impl_->root; }

Expr parse(std::string_view text) { return Expr::parse(text); }
std::string print(const Expr& e) { return e.print(); }
double eval(const Expr& e, double t, double u) { return e(t, u); }

double antiderivative_in_u(const Expr& e, double t, double u, double tol) {
    if (u == 0.0) return 0.0;
    AdaptiveOptions opt;
    opt.abs_tol = tol;
    return integrate([&](double s) { return e(t, s); }, 0.0, u, opt).value;
}

}  // namespace impvar
