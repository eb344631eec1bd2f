#include "impvar/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "impvar/errors.hpp"
#include "impvar/quadrature.hpp"

namespace impvar {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Partition Partition::make(double T, std::vector<double> t, std::vector<double> s) {
    if (!(std::isfinite(T) && T > 0)) throw SpecError("partition: T must be positive and finite");
    if (t.size() != s.size())
        throw SpecError("partition: " + std::to_string(t.size()) + " impulse points but " +
                        std::to_string(s.size()) + " resume points");
    double prev = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(s[i]))
            throw SpecError("partition: non-finite point");
        if (!(prev < t[i]))
            throw SpecError("partition: t_" + std::to_string(i + 1) + " = " + num(t[i]) +
                            " must exceed " + num(prev));
        if (!(t[i] < s[i]))
            throw SpecError("partition: s_" + std::to_string(i + 1) + " = " + num(s[i]) +
                            " must exceed t_" + std::to_string(i + 1) + " = " + num(t[i]));
        prev = s[i];
    }
    if (!(prev < T)) throw SpecError("partition: T = " + num(T) + " must exceed " + num(prev));
    Partition p;
    p.T_ = T;
    p.t_ = std::move(t);
    p.s_ = std::move(s);
    return p;
}

std::pair<double, double> Partition::active_interval(std::size_t i) const {
    if (i > t_.size()) throw std::out_of_range("active interval index out of range");
    const double a = i == 0 ? 0.0 : s_[i - 1];
    const double b = i == t_.size() ? T_ : t_[i];
    return {a, b};
}

std::optional<std::size_t> Partition::interval_of(double t) const {
    for (std::size_t i = 0; i <= t_.size(); ++i) {
        const auto [a, b] = active_interval(i);
        if (a < t && t <= b) return i;
    }
    return std::nullopt;
}

std::vector<double> Partition::breakpoints() const {
    std::vector<double> out{0.0};
    for (std::size_t i = 0; i < t_.size(); ++i) {
        out.push_back(t_[i]);
        out.push_back(s_[i]);
    }
    out.push_back(T_);
    return out;
}

void GrowthConstants::validate() const {
    for (double v : {a1, theta1, a2, theta2, a_star})
        if (!std::isfinite(v)) throw SpecError("growth constants must be finite");
    if (!(1.0 < theta2 && theta2 < theta1 && theta1 < 2.0))
        throw SpecError("growth constants: need 1 < theta2 < theta1 < 2, got theta1 = " +
                        num(theta1) + ", theta2 = " + num(theta2));
    if (!(a1 > 0)) throw SpecError("growth constants: a1 must be positive");
    if (!(a2 > 0)) throw SpecError("growth constants: a2 must be positive");
    if (!(0 < a_star && a_star < a1 / theta1))
        throw SpecError("growth constants: need 0 < a_star < a1/theta1 = " + num(a1 / theta1) +
                        ", got " + num(a_star));
}

void ProblemSpec::validate_structure() const {
    const std::size_t n = N();
    if (f.size() != n + 1)
        throw SpecError("expected " + std::to_string(n + 1) + " nonlinearities f, got " +
                        std::to_string(f.size()));
    if (g.size() != n + 1)
        throw SpecError("expected " + std::to_string(n + 1) + " perturbations g, got " +
                        std::to_string(g.size()));
    if (impulses.size() != n)
        throw SpecError("expected " + std::to_string(n) + " impulse functions, got " +
                        std::to_string(impulses.size()));
    if (!(std::isfinite(delta) && delta > 0)) throw SpecError("delta must be positive and finite");
    if (!std::isfinite(epsilon)) throw SpecError("epsilon must be finite");
    if (!std::isfinite(beta)) throw SpecError("beta must be finite");
    growth.validate();
}

double WeightProfile::H(double t) const {
    if (t <= grid_.front()) return values_.front();
    if (t >= grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double a = grid_[k];
    if (t == a) return values_[k];
    static const GaussRule rule = gauss_legendre(8);
    const double c = 0.5 * (a + t), r = 0.5 * (t - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) acc += rule.weights[q] * h_(c + r * rule.nodes[q], 0.0);
    return values_[k] + r * acc;
}

double WeightProfile::e_star(const GrowthConstants& g) const {
    return std::max(std::exp(-H0_ * g.theta1 / 2.0), std::exp(-H0_ * g.theta2 / 2.0));
}

WeightProfile build_weight_profile(const ProblemSpec& spec, int samples) {
    if (samples < 64) throw std::invalid_argument("build_weight_profile: samples must be >= 64");
    const double T = spec.partition.T();
    auto merged_grid = [&](int n) {
        std::vector<double> g;
        g.reserve(n + 2 * spec.N() + 2);
        for (int k = 0; k <= n; ++k) g.push_back(T * k / n);
        for (double p : spec.partition.breakpoints()) g.push_back(p);
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    };
    WeightProfile w;
    w.h_ = spec.h;
    w.grid_ = merged_grid(samples);
    w.values_.assign(w.grid_.size(), 0.0);
    const GaussRule rule = gauss_legendre(8);
    for (std::size_t k = 1; k < w.grid_.size(); ++k) {
        const double a = w.grid_[k - 1], b = w.grid_[k];
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = c + r * rule.nodes[q];
            const double v = spec.h(t, 0.0);
            if (!std::isfinite(v)) throw EvalError("h is not finite at t = " + num(t));
            acc += rule.weights[q] * v;
        }
        w.values_[k] = w.values_[k - 1] + r * acc;
    }
    double lo = w.values_.front(), hi = w.values_.front();
    for (double t : merged_grid(std::max(samples, 4096))) {
        const double v = w.H(t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    w.H0_ = lo;
    w.M1_ = std::exp(hi);
    return w;
}

bool ValidationReport::ok() const {
    return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.pass; });
}

ValidationReport validate_spec(const ProblemSpec& spec, int samples) {
    ValidationReport rep;
    spec.validate_structure();
    rep.items.push_back({"partition", true, "interleaving 0 < t_1 < s_1 < ... < s_N < T holds"});
    rep.items.push_back({"growth", true, "1 < theta2 < theta1 < 2 and 0 < a_star < a1/theta1"});

    const double d = spec.delta;
    auto probe = [&](const Expr& e, const std::string& what, std::size_t interval, double t, double u) {
        double v;
        try {
            v = e(t, u);
        } catch (const EvalError& ex) {
            throw EvalError(what + " on interval " + std::to_string(interval) + " at t = " + num(t) +
                            ", u = " + num(u) + ": " + ex.what());
        }
        if (!std::isfinite(v))
            throw EvalError(what + " on interval " + std::to_string(interval) + " is not finite at t = " +
                            num(t) + ", u = " + num(u));
    };
    constexpr int nt = 16, nu = 32;
    for (std::size_t i = 0; i <= spec.N(); ++i) {
        const auto [a, b] = spec.partition.active_interval(i);
        for (int kt = 1; kt <= nt; ++kt) {
            const double t = a + (b - a) * kt / nt;
            for (int ku = 0; ku <= nu; ++ku) {
                const double u = -d + 2.0 * d * ku / nu;
                probe(spec.f[i], "f", i, t, u);
                probe(spec.g[i], "g", i, t, u);
            }
        }
    }
    for (std::size_t k = 0; k < spec.N(); ++k)
        for (int ku = 0; ku <= nu; ++ku) {
            const double u = -d + 2.0 * d * ku / nu;
            probe(spec.impulses[k], "impulse", k + 1, spec.partition.impulse_points()[k], u);
        }

    const WeightProfile w = build_weight_profile(spec, std::max(samples, 64));
    rep.H0 = w.H0();
    rep.M1 = w.M1();
    const double T = spec.partition.T();
    const double bound = 2.0 * std::exp(w.H0()) / (T * T);
    ValidationItem h{"H", spec.beta < bound, {}};
    h.message = "beta = " + num(spec.beta) + (h.pass ? " < " : " >= ") + "2 e^{H0}/T^2 = " + num(bound);
    rep.items.push_back(h);
    return rep;
}

}  // namespace impvar
