#include "impvar/fem_space.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "impvar/errors.hpp"
#include "impvar/quadrature.hpp"

namespace impvar {

namespace {

// Hermite shape functions on [0, 1]; slopes are in physical units.
std::array<double, 4> shape(double x, double h) {
    const double x2 = x * x, x3 = x2 * x;
    return {1 - 3 * x2 + 2 * x3, h * (x - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (x3 - x2)};
}
std::array<double, 4> shape_d1(double x, double h) {
    return {(-6 * x + 6 * x * x) / h, 1 - 4 * x + 3 * x * x, (6 * x - 6 * x * x) / h, -2 * x + 3 * x * x};
}
std::array<double, 4> shape_d2(double x, double h) {
    return {(-6 + 12 * x) / (h * h), (-4 + 6 * x) / h, (6 - 12 * x) / (h * h), (-2 + 6 * x) / h};
}

double dot4(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

template <class Fn>
double quad_sum(const Field& f, Fn&& fn) {
    const auto& s = *f.space;
    double acc = 0.0;
    for (const auto& e : s.elements()) {
        const auto l = s.local(f.c, e);
        for (int q = 0; q < s.quad_points(); ++q) acc += e.w[q] * fn(e, q, l);
    }
    return acc;
}

double local_at(const std::array<double, 4>& l, const double* basis) {
    return l[0] * basis[0] + l[1] * basis[1] + l[2] * basis[2] + l[3] * basis[3];
}

}  // namespace

std::shared_ptr<const DiscreteSpace> DiscreteSpace::build(const Partition& partition, int elements_per_segment,
                                                          const WeightProfile& weights, int quad_points) {
    if (elements_per_segment < 1) throw std::invalid_argument("elements_per_segment must be >= 1");
    if (quad_points < 5) throw std::invalid_argument("quad_points must be >= 5");
    auto sp = std::make_shared<DiscreteSpace>();
    DiscreteSpace& s = *sp;
    s.partition_ = partition;
    s.eps_ = elements_per_segment;
    s.nq_ = quad_points;
    s.H0_ = weights.H0();

    const auto bp = partition.breakpoints();
    s.nodes_.push_back(bp.front());
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        for (int k = 1; k < elements_per_segment; ++k)
            s.nodes_.push_back(bp[j] + (bp[j + 1] - bp[j]) * k / elements_per_segment);
        s.nodes_.push_back(bp[j + 1]);
    }
    const int nn = static_cast<int>(s.nodes_.size());
    s.n_free_ = 2 * (nn - 2);
    auto free_of = [&](int global) { return (global < 2 || global >= 2 * (nn - 1)) ? -1 : global - 2; };

    const GaussRule rule = gauss_legendre(quad_points);
    for (int n = 0; n + 1 < nn; ++n) {
        Element e;
        e.a = s.nodes_[n];
        e.b = s.nodes_[n + 1];
        e.h = e.b - e.a;
        e.left = n;
        const auto iv = partition.interval_of(0.5 * (e.a + e.b));
        e.interval = iv ? static_cast<int>(*iv) : -1;
        for (int k = 0; k < 4; ++k) e.dof[k] = free_of(2 * n + k);
        for (int q = 0; q < quad_points; ++q) {
            const double x = 0.5 * (rule.nodes[q] + 1.0);
            const double t = e.a + e.h * x;
            e.t.push_back(t);
            e.w.push_back(0.5 * e.h * rule.weights[q]);
            e.eH.push_back(weights.exp_H(t));
            for (double v : shape(x, e.h)) e.phi.push_back(v);
            for (double v : shape_d1(x, e.h)) e.dphi.push_back(v);
            for (double v : shape_d2(x, e.h)) e.ddphi.push_back(v);
        }
        s.elements_.push_back(std::move(e));
    }

    for (double tk : partition.impulse_points()) {
        const auto it = std::find(s.nodes_.begin(), s.nodes_.end(), tk);
        const int n = static_cast<int>(it - s.nodes_.begin());
        s.impulse_dof_.push_back(free_of(2 * n));
        s.impulse_weight_.push_back(weights.exp_H(tk));
    }

    s.K_ = Eigen::MatrixXd::Zero(s.n_free_, s.n_free_);
    s.D_ = Eigen::MatrixXd::Zero(s.n_free_, s.n_free_);
    for (const auto& e : s.elements_) {
        for (int q = 0; q < quad_points; ++q) {
            const double* d2 = &e.ddphi[4 * q];
            const double* d1 = &e.dphi[4 * q];
            for (int j = 0; j < 4; ++j) {
                if (e.dof[j] < 0) continue;
                for (int k = 0; k < 4; ++k) {
                    if (e.dof[k] < 0) continue;
                    s.K_(e.dof[j], e.dof[k]) += e.w[q] * e.eH[q] * d2[j] * d2[k];
                    s.D_(e.dof[j], e.dof[k]) += e.w[q] * d1[j] * d1[k];
                }
            }
        }
    }
    s.K_llt_.compute(s.K_);
    if (s.K_llt_.info() != Eigen::Success) throw Error("weighted Gram matrix is not positive definite");
    return sp;
}

std::array<double, 4> DiscreteSpace::local(const Eigen::VectorXd& c, const Element& e) const {
    std::array<double, 4> l{};
    for (int k = 0; k < 4; ++k) l[k] = e.dof[k] < 0 ? 0.0 : c[e.dof[k]];
    return l;
}

std::size_t DiscreteSpace::element_of(double t) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t idx = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(idx, elements_.size() - 1);
}

std::array<double, 3> DiscreteSpace::evaluate(const Eigen::VectorXd& c, double t) const {
    const Element& e = elements_[element_of(t)];
    const double x = std::clamp((t - e.a) / e.h, 0.0, 1.0);
    const auto l = local(c, e);
    return {dot4(l, shape(x, e.h)), dot4(l, shape_d1(x, e.h)), dot4(l, shape_d2(x, e.h))};
}

Field::Field(SpacePtr s, Eigen::VectorXd coeffs) : space(std::move(s)), c(std::move(coeffs)) {
    if (c.size() != space->n_free()) throw std::invalid_argument("field: coefficient count does not match space");
}

Field Field::zero(SpacePtr s) {
    const int n = s->n_free();
    return Field(std::move(s), Eigen::VectorXd::Zero(n));
}

Field interpolate(const SpacePtr& space, const std::function<double(double)>& u,
                  const std::function<double(double)>& du) {
    Field f = Field::zero(space);
    const auto& nodes = space->nodes();
    for (std::size_t n = 1; n + 1 < nodes.size(); ++n) {
        f.c[2 * (n - 1)] = u(nodes[n]);
        f.c[2 * (n - 1) + 1] = du(nodes[n]);
    }
    return f;
}

Field transfer(const Field& f, const SpacePtr& target) {
    return interpolate(target, [&](double t) { return f.value(t); }, [&](double t) { return f.derivative(t); });
}

double norm_E(const Field& f) { return std::sqrt(std::max(0.0, f.c.dot(f.space->gram() * f.c))); }

double norm_H2semi(const Field& f) {
    return std::sqrt(quad_sum(f, [](const auto& e, int q, const auto& l) {
        const double v = local_at(l, &e.ddphi[4 * q]);
        return v * v;
    }));
}

double norm_L2(const Field& f) {
    return std::sqrt(quad_sum(f, [](const auto& e, int q, const auto& l) {
        const double v = local_at(l, &e.phi[4 * q]);
        return v * v;
    }));
}

double norm_L2_prime(const Field& f) { return std::sqrt(std::max(0.0, f.c.dot(f.space->slope_gram() * f.c))); }

namespace {

// Max over an element of |cubic| (deriv = false) or |its derivative|, using
// uniform samples plus interior critical points.
double element_sup(const std::array<double, 4>& l, double h, bool deriv) {
    auto val = [&](double x) { return deriv ? dot4(l, shape_d1(x, h)) : dot4(l, shape(x, h)); };
    double m = 0.0;
    for (int k = 0; k <= 32; ++k) m = std::max(m, std::abs(val(k / 32.0)));
    // Coefficients of the derivative of val as a polynomial in x: a x^2 + b x + c.
    double a, b, c;
    if (!deriv) {
        // u(x) = l0 H1 + l1 H2 + l2 H3 + l3 H4, u_x = h * u'
        a = 6 * l[0] + 3 * h * l[1] - 6 * l[2] + 3 * h * l[3];
        b = -6 * l[0] - 4 * h * l[1] + 6 * l[2] - 2 * h * l[3];
        c = h * l[1];
    } else {
        // u'(x) is quadratic; its x-derivative is linear.
        a = 0.0;
        b = (12 * l[0] + 6 * h * l[1] - 12 * l[2] + 6 * h * l[3]) / h;
        c = (-6 * l[0] - 4 * h * l[1] + 6 * l[2] - 2 * h * l[3]) / h;
    }
    std::vector<double> roots;
    if (std::abs(a) > 0) {
        const double disc = b * b - 4 * a * c;
        if (disc >= 0) {
            const double sq = std::sqrt(disc);
            roots = {(-b - sq) / (2 * a), (-b + sq) / (2 * a)};
        }
    } else if (std::abs(b) > 0) {
        roots = {-c / b};
    }
    for (double x : roots)
        if (x > 0 && x < 1) m = std::max(m, std::abs(val(x)));
    return m;
}

double sup_norm(const Field& f, bool deriv) {
    double m = 0.0;
    for (const auto& e : f.space->elements()) m = std::max(m, element_sup(f.space->local(f.c, e), e.h, deriv));
    return m;
}

}  // namespace

double norm_inf(const Field& f) { return sup_norm(f, false); }
double norm_inf_prime(const Field& f) { return sup_norm(f, true); }

double dual_norm(const DiscreteSpace& s, const Eigen::VectorXd& g) {
    return std::sqrt(std::max(0.0, g.dot(s.gram_llt().solve(g))));
}

Field random_field(const SpacePtr& space, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2);
    const double T = space->T();
    const int kind = pick(rng);
    Field f = Field::zero(space);
    if (kind == 0) {
        for (int j = 0; j < f.c.size(); ++j) f.c[j] = normal(rng);
    } else {
        // smooth: sin(pi t / T) times a few random modes
        std::array<double, 6> amp{};
        for (auto& a : amp) a = normal(rng);
        const double w = std::numbers::pi / T;
        auto u = [&](double t) {
            double s = 0.0;
            for (int k = 0; k < 6; ++k) s += amp[k] * std::sin((k + 1) * w * t);
            return std::sin(w * t) * s;
        };
        auto du = [&](double t) {
            double s = 0.0, ds = 0.0;
            for (int k = 0; k < 6; ++k) {
                s += amp[k] * std::sin((k + 1) * w * t);
                ds += amp[k] * (k + 1) * w * std::cos((k + 1) * w * t);
            }
            return w * std::cos(w * t) * s + std::sin(w * t) * ds;
        };
        f = interpolate(space, u, du);
        if (kind == 2)
            for (int j = 0; j < f.c.size(); ++j) f.c[j] += 0.05 * normal(rng);
    }
    const double n = norm_E(f);
    if (n > 0) f.c /= n;
    return f;
}

bool EmbeddingReport::overall() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

std::string EmbeddingReport::to_text() const {
    std::ostringstream os;
    os << "T = " << T << ", H0 = " << H0 << ", trials = " << trials << "\n";
    os << std::left << std::setw(34) << "inequality" << std::setw(14) << "constant" << std::setw(14)
       << "worst ratio" << "pass\n";
    for (const auto& e : entries)
        os << std::setw(34) << e.name << std::setw(14) << e.constant << std::setw(14) << e.worst_ratio
           << (e.pass ? "yes" : "NO") << "\n";
    return os.str();
}

EmbeddingReport check_embeddings(const SpacePtr& space, int trials, std::uint64_t seed) {
    EmbeddingReport rep;
    rep.T = space->T();
    rep.H0 = space->H0();
    rep.trials = trials;
    const double T = rep.T;
    rep.entries = {
        {"||u||_inf <= ||u||", 1.0},
        {"||u|| <= e^{-H0/2} ||u||_E", std::exp(-rep.H0 / 2)},
        {"||u'||_inf <= ||u||", 1.0},
        {"||u||_2 <= T^2/(2 sqrt 2) ||u||", T * T / (2 * std::sqrt(2.0))},
        {"||u'||_2 <= T/sqrt 2 ||u||", T / std::sqrt(2.0)},
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logscale(-3.0, 3.0);
    for (int k = 0; k < trials; ++k) {
        Field f = random_field(space, rng);
        f.c *= std::pow(10.0, logscale(rng));
        const double semi = norm_H2semi(f);
        const std::array<std::pair<double, double>, 5> lr = {{{norm_inf(f), semi},
                                                              {semi, norm_E(f)},
                                                              {norm_inf_prime(f), semi},
                                                              {norm_L2(f), semi},
                                                              {norm_L2_prime(f), semi}}};
        for (std::size_t j = 0; j < lr.size(); ++j) {
            auto& e = rep.entries[j];
            const double rhs = e.constant * lr[j].second;
            if (rhs <= 0) continue;
            const double ratio = lr[j].first / rhs;
            e.worst_ratio = std::max(e.worst_ratio, ratio);
            if (!(ratio <= 1.0)) e.pass = false;
        }
    }
    return rep;
}

void write_nodal_csv(std::ostream& os, const Field& f) {
    os << "t,u,du\n" << std::setprecision(17);
    for (double t : f.space->nodes()) {
        const auto v = f.space->evaluate(f.c, t);
        os << t << "," << v[0] << "," << v[1] << "\n";
    }
}

void write_dense_csv(std::ostream& os, const Field& f, int per_element) {
    if (per_element < 1) throw std::invalid_argument("per_element must be >= 1");
    os << "t,u,du\n" << std::setprecision(17);
    const auto& els = f.space->elements();
    for (std::size_t i = 0; i < els.size(); ++i) {
        const auto& e = els[i];
        const auto l = f.space->local(f.c, e);
        const int last = i + 1 == els.size() ? per_element : per_element - 1;
        for (int k = 0; k <= last; ++k) {
            const double x = static_cast<double>(k) / per_element;
            os << e.a + e.h * x << "," << dot4(l, shape(x, e.h)) << "," << dot4(l, shape_d1(x, e.h)) << "\n";
        }
    }
}

}  // namespace impvar
