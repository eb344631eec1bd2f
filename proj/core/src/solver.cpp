#include "impvar/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "impvar/errors.hpp"
#include "impvar/fibering.hpp"

namespace impvar {

namespace {

double enorm(const DiscreteSpace& s, const Eigen::VectorXd& c) {
    return std::sqrt(std::max(0.0, c.dot(s.gram() * c)));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

bool converged_at(const SolverOptions& opt, double gn, double E) { return gn <= opt.grad_tol * (1.0 + std::abs(E)); }

DescentResult newton(const Functional& J, const Eigen::VectorXd& start, const Deflation& defl,
                     const SolverOptions& opt) {
    const DiscreteSpace& s = *J.space();
    DescentResult r;
    Eigen::VectorXd c = start;
    auto merit = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
        return defl.factor(x) * J.dual_norm(g);
    };
    Eigen::VectorXd g = J.gradient(c);
    for (int it = 0; it <= opt.newton_max_iterations; ++it) {
        r.iterations = it;
        const double E = J.energy(c).total;
        const double gn = J.dual_norm(g);
        r.energy_history.push_back(E);
        r.grad_history.push_back(gn);
        if (!std::isfinite(E) || !std::isfinite(gn)) {
            r.message = "non-finite energy or gradient";
            break;
        }
        if (converged_at(opt, gn, E)) {
            r.converged = true;
            r.message = "converged";
            break;
        }
        if (it == opt.newton_max_iterations) {
            r.message = "iteration limit reached";
            break;
        }
        const Eigen::MatrixXd H = J.hessian(c, opt.hessian_tau);
        Eigen::VectorXd d = H.partialPivLu().solve(-g);
        if (!d.allFinite()) d = -s.gram_llt().solve(g);
        if (!defl.empty()) {
            const auto [M, dM] = defl.factor_and_gradient(c);
            const double den = 1.0 - dM.dot(d) / M;
            if (std::abs(den) > 1e-12) d /= den;
        }
        const double cap = opt.step_cap * std::max(enorm(s, c), 1e-300);
        const double dn = enorm(s, d);
        if (dn > cap) d *= cap / dn;

        const double m0 = merit(c, g);
        double lam = 1.0;
        bool accepted = false;
        Eigen::VectorXd cn, gnew;
        for (int k = 0; k <= opt.max_halvings; ++k) {
            cn = c + lam * d;
            gnew = J.gradient(cn);
            if (merit(cn, gnew) < (1.0 - opt.armijo_c1 * lam) * m0) {
                accepted = true;
                break;
            }
            lam *= opt.backtrack;
        }
        if (!accepted) {
            r.message = "line search stagnated at iteration " + std::to_string(it);
            break;
        }
        c = cn;
        g = gnew;
    }
    r.c = c;
    r.energy = r.energy_history.back();
    r.grad_norm = r.grad_history.back();
    return r;
}

DescentResult lbfgs(const Functional& J, const Eigen::VectorXd& start, const Deflation& defl,
                    const SolverOptions& opt) {
    const DiscreteSpace& s = *J.space();
    DescentResult r;
    Eigen::VectorXd c = start;
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;  // (s, y)
    double E = J.energy(c).total;
    Eigen::VectorXd g = J.gradient(c);
    Eigen::VectorXd q_prev = defl.factor(c) * g;
    for (int it = 0; it <= opt.lbfgs_max_iterations; ++it) {
        r.iterations = it;
        const double gn = J.dual_norm(g);
        r.energy_history.push_back(E);
        r.grad_history.push_back(gn);
        if (converged_at(opt, gn, E)) {
            r.converged = true;
            r.message = "converged";
            break;
        }
        if (it == opt.lbfgs_max_iterations) {
            r.message = "iteration limit reached";
            break;
        }
        // Two-loop recursion preconditioned by the Gram matrix.
        const Eigen::VectorXd& qd = q_prev;
        Eigen::VectorXd q = qd;
        std::vector<double> alpha(mem.size());
        for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
            const auto& [sk, yk] = mem[k];
            alpha[k] = sk.dot(q) / yk.dot(sk);
            q -= alpha[k] * yk;
        }
        Eigen::VectorXd z = s.gram_llt().solve(q);
        if (!mem.empty()) {
            const auto& [sk, yk] = mem.back();
            z *= sk.dot(yk) / yk.dot(s.gram_llt().solve(yk));
        }
        for (std::size_t k = 0; k < mem.size(); ++k) {
            const auto& [sk, yk] = mem[k];
            const double beta = yk.dot(z) / yk.dot(sk);
            z += (alpha[k] - beta) * sk;
        }
        Eigen::VectorXd d = -z;
        if (!(g.dot(d) < 0)) {
            mem.clear();
            d = -s.gram_llt().solve(g);
        }
        double lam = 1.0;
        bool accepted = false;
        Eigen::VectorXd cn;
        double En = E;
        const double slope = g.dot(d);
        for (int k = 0; k <= opt.max_halvings; ++k) {
            cn = c + lam * d;
            En = J.energy(cn).total;
            if (En <= E + opt.armijo_c1 * lam * slope) {
                accepted = true;
                break;
            }
            lam *= opt.backtrack;
        }
        if (!accepted) {
            r.message = "line search stagnated at iteration " + std::to_string(it);
            break;
        }
        const Eigen::VectorXd gnew = J.gradient(cn);
        const Eigen::VectorXd qnew = defl.factor(cn) * gnew;
        const Eigen::VectorXd sk = cn - c, yk = qnew - q_prev;
        if (sk.dot(yk) > 1e-300) {
            mem.emplace_back(sk, yk);
            if (static_cast<int>(mem.size()) > opt.lbfgs_memory) mem.pop_front();
        }
        c = cn;
        g = gnew;
        q_prev = qnew;
        E = En;
    }
    r.c = c;
    r.energy = r.energy_history.back();
    r.grad_norm = r.grad_history.back();
    return r;
}

Eigen::VectorXd direction(const SpacePtr& space, int j) {
    const double T = space->T();
    const double w = std::numbers::pi / T;
    Field f = interpolate(
        space, [&](double t) { return std::sin(w * t) * std::sin(j * w * t); },
        [&](double t) {
            return w * std::cos(w * t) * std::sin(j * w * t) + j * w * std::sin(w * t) * std::cos(j * w * t);
        });
    return f.c / norm_E(f);
}

CriticalPoint make_point(const Functional& J, const DescentResult& r, const std::string& origin) {
    CriticalPoint p;
    p.field = Field(J.space(), r.c);
    p.energy = J.energy(r.c);
    p.grad_norm = J.dual_norm(J.gradient(r.c));
    p.norm_E = norm_E(p.field);
    p.norm_inf = norm_inf(p.field);
    p.iterations = r.iterations;
    p.origin = origin;
    return p;
}

bool distinct_from_all(const DiscreteSpace& s, const Eigen::VectorXd& c, const std::vector<Eigen::VectorXd>& found,
                       double tol) {
    return std::all_of(found.begin(), found.end(), [&](const auto& f) { return distinct(s, c, f, tol); });
}

struct SeedOutcome {
    bool ok = false;
    DescentResult result;
    std::vector<std::string> log;
};

SeedOutcome run_seed(const Functional& J, const Seed& seed, const std::vector<Eigen::VectorXd>& snapshot,
                     const SolverOptions& opt) {
    SeedOutcome out;
    const DiscreteSpace& s = *J.space();
    DescentResult r = descend(J, seed.start, snapshot, opt);
    out.log.push_back(seed.label + ": deflated " + r.message + " after " + std::to_string(r.iterations) +
                      " iterations");
    if (r.converged && distinct_from_all(s, r.c, snapshot, opt.distinct_tol)) {
        out.ok = true;
        out.result = std::move(r);
        return out;
    }
    r = descend(J, seed.start, {}, opt);
    out.log.push_back(seed.label + ": undeflated " + r.message + " after " + std::to_string(r.iterations) +
                      " iterations");
    if (r.converged && distinct_from_all(s, r.c, snapshot, opt.distinct_tol)) {
        out.ok = true;
        out.result = std::move(r);
    }
    return out;
}

}  // namespace

Deflation::Deflation(const DiscreteSpace& space, std::vector<Eigen::VectorXd> found, double length, double power,
                     double shift)
    : space_(&space), found_(std::move(found)), L_(length > 0 ? length : 1.0), p_(power), shift_(shift) {}

double Deflation::factor(const Eigen::VectorXd& c) const {
    double M = 1.0;
    for (const auto& f : found_) {
        const double r = enorm(*space_, c - f) / L_;
        M *= std::pow(r, -p_) + shift_;
    }
    return M;
}

std::pair<double, Eigen::VectorXd> Deflation::factor_and_gradient(const Eigen::VectorXd& c) const {
    std::vector<double> a;
    std::vector<Eigen::VectorXd> da;
    double M = 1.0;
    for (const auto& f : found_) {
        const Eigen::VectorXd diff = c - f;
        const double r = enorm(*space_, diff) / L_;
        a.push_back(std::pow(r, -p_) + shift_);
        // d/dc r^-p = -p r^{-p-2} K (c - f) / L^2
        da.push_back(-p_ * std::pow(r, -p_ - 2.0) * (space_->gram() * diff) / (L_ * L_));
        M *= a.back();
    }
    Eigen::VectorXd dM = Eigen::VectorXd::Zero(c.size());
    for (std::size_t k = 0; k < a.size(); ++k) dM += M / a[k] * da[k];
    return {M, dM};
}

DescentResult descend(const Functional& J, const Eigen::VectorXd& start, const std::vector<Eigen::VectorXd>& deflate,
                      const SolverOptions& opt) {
    const DiscreteSpace& s = *J.space();
    const Deflation defl(s, deflate, enorm(s, start), opt.deflation_power, opt.deflation_shift);
    return opt.method == DescentMethod::Newton ? newton(J, start, defl, opt) : lbfgs(J, start, defl, opt);
}

std::vector<Seed> seed_starts(const Functional& J, const SolverOptions& opt, bool both_signs,
                              std::vector<std::string>* log) {
    std::vector<Eigen::VectorXd> dirs;
    std::vector<std::string> labels;
    for (int j = 1; j <= opt.n_directions; ++j) {
        dirs.push_back(direction(J.space(), j));
        labels.push_back("mode " + std::to_string(j));
    }
    std::mt19937_64 rng(opt.rng_seed);
    for (int r = 0; r < opt.random_directions; ++r) {
        dirs.push_back(random_field(J.space(), rng).c);
        labels.push_back("random " + std::to_string(r + 1));
    }
    std::vector<Seed> seeds;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        FiberRoot root;
        try {
            root = find_c(J, dirs[k]);
        } catch (const FiberingError& e) {
            if (log) log->push_back(labels[k] + ": skipped, " + e.what());
            continue;
        }
        for (int sign : {1, -1}) {
            if (sign < 0 && !both_signs) break;
            Seed sd;
            sd.start = sign * 0.5 * root.c * dirs[k];
            sd.index = static_cast<int>(k) + 1;
            sd.sign = sign;
            sd.c_u = root.c;
            sd.label = (sign > 0 ? "+" : "-") + labels[k];
            seeds.push_back(std::move(sd));
        }
    }
    return seeds;
}

bool distinct(const DiscreteSpace& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    const double scale = std::max({enorm(s, a), enorm(s, b), 1.0});
    return enorm(s, a - b) > tol * scale;
}

void small_solution_filter(std::vector<CriticalPoint>& points, const Functional& J, double distinct_tol) {
    const double d = J.spec().delta;
    const double small = std::exp(J.H0() / 2.0) * d / 2.0;
    for (auto& p : points) {
        p.norm_E = norm_E(p.field);
        p.norm_inf = norm_inf(p.field);
        p.accepted = p.norm_inf < d / 2.0;
        p.trivial = p.norm_E <= distinct_tol;
        p.small_norm = p.norm_E <= small;
    }
}

bool SearchResult::pairs_complete(const DiscreteSpace& s, double tol) const {
    for (const auto& p : points) {
        if (!p.accepted || p.trivial) continue;
        const bool has_mirror = std::any_of(points.begin(), points.end(), [&](const CriticalPoint& q) {
            return !distinct(s, q.field.c, -p.field.c, tol);
        });
        if (!has_mirror) return false;
    }
    return true;
}

SearchResult multiplicity_search(const Functional& J, int k, const SolverOptions& opt) {
    if (k < 0) throw std::invalid_argument("multiplicity_search: k must be >= 0");
    if (opt.jobs < 1) throw std::invalid_argument("multiplicity_search: jobs must be >= 1");
    SearchResult res;
    res.requested = k;
    if (k == 0) return res;

    const DiscreteSpace& s = *J.space();
    const bool symmetric = J.epsilon() == 0.0;
    std::vector<Eigen::VectorXd> found{Eigen::VectorXd::Zero(s.n_free())};
    const auto seeds = seed_starts(J, opt, !symmetric, &res.log);

    auto count = [&] {
        return static_cast<int>(std::count_if(res.points.begin(), res.points.end(),
                                              [](const CriticalPoint& p) { return p.accepted && !p.trivial; }));
    };
    auto add = [&](CriticalPoint p) {
        std::vector<CriticalPoint> one{std::move(p)};
        small_solution_filter(one, J, opt.distinct_tol);
        found.push_back(one[0].field.c);
        res.log.push_back(one[0].origin + ": energy " + fmt(one[0].energy.total) + ", ||u||_E " +
                          fmt(one[0].norm_E) + (one[0].accepted ? "" : " (rejected: ||u||_inf >= delta/2)"));
        res.points.push_back(std::move(one[0]));
    };

    std::size_t next = 0;
    while (next < seeds.size() && count() < k) {
        const std::size_t batch = std::min<std::size_t>(opt.jobs, seeds.size() - next);
        std::vector<SeedOutcome> outcomes(batch);
        const std::vector<Eigen::VectorXd> snapshot = found;
        if (batch == 1) {
            outcomes[0] = run_seed(J, seeds[next], snapshot, opt);
        } else {
            std::vector<std::future<SeedOutcome>> futs;
            for (std::size_t b = 0; b < batch; ++b)
                futs.push_back(std::async(std::launch::async, run_seed, std::cref(J), std::cref(seeds[next + b]),
                                          std::cref(snapshot), std::cref(opt)));
            for (std::size_t b = 0; b < batch; ++b) outcomes[b] = futs[b].get();
        }
        for (std::size_t b = 0; b < batch && count() < k; ++b) {
            const Seed& sd = seeds[next + b];
            ++res.seeds_tried;
            for (auto& line : outcomes[b].log) res.log.push_back(std::move(line));
            if (!outcomes[b].ok) continue;
            const DescentResult& r = outcomes[b].result;
            if (!distinct_from_all(s, r.c, found, opt.distinct_tol)) {
                res.log.push_back(sd.label + ": result duplicates an earlier point");
                continue;
            }
            add(make_point(J, r, "seed " + sd.label));
            if (symmetric) {
                const Eigen::VectorXd m = -r.c;
                const double gn = J.dual_norm(J.gradient(m));
                const double E = J.energy(m).total;
                if (converged_at(opt, gn, E) && distinct_from_all(s, m, found, opt.distinct_tol)) {
                    DescentResult mr;
                    mr.c = m;
                    add(make_point(J, mr, "mirror of seed " + sd.label));
                }
            }
        }
        next += batch;
    }

    std::stable_sort(res.points.begin(), res.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.energy.total < b.energy.total;
    });
    res.found = count();
    res.shortfall = res.found < k;
    if (res.shortfall)
        res.log.push_back("shortfall: found " + std::to_string(res.found) + " of " + std::to_string(k) +
                          " requested critical points");
    return res;
}

}  // namespace impvar
