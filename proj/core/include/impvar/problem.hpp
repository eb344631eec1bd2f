#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impvar/expr.hpp"

namespace impvar {

/// Impulse and resume points 0 = s_0 < t_1 < s_1 < ... < t_N < s_N < T.
///
/// Active interval i (0 <= i <= N) is (s_i, t_{i+1}] with t_{N+1} = T.
/// Impulse k (0-based) acts at t_{k+1}.
class Partition {
public:
    static Partition make(double T, std::vector<double> t, std::vector<double> s);

    double T() const noexcept { return T_; }
    std::size_t impulse_count() const noexcept { return t_.size(); }
    const std::vector<double>& impulse_points() const noexcept { return t_; }
    const std::vector<double>& resume_points() const noexcept { return s_; }

    /// Endpoints (s_i, t_{i+1}) of active interval i.
    std::pair<double, double> active_interval(std::size_t i) const;
    /// Index of the active interval containing t, if any.
    std::optional<std::size_t> interval_of(double t) const;
    /// 0, t_1, s_1, ..., t_N, s_N, T without duplicates.
    std::vector<double> breakpoints() const;

private:
    double T_ = 1.0;
    std::vector<double> t_;
    std::vector<double> s_;
};

struct GrowthConstants {
    double a1 = 0.0;
    double theta1 = 0.0;
    double a2 = 0.0;
    double theta2 = 0.0;
    double a_star = 0.0;

    /// Throws SpecError unless 1 < theta2 < theta1 < 2 and
    /// 0 < a_star < a1/theta1 and a2 > 0.
    void validate() const;
};

struct ProblemSpec {
    std::string name;
    Partition partition;
    Expr h;
    double beta = 0.0;
    double epsilon = 0.0;
    double delta = 0.5;
    std::vector<Expr> f;         // N+1 entries, f(t, u) on active interval i
    std::vector<Expr> g;         // N+1 entries
    std::vector<Expr> impulses;  // N entries, I(u) (t is ignored)
    GrowthConstants growth;

    std::size_t N() const noexcept { return partition.impulse_count(); }
    /// Throws SpecError on structural problems (list lengths, delta, epsilon, constants).
    void validate_structure() const;
};

/// Tabulated H(t) = \int_0^t h with extrema of H over [0, T].
class WeightProfile {
public:
    double H(double t) const;
    double exp_H(double t) const { return std::exp(H(t)); }
    /// min H over [0, T].
    double H0() const noexcept { return H0_; }
    /// max e^H over [0, T].
    double M1() const noexcept { return M1_; }
    double e_star(const GrowthConstants& g) const;
    double T() const noexcept { return grid_.back(); }
    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    friend WeightProfile build_weight_profile(const ProblemSpec&, int);
    Expr h_;
    std::vector<double> grid_;
    std::vector<double> values_;
    double H0_ = 0.0;
    double M1_ = 1.0;
};

/// Builds H from h by composite Gauss quadrature on cumulative panels.
/// `samples` (>= 64) sets the table resolution; extrema are taken on a grid
/// of max(samples, 4096) points plus all partition points.
WeightProfile build_weight_profile(const ProblemSpec& spec, int samples = 1024);

struct ValidationItem {
    std::string id;
    bool pass = true;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    double H0 = 0.0;
    double M1 = 1.0;
    bool ok() const;
};

/// Structural checks plus sampled finiteness of every expression and the
/// bound beta < 2 e^{H0} / T^2. Evaluation failures name interval and point.
ValidationReport validate_spec(const ProblemSpec& spec, int samples = 1024);

}  // namespace impvar
