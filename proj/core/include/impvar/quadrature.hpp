#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "impvar/errors.hpp"

namespace impvar {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

struct AdaptiveOptions {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;
    int max_panels = 4000;
};

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error, abs_value;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7];
    double rg = fc * kWg[3];
    double rabs = std::abs(rk);
    std::array<double, 15> fv{};
    fv[7] = fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        rk += kWgk[j] * (f1 + f2);
        rabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
    }
    const double mean = 0.5 * rk;
    double asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        asc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    asc *= std::abs(h);
    double err = std::abs((rk - rg) * h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double rabs_h = rabs * std::abs(h);
    const double eps = std::numeric_limits<double>::epsilon();
    if (rabs_h > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * rabs_h, err);
    return {a, b, rk * h, err, rabs_h};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15 on [a, b].
///
/// Stops once the summed error estimate is below
/// max(abs_tol, rel_tol*|I|, roundoff floor). Panels too narrow to split are
/// frozen. Throws QuadratureError with the achieved estimate when the panel
/// budget runs out.
template <class F>
AdaptiveResult integrate(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    if (a == b) return {};
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<detail::Panel> heap;
    std::vector<detail::Panel> frozen;
    heap.push_back(detail::gk15(f, a, b));
    double value = heap.front().value;
    double error = heap.front().error;
    double mass = heap.front().abs_value;
    int panels = 1;
    auto target = [&] {
        return std::max({opt.abs_tol, opt.rel_tol * std::abs(value), 100.0 * eps * mass});
    };
    while (error > target() && !heap.empty()) {
        if (panels >= opt.max_panels)
            throw QuadratureError("adaptive quadrature: panel budget exhausted, error estimate " +
                                      std::to_string(error),
                                  error);
        std::pop_heap(heap.begin(), heap.end());
        const detail::Panel p = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (p.a + p.b);
        if (std::abs(p.b - p.a) <= 100.0 * eps * std::max(std::abs(p.a), std::abs(p.b)) ||
            mid == p.a || mid == p.b) {
            frozen.push_back(p);
            continue;
        }
        const detail::Panel l = detail::gk15(f, p.a, mid);
        const detail::Panel r = detail::gk15(f, mid, p.b);
        value += l.value + r.value - p.value;
        error += l.error + r.error - p.error;
        mass += l.abs_value + r.abs_value - p.abs_value;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end());
        ++panels;
    }
    // Re-sum to drop drift from the running updates.
    value = 0.0;
    error = 0.0;
    for (const auto* set : {&heap, &frozen})
        for (const auto& p : *set) {
            value += p.value;
            error += p.error;
        }
    if (error > target())
        throw QuadratureError("adaptive quadrature: tolerance not reached, error estimate " +
                                  std::to_string(error),
                              error);
    return {value, error, panels};
}

}  // namespace impvar
