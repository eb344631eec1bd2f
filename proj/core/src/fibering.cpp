#include "impvar/fibering.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "impvar/errors.hpp"

namespace impvar {

namespace {

FiberValue upsilon_unperturbed(const Functional& J0, const Eigen::VectorXd& u, double c) {
    if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("upsilon: c must be positive");
    const EnergyBreakdown e = J0.energy(c * u);
    const auto [quad, slope] = J0.quadratic_terms(u);
    FiberValue v;
    v.P = quad - slope - e.f_term / (c * c);
    v.Q = -e.impulse_term / (c * c);
    v.upsilon = v.P + v.Q;
    return v;
}

}  // namespace

FiberValue upsilon(const Functional& J, const Eigen::VectorXd& u, double c) {
    if (u.isZero(0.0)) throw std::invalid_argument("upsilon: direction must be nonzero");
    return upsilon_unperturbed(J.with_epsilon(0.0), u, c);
}

FiberDerivatives fiber_derivatives(const Functional& J, const Eigen::VectorXd& u, double c) {
    if (!(c > 0)) throw std::invalid_argument("fiber_derivatives: c must be positive");
    const ScalingTerms st = J.scaling_terms(c * u);
    const double c3 = c * c * c;
    return {-st.f_virial / c3, st.impulse_virial / c3};
}

FiberRoot find_c(const Functional& J, const Eigen::VectorXd& u) {
    const Functional J0 = J.with_epsilon(0.0);
    const double n = std::sqrt(u.dot(J0.space()->gram() * u));
    if (!(n > 0)) throw FiberingError("find_c: direction has zero norm");
    const Eigen::VectorXd v = u / n;
    auto Y = [&](double c) { return upsilon_unperturbed(J0, v, c).upsilon; };

    FiberRoot r;
    r.norm_E = n;
    double lo, hi;
    if (Y(1.0) < 0) {
        lo = 1.0;
        hi = 2.0;
        while (Y(hi) < 0) {
            if (++r.expansions > 200) throw FiberingError("find_c: no sign change found above c = 1");
            lo = hi;
            hi *= 2.0;
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while (Y(lo) >= 0) {
            if (++r.expansions > 200) throw FiberingError("find_c: no sign change found below c = 1");
            hi = lo;
            lo *= 0.5;
        }
    }
    const double eps = std::numeric_limits<double>::epsilon();
    while (hi / lo - 1.0 > 4.0 * eps && r.bisections < 200) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        (Y(mid) < 0 ? lo : hi) = mid;
        ++r.bisections;
    }
    const FiberValue flo = upsilon_unperturbed(J0, v, lo);
    const FiberValue fhi = upsilon_unperturbed(J0, v, hi);
    const bool take_hi = std::abs(fhi.upsilon) <= std::abs(flo.upsilon);
    const FiberValue& f = take_hi ? fhi : flo;
    r.c = (take_hi ? hi : lo) / n;
    r.residual = n * n * std::abs(f.upsilon);
    r.P = n * n * f.P;
    return r;
}

FiberScan scan_fiber(const Functional& J, const Eigen::VectorXd& u, int grid) {
    if (grid < 2) throw std::invalid_argument("scan_fiber: grid must be >= 2");
    FiberScan s;
    s.root = find_c(J, u);
    const Functional J0 = J.with_epsilon(0.0);
    const double a = std::log(s.root.c / 100.0), b = std::log(s.root.c * 100.0);
    for (int k = 0; k < grid; ++k) {
        const double c = std::exp(a + (b - a) * k / (grid - 1));
        const FiberDerivatives d = fiber_derivatives(J0, u, c);
        s.c.push_back(c);
        s.upsilon.push_back(upsilon_unperturbed(J0, u, c).upsilon);
        s.dP.push_back(d.dP);
        s.dQ.push_back(d.dQ);
    }
    return s;
}

FiberCertificate certify_fiber(const Functional& J, const Eigen::VectorXd& u, int grid) {
    FiberCertificate cert;
    cert.scan = scan_fiber(J, u, grid);
    const auto& s = cert.scan;
    int sign_changes = 0;
    bool witness_set = false;
    auto flag = [&](bool& ok, std::size_t k) {
        ok = false;
        if (!witness_set) cert.witness_c = s.c[k], witness_set = true;
    };
    for (std::size_t k = 0; k < s.c.size(); ++k) {
        if (k > 0 && !(s.upsilon[k] > s.upsilon[k - 1])) flag(cert.increasing, k);
        if (k > 0 && (s.upsilon[k - 1] < 0) != (s.upsilon[k] < 0)) ++sign_changes;
        if (!(s.dP[k] > 0)) flag(cert.dP_positive, k);
        if (!(s.dQ[k] >= 0)) flag(cert.dQ_nonnegative, k);
    }
    if (sign_changes != 1) cert.single_sign_change = false;
    return cert;
}

void write_fiber_csv(std::ostream& os, const FiberScan& s) {
    os << "c,upsilon,dP,dQ\n" << std::setprecision(17);
    for (std::size_t k = 0; k < s.c.size(); ++k)
        os << s.c[k] << "," << s.upsilon[k] << "," << s.dP[k] << "," << s.dQ[k] << "\n";
}

}  // namespace impvar
