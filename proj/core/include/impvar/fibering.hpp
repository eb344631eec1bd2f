#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "impvar/functional.hpp"

namespace impvar {

/// Fibering map of the unperturbed functional along a direction u:
///
///     Y_u(c) = J_0(c u) / c^2 = P(c) + Q(c),
///     P(c) = 1/2 ||u||_E^2 - beta/2 \int u'^2 - c^-2 sum \int e^H F~(c u),
///     Q(c) = -c^-2 sum I^(c u(t_k)).
///
/// The epsilon of the functional passed in is ignored.
struct FiberValue {
    double P = 0.0;
    double Q = 0.0;
    double upsilon = 0.0;
};

FiberValue upsilon(const Functional& J, const Eigen::VectorXd& u, double c);

struct FiberDerivatives {
    double dP = 0.0;  // -c^-3 sum \int e^H (w f~(w) - 2 F~(w)), w = c u
    double dQ = 0.0;  // c^-3 (2 sum I^(w_k) - sum e^{H(t_k)} w_k I~(w_k))
};

FiberDerivatives fiber_derivatives(const Functional& J, const Eigen::VectorXd& u, double c);

struct FiberRoot {
    double c = 0.0;         // root for u itself
    double residual = 0.0;  // |Y_u(c)|
    double P = 0.0;         // P(c) for u itself
    double norm_E = 0.0;    // ||u||_E
    int expansions = 0;
    int bisections = 0;
};

/// Unique c > 0 with Y_u(c) = 0. Brackets from c = 1 for the E-normalised
/// direction by doubling or halving (at most 200 steps), then bisects.
/// Throws FiberingError if no sign change is found.
FiberRoot find_c(const Functional& J, const Eigen::VectorXd& u);

struct FiberScan {
    FiberRoot root;
    std::vector<double> c, upsilon, dP, dQ;
};

/// Y_u on a log grid over [c(u)/100, 100 c(u)].
FiberScan scan_fiber(const Functional& J, const Eigen::VectorXd& u, int grid = 64);

struct FiberCertificate {
    FiberScan scan;
    bool increasing = true;
    bool single_sign_change = true;
    bool dP_positive = true;
    bool dQ_nonnegative = true;
    double witness_c = 0.0;  // first grid point violating a check
    bool pass() const { return increasing && single_sign_change && dP_positive && dQ_nonnegative; }
};

FiberCertificate certify_fiber(const Functional& J, const Eigen::VectorXd& u, int grid = 64);

/// CSV rows "c,upsilon,dP,dQ".
void write_fiber_csv(std::ostream& os, const FiberScan& s);

}  // namespace impvar
