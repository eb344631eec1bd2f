#pragma once

#include <cstdint>

#include "impvar/problem.hpp"
#include "impvar/report.hpp"

namespace impvar {

/// Samples the standing hypotheses F0..F5, I1..I3, G and H of a problem.
/// n_samples (>= 2000) values of u in [-delta, delta] plus log shells
/// delta 10^-k are drawn per interval. Strict inequalities use zero tolerance.
AuditReport audit(const ProblemSpec& spec, int n_samples = 4000, std::uint64_t seed = 1);

/// Closed forms of the bundled two-impulse example checked against quadrature:
/// F_0 = (2/3)|u|^{3/2}, F_1 >= 0.6|u|^{3/2}, the impulse antiderivatives, and
/// the weighted impulse inequality with its explicit bound.
AuditReport verify_example_closed_forms(int n_samples = 200, std::uint64_t seed = 7);

}  // namespace impvar
