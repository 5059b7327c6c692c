#pragma once

namespace qwalk {

// Numerical tolerances used throughout the library, gathered in one place.
// Every validating routine takes a `Tolerances` (defaulted), so callers can
// tighten or relax individual bounds without touching call sites.
struct Tolerances {
    double unitarity = 1e-12;           // ‖U†U − I‖_max on flips and U_k
    double projector = 1e-12;           // projector idempotence/orthogonality
    double kraus_completeness = 1e-12;  // both Kraus completeness sums
    double eig_orthonormality = 1e-10;  // eigenvector Gram defect
    double eig_residual = 1e-10;        // ‖U v − λ v‖ per pair
    double eig_degeneracy = 1e-8;       // eigenvalue grouping, angular distance
    double subspace_membership = 1e-10; // rhs-in-range check of restricted solves
    double solve_residual = 1e-9;       // relative residual of restricted solves
    double condition_bound = 1e12;      // reject solves beyond this 1-norm estimate
    double state_norm = 1e-8;           // accepted drift of caller-supplied states
    double distribution_sum = 1e-10;    // Σ p(x) − 1
    double negative_probability = 1e-12;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tols{};
    return tols;
}

}  // namespace qwalk
