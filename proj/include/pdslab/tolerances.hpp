#ifndef PDSLAB_TOLERANCES_HPP
#define PDSLAB_TOLERANCES_HPP

namespace pdslab {

// Every numeric threshold used by the library, in one place.
// The defaults are definitive; experiments may override single fields.
struct Tolerances {
    // dense kernel
    double eig_residual = 1e-10;       // ||A V - V diag(lambda)|| / ||A||
    double svd_rank = 1e-12;           // relative sigma below which rank-deficient
    double expm_norm_cap = 1e4;        // raise OverflowRisk above this 1-norm
    double sylvester_residual = 1e-12; // commutator residual, relative to ||R||

    // hypotheses
    double hermitian_slack = 1e-10;    // ||A - A*|| relative
    double semidefinite_slack = 1e-10; // min eig of Re B may dip this far below 0
    double kernel_eig = 1e-10;         // |eigenvalue| counted as zero
    double kalman_sigma_min = 1e-6;    // (B3) grid infimum must exceed this
    double kappa_min = 1e-6;           // (B2) spectral gap must exceed this

    // slow diagonalizer
    double diag_residual = 1e-10;      // ||M^-1 B M - bdiag|| / ||B||
    double column_overlap_warn = 0.99; // successive eigenvector overlap
    double column_overlap_fail = 0.9;  // below this -> ContinuationFailure

    // symbol algebra
    int poly_degree_cap = 16;          // hard cap; TruncationOverflow beyond
    double order_fit_slack = 0.25;     // fitted-exponent tolerance for order checks
    double degenerate_floor = 1e-14;   // all-zero detection in order fits

    // hierarchy
    double neumann_margin = 0.5;       // sup ||N_k - I|| allowed in the zone
    double zone_floor = 1e-4;          // ZoneCollapse below this zone constant
    double zone_t_cap = 1e4;           // largest time sampled in zone scans

    // integration
    double ode_tol = 1e-9;             // default local error target
    double ode_tol_floor = 1e-12;      // accepted range for user tolerances
    double ode_tol_ceil = 1e-4;
    double quad_tol = 1e-10;           // adaptive Simpson target for int f1
    double picard_tol = 1e-10;         // successive-difference stop
    int picard_max_iter = 60;

    // fits
    double fit_r2_accept = 0.98;       // DecayFit acceptance
    double exponent_drift = 0.05;      // baseline guard on fitted exponents
    double constant_drift = 0.20;      // baseline guard on fitted constants
};

inline const Tolerances& default_tol() {
    static const Tolerances t{};
    return t;
}

}  // namespace pdslab

#endif
