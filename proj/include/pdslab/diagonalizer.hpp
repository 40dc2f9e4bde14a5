#ifndef PDSLAB_DIAGONALIZER_HPP
#define PDSLAB_DIAGONALIZER_HPP

#include <functional>
#include <vector>

#include "pdslab/symbols.hpp"
#include "pdslab/system.hpp"

namespace pdslab {

// Time-dependent change of basis M(t) with M(t)^-1 B(t) M(t) = bdiag(0, Dtil(t)),
// kernel direction in column 0, built by continued eigendecomposition.
struct SlowDiagonalizer {
    MatrixFunction M;     // d x d, uniformly invertible on the grid
    MatrixFunction Minv;  // d x d
    MatrixFunction Dtil;  // (d-1) x (d-1), Re spectrum >= kappa_prime
    double kappa_prime = 0.0;
    bool constant = false;  // M does not depend on t (exact rational path)
    std::vector<double> t_grid;
    std::vector<double> cond_profile;  // cond_2(M(t)) along the grid
    double cond_max = 0.0;
    double min_overlap = 1.0;  // worst successive-column overlap seen
};

struct FirstTransform {
    MatrixFunction D;  // bdiag(0, Dtil) embedded to d x d; the (1,1) slot is exactly 0
    PolySymbol R1;     // i M^-1 A(t,xi) M + (d/dt M^-1) M, graded order >= 1
};

// Coefficients of the effective scalar model read off the (1,1) entry of F:
//   f1(t,xi) = -xi^T alpha(t) xi + i beta(t).xi + i gamma(t)  (+ higher orders).
struct ParabolicCoeffs {
    MatrixFunction alpha;  // n x n
    MatrixFunction beta;   // n x 1
    MatrixFunction gamma;  // 1 x 1
    bool re_alpha_positive = false;
    double alpha_min_eig = 0.0;  // inf over the t-grid of min eig Re alpha
    double alpha_worst_t = 0.0;
};

struct DiagResult {
    int order = 0;  // k
    SystemSpec spec;
    SlowDiagonalizer sd;
    MatrixFunction D;                  // as in FirstTransform
    PolySymbol R1;                     // graded order 1
    std::vector<PolySymbol> N_steps;   // N^(j), j = 1..k
    std::vector<PolySymbol> F_steps;   // F^(j)
    PolySymbol N;                      // I + sum N^(j)
    PolySymbol Ninv;                   // Neumann series, truncated at grade k+1
    PolySymbol F;                      // block-diagonal
    PolySymbol defect;                 // exact conjugation defect, grade >= k+1
    double sylvester_worst = 0.0;      // largest commutator residual seen
    Zone zone;                         // auto-selected c_k
    double margin = 0.0;               // sup ||N - I|| over the zone sample
    ParabolicCoeffs parabolic;
    OrderFit remainder_fit;

    // Right-hand sides of the systems involved (working convention d/dt = RHS * state).
    CMatrix rhs_original(double t, const std::vector<double>& xi) const;
    CMatrix rhs_transformed(double t, const std::vector<double>& xi) const;  // -D + F + R
    CMatrix rhs_blockdiag(double t, const std::vector<double>& xi) const;    // -D + F
    // Exact remainder N^-1 * defect, evaluated pointwise.
    CMatrix remainder(double t, const std::vector<double>& xi) const;
    CMatrix eval_N(double t, const std::vector<double>& xi) const;
    // f1(t, xi): the (1,1) entry of F.
    Complex f1(double t, const std::vector<double>& xi) const;
};

SlowDiagonalizer build_slow_diagonalizer(const SystemSpec& spec, const std::vector<double>& t_grid,
                                         const Tolerances& tol = default_tol());

FirstTransform first_transform(const SystemSpec& spec, const SlowDiagonalizer& sd);

// One step of the hierarchy: cancel every defect term of grade <= step with a
// block-diagonal correction F^(step) and a Sylvester-solved N^(step).
struct HierarchyState {
    PolySymbol N, F, defect;
    double sylvester_worst = 0.0;
};
void hierarchy_step(HierarchyState& state, int step, const MatrixFunction& D,
                    const MatrixFunction& Dtil, const PolySymbol& R1,
                    const Tolerances& tol = default_tol());

DiagResult hierarchy_run(const SystemSpec& spec, int k, double c_max = 1.0,
                         const Tolerances& tol = default_tol());

// Fills dr.parabolic from the (1,1) entry of F. Throws PositivityViolation if
// requested and Re alpha fails to be positive definite on the grid.
ParabolicCoeffs extract_parabolic(const DiagResult& dr, bool throw_on_violation = true,
                                  const Tolerances& tol = default_tol());

// K(t, xi) = M(t) N_2(t, xi) e_1, the comparison multiplier (always order 2).
std::function<CVector(double, const std::vector<double>&)> build_K(const DiagResult& dr);

}  // namespace pdslab

#endif
