#ifndef PDSLAB_PROPAGATOR_HPP
#define PDSLAB_PROPAGATOR_HPP

#include <functional>
#include <random>
#include <vector>

#include "pdslab/diagonalizer.hpp"
#include "pdslab/ode.hpp"
#include "pdslab/system.hpp"

namespace pdslab {

// Sampled fundamental solution E(t, s, xi) along a time grid for one frequency.
struct FrequencyTrajectory {
    std::vector<double> xi;
    double s = 0.0;
    std::vector<double> t_samples;
    std::vector<CMatrix> E_samples;
    std::vector<double> norms;  // operator norms per sample
    double tol_used = 0.0;
};

// Generator of a per-frequency linear system: t -> coefficient matrix.
using Generator = std::function<CMatrix(double)>;

Generator original_generator(const SystemSpec& spec, const std::vector<double>& xi);
Generator transformed_generator(const DiagResult& dr, const std::vector<double>& xi);
Generator blockdiag_generator(const DiagResult& dr, const std::vector<double>& xi);

// Fundamental solution by adaptive embedded Runge-Kutta; columns evolve the
// identity at t = s. Tolerance must lie in [1e-12, 1e-4].
FrequencyTrajectory evolve(const Generator& gen, int d, const std::vector<double>& xi, double s,
                           const std::vector<double>& t_samples, double tol,
                           const Tolerances& lab_tol = default_tol());

FrequencyTrajectory evolve_system(const SystemSpec& spec, const std::vector<double>& xi, double s,
                                  const std::vector<double>& t_samples, double tol);

// Cocycle check E(t2, s) ~= E(t2, t1) E(t1, s) at random interior split points;
// returns the worst absolute defect.
double verify_cocycle(const Generator& gen, const FrequencyTrajectory& traj, int n_splits,
                      std::mt19937_64& rng);

// Block-diagonal propagator Theta = diag(Xi, damped block).
struct ThetaBlock {
    // Xi(t, s, xi) = exp( int_s^t f1(theta, xi) dtheta ), by adaptive quadrature.
    std::function<Complex(double, double)> Xi;       // (t, s)
    std::function<CMatrix(double, double)> damped;   // (t, s), (d-1) x (d-1)
    double ctilde = 0.0;                             // fitted decay rate of the damped block
};

ThetaBlock theta_block(const DiagResult& dr, const std::vector<double>& xi,
                       const Tolerances& tol = default_tol());

// Complex adaptive Simpson quadrature (exposed for tests).
Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           double tol);

struct VolterraReport {
    int iterations = 0;
    double final_diff = 0.0;
    double contraction = 0.0;      // last successive-difference ratio
    double apriori_max_ratio = 0.0;  // max ||E|| / exp(int ||R||)
};

// Picard iteration on  E = Theta + int_s^t Theta(t,theta) R(theta) E(theta) dtheta
// over a uniform grid containing the requested samples.
FrequencyTrajectory volterra_solve(const DiagResult& dr, const std::vector<double>& xi, double s,
                                   double t_end, int n_out, VolterraReport* report = nullptr,
                                   const Tolerances& tol = default_tol());

struct XiBoundReport {
    double C = 0.0;            // max ||E_k|| / |Xi_k| over the sample set
    double C_refined = 0.0;    // same on a 2x finer grid
    double rel_change = 0.0;
    double worst_t = 0.0, worst_xi = 0.0;
    int points = 0;
};

// Uniform bound ||E_k(t,s,xi)|| <= C |Xi_k(t,s,xi)| on { t |xi|^2 <= delta }.
XiBoundReport uniform_xi_bound(const DiagResult& dr, double delta, double t_cap, double ode_tol,
                               const Tolerances& tol = default_tol());

struct LimitRow {
    Eigen::RowVectorXcd W;
    double error_estimate = 0.0;
    double T_used = 0.0;
    double tail_order = 0.0;  // fitted decay order of ||R(t, 0)||
};

// W(s) = lim_{t->inf} e_1^T E_k(t, s, 0), integrated to T_max with a tail
// bound extrapolated from the fitted decay of the remainder at xi = 0.
LimitRow limit_row_W(const DiagResult& dr, double s, double T_max = 1e4, double ode_tol = 1e-10);

}  // namespace pdslab

#endif
