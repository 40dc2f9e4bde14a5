#ifndef PDSLAB_SYSTEM_HPP
#define PDSLAB_SYSTEM_HPP

#include <string>
#include <vector>

#include "pdslab/coeff.hpp"
#include "pdslab/matkernel.hpp"

namespace pdslab {

// First-order system  d/dt U^ = ( i sum_k A_k(t) xi_k - B(t) ) U^  per frequency,
// with self-adjoint A_k, Re B >= 0 and singular B: exactly one undamped mode.
struct SystemSpec {
    int d = 0;  // state dimension
    int n = 0;  // space dimension
    std::vector<MatrixFunction> A;  // n coefficient matrices, d x d
    MatrixFunction B;               // d x d
    double t0 = 1.0;
    std::string name;
};

struct GridPointMargin {
    double t = 0;
    double asym = 0;        // max_k ||A_k - A_k*|| / max(1, ||A_k||)
    double min_re_b = 0;    // smallest eigenvalue of Re B
    double kernel_abs = 0;  // |eigenvalue of B| closest to zero
    double gap = 0;         // smallest Re of the remaining eigenvalues
};

struct HypothesisReport {
    bool b1_ok = false;
    bool b2_ok = false;
    bool b3_ok = false;
    double kappa = 0.0;             // (B2) spectral gap, infimum over the grid
    int kernel_dim = 0;
    double kalman_sigma_min = 0.0;  // (B3) infimum of sigma_min over the grid
    double kalman_worst_t = 0.0;
    std::vector<double> kalman_worst_omega;
    std::vector<GridPointMargin> margins;
};

// A(t, xi) = sum_k A_k(t) xi_k
CMatrix symbol_A(const SystemSpec& spec, double t, const std::vector<double>& xi);

// (B1) + (B2) on a sampling grid. Throws KernelDimensionUnsupported when the
// kernel of B is not one-dimensional; everything else is reported, not thrown.
HypothesisReport check_b1_b2(const SystemSpec& spec, const std::vector<double>& t_grid,
                             const Tolerances& tol = default_tol());

// (B3): sigma_min of the stacked family [B; B A(omega); ...; B A(omega)^{d-1}]
// over the grid; fills the kalman fields of a report.
void check_kalman(const SystemSpec& spec, const std::vector<double>& t_grid,
                  const std::vector<std::vector<double>>& sphere_grid, HypothesisReport& report,
                  const Tolerances& tol = default_tol());

// Convenience: both checks on the default grids.
HypothesisReport check_hypotheses(const SystemSpec& spec, const Tolerances& tol = default_tol());

std::vector<double> default_t_grid();                        // 1, 2, 4, ..., 1024
std::vector<std::vector<double>> default_sphere_grid(int n);  // +-1 or 64 directions

// Built-in example systems:
//   damped_wave     d=2, A=[[0,1],[1,0]], B=diag(0,1)
//   damped_wave_b0  like damped_wave with B=diag(0,2)
//   damped_wave_bt  like damped_wave with B=diag(0, 2 + 1/(1+t))
//   telegraph       A=diag(1,-1), B=[[1,-1],[-1,1]]
//   chain3          d=3, A=tridiag(1,0,1), B=diag(0,1,1)
//   uncoupled_bad   A=diag(1,-1), B=diag(0,1)   (fails the rank condition)
SystemSpec builtin(const std::string& name);
std::vector<std::string> builtin_names();

// Config file I/O (JSON; schema documented in the README). The parser rejects
// unknown keys; structural problems raise ValidationError.
SystemSpec load_system(const std::string& config_text);
SystemSpec load_system_file(const std::string& path);
std::string save_system(const SystemSpec& spec);

}  // namespace pdslab

#endif
