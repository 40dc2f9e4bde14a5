#ifndef PDSLAB_DIFFUSION_HPP
#define PDSLAB_DIFFUSION_HPP

#include <functional>
#include <vector>

#include "pdslab/fit.hpp"
#include "pdslab/propagator.hpp"

namespace pdslab {

// Frequency quadrature: composite Gauss-Legendre panels covering [0, 1e-3],
// log-spaced panels on [1e-3, 1] and linear panels on [1, xi_max]. For n = 1
// the grid is mirrored to the negative axis; for n = 2 the weights carry the
// angular factor 2 pi r (radially symmetric integrands).
struct QuadGrid {
    int n = 1;
    double xi_max = 8.0;
    int refine = 1;
    std::vector<std::vector<double>> nodes;
    std::vector<double> weights;
};

QuadGrid make_quad_grid(int n, double xi_max = 8.0, int refine = 1);

// || F ||_{L^2(dxi)} and || F ||_{L^1(dxi)} over the grid.
double grid_l2(const QuadGrid& grid, const std::vector<double>& sq_values);
double grid_l1(const QuadGrid& grid, const std::vector<double>& abs_values);

// Initial Fourier data sampled on a grid.
struct SpectralData {
    QuadGrid grid;
    std::vector<CVector> values;  // d-vector per node
};
struct ScalarSpectralData {
    QuadGrid grid;
    std::vector<Complex> values;
};

SpectralData sample_vector_data(const QuadGrid& grid,
                                const std::function<CVector(const std::vector<double>&)>& f);

// chi(xi) = psi(|xi| / chi_c): smooth, exactly 1 for r <= 1/2, 0 for r >= 1.
double smooth_cutoff(double r);

// Solution samples of the full system for every grid node, one ODE per node.
struct SpectralEvolution {
    std::vector<double> t_samples;
    // u[node][sample] is U^(t, xi_node)
    std::vector<std::vector<CVector>> u;
};
SpectralEvolution evolve_data(const SystemSpec& spec, const SpectralData& data, double s,
                              const std::vector<double>& t_samples, double ode_tol);

// w0^ = W N_2^{-1}(t0, xi) M^{-1}(t0) E(t0, 0, xi) chi(xi) U0^, the scalar data
// whose parabolic evolution cancels the undamped mode of the solution.
ScalarSpectralData build_w0(const DiagResult& dr, const Eigen::RowVectorXcd& W,
                            const SpectralData& u0, const std::vector<CVector>& u_at_t0,
                            double chi_c);

// Multiply by Xi_2(t, s, xi): the Fourier solution of the effective
// parabolic problem with data w0hat at time s.
std::vector<Complex> parabolic_propagate(const DiagResult& dr, const ScalarSpectralData& w0hat,
                                         double s, double t);

struct GapSeries {
    std::vector<double> t;
    std::vector<double> gap;             // ||U^ - K Xi_2 w0^|| / ||U0^||
    DecayFit fit_plain;
    DecayFit fit_logcorr;
    double energy_ceiling_margin = 0.0;  // max gap / (triangle-inequality bound)
    double chi_c = 0.0;
};

GapSeries diffusion_gap(const SystemSpec& spec, const DiagResult& dr, const SpectralData& u0,
                        const std::vector<double>& t_samples, double chi_c, double ode_tol = 1e-9);

// L^p -> L^q decay fit for (p,q) in {(2,2), (1,2), (1,inf)}; L^infinity is
// bounded through the L^1(dxi) norm (an upper-bound proxy).
DecayFit lp_lq_experiment(const SystemSpec& spec, const SpectralData& u0, int p, int q,
                          const std::vector<double>& t_samples, double ode_tol = 1e-9);

struct HighFreqReport {
    std::vector<double> xi;
    std::vector<double> rate;  // fitted exponential decay rate of ||E(t,0,xi)||
    double inf_rate = 0.0;
    bool pass = false;
    double threshold = 0.05;
};

HighFreqReport highfreq_decay_check(const SystemSpec& spec, const std::vector<double>& xi_grid,
                                    double t_end = 40.0, double threshold = 0.05,
                                    double ode_tol = 1e-9);

}  // namespace pdslab

#endif
