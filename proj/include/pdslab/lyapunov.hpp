#ifndef PDSLAB_LYAPUNOV_HPP
#define PDSLAB_LYAPUNOV_HPP

#include <string>
#include <vector>

#include "pdslab/propagator.hpp"
#include "pdslab/system.hpp"

namespace pdslab {

// Weights of the hypocoercive functional
//   L_eps[u; t, xi] = ||u||^2
//     + min(|xi|, 1/|xi|) sum_{j=1}^{d-1} eps_j Im< B A^{j-1} u, B A^j u >,
// with A frozen at the direction xi/|xi| and < , > antilinear in the first slot.
struct EpsilonWeights {
    std::vector<double> eps;         // eps_1 .. eps_{d-1}
    std::vector<double> b3_weights;  // eps_0 .. eps_{d-1}, used in reporting
};

double lyap_value(const SystemSpec& spec, const EpsilonWeights& eps, const CVector& u, double t,
                  const std::vector<double>& xi);

struct EquivalenceReport {
    double lower = 1.0;  // largest valid c with c ||u||^2 <= L
    double upper = 1.0;  // smallest valid C with L <= C ||u||^2
    std::string shape;   // "geometric" (sigma^j) or "uniform" (sigma)
    double sigma = 0.0;
    double worst_correction = 0.0;  // sup of the correction-form norm
    double worst_t = 0.0;
    std::vector<double> worst_omega;
};

struct EpsilonSearchResult {
    EpsilonWeights weights;
    EquivalenceReport equivalence;
};

// Shrink the scale of a fixed weight shape until the correction form stays
// below 3/4 on the grid, so 1/4 ||u||^2 <= L_eps <= 4 ||u||^2 holds.
EpsilonSearchResult find_epsilon(const SystemSpec& spec, const std::vector<double>& t_grid,
                                 const std::vector<std::vector<double>>& sphere_grid);

struct TrajectoryDecay {
    std::vector<double> xi;
    double gamma = 0.0;          // largest gamma with L(t) <= L(s) e^{-gamma [xi]^2 (t-s)}
    double sqnorm_rate = 0.0;    // fitted exponential rate of ||u(t)||^2
};

struct DecayCertificate {
    double gamma = 0.0;      // grid infimum
    double implied_C = 0.0;  // equivalence upper / lower, for the plain norm
    std::vector<TrajectoryDecay> per_trajectory;
};

// Integrated (Gronwall-form) certification along precomputed trajectories.
// Each trajectory is scanned with every initial vector supplied.
DecayCertificate certify_decay(const SystemSpec& spec, const EpsilonWeights& eps,
                               const std::vector<FrequencyTrajectory>& trajectories,
                               const std::vector<CVector>& initial_vectors,
                               const EquivalenceReport* equivalence = nullptr);

// [xi]^2 = |xi|^2 / (1 + |xi|^2)
double bracket_xi_sq(double xi_norm);

// Finite-difference probe of the differential form: returns the smallest
// normalized pointwise rate  (-dL/dt + slack L) / ([xi]^2 L)  over random
// points, i.e. the largest g for which  dL/dt + g [xi]^2 L <= slack L  held
// on the sample. Positive for systems whose functional genuinely decays.
double derivative_spot_check(const SystemSpec& spec, const EpsilonWeights& eps, unsigned seed,
                             int n_points, double slack = 1e-4);

}  // namespace pdslab

#endif
