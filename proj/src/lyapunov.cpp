#include "pdslab/lyapunov.hpp"

#include "pdslab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdslab {

namespace {

double xi_norm_of(const std::vector<double>& xi) {
    double q = 0;
    for (double x : xi) q += x * x;
    return std::sqrt(q);
}

// Hermitian form of the correction term at frozen direction omega:
//   sum_j eps_j Im< B A^{j-1} u, B A^j u > = u^H Q u,
//   Q = sum_j eps_j (X_j^H Y_j - Y_j^H X_j) / (2i).
CMatrix correction_form(const SystemSpec& spec, const std::vector<double>& eps, double t,
                        const std::vector<double>& omega) {
    const CMatrix b = spec.B.eval(t);
    const CMatrix a = symbol_A(spec, t, omega);
    const int d = spec.d;
    CMatrix q = CMatrix::Zero(d, d);
    CMatrix apow = CMatrix::Identity(d, d);  // A^{j-1}
    for (int j = 1; j <= d - 1; ++j) {
        const CMatrix x = b * apow;
        const CMatrix y = b * apow * a;
        q += eps[j - 1] * (x.adjoint() * y - y.adjoint() * x) / Complex(0, 2);
        apow = apow * a;
    }
    return q;
}

}  // namespace

double bracket_xi_sq(double xi_norm) { return xi_norm * xi_norm / (1.0 + xi_norm * xi_norm); }

double lyap_value(const SystemSpec& spec, const EpsilonWeights& eps, const CVector& u, double t,
                  const std::vector<double>& xi) {
    const double nrm2 = u.squaredNorm();
    const double xin = xi_norm_of(xi);
    if (xin == 0.0) return nrm2;
    std::vector<double> omega(xi.size());
    for (size_t i = 0; i < xi.size(); ++i) omega[i] = xi[i] / xin;
    const CMatrix q = correction_form(spec, eps.eps, t, omega);
    const double corr = std::real(Complex(u.adjoint() * (q * u)));
    return nrm2 + std::min(xin, 1.0 / xin) * corr;
}

EpsilonSearchResult find_epsilon(const SystemSpec& spec, const std::vector<double>& t_grid,
                                 const std::vector<std::vector<double>>& sphere_grid) {
    const int d = spec.d;
    for (const char* shape : {"geometric", "uniform"}) {
        double sigma = 1.0;
        for (int halvings = 0; halvings < 48; ++halvings, sigma *= 0.5) {
            std::vector<double> eps(d - 1);
            for (int j = 1; j <= d - 1; ++j)
                eps[j - 1] = (std::string(shape) == "geometric") ? std::pow(sigma, j) : sigma;

            double worst = 0.0, worst_t = 0.0;
            double lo = 0.0, hi = 0.0;  // extreme eigenvalues of the form
            std::vector<double> worst_omega;
            for (double t : t_grid)
                for (const auto& omega : sphere_grid) {
                    const CMatrix q = correction_form(spec, eps, t, omega);
                    Eigen::SelfAdjointEigenSolver<CMatrix> sa(q);
                    const double mn = sa.eigenvalues().minCoeff();
                    const double mx = sa.eigenvalues().maxCoeff();
                    lo = std::min(lo, mn);
                    hi = std::max(hi, mx);
                    const double nrm = std::max(std::abs(mn), std::abs(mx));
                    if (nrm > worst) {
                        worst = nrm;
                        worst_t = t;
                        worst_omega = omega;
                    }
                }
            if (worst <= 0.75) {
                EpsilonSearchResult out;
                out.weights.eps = eps;
                out.weights.b3_weights.assign(d, 1.0);
                out.equivalence.lower = 1.0 + std::min(0.0, lo);
                out.equivalence.upper = 1.0 + std::max(0.0, hi);
                out.equivalence.shape = shape;
                out.equivalence.sigma = sigma;
                out.equivalence.worst_correction = worst;
                out.equivalence.worst_t = worst_t;
                out.equivalence.worst_omega = worst_omega;
                return out;
            }
        }
    }
    throw NoAdmissibleEpsilon("find_epsilon: no admissible scale found");
}

DecayCertificate certify_decay(const SystemSpec& spec, const EpsilonWeights& eps,
                               const std::vector<FrequencyTrajectory>& trajectories,
                               const std::vector<CVector>& initial_vectors,
                               const EquivalenceReport* equivalence) {
    DecayCertificate cert;
    cert.gamma = std::numeric_limits<double>::infinity();
    for (const auto& traj : trajectories) {
        const double xin = xi_norm_of(traj.xi);
        const double bx2 = bracket_xi_sq(xin);
        TrajectoryDecay td;
        td.xi = traj.xi;
        td.gamma = std::numeric_limits<double>::infinity();

        std::vector<double> sq_t, sq_v;
        for (const CVector& v0 : initial_vectors) {
            double l0 = -1.0;
            for (size_t i = 0; i < traj.t_samples.size(); ++i) {
                const CVector u = traj.E_samples[i] * v0;
                const double lv = lyap_value(spec, eps, u, traj.t_samples[i], traj.xi);
                if (i == 0) {
                    l0 = std::max(lv, 1e-300);
                    continue;
                }
                const double dt = traj.t_samples[i] - traj.t_samples[0];
                if (dt <= 0 || bx2 == 0.0) continue;
                if (lv <= 0) continue;  // fully decayed, no constraint
                const double g = -std::log(lv / l0) / (bx2 * dt);
                td.gamma = std::min(td.gamma, g);
            }
        }
        // Squared-norm decay rate of the full propagator, for reporting.
        for (size_t i = 0; i < traj.t_samples.size(); ++i) {
            sq_t.push_back(traj.t_samples[i]);
            sq_v.push_back(traj.norms[i] * traj.norms[i]);
        }
        td.sqnorm_rate = fit_exp_rate(sq_t, sq_v);
        if (!std::isfinite(td.gamma)) td.gamma = 0.0;
        cert.per_trajectory.push_back(td);
        cert.gamma = std::min(cert.gamma, td.gamma);
    }
    if (!std::isfinite(cert.gamma)) cert.gamma = 0.0;
    if (equivalence && equivalence->lower > 0)
        cert.implied_C = equivalence->upper / equivalence->lower;
    return cert;
}

double derivative_spot_check(const SystemSpec& spec, const EpsilonWeights& eps, unsigned seed,
                             int n_points, double slack) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Smallest normalized pointwise rate  (-dL/dt) / ([xi]^2 L)  seen; the
    // differential inequality dL/dt + g [xi]^2 L <= slack * L then holds for
    // every g up to the returned value (within the slack).
    double inf_rate = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_points; ++i) {
        const double xi1 = std::pow(10.0, -2.0 + 3.0 * unif(rng));  // |xi| in [1e-2, 10]
        std::vector<double> xi(spec.n, 0.0);
        xi[0] = (unif(rng) < 0.5 ? -1.0 : 1.0) * xi1;
        const double t = spec.t0 + 20.0 * unif(rng);
        CVector u0(spec.d);
        for (int j = 0; j < spec.d; ++j) u0(j) = Complex(unif(rng) - 0.5, unif(rng) - 0.5);
        u0.normalize();

        const double h = 1e-3;
        OdeOptions opt;
        opt.rtol = opt.atol = 1e-11;
        MatrixRhs rhs = [&spec, &xi](double theta, const CMatrix& y) {
            return CMatrix((Complex(0, 1) * symbol_A(spec, theta, xi) - spec.B.eval(theta)) * y);
        };
        const CMatrix u1 = ode_integrate_to(rhs, t, u0, t + h, opt);
        const double l0 = lyap_value(spec, eps, u0, t, xi);
        const double l1 = lyap_value(spec, eps, CVector(u1.col(0)), t + h, xi);
        const double dldt = (l1 - l0) / h;
        inf_rate = std::min(inf_rate, (-dldt + slack * l0) / (bracket_xi_sq(xi1) * l0));
    }
    return inf_rate;
}

}  // namespace pdslab
