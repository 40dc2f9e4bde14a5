#include "pdslab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pdslab {

namespace {

constexpr double kGL8x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
constexpr double kGL8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                             0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                             0.2223810344533745, 0.1012285362903763};

void add_panel(std::vector<double>& r, std::vector<double>& w, double a, double b) {
    for (int g = 0; g < 8; ++g) {
        r.push_back(0.5 * (a + b) + 0.5 * (b - a) * kGL8x[g]);
        w.push_back(0.5 * (b - a) * kGL8w[g]);
    }
}

}  // namespace

QuadGrid make_quad_grid(int n, double xi_max, int refine) {
    if (n != 1 && n != 2) throw Error("make_quad_grid: n must be 1 or 2");
    QuadGrid grid;
    grid.n = n;
    grid.xi_max = xi_max;
    grid.refine = refine;

    std::vector<double> r, w;
    add_panel(r, w, 0.0, 1e-3);
    const int n_log = 12 * refine;
    for (int i = 0; i < n_log; ++i) {
        const double a = 1e-3 * std::pow(1e3, (double)i / n_log);
        const double b = 1e-3 * std::pow(1e3, (double)(i + 1) / n_log);
        add_panel(r, w, a, b);
    }
    const int n_lin = (int)std::ceil((xi_max - 1.0)) * refine;
    for (int i = 0; i < n_lin; ++i)
        add_panel(r, w, 1.0 + (xi_max - 1.0) * (double)i / n_lin,
                  1.0 + (xi_max - 1.0) * (double)(i + 1) / n_lin);

    if (n == 1) {
        for (size_t i = 0; i < r.size(); ++i) {
            grid.nodes.push_back({r[i]});
            grid.weights.push_back(w[i]);
            grid.nodes.push_back({-r[i]});
            grid.weights.push_back(w[i]);
        }
    } else {
        for (size_t i = 0; i < r.size(); ++i) {
            grid.nodes.push_back({r[i], 0.0});
            grid.weights.push_back(2.0 * std::numbers::pi * r[i] * w[i]);
        }
    }
    return grid;
}

double grid_l2(const QuadGrid& grid, const std::vector<double>& sq_values) {
    double acc = 0.0;
    for (size_t i = 0; i < grid.weights.size(); ++i) acc += grid.weights[i] * sq_values[i];
    return std::sqrt(std::max(acc, 0.0));
}

double grid_l1(const QuadGrid& grid, const std::vector<double>& abs_values) {
    double acc = 0.0;
    for (size_t i = 0; i < grid.weights.size(); ++i) acc += grid.weights[i] * abs_values[i];
    return acc;
}

SpectralData sample_vector_data(const QuadGrid& grid,
                                const std::function<CVector(const std::vector<double>&)>& f) {
    SpectralData data;
    data.grid = grid;
    data.values.reserve(grid.nodes.size());
    for (const auto& xi : grid.nodes) data.values.push_back(f(xi));
    return data;
}

double smooth_cutoff(double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    auto g = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    const double up = g(2.0 - 2.0 * r);
    return up / (up + g(2.0 * r - 1.0));
}

SpectralEvolution evolve_data(const SystemSpec& spec, const SpectralData& data, double s,
                              const std::vector<double>& t_samples, double ode_tol) {
    SpectralEvolution ev;
    ev.t_samples = t_samples;
    ev.u.resize(data.grid.nodes.size());
    OdeOptions opt;
    opt.rtol = opt.atol = ode_tol;
    for (size_t i = 0; i < data.grid.nodes.size(); ++i) {
        const auto& xi = data.grid.nodes[i];
        MatrixRhs rhs = [&spec, &xi](double t, const CMatrix& y) {
            return CMatrix((Complex(0, 1) * symbol_A(spec, t, xi) - spec.B.eval(t)) * y);
        };
        auto& out = ev.u[i];
        out.reserve(t_samples.size());
        ode_integrate(rhs, s, data.values[i], t_samples,
                      [&out](double, const CMatrix& y) { out.push_back(CVector(y.col(0))); },
                      opt);
    }
    return ev;
}

namespace {

// Order-2 objects regardless of the run order: N_2 = I + N^(1) + N^(2) and
// the scalar entry f1 of F_2.
PolySymbol n2_of(const DiagResult& dr) {
    PolySymbol n2 = PolySymbol::identity(dr.spec.d, dr.spec.n);
    n2 = sym_add(n2, dr.N_steps.at(0));
    n2 = sym_add(n2, dr.N_steps.at(1));
    return n2;
}

PolySymbol f2_of(const DiagResult& dr) {
    if (dr.order == 2) return dr.F;
    return sym_add(dr.F_steps.at(0), dr.F_steps.at(1));
}

}  // namespace

ScalarSpectralData build_w0(const DiagResult& dr, const Eigen::RowVectorXcd& W,
                            const SpectralData& u0, const std::vector<CVector>& u_at_t0,
                            double chi_c) {
    if (dr.order < 2) throw Error("build_w0: order >= 2 required");
    if (chi_c > dr.zone.c + 1e-12) throw Error("build_w0: chi_c exceeds the zone constant");
    const double t0 = dr.spec.t0;
    const PolySymbol n2 = n2_of(dr);
    const CMatrix minv = dr.sd.Minv.eval(t0);

    ScalarSpectralData w0;
    w0.grid = u0.grid;
    w0.values.resize(u0.grid.nodes.size(), 0.0);
    for (size_t i = 0; i < u0.grid.nodes.size(); ++i) {
        const auto& xi = u0.grid.nodes[i];
        double xin = 0;
        for (double x : xi) xin += x * x;
        xin = std::sqrt(xin);
        const double chi = smooth_cutoff(xin / chi_c);
        if (chi == 0.0) continue;
        const CVector v = minv * u_at_t0[i];
        const CVector z = n2.eval(t0, xi).partialPivLu().solve(v);
        w0.values[i] = (W * z)(0) * chi;
    }
    return w0;
}

std::vector<Complex> parabolic_propagate(const DiagResult& dr, const ScalarSpectralData& w0hat,
                                         double s, double t) {
    if (dr.order < 2) throw Error("parabolic_propagate: order >= 2 required");
    const PolySymbol f2 = f2_of(dr);
    std::vector<Complex> out(w0hat.values.size(), 0.0);
    for (size_t i = 0; i < w0hat.values.size(); ++i) {
        if (w0hat.values[i] == Complex(0.0)) continue;
        const auto& xi = w0hat.grid.nodes[i];
        const Complex integral = integrate_adaptive(
            [&f2, &xi](double theta) { return f2.eval(theta, xi)(0, 0); }, s, t, 1e-10);
        out[i] = std::exp(integral) * w0hat.values[i];
    }
    return out;
}

GapSeries diffusion_gap(const SystemSpec& spec, const DiagResult& dr, const SpectralData& u0,
                        const std::vector<double>& t_samples, double chi_c, double ode_tol) {
    const double t0 = spec.t0;
    std::vector<double> all_t;
    all_t.push_back(t0);
    for (double t : t_samples)
        if (t > t0) all_t.push_back(t);
    const SpectralEvolution ev = evolve_data(spec, u0, 0.0, all_t, ode_tol);

    std::vector<CVector> u_at_t0(u0.grid.nodes.size());
    for (size_t i = 0; i < u0.grid.nodes.size(); ++i) u_at_t0[i] = ev.u[i][0];

    const LimitRow lw = limit_row_W(dr, t0);
    const ScalarSpectralData w0 = build_w0(dr, lw.W, u0, u_at_t0, chi_c);
    const auto K = build_K(dr);

    std::vector<double> sq0(u0.grid.nodes.size());
    for (size_t i = 0; i < u0.grid.nodes.size(); ++i) sq0[i] = u0.values[i].squaredNorm();
    const double norm0 = grid_l2(u0.grid, sq0);

    GapSeries out;
    out.chi_c = chi_c;
    const PolySymbol f2 = f2_of(dr);
    for (size_t it = 1; it < all_t.size(); ++it) {
        const double t = all_t[it];
        std::vector<double> sq_gap(u0.grid.nodes.size(), 0.0);
        std::vector<double> sq_model(u0.grid.nodes.size(), 0.0);
        std::vector<double> sq_sol(u0.grid.nodes.size(), 0.0);
        for (size_t i = 0; i < u0.grid.nodes.size(); ++i) {
            const auto& xi = u0.grid.nodes[i];
            CVector model = CVector::Zero(spec.d);
            if (w0.values[i] != Complex(0.0)) {
                const Complex integral = integrate_adaptive(
                    [&f2, &xi](double theta) { return f2.eval(theta, xi)(0, 0); }, t0, t, 1e-10);
                model = K(t, xi) * (std::exp(integral) * w0.values[i]);
            }
            sq_gap[i] = (ev.u[i][it] - model).squaredNorm();
            sq_model[i] = model.squaredNorm();
            sq_sol[i] = ev.u[i][it].squaredNorm();
        }
        const double gap = grid_l2(u0.grid, sq_gap) / norm0;
        out.t.push_back(t);
        out.gap.push_back(gap);
        const double ceiling =
            (grid_l2(u0.grid, sq_sol) + grid_l2(u0.grid, sq_model)) / norm0;
        if (ceiling > 0)
            out.energy_ceiling_margin = std::max(out.energy_ceiling_margin, gap / ceiling);
    }
    out.fit_plain = fit_power_law(out.t, out.gap, false);
    out.fit_logcorr = fit_power_law(out.t, out.gap, true);
    return out;
}

DecayFit lp_lq_experiment(const SystemSpec& spec, const SpectralData& u0, int p, int q,
                          const std::vector<double>& t_samples, double ode_tol) {
    const bool ok = (p == 2 && q == 2) || (p == 1 && q == 2) || (p == 1 && q == 0);
    // q == 0 encodes q = infinity.
    if (!ok) throw UnsupportedPair("lp_lq_experiment: (p,q) must be (2,2), (1,2) or (1,inf)");
    const SpectralEvolution ev = evolve_data(spec, u0, 0.0, t_samples, ode_tol);

    std::vector<double> series;
    for (size_t it = 0; it < t_samples.size(); ++it) {
        std::vector<double> vals(u0.grid.nodes.size());
        if (q == 2) {
            for (size_t i = 0; i < vals.size(); ++i) vals[i] = ev.u[i][it].squaredNorm();
            series.push_back(grid_l2(u0.grid, vals));
        } else {
            // L^infinity(dx) through the L^1(dxi) norm of the Fourier transform.
            for (size_t i = 0; i < vals.size(); ++i) vals[i] = ev.u[i][it].norm();
            series.push_back(grid_l1(u0.grid, vals) / std::pow(2.0 * std::numbers::pi, u0.grid.n));
        }
    }
    return fit_power_law(t_samples, series, false);
}

HighFreqReport highfreq_decay_check(const SystemSpec& spec, const std::vector<double>& xi_grid,
                                    double t_end, double threshold, double ode_tol) {
    HighFreqReport rep;
    rep.threshold = threshold;
    rep.inf_rate = std::numeric_limits<double>::infinity();
    for (double x : xi_grid) {
        std::vector<double> ts;
        for (double t = 0.0; t <= t_end; t += t_end / 40.0) ts.push_back(t);
        std::vector<double> xi(spec.n, 0.0);
        xi[0] = x;
        const FrequencyTrajectory traj = evolve_system(spec, xi, 0.0, ts, ode_tol);
        const double rate = fit_exp_rate(traj.t_samples, traj.norms);
        rep.xi.push_back(x);
        rep.rate.push_back(rate);
        rep.inf_rate = std::min(rep.inf_rate, rate);
    }
    rep.pass = rep.inf_rate >= threshold;
    return rep;
}

}  // namespace pdslab
