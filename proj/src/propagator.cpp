#include "pdslab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdslab/fit.hpp"

namespace pdslab {

Generator original_generator(const SystemSpec& spec, const std::vector<double>& xi) {
    return [spec, xi](double t) { return CMatrix(Complex(0, 1) * symbol_A(spec, t, xi) -
                                                 spec.B.eval(t)); };
}

Generator transformed_generator(const DiagResult& dr, const std::vector<double>& xi) {
    return [&dr, xi](double t) { return dr.rhs_transformed(t, xi); };
}

Generator blockdiag_generator(const DiagResult& dr, const std::vector<double>& xi) {
    return [&dr, xi](double t) { return dr.rhs_blockdiag(t, xi); };
}

FrequencyTrajectory evolve(const Generator& gen, int d, const std::vector<double>& xi, double s,
                           const std::vector<double>& t_samples, double tol,
                           const Tolerances& lab_tol) {
    if (tol < lab_tol.ode_tol_floor || tol > lab_tol.ode_tol_ceil)
        throw Error("evolve: tolerance outside [1e-12, 1e-4]");
    for (double t : t_samples)
        if (t < s) throw Error("evolve: sample before start time");

    FrequencyTrajectory traj;
    traj.xi = xi;
    traj.s = s;
    traj.tol_used = tol;

    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    MatrixRhs rhs = [&gen](double t, const CMatrix& y) { return CMatrix(gen(t) * y); };
    ode_integrate(rhs, s, CMatrix::Identity(d, d), t_samples,
                  [&traj](double t, const CMatrix& y) {
                      traj.t_samples.push_back(t);
                      traj.E_samples.push_back(y);
                      traj.norms.push_back(opnorm(y));
                  },
                  opt);
    return traj;
}

FrequencyTrajectory evolve_system(const SystemSpec& spec, const std::vector<double>& xi, double s,
                                  const std::vector<double>& t_samples, double tol) {
    return evolve(original_generator(spec, xi), spec.d, xi, s, t_samples, tol);
}

double verify_cocycle(const Generator& gen, const FrequencyTrajectory& traj, int n_splits,
                      std::mt19937_64& rng) {
    if (traj.t_samples.size() < 2) return 0.0;
    const int d = (int)traj.E_samples[0].rows();
    const double t_end = traj.t_samples.back();
    const CMatrix& e_end = traj.E_samples.back();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    OdeOptions opt;
    opt.rtol = opt.atol = traj.tol_used;
    MatrixRhs rhs = [&gen](double t, const CMatrix& y) { return CMatrix(gen(t) * y); };

    double worst = 0.0;
    for (int i = 0; i < n_splits; ++i) {
        const double t1 = traj.s + unif(rng) * (t_end - traj.s);
        const CMatrix e_mid = ode_integrate_to(rhs, traj.s, CMatrix::Identity(d, d), t1, opt);
        const CMatrix e_top = ode_integrate_to(rhs, t1, CMatrix::Identity(d, d), t_end, opt);
        worst = std::max(worst, opnorm(e_top * e_mid - e_end));
    }
    return worst;
}

namespace {

Complex simpson(double a, double b, Complex fa, Complex fm, Complex fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

Complex adaptive_step(const std::function<Complex(double)>& f, double a, double b, Complex fa,
                      Complex fm, Complex fb, Complex whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Complex flm = f(lm), frm = f(rm);
    const Complex left = simpson(a, m, fa, flm, fm);
    const Complex right = simpson(m, b, fm, frm, fb);
    const Complex sum = left + right;
    if (depth <= 0) throw QuadratureFailure("integrate_adaptive: recursion depth exhausted");
    if (std::abs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
    return adaptive_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const Complex fa = f(a), fm = f(m), fb = f(b);
    const Complex whole = simpson(a, b, fa, fm, fb);
    return adaptive_step(f, a, b, fa, fm, fb, whole, std::max(tol, 1e-14), 48);
}

ThetaBlock theta_block(const DiagResult& dr, const std::vector<double>& xi,
                       const Tolerances& tol) {
    ThetaBlock tb;
    const DiagResult* p = &dr;
    auto xiv = xi;
    const double tol_quad = tol.quad_tol;
    tb.Xi = [p, xiv, tol_quad](double t, double s) {
        const Complex integral = integrate_adaptive(
            [p, &xiv](double theta) { return p->f1(theta, xiv); }, s, t, tol_quad);
        return std::exp(integral);
    };
    const int d = dr.spec.d;
    tb.damped = [p, xiv, d](double t, double s) {
        OdeOptions opt;
        opt.rtol = opt.atol = 1e-11;
        MatrixRhs rhs = [p, &xiv, d](double theta, const CMatrix& y) {
            const CMatrix full = p->rhs_blockdiag(theta, xiv);
            return CMatrix(full.bottomRightCorner(d - 1, d - 1) * y);
        };
        return ode_integrate_to(rhs, s, CMatrix::Identity(d - 1, d - 1), t, opt);
    };
    // Fitted decay rate of the damped block over a unit-scale window.
    {
        const double s0 = std::max(dr.spec.t0, dr.zone.t0);
        std::vector<double> ts, ns;
        for (double dt = 0.5; dt <= 8.0; dt += 0.5) {
            ts.push_back(dt);
            ns.push_back(opnorm(tb.damped(s0 + dt, s0)));
        }
        tb.ctilde = fit_exp_rate(ts, ns, 1.0);
    }
    return tb;
}

namespace {

// Per-interval propagators of the damped block on a uniform grid, by RK.
std::vector<CMatrix> damped_steps(const DiagResult& dr, const std::vector<double>& xiv,
                                  const std::vector<double>& grid) {
    const int d = dr.spec.d;
    OdeOptions opt;
    opt.rtol = opt.atol = 1e-11;
    MatrixRhs rhs = [&dr, &xiv, d](double theta, const CMatrix& y) {
        return CMatrix(dr.rhs_blockdiag(theta, xiv).bottomRightCorner(d - 1, d - 1) * y);
    };
    std::vector<CMatrix> s(grid.size() - 1);
    for (size_t j = 0; j + 1 < grid.size(); ++j)
        s[j] = ode_integrate_to(rhs, grid[j], CMatrix::Identity(d - 1, d - 1), grid[j + 1], opt);
    return s;
}

// Cumulative integrals of f1 on the grid (5-point Gauss-Legendre per interval).
std::vector<Complex> f1_cumulative(const DiagResult& dr, const std::vector<double>& xiv,
                                   const std::vector<double>& grid) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    std::vector<Complex> acc(grid.size(), 0.0);
    for (size_t j = 0; j + 1 < grid.size(); ++j) {
        const double a = grid[j], b = grid[j + 1];
        Complex q = 0.0;
        for (int g = 0; g < 5; ++g) {
            const double theta = 0.5 * (a + b) + 0.5 * (b - a) * gx[g];
            q += gw[g] * dr.f1(theta, xiv);
        }
        q *= 0.5 * (b - a);
        acc[j + 1] = acc[j] + q;
    }
    return acc;
}

}  // namespace

FrequencyTrajectory volterra_solve(const DiagResult& dr, const std::vector<double>& xi, double s,
                                   double t_end, int n_out, VolterraReport* report,
                                   const Tolerances& tol) {
    if (t_end <= s) throw Error("volterra_solve: empty time window");
    const int d = dr.spec.d;
    const double xin = [&xi] {
        double q = 0;
        for (double x : xi) q += x * x;
        return std::sqrt(q);
    }();
    const double zone_load = (t_end) * std::pow(xin, 0.5 * (dr.order + 1));
    if (!dr.zone.contains(std::max(s, dr.zone.t0), xin) || zone_load > 4.0) {
        std::ostringstream os;
        os << "volterra_solve: (t,xi) outside the contraction zone (t |xi|^{(k+1)/2} = "
           << zone_load << ")";
        throw NonContraction(os.str());
    }

    // Uniform grid; outputs land on multiples of stride.
    const double span = t_end - s;
    int m = (int)std::ceil(span * 8.0);
    m = std::max(m, 4 * n_out);
    m = ((m + n_out - 1) / n_out) * n_out;  // divisible by n_out
    const double h = span / m;
    std::vector<double> grid(m + 1);
    for (int j = 0; j <= m; ++j) grid[j] = s + h * j;

    const std::vector<CMatrix> steps = damped_steps(dr, xi, grid);
    const std::vector<Complex> if1 = f1_cumulative(dr, xi, grid);

    // Theta(t_i, t_j) = diag( exp(if1_i - if1_j), damped product ).
    std::vector<CMatrix> theta0(m + 1);  // Theta(t_i, s)
    {
        CMatrix acc = CMatrix::Identity(d - 1, d - 1);
        theta0[0] = CMatrix::Identity(d, d);
        for (int i = 1; i <= m; ++i) {
            acc = steps[i - 1] * acc;
            CMatrix th = CMatrix::Zero(d, d);
            th(0, 0) = std::exp(if1[i]);
            th.bottomRightCorner(d - 1, d - 1) = acc;
            theta0[i] = th;
        }
    }
    auto theta_back = [&](int i, int back) {  // Theta(t_i, t_{i-back}), back in {1,2,3}
        CMatrix acc = CMatrix::Identity(d - 1, d - 1);
        for (int j = i - back; j < i; ++j) acc = steps[j] * acc;
        CMatrix th = CMatrix::Zero(d, d);
        th(0, 0) = std::exp(if1[i] - if1[i - back]);
        th.bottomRightCorner(d - 1, d - 1) = acc;
        return th;
    };
    std::vector<CMatrix> th1(m + 1), th2(m + 1), th3(m + 1);
    for (int i = 1; i <= m; ++i) th1[i] = theta_back(i, 1);
    for (int i = 2; i <= m; ++i) th2[i] = theta_back(i, 2);
    for (int i = 3; i <= m; ++i) th3[i] = theta_back(i, 3);

    std::vector<CMatrix> rker(m + 1);
    std::vector<double> rnorm_cum(m + 1, 0.0);
    for (int i = 0; i <= m; ++i) rker[i] = dr.remainder(grid[i], xi);
    for (int i = 1; i <= m; ++i)
        rnorm_cum[i] =
            rnorm_cum[i - 1] + 0.5 * h * (opnorm(rker[i - 1]) + opnorm(rker[i]));

    std::vector<CMatrix> e = theta0;  // zeroth Picard iterate
    std::vector<CMatrix> g(m + 1), j_int(m + 1), e_new(m + 1);
    double diff_prev = std::numeric_limits<double>::infinity();
    int iter = 0;
    double diff = std::numeric_limits<double>::infinity();
    double contraction = 0.0;
    for (; iter < tol.picard_max_iter; ++iter) {
        for (int i = 0; i <= m; ++i) g[i] = rker[i] * e[i];
        // March the weighted integral J_i = int_s^{t_i} Theta(t_i,.) G:
        //   even i: Simpson pair from i-2; odd i >= 3: 3/8 rule from i-3.
        j_int[0] = CMatrix::Zero(d, d);
        if (m >= 1) j_int[1] = 0.5 * h * (th1[1] * g[0] + g[1]);
        for (int i = 2; i <= m; ++i) {
            if (i % 2 == 0) {
                j_int[i] = th2[i] * j_int[i - 2] +
                           h / 3.0 * (th2[i] * g[i - 2] + 4.0 * (th1[i] * g[i - 1]) + g[i]);
            } else if (i >= 3) {
                j_int[i] = th3[i] * j_int[i - 3] +
                           3.0 * h / 8.0 *
                               (th3[i] * g[i - 3] + 3.0 * (th2[i] * g[i - 2]) +
                                3.0 * (th1[i] * g[i - 1]) + g[i]);
            }
        }
        diff = 0.0;
        for (int i = 0; i <= m; ++i) {
            e_new[i] = theta0[i] + j_int[i];
            diff = std::max(diff, opnorm(e_new[i] - e[i]));
        }
        e.swap(e_new);
        if (iter >= 1) {
            contraction = (diff_prev > 0) ? diff / diff_prev : 0.0;
            if (iter >= 3 && contraction >= 1.0 && diff > tol.picard_tol) {
                std::ostringstream os;
                os << "volterra_solve: no contraction (factor " << contraction << ")";
                throw NonContraction(os.str());
            }
        }
        diff_prev = diff;
        if (diff <= tol.picard_tol) break;
    }
    if (diff > tol.picard_tol)
        throw NonContraction("volterra_solve: Picard did not reach tolerance");

    if (report) {
        report->iterations = iter + 1;
        report->final_diff = diff;
        report->contraction = contraction;
        report->apriori_max_ratio = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double bound = std::exp(rnorm_cum[i]);
            report->apriori_max_ratio =
                std::max(report->apriori_max_ratio, opnorm(e[i]) / bound);
        }
    }

    FrequencyTrajectory traj;
    traj.xi = xi;
    traj.s = s;
    traj.tol_used = tol.picard_tol;
    const int stride = m / n_out;
    for (int i = 0; i <= m; i += stride) {
        traj.t_samples.push_back(grid[i]);
        traj.E_samples.push_back(e[i]);
        traj.norms.push_back(opnorm(e[i]));
    }
    return traj;
}

XiBoundReport uniform_xi_bound(const DiagResult& dr, double delta, double t_cap, double ode_tol,
                               const Tolerances& tol) {
    auto scan = [&](int density) {
        XiBoundReport rep;
        const double s = dr.zone.t0;
        const int nxi = 6 * density;
        for (int ix = 0; ix < nxi; ++ix) {
            const double xi1 =
                dr.zone.c * std::pow(1e-3 / dr.zone.c, (double)ix / (nxi - 1));
            std::vector<double> xiv(dr.spec.n, 0.0);
            xiv[0] = xi1;
            const double t_max = std::min(t_cap, delta / (xi1 * xi1));
            if (t_max <= s) continue;
            std::vector<double> tsamp;
            const int nt = 8 * density;
            for (int it = 0; it <= nt; ++it)
                tsamp.push_back(s + (t_max - s) * (double)it / nt);
            const FrequencyTrajectory traj =
                evolve(transformed_generator(dr, xiv), dr.spec.d, xiv, s, tsamp, ode_tol, tol);
            // |Xi(t, s)| via the cumulative f1 integrals on the same grid.
            const std::vector<Complex> if1 = f1_cumulative(dr, xiv, tsamp);
            for (size_t i = 0; i < tsamp.size(); ++i) {
                const double ratio = traj.norms[i] / std::abs(std::exp(if1[i]));
                ++rep.points;
                if (ratio > rep.C) {
                    rep.C = ratio;
                    rep.worst_t = tsamp[i];
                    rep.worst_xi = xi1;
                }
            }
        }
        return rep;
    };
    XiBoundReport rep = scan(1);
    const XiBoundReport fine = scan(2);
    rep.C_refined = fine.C;
    rep.rel_change = (rep.C > 0) ? std::abs(fine.C - rep.C) / rep.C : 0.0;
    rep.points += fine.points;
    return rep;
}

LimitRow limit_row_W(const DiagResult& dr, double s, double T_max, double ode_tol) {
    const int d = dr.spec.d;
    const std::vector<double> xi0(dr.spec.n, 0.0);

    // Decay order of the remainder at xi = 0 decides integrability of the tail.
    std::vector<double> ts, rn;
    double rmax = 0.0;
    for (double t = std::max(s, 1.0); t <= T_max; t *= 2.0) {
        const double v = opnorm(dr.remainder(t, xi0));
        ts.push_back(t);
        rn.push_back(v);
        rmax = std::max(rmax, v);
    }
    LimitRow out;
    out.T_used = T_max;
    double tail = 0.0;
    if (rmax > 1e-15) {
        std::vector<double> lx, ly;
        for (size_t i = 0; i < ts.size(); ++i)
            if (rn[i] > 1e-300) {
                lx.push_back(std::log(ts[i]));
                ly.push_back(std::log(rn[i]));
            }
        const double p = -linear_fit(lx, ly).slope;
        out.tail_order = p;
        if (p <= 1.1)
            throw TailNotIntegrable("limit_row_W: ||R(t,0)|| decays like t^-" + std::to_string(p));
        tail = rn.back() * ts.back() / (p - 1.0);
    } else {
        out.tail_order = std::numeric_limits<double>::infinity();
    }

    OdeOptions opt;
    opt.rtol = opt.atol = ode_tol;
    MatrixRhs rhs = [&dr, &xi0](double t, const CMatrix& y) {
        return CMatrix(dr.rhs_transformed(t, xi0) * y);
    };
    const CMatrix e_final = ode_integrate_to(rhs, s, CMatrix::Identity(d, d), T_max, opt);
    out.W = e_final.row(0);
    out.error_estimate = tail + 20.0 * ode_tol;
    return out;
}

}  // namespace pdslab
