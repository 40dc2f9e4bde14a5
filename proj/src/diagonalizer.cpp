#include "pdslab/diagonalizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdslab {

namespace {

// Canonical column phase: first entry of nonnegligible modulus made real positive.
void canonicalize_phase(CMatrix& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const Complex v = vectors(i, j);
            if (std::abs(v) > 1e-8) {
                vectors.col(j) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }
}

struct AlignedEig {
    CMatrix vectors;  // kernel column first
    CVector values;
};

// Eigendecomposition of B(t) with the kernel eigenvalue placed first and a
// deterministic ordering of the damped block.
AlignedEig kernel_first_eig(const CMatrix& b, const Tolerances& tol) {
    const EigDecomp ed = eig(b);
    const int d = (int)b.rows();
    const double scale = std::max(1.0, opnorm(b));
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const double mi = std::abs(ed.values(i)), mj = std::abs(ed.values(j));
        const bool keri = mi <= tol.kernel_eig * scale, kerj = mj <= tol.kernel_eig * scale;
        if (keri != kerj) return keri;
        const Complex a = ed.values(i), c = ed.values(j);
        if (a.real() != c.real()) return a.real() < c.real();
        return a.imag() < c.imag();
    });
    int nker = 0;
    for (int i = 0; i < d; ++i)
        if (std::abs(ed.values(i)) <= tol.kernel_eig * scale) ++nker;
    if (nker != 1)
        throw KernelDimensionUnsupported("slow diagonalizer: kernel dimension " +
                                         std::to_string(nker));
    AlignedEig out;
    out.vectors.resize(d, d);
    out.values.resize(d);
    for (int i = 0; i < d; ++i) {
        out.vectors.col(i) = ed.vectors.col(order[i]).normalized();
        out.values(i) = ed.values(order[i]);
    }
    canonicalize_phase(out.vectors);
    return out;
}

// Reorder/flip the columns of `cur` to match `ref` by maximal overlap.
double align_to(const CMatrix& ref, AlignedEig& cur) {
    const int d = (int)ref.cols();
    std::vector<int> pick(d, -1);
    std::vector<bool> used(d, false);
    double worst = 1.0;
    for (int j = 0; j < d; ++j) {
        double best = -1.0;
        int arg = -1;
        for (int m = 0; m < d; ++m) {
            if (used[m]) continue;
            const double ov = std::abs(ref.col(j).dot(cur.vectors.col(m)));
            if (ov > best) {
                best = ov;
                arg = m;
            }
        }
        pick[j] = arg;
        used[arg] = true;
        worst = std::min(worst, best);
    }
    CMatrix v(d, d);
    CVector w(d);
    for (int j = 0; j < d; ++j) {
        v.col(j) = cur.vectors.col(pick[j]);
        w(j) = cur.values(pick[j]);
    }
    cur.vectors = v;
    cur.values = w;
    canonicalize_phase(cur.vectors);
    return worst;
}

}  // namespace

SlowDiagonalizer build_slow_diagonalizer(const SystemSpec& spec, const std::vector<double>& t_grid,
                                         const Tolerances& tol) {
    if (t_grid.empty()) throw Error("build_slow_diagonalizer: empty grid");
    SlowDiagonalizer sd;
    sd.t_grid = t_grid;

    std::vector<AlignedEig> samples;
    samples.reserve(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) {
        AlignedEig ae = kernel_first_eig(spec.B.eval(t_grid[i]), tol);
        if (i > 0) {
            const double ov = align_to(samples.back().vectors, ae);
            sd.min_overlap = std::min(sd.min_overlap, ov);
            if (ov < tol.column_overlap_fail) {
                std::ostringstream os;
                os << "eigenvector continuation lost between t = " << t_grid[i - 1] << " and "
                   << t_grid[i] << " (overlap " << ov << "); refine the grid";
                throw ContinuationFailure(os.str());
            }
        }
        samples.push_back(std::move(ae));
    }

    double drift = 0.0;
    for (const auto& s : samples) drift = std::max(drift, opnorm(s.vectors - samples[0].vectors));
    sd.constant = drift <= 1e-10;

    const int d = spec.d;
    if (sd.constant) {
        sd.M = MatrixFunction::constant(samples[0].vectors);
        sd.Minv = MatrixFunction::constant(samples[0].vectors.inverse());
        // Exact conjugation in the rational algebra keeps Dtil analytic.
        const MatrixFunction conj = sd.Minv * spec.B * sd.M;
        sd.Dtil = conj.block(1, 1, d - 1, d - 1);
    } else {
        const CMatrix ref = samples[0].vectors;
        auto bfun = spec.B;
        auto evalM = [bfun, ref, tol](double t) {
            AlignedEig ae = kernel_first_eig(bfun.eval(t), tol);
            align_to(ref, ae);
            return ae.vectors;
        };
        sd.M = MatrixFunction::generic(evalM, d, d, 0);
        sd.Minv = MatrixFunction::generic(
            [evalM](double t) { return CMatrix(evalM(t).inverse()); }, d, d, 0);
        const MatrixFunction conj = sd.Minv * spec.B * sd.M;
        sd.Dtil = conj.block(1, 1, d - 1, d - 1);
    }

    // Validate the conjugation and the spectral gap along the grid.
    sd.kappa_prime = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        const CMatrix m = sd.M.eval(t);
        const CMatrix mi = sd.Minv.eval(t);
        const CMatrix b = spec.B.eval(t);
        CMatrix bd = CMatrix::Zero(d, d);
        bd.bottomRightCorner(d - 1, d - 1) = sd.Dtil.eval(t);
        const double resid = opnorm(mi * b * m - bd);
        if (resid > tol.diag_residual * std::max(1.0, opnorm(b))) {
            std::ostringstream os;
            os << "block-diagonalization residual " << resid << " at t = " << t;
            throw Error(os.str());
        }
        const EigDecomp ev = eig(sd.Dtil.eval(t));
        for (Eigen::Index i = 0; i < ev.values.size(); ++i)
            sd.kappa_prime = std::min(sd.kappa_prime, ev.values(i).real());
        const double c = opnorm(m) * opnorm(mi);
        sd.cond_profile.push_back(c);
        sd.cond_max = std::max(sd.cond_max, c);
    }
    if (sd.kappa_prime <= tol.kappa_min) {
        std::ostringstream os;
        os << "damped block spectral gap " << sd.kappa_prime << " below " << tol.kappa_min;
        throw SpectralGapViolation(os.str());
    }
    return sd;
}

FirstTransform first_transform(const SystemSpec& spec, const SlowDiagonalizer& sd) {
    const int d = spec.d;
    FirstTransform ft;
    ft.D = sd.Dtil.embedded(d, d, 1, 1);

    ft.R1 = PolySymbol::zero(d, spec.n, 1);
    for (int k = 0; k < spec.n; ++k) {
        const MatrixFunction ak = (sd.Minv * spec.A[k] * sd.M).scaled(Complex(0.0, 1.0));
        ft.R1.add_term(MultiIdx::unit(spec.n, k), ak);
    }
    // (d/dt M^-1) M, plus whatever the block split of M^-1 B M left outside
    // the exact bdiag(0, Dtil) shape (zero on the rational path).
    MatrixFunction c0 = sd.Minv.derivative() * sd.M;
    const MatrixFunction leftover = sd.Minv * spec.B * sd.M - ft.D;
    if (!leftover.is_zero()) c0 = c0 + leftover;
    if (!c0.is_zero()) ft.R1.add_term(MultiIdx::zero(spec.n), c0);
    return ft;
}

namespace {

// Exact conjugation defect of the current (N, F) pair:
//   defect = -[D, N] + R1 N - dN/dt - N F,
// so that V = N W maps solutions of  W' = (-D + F + N^-1 defect) W  to
// solutions of  V' = (-D + R1) V.
PolySymbol compute_defect(const MatrixFunction& D, const PolySymbol& R1, const PolySymbol& N,
                          const PolySymbol& F) {
    PolySymbol out = sym_sub(sym_rmul(N, D), sym_lmul(D, N));  // -[D, N]
    out = sym_add(out, sym_mul(R1, N));
    out = sym_sub(out, sym_dt(N));
    if (!F.empty()) out = sym_sub(out, sym_mul(N, F));
    return out;
}

std::pair<PolySymbol, PolySymbol> split_by_grade(const PolySymbol& p, int gmax) {
    PolySymbol low = PolySymbol::zero(p.d, p.n, p.declared_order);
    PolySymbol high = PolySymbol::zero(p.d, p.n, gmax + 1);
    for (const auto& [a, c] : p.terms)
        (a.degree() + c.torder() <= gmax ? low : high).add_term(a, c);
    return {low, high};
}

}  // namespace

void hierarchy_step(HierarchyState& state, int step, const MatrixFunction& D,
                    const MatrixFunction& Dtil, const PolySymbol& R1, const Tolerances& tol) {
    const int d = R1.d;
    const auto [cancel, keep] = split_by_grade(state.defect, step);
    const auto [diag_part, off_part] = bdiag_split(cancel);

    // Block-diagonal part is absorbed into F directly.
    if (!diag_part.empty()) {
        state.F = sym_add(state.F, diag_part);
        state.F.declared_order = 1;
    }

    // Off-diagonal part: solve [D, N^(step)] = off_part term by term.
    PolySymbol nstep = PolySymbol::zero(d, R1.n, step);
    const MatrixFunction dtil_inv = Dtil.inverse();
    for (const auto& [a, c] : off_part.terms) {
        const MatrixFunction c12 = c.block(0, 1, 1, d - 1);
        const MatrixFunction c21 = c.block(1, 0, d - 1, 1);
        const MatrixFunction n12 = (c12 * dtil_inv).scaled(-1.0);
        const MatrixFunction n21 = dtil_inv * c21;
        MatrixFunction nc = n12.embedded(d, d, 0, 1) + n21.embedded(d, d, 1, 0);
        nstep.add_term(a, nc);
        // Pointwise residual of the commutator identity, on a few samples.
        for (double t : {1.0, 8.0, 64.0}) {
            const CMatrix dt = Dtil.eval(t);
            SylvesterBlocks nb{n12.eval(t), n21.eval(t)};
            const double scale = std::max(opnorm(c12.eval(t)), opnorm(c21.eval(t)));
            if (scale > 0) {
                const double r =
                    sylvester_residual(dt, nb, c12.eval(t), c21.eval(t)) / scale;
                state.sylvester_worst = std::max(state.sylvester_worst, r);
                if (r > tol.sylvester_residual)
                    throw Error("hierarchy_step: Sylvester residual " + std::to_string(r));
            }
        }
    }
    if (!nstep.empty()) state.N = sym_add(state.N, nstep);

    state.defect = compute_defect(D, R1, state.N, state.F);
    const int g = state.defect.min_grade();
    if (g <= step) {
        std::ostringstream os;
        os << "hierarchy_step " << step << ": defect grade did not advance (min grade " << g
           << ")";
        throw TruncationOverflow(os.str());
    }
    state.defect.declared_order = step + 1;
}

CMatrix DiagResult::rhs_original(double t, const std::vector<double>& xi) const {
    return Complex(0, 1) * symbol_A(spec, t, xi) - spec.B.eval(t);
}

CMatrix DiagResult::rhs_transformed(double t, const std::vector<double>& xi) const {
    return CMatrix(-D.eval(t) + F.eval(t, xi) + remainder(t, xi));
}

CMatrix DiagResult::rhs_blockdiag(double t, const std::vector<double>& xi) const {
    return CMatrix(-D.eval(t) + F.eval(t, xi));
}

CMatrix DiagResult::remainder(double t, const std::vector<double>& xi) const {
    const CMatrix nm = N.eval(t, xi);
    const CMatrix dm = defect.eval(t, xi);
    return nm.partialPivLu().solve(dm);
}

CMatrix DiagResult::eval_N(double t, const std::vector<double>& xi) const { return N.eval(t, xi); }

Complex DiagResult::f1(double t, const std::vector<double>& xi) const {
    return F.eval(t, xi)(0, 0);
}

DiagResult hierarchy_run(const SystemSpec& spec, int k, double c_max, const Tolerances& tol) {
    if (k < 1) throw Error("hierarchy_run: k >= 1 required");
    {
        // (B1)/(B2) are the only hypotheses the hierarchy needs.
        const HypothesisReport rep = check_b1_b2(spec, default_t_grid(), tol);
        if (!rep.b1_ok || !rep.b2_ok)
            throw Error("hierarchy_run: system fails (B1)/(B2) on the default grid");
    }

    DiagResult dr;
    dr.order = k;
    dr.spec = spec;

    std::vector<double> grid;
    for (double t = std::max(1.0, spec.t0); t <= tol.zone_t_cap; t *= 2.0) grid.push_back(t);
    dr.sd = build_slow_diagonalizer(spec, grid, tol);

    const FirstTransform ft = first_transform(spec, dr.sd);
    dr.D = ft.D;
    dr.R1 = ft.R1;

    HierarchyState state;
    state.N = PolySymbol::identity(spec.d, spec.n);
    state.F = PolySymbol::zero(spec.d, spec.n, 1);
    state.defect = compute_defect(dr.D, dr.R1, state.N, state.F);
    state.defect.declared_order = 1;

    for (int step = 1; step <= k; ++step) {
        PolySymbol n_before = state.N;
        PolySymbol f_before = state.F;
        hierarchy_step(state, step, dr.D, dr.sd.Dtil, dr.R1, tol);
        dr.N_steps.push_back(sym_sub(state.N, n_before));
        dr.F_steps.push_back(sym_sub(state.F, f_before));
    }
    dr.N = state.N;
    dr.F = state.F;
    dr.defect = state.defect;
    dr.sylvester_worst = state.sylvester_worst;

    // Neumann inverse of N = I + S, truncated once the grade exceeds k+1.
    {
        PolySymbol s = sym_sub(dr.N, PolySymbol::identity(spec.d, spec.n));
        PolySymbol ninv = PolySymbol::identity(spec.d, spec.n);
        PolySymbol power = PolySymbol::identity(spec.d, spec.n);
        double sign = -1.0;
        for (int j = 1; j <= k + 1; ++j) {
            power = sym_mul(power, s);
            if (power.empty() || power.min_grade() > k + 1) break;
            ninv = sym_add(ninv, sym_scale(power, sign));
            sign = -sign;
        }
        dr.Ninv = ninv;
        dr.Ninv.declared_order = 0;
    }

    // Zone constant: shrink c until sup ||N - I|| <= 1/2 on zone samples.
    {
        const double t0 = std::max(spec.t0, 1.0);
        double c = c_max;
        while (true) {
            if (c < tol.zone_floor)
                throw ZoneCollapse("hierarchy_run: no zone constant above " +
                                   std::to_string(tol.zone_floor));
            const Zone zone(c, t0);
            double sup = 0.0;
            for (double t = zone.t0; t <= tol.zone_t_cap; t *= 4.0)
                for (double frac : {1.0, 0.7, 0.4, 0.1})
                    for (double sgn : {1.0, -1.0}) {
                        std::vector<double> xi(spec.n, 0.0);
                        xi[0] = sgn * frac * c;
                        const CMatrix nm = dr.N.eval(t, xi);
                        sup = std::max(sup, opnorm(nm - CMatrix::Identity(spec.d, spec.d)));
                    }
            if (sup <= tol.neumann_margin) {
                dr.zone = zone;
                dr.margin = sup;
                break;
            }
            c *= 0.5;
        }
    }

    dr.remainder_fit = estimate_order(dr.defect, dr.zone, tol);
    dr.parabolic = extract_parabolic(dr, /*throw_on_violation=*/false, tol);
    return dr;
}

ParabolicCoeffs extract_parabolic(const DiagResult& dr, bool throw_on_violation,
                                  const Tolerances& tol) {
    (void)tol;
    if (dr.order < 2) throw Error("extract_parabolic: order >= 2 required");
    const int n = dr.spec.n;
    ParabolicCoeffs pc;
    MatrixFunction alpha = MatrixFunction::zero(n, n);
    MatrixFunction beta = MatrixFunction::zero(n, 1);
    MatrixFunction gamma = MatrixFunction::zero(1, 1);

    for (const auto& [a, c] : dr.F.terms) {
        const MatrixFunction s = c.block(0, 0, 1, 1);
        if (s.is_zero()) continue;
        const int deg = a.degree();
        if (deg == 0) {
            gamma = gamma + s.scaled(Complex(0, -1));  // const term = i gamma
        } else if (deg == 1) {
            for (int i = 0; i < n; ++i)
                if (a.a[i] == 1) beta = beta + s.scaled(Complex(0, -1)).embedded(n, 1, i, 0);
        } else if (deg == 2) {
            // quadratic term = -xi^T alpha xi, symmetrized
            for (int i = 0; i < n; ++i) {
                if (a.a[i] == 2) alpha = alpha + s.scaled(-1.0).embedded(n, n, i, i);
                for (int j = i + 1; j < n; ++j)
                    if (a.a[i] == 1 && a.a[j] == 1) {
                        alpha = alpha + s.scaled(-0.5).embedded(n, n, i, j);
                        alpha = alpha + s.scaled(-0.5).embedded(n, n, j, i);
                    }
            }
        }
        // degree >= 3 terms stay in F; the scalar propagator keeps them.
    }
    pc.alpha = alpha;
    pc.beta = beta;
    pc.gamma = gamma;

    pc.re_alpha_positive = true;
    pc.alpha_min_eig = std::numeric_limits<double>::infinity();
    for (double t : dr.sd.t_grid) {
        const CMatrix am = alpha.eval(t);
        Eigen::SelfAdjointEigenSolver<CMatrix> sa(0.5 * (am + am.adjoint()));
        const double mn = sa.eigenvalues().minCoeff();
        if (mn < pc.alpha_min_eig) {
            pc.alpha_min_eig = mn;
            pc.alpha_worst_t = t;
        }
    }
    if (pc.alpha_min_eig <= 0) {
        pc.re_alpha_positive = false;
        if (throw_on_violation) {
            std::ostringstream os;
            os << "Re alpha not positive definite: min eig " << pc.alpha_min_eig << " at t = "
               << pc.alpha_worst_t;
            throw PositivityViolation(os.str());
        }
    }
    return pc;
}

std::function<CVector(double, const std::vector<double>&)> build_K(const DiagResult& dr) {
    if (dr.order < 2) throw Error("build_K: order >= 2 required");
    PolySymbol n2 = PolySymbol::identity(dr.spec.d, dr.spec.n);
    n2 = sym_add(n2, dr.N_steps[0]);
    n2 = sym_add(n2, dr.N_steps[1]);
    const MatrixFunction m = dr.sd.M;
    const int d = dr.spec.d;
    return [n2, m, d](double t, const std::vector<double>& xi) {
        CVector e1 = CVector::Zero(d);
        e1(0) = 1.0;
        return CVector(m.eval(t) * (n2.eval(t, xi) * e1));
    };
}

}  // namespace pdslab
