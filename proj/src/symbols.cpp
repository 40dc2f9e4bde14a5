#include "pdslab/symbols.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace pdslab {

int PolySymbol::max_degree() const {
    int m = 0;
    for (const auto& [a, c] : terms) m = std::max(m, a.degree());
    return m;
}

int PolySymbol::min_grade() const {
    int g = TORDER_ZERO;
    for (const auto& [a, c] : terms) g = std::min(g, a.degree() + c.torder());
    return g;
}

CMatrix PolySymbol::eval(double t, const std::vector<double>& xi) const {
    if ((int)xi.size() != n) throw DimensionMismatch("PolySymbol::eval: xi length");
    CMatrix acc = CMatrix::Zero(d, d);
    for (const auto& [a, c] : terms) {
        double mono = 1.0;
        for (int k = 0; k < n; ++k) mono *= std::pow(xi[k], a.a[k]);
        if (mono != 0.0) acc += mono * c.eval(t);
    }
    return acc;
}

PolySymbol PolySymbol::zero(int d, int n, int declared_order) {
    PolySymbol p;
    p.d = d;
    p.n = n;
    p.declared_order = declared_order;
    return p;
}

PolySymbol PolySymbol::identity(int d, int n) {
    PolySymbol p = zero(d, n, 0);
    p.terms.emplace(MultiIdx::zero(n), MatrixFunction::constant(CMatrix::Identity(d, d)));
    return p;
}

PolySymbol PolySymbol::from_coeff(const MatrixFunction& c, const MultiIdx& alpha, int n) {
    PolySymbol p = zero(c.rows(), n, alpha.degree() + c.torder());
    if (!c.is_zero()) p.terms.emplace(alpha, c);
    return p;
}

void PolySymbol::add_term(const MultiIdx& alpha, const MatrixFunction& c) {
    if (c.is_zero()) return;
    auto it = terms.find(alpha);
    if (it == terms.end()) {
        terms.emplace(alpha, c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

PolySymbol sym_add(const PolySymbol& p, const PolySymbol& q) {
    if (p.d != q.d || p.n != q.n) throw DimensionMismatch("sym_add: symbol shapes differ");
    PolySymbol out = p;
    out.declared_order = std::min(p.declared_order, q.declared_order);
    for (const auto& [a, c] : q.terms) out.add_term(a, c);
    return out;
}

PolySymbol sym_sub(const PolySymbol& p, const PolySymbol& q) { return sym_add(p, sym_scale(q, -1.0)); }

PolySymbol sym_mul(const PolySymbol& p, const PolySymbol& q, int degree_cap) {
    if (p.d != q.d || p.n != q.n) throw DimensionMismatch("sym_mul: symbol shapes differ");
    PolySymbol out = PolySymbol::zero(p.d, p.n, 0);
    out.declared_order = p.declared_order + q.declared_order;
    for (const auto& [a, ca] : p.terms)
        for (const auto& [b, cb] : q.terms) {
            const MultiIdx ab = a + b;
            if (ab.degree() > degree_cap)
                throw TruncationOverflow("sym_mul: product degree " +
                                         std::to_string(ab.degree()) + " exceeds cap " +
                                         std::to_string(degree_cap));
            out.add_term(ab, ca * cb);
        }
    return out;
}

std::pair<PolySymbol, PolySymbol> sym_mul_capped(const PolySymbol& p, const PolySymbol& q,
                                                 int deg_max) {
    if (p.d != q.d || p.n != q.n) throw DimensionMismatch("sym_mul_capped: symbol shapes differ");
    PolySymbol head = PolySymbol::zero(p.d, p.n, p.declared_order + q.declared_order);
    PolySymbol tail = PolySymbol::zero(p.d, p.n, deg_max + 1);
    for (const auto& [a, ca] : p.terms)
        for (const auto& [b, cb] : q.terms) {
            const MultiIdx ab = a + b;
            (ab.degree() <= deg_max ? head : tail).add_term(ab, ca * cb);
        }
    if (head.declared_order > deg_max + 1) head.declared_order = deg_max + 1;
    return {head, tail};
}

PolySymbol sym_scale(const PolySymbol& p, Complex a) {
    PolySymbol out = PolySymbol::zero(p.d, p.n, p.declared_order);
    if (a == Complex(0.0)) return out;
    for (const auto& [idx, c] : p.terms) out.terms.emplace(idx, c.scaled(a));
    return out;
}

PolySymbol sym_lmul(const MatrixFunction& m, const PolySymbol& p) {
    PolySymbol out = PolySymbol::zero(p.d, p.n, p.declared_order + m.torder());
    for (const auto& [idx, c] : p.terms) out.add_term(idx, m * c);
    if (out.declared_order >= TORDER_ZERO) out.declared_order = p.declared_order;
    return out;
}

PolySymbol sym_rmul(const PolySymbol& p, const MatrixFunction& m) {
    PolySymbol out = PolySymbol::zero(p.d, p.n, p.declared_order + m.torder());
    for (const auto& [idx, c] : p.terms) out.add_term(idx, c * m);
    if (out.declared_order >= TORDER_ZERO) out.declared_order = p.declared_order;
    return out;
}

PolySymbol sym_dt(const PolySymbol& p) {
    PolySymbol out = PolySymbol::zero(p.d, p.n, p.declared_order + 1);
    for (const auto& [idx, c] : p.terms) out.add_term(idx, c.derivative());
    return out;
}

std::pair<PolySymbol, PolySymbol> bdiag_split(const PolySymbol& p) {
    if (p.d < 2) throw DimensionMismatch("bdiag_split: d >= 2 required");
    PolySymbol diag = PolySymbol::zero(p.d, p.n, p.declared_order);
    PolySymbol off = PolySymbol::zero(p.d, p.n, p.declared_order);
    for (const auto& [idx, c] : p.terms) {
        diag.add_term(idx, c.block_masked(true));
        off.add_term(idx, c.block_masked(false));
    }
    return {diag, off};
}

namespace {

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const size_t n = x.size();
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0) return f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace

OrderFit estimate_order(const std::function<CMatrix(double, const std::vector<double>&)>& f,
                        int n, const Zone& zone, const Tolerances& tol) {
    OrderFit out;
    const int samples = 20;
    const double t_star = std::max(zone.t0 * 10.0, 100.0);
    std::vector<double> lx, ly;
    bool any = false;
    for (int i = 0; i < samples; ++i) {
        const double s = zone.c * std::pow(10.0, -1.0 + (double)i / (samples - 1));
        std::vector<double> xi(n, 0.0);
        xi[0] = s;
        const double v = opnorm(f(t_star, xi));
        if (v > tol.degenerate_floor) {
            any = true;
            lx.push_back(std::log(s));
            ly.push_back(std::log(v));
        }
    }
    if (!any) {
        out.degenerate = true;
        out.slope_xi = std::numeric_limits<double>::infinity();
        out.slope_tinv = std::numeric_limits<double>::infinity();
        return out;
    }
    LineFit fx = line_fit(lx, ly);
    out.slope_xi = fx.slope;
    out.r2_xi = fx.r2;

    lx.clear();
    ly.clear();
    std::vector<double> xi(n, 0.0);
    xi[0] = zone.c / 10.0;
    for (int i = 0; i < samples; ++i) {
        const double t = zone.t0 * std::pow(10.0, (double)i / (samples - 1));
        const double v = opnorm(f(t, xi));
        if (v > tol.degenerate_floor) {
            lx.push_back(std::log(1.0 / t));
            ly.push_back(std::log(v));
        }
    }
    if (lx.size() >= 3) {
        LineFit ft = line_fit(lx, ly);
        out.slope_tinv = ft.slope;
        out.r2_tinv = ft.r2;
    }
    return out;
}

OrderFit estimate_order(const PolySymbol& p, const Zone& zone, const Tolerances& tol) {
    return estimate_order(
        [&p](double t, const std::vector<double>& xi) { return p.eval(t, xi); }, p.n, zone, tol);
}

bool order_diagnostic(const PolySymbol& p, std::string* detail) {
    for (const auto& [a, c] : p.terms) {
        const int grade = a.degree() + c.torder();
        if (grade < p.declared_order) {
            if (detail) {
                std::ostringstream os;
                os << "term |alpha| = " << a.degree() << " has coefficient order " << c.torder()
                   << ", grade " << grade << " < declared " << p.declared_order;
                *detail = os.str();
            }
            return false;
        }
    }
    return true;
}

std::string symbol_to_json(const PolySymbol& p, const std::vector<double>& t_grid) {
    nlohmann::ordered_json j;
    j["d"] = p.d;
    j["n"] = p.n;
    j["declared_order"] = p.declared_order;
    j["t_grid"] = t_grid;
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [a, c] : p.terms) {
        nlohmann::ordered_json term;
        term["alpha"] = a.a;
        term["torder"] = c.torder();
        nlohmann::ordered_json samples = nlohmann::ordered_json::array();
        for (double t : t_grid) {
            const CMatrix m = c.eval(t);
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (Eigen::Index jx = 0; jx < m.cols(); ++jx)
                    row.push_back({m(i, jx).real(), m(i, jx).imag()});
                rows.push_back(row);
            }
            samples.push_back(rows);
        }
        term["samples"] = samples;
        terms.push_back(term);
    }
    j["terms"] = terms;
    return j.dump(2);
}

}  // namespace pdslab
