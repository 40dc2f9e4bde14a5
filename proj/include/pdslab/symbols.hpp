#ifndef PDSLAB_SYMBOLS_HPP
#define PDSLAB_SYMBOLS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdslab/coeff.hpp"

namespace pdslab {

// Multi-index in the frequency variables, ordered graded-lexicographically.
struct MultiIdx {
    std::vector<int> a;

    int degree() const {
        int s = 0;
        for (int x : a) s += x;
        return s;
    }
    bool operator==(const MultiIdx& o) const { return a == o.a; }
    bool operator<(const MultiIdx& o) const {
        const int da = degree(), db = o.degree();
        if (da != db) return da < db;
        return a < o.a;
    }
    static MultiIdx zero(int n) { return MultiIdx{std::vector<int>(n, 0)}; }
    static MultiIdx unit(int n, int k) {
        MultiIdx m = zero(n);
        m.a[k] = 1;
        return m;
    }
    MultiIdx operator+(const MultiIdx& o) const {
        MultiIdx m = *this;
        for (size_t i = 0; i < a.size(); ++i) m.a[i] += o.a[i];
        return m;
    }
};

// Matrix-valued polynomial in xi with time-dependent coefficients. The graded
// order of a term C(t) xi^alpha is |alpha| + torder(C); declared_order is the
// claimed minimum over terms and is checked, not trusted.
struct PolySymbol {
    int d = 0;  // matrix dimension
    int n = 1;  // number of xi variables
    int declared_order = 0;
    std::map<MultiIdx, MatrixFunction> terms;

    bool empty() const { return terms.empty(); }
    int max_degree() const;
    int min_grade() const;  // smallest |alpha| + torder over terms
    CMatrix eval(double t, const std::vector<double>& xi) const;

    static PolySymbol zero(int d, int n, int declared_order = 0);
    static PolySymbol identity(int d, int n);
    static PolySymbol from_coeff(const MatrixFunction& c, const MultiIdx& alpha, int n);

    void add_term(const MultiIdx& alpha, const MatrixFunction& c);
};

PolySymbol sym_add(const PolySymbol& p, const PolySymbol& q);
PolySymbol sym_sub(const PolySymbol& p, const PolySymbol& q);
PolySymbol sym_mul(const PolySymbol& p, const PolySymbol& q,
                   int degree_cap = default_tol().poly_degree_cap);
// Capped product: terms above deg_max go to .second (the truncation channel).
std::pair<PolySymbol, PolySymbol> sym_mul_capped(const PolySymbol& p, const PolySymbol& q,
                                                 int deg_max);
PolySymbol sym_scale(const PolySymbol& p, Complex a);
PolySymbol sym_lmul(const MatrixFunction& m, const PolySymbol& p);
PolySymbol sym_rmul(const PolySymbol& p, const MatrixFunction& m);
PolySymbol sym_dt(const PolySymbol& p);  // termwise d/dt

// Split into ((1, d-1) block-diagonal part, off-diagonal part); p = sum.
std::pair<PolySymbol, PolySymbol> bdiag_split(const PolySymbol& p);

// Elliptic zone { |xi| <= c, t >= t0 } with t0 >= 1/c.
struct Zone {
    double c = 1.0;
    double t0 = 1.0;
    Zone() = default;
    Zone(double c_, double t_start) : c(c_), t0(std::max(t_start, 1.0 / c_)) {}
    bool contains(double t, double xi_norm) const { return xi_norm <= c && t >= t0; }
};

struct OrderFit {
    double slope_xi = 0.0;   // of log||p|| vs log s along xi = s * omega
    double r2_xi = 0.0;
    double slope_tinv = 0.0;  // of log||p|| vs log(1/t) at fixed small xi
    double r2_tinv = 0.0;
    bool degenerate = false;  // all samples below the floor; slope_xi = +inf
};

// Least-squares order diagnostics along probe rays inside the zone.
OrderFit estimate_order(const std::function<CMatrix(double, const std::vector<double>&)>& f,
                        int n, const Zone& zone, const Tolerances& tol = default_tol());
OrderFit estimate_order(const PolySymbol& p, const Zone& zone,
                        const Tolerances& tol = default_tol());

// Exact check (rational path) that every term satisfies the declared grading.
bool order_diagnostic(const PolySymbol& p, std::string* detail = nullptr);

// Debug dump: multi-index -> matrix of coefficient samples on a t-grid.
std::string symbol_to_json(const PolySymbol& p, const std::vector<double>& t_grid);

}  // namespace pdslab

#endif
