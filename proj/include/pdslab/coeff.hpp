#ifndef PDSLAB_COEFF_HPP
#define PDSLAB_COEFF_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "pdslab/matkernel.hpp"

namespace pdslab {

// Time-dependent coefficients are written in the variable u = 1/(1+t).
// A matrix-valued coefficient is either
//   * rational:  num(u) / den(u), matrix polynomial over scalar polynomial,
//     closed under +, *, d/dt and (for small square blocks) inversion; or
//   * generic:   a callback t -> matrix with a declared decay order, whose
//     derivatives fall back to five-point central differences.
// All builtin systems and everything the config format can express stay on
// the exact rational path end to end.

using PolyU = std::map<int, Complex>;    // exponent of u -> scalar coefficient
using MatPolyU = std::map<int, CMatrix>; // exponent of u -> matrix coefficient

// |d^k f / dt^k| <= C (1+t)^{-(ell+k)} is the decay grading used throughout;
// torder() below reports ell (TORDER_ZERO for the identically-zero function).
constexpr int TORDER_ZERO = 999;

class MatrixFunction {
  public:
    MatrixFunction() = default;

    static MatrixFunction constant(const CMatrix& c);
    static MatrixFunction zero(int rows, int cols);
    // sum over e of C_e * (1+t)^{-e}
    static MatrixFunction rational(MatPolyU num, PolyU den = {{0, 1.0}});
    static MatrixFunction generic(std::function<CMatrix(double)> f, int rows, int cols,
                                  int declared_torder,
                                  std::function<CMatrix(double)> df = nullptr);

    bool valid() const { return rows_ > 0; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_rational() const { return rational_.has_value(); }

    CMatrix eval(double t) const;
    CMatrix deriv(double t, int order) const;  // order >= 0
    MatrixFunction derivative() const;         // d/dt as a coefficient

    int torder() const;
    bool is_zero() const;

    MatrixFunction operator+(const MatrixFunction& o) const;
    MatrixFunction operator-(const MatrixFunction& o) const;
    MatrixFunction operator*(const MatrixFunction& o) const;
    MatrixFunction scaled(Complex a) const;
    MatrixFunction inverse() const;  // square only
    // Zero out either the off-diagonal or the diagonal blocks of the
    // (1, d-1) partition, entry by entry.
    MatrixFunction block_masked(bool keep_diagonal_blocks) const;
    MatrixFunction adjoint_at_fixed_t() const;  // entrywise conj-transpose
    MatrixFunction block(int r0, int c0, int nr, int nc) const;
    // Place this block into a rows x cols zero matrix at (r0, c0).
    MatrixFunction embedded(int rows, int cols, int r0, int c0) const;

    // Access to the rational representation (throws if generic).
    const MatPolyU& num() const;
    const PolyU& den() const;

  private:
    struct Rational {
        MatPolyU num;
        PolyU den;
    };
    struct Generic {
        std::function<CMatrix(double)> f;
        std::function<CMatrix(double)> df;  // may be null
        int torder = 0;
    };

    int rows_ = 0, cols_ = 0;
    std::optional<Rational> rational_;
    std::shared_ptr<const Generic> generic_;

    static MatrixFunction make_rational(int r, int c, MatPolyU num, PolyU den);
    std::function<CMatrix(double)> as_callable() const;
};

// Scalar polynomial helpers (exposed for tests).
PolyU poly_mul(const PolyU& a, const PolyU& b);
PolyU poly_add(const PolyU& a, const PolyU& b);
Complex poly_eval(const PolyU& p, double u);

// Diagnostic for the decay grading: samples ||d^k f/dt^k|| (1+t)^{ell+k} on a
// grid and reports the supremum together with the fitted log-log growth slope.
struct TClassDiagnostic {
    double sup = 0.0;
    double slope = 0.0;  // of log(ratio) vs log(1+t); <= slack means bounded
    bool pass = false;
};
TClassDiagnostic t_class_diagnostic(const MatrixFunction& f, int ell, int max_deriv,
                                    const std::vector<double>& t_grid, double slope_slack = 0.25);

}  // namespace pdslab

#endif
