#ifndef PDSLAB_MATKERNEL_HPP
#define PDSLAB_MATKERNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "pdslab/errors.hpp"
#include "pdslab/tolerances.hpp"

namespace pdslab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Spectral (2-)norm. Matrices here are tiny, so an SVD is fine.
double opnorm(const CMatrix& m);

bool all_finite(const CMatrix& m);

struct EigDecomp {
    CVector values;    // eigenvalues, in solver order
    CMatrix vectors;   // right eigenvectors as columns, unit norm
    double condition;  // cond_2 of the eigenvector matrix; inf for defective input
};

// Dense complex eigendecomposition. Defective matrices are reported through
// condition = inf rather than an exception; the caller decides.
EigDecomp eig(const CMatrix& m, const Tolerances& tol = default_tol());

// Smallest singular value; zero (within roundoff) iff rank-deficient.
double svd_min(const CMatrix& m);

// Matrix exponential by scaling-and-squaring (delegated dense routine).
CMatrix expm(const CMatrix& m, const Tolerances& tol = default_tol());

struct SylvesterBlocks {
    CMatrix n12;  // 1 x (d-1)
    CMatrix n21;  // (d-1) x 1
};

// Off-diagonal blocks N = [[0, n12], [n21, 0]] solving the commutator equation
//     [bdiag(0, btil), N] = [[0, r12], [r21, 0]],
// which gives n12 = -r12 btil^-1 and n21 = btil^-1 r21. The n21 block equals
// the convergent integral  int_0^inf exp(-s btil) r21 ds  whenever the
// spectrum of btil lies in {Re > 0}; that gap is checked (kappa_prime).
SylvesterBlocks sylvester_offdiag(const CMatrix& btil, const CMatrix& r12, const CMatrix& r21,
                                  double kappa_prime = 1e-12);

// Residual ||[bdiag(0,btil), N] - R_off|| of a candidate solution, for checks.
double sylvester_residual(const CMatrix& btil, const SylvesterBlocks& n, const CMatrix& r12,
                          const CMatrix& r21);

}  // namespace pdslab

#endif
