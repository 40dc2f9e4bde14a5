#include "pdslab/matkernel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>

namespace pdslab {

double opnorm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

bool all_finite(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const Complex& z = m(i, j);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        }
    return true;
}

EigDecomp eig(const CMatrix& m, const Tolerances& tol) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << "eig: matrix is " << m.rows() << "x" << m.cols();
        throw NotSquare(os.str());
    }
    if (!all_finite(m)) throw Error("eig: non-finite entries");

    Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) throw NonConvergence("eig: QR iteration did not converge");

    EigDecomp out;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();

    const double nm = opnorm(m);
    Eigen::JacobiSVD<CMatrix> vsvd(out.vectors);
    const double smin = vsvd.singularValues()(vsvd.singularValues().size() - 1);
    const double smax = vsvd.singularValues()(0);
    out.condition = (smin <= 0.0) ? std::numeric_limits<double>::infinity() : smax / smin;

    // A defective matrix still yields vectors, just (nearly) dependent ones.
    // Flag it with the inf sentinel instead of trusting the residual.
    const double resid = opnorm(m * out.vectors - out.vectors * out.values.asDiagonal());
    if (nm > 0 && resid / nm > tol.eig_residual) {
        out.condition = std::numeric_limits<double>::infinity();
    }
    if (out.condition > 1.0 / tol.eig_residual) {
        out.condition = std::numeric_limits<double>::infinity();
    }
    return out;
}

double svd_min(const CMatrix& m) {
    if (!all_finite(m)) throw Error("svd_min: non-finite entries");
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

CMatrix expm(const CMatrix& m, const Tolerances& tol) {
    if (m.rows() != m.cols()) throw NotSquare("expm: matrix not square");
    if (!all_finite(m)) throw Error("expm: non-finite entries");
    const double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
    if (n1 > tol.expm_norm_cap) {
        std::ostringstream os;
        os << "expm: ||m||_1 = " << n1 << " exceeds cap " << tol.expm_norm_cap;
        throw OverflowRisk(os.str());
    }
    return m.exp();
}

SylvesterBlocks sylvester_offdiag(const CMatrix& btil, const CMatrix& r12, const CMatrix& r21,
                                  double kappa_prime) {
    if (btil.rows() != btil.cols()) throw NotSquare("sylvester_offdiag: btil not square");
    const Eigen::Index p = btil.rows();
    if (r12.rows() != 1 || r12.cols() != p || r21.rows() != p || r21.cols() != 1)
        throw DimensionMismatch("sylvester_offdiag: block shapes do not match btil");

    const EigDecomp ed = eig(btil);
    double min_re = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ed.values.size(); ++i) min_re = std::min(min_re, ed.values(i).real());
    if (min_re < kappa_prime) {
        std::ostringstream os;
        os << "sylvester_offdiag: min Re eig(btil) = " << min_re << " < " << kappa_prime;
        throw SpectralGapViolation(os.str());
    }

    SylvesterBlocks out;
    // n12 btil = -r12  and  btil n21 = r21, both direct solves.
    Eigen::PartialPivLU<CMatrix> lu(btil);
    out.n21 = lu.solve(r21);
    Eigen::PartialPivLU<CMatrix> lut(btil.transpose());
    out.n12 = (-1.0) * lut.solve(r12.transpose()).transpose();
    return out;
}

double sylvester_residual(const CMatrix& btil, const SylvesterBlocks& n, const CMatrix& r12,
                          const CMatrix& r21) {
    const Eigen::Index p = btil.rows();
    CMatrix dd = CMatrix::Zero(p + 1, p + 1);
    dd.bottomRightCorner(p, p) = btil;
    CMatrix nn = CMatrix::Zero(p + 1, p + 1);
    nn.topRightCorner(1, p) = n.n12;
    nn.bottomLeftCorner(p, 1) = n.n21;
    CMatrix rr = CMatrix::Zero(p + 1, p + 1);
    rr.topRightCorner(1, p) = r12;
    rr.bottomLeftCorner(p, 1) = r21;
    return opnorm(dd * nn - nn * dd - rr);
}

}  // namespace pdslab
