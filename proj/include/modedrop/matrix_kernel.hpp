#pragma once

#include <complex>

#include <Eigen/Core>

namespace modedrop {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Complex square matrix kept conjugate-symmetric. Every function in this
/// module that returns one re-symmetrizes it first.
using HermitianMatrix = Eigen::MatrixXcd;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
struct HermitianEigen {
  RealVector values;
  ComplexMatrix vectors;
};

/// Full singular value decomposition H = U diag(s) V^H, s descending.
struct SingularDecomposition {
  ComplexMatrix u;
  RealVector singular_values;
  ComplexMatrix v;
};

/// (A + A^H) / 2.
HermitianMatrix hermitize(const ComplexMatrix& a);

bool all_finite(const ComplexMatrix& a);

HermitianEigen herm_eig(const HermitianMatrix& a);

SingularDecomposition svd(const ComplexMatrix& h);

/// Largest eigenvalue magnitude (spectral norm for Hermitian input).
double spectral_norm(const HermitianMatrix& a);

double min_eigenvalue(const HermitianMatrix& a);

/// Returns R = W^{-1/2}. Throws SingularMatrix unless
/// min eig(W) > 1e-12 * max eig(W).
HermitianMatrix inv_sqrt_psd(const HermitianMatrix& w);

/// Eigenvalues at or below this are treated as non-positive by
/// nonpos_eigenmodes: 1e-10 * max(1, ||A||).
double eigenmode_drop_threshold(const HermitianMatrix& a);

/// S = sum over eigenpairs with lambda <= threshold of max(-lambda, 0) u u^H.
/// -S is the non-positive part of A, so A + S is its positive part.
HermitianMatrix nonpos_eigenmodes(const HermitianMatrix& a);

/// Clips slightly negative eigenvalues to zero. Throws NotNearPsd if the
/// smallest eigenvalue is below -1e-8 * max(1, ||Q||).
HermitianMatrix psd_repair(const HermitianMatrix& q);

/// Natural log-determinant of a Hermitian positive definite matrix via
/// Cholesky. Throws SingularMatrix if the factorization fails.
double log_det_hpd(const HermitianMatrix& a);

}  // namespace modedrop
