#include "modedrop/matrix_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "modedrop/errors.hpp"

namespace modedrop {

namespace {

constexpr double kInvSqrtConditionFloor = 1e-12;
constexpr double kDropRelativeTolerance = 1e-10;
constexpr double kRepairRelativeTolerance = 1e-8;

}  // namespace

HermitianMatrix hermitize(const ComplexMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

bool all_finite(const ComplexMatrix& a) {
  return a.allFinite();
}

HermitianEigen herm_eig(const HermitianMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("herm_eig: matrix is not square");
  }
  if (!all_finite(a)) {
    throw NumericalFailure("herm_eig: non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "herm_eig: eigensolver did not converge (order " << a.rows()
        << ", Frobenius norm " << a.norm() << ")";
    throw NumericalFailure(msg.str());
  }
  // Eigen sorts ascending; descending is the convention here.
  HermitianEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

SingularDecomposition svd(const ComplexMatrix& h) {
  if (!all_finite(h)) {
    throw NumericalFailure("svd: non-finite entries");
  }
  Eigen::JacobiSVD<ComplexMatrix> solver(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

double spectral_norm(const HermitianMatrix& a) {
  if (a.size() == 0) return 0.0;
  const RealVector values = herm_eig(a).values;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

double min_eigenvalue(const HermitianMatrix& a) {
  const RealVector values = herm_eig(a).values;
  return values(values.size() - 1);
}

HermitianMatrix inv_sqrt_psd(const HermitianMatrix& w) {
  const HermitianEigen eig = herm_eig(w);
  const double largest = eig.values(0);
  const double smallest = eig.values(eig.values.size() - 1);
  if (!(largest > 0.0) || !(smallest > kInvSqrtConditionFloor * largest)) {
    std::ostringstream msg;
    msg << "inv_sqrt_psd: matrix not positive definite (eigenvalues in [" << smallest
        << ", " << largest << "])";
    throw SingularMatrix(msg.str());
  }
  const RealVector scale = eig.values.cwiseSqrt().cwiseInverse();
  return hermitize(eig.vectors * scale.asDiagonal() * eig.vectors.adjoint());
}

double eigenmode_drop_threshold(const HermitianMatrix& a) {
  return kDropRelativeTolerance * std::max(1.0, spectral_norm(a));
}

HermitianMatrix nonpos_eigenmodes(const HermitianMatrix& a) {
  const HermitianEigen eig = herm_eig(a);
  const double norm =
      std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
  const double threshold = kDropRelativeTolerance * std::max(1.0, norm);
  RealVector dropped = RealVector::Zero(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (eig.values(k) <= threshold) dropped(k) = std::max(-eig.values(k), 0.0);
  }
  return hermitize(eig.vectors * dropped.asDiagonal() * eig.vectors.adjoint());
}

HermitianMatrix psd_repair(const HermitianMatrix& q) {
  const HermitianEigen eig = herm_eig(q);
  const Eigen::Index n = eig.values.size();
  if (n == 0 || eig.values(n - 1) >= 0.0) return hermitize(q);
  const double norm = std::max(std::abs(eig.values(0)), std::abs(eig.values(n - 1)));
  if (eig.values(n - 1) < -kRepairRelativeTolerance * std::max(1.0, norm)) {
    std::ostringstream msg;
    msg << "psd_repair: eigenvalue " << eig.values(n - 1) << " is not a roundoff error";
    throw NotNearPsd(msg.str(), eig.values(n - 1));
  }
  const RealVector clipped = eig.values.cwiseMax(0.0);
  return hermitize(eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint());
}

double log_det_hpd(const HermitianMatrix& a) {
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("log_det_hpd: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) sum += std::log(diag(k).real());
  return 2.0 * sum;
}

}  // namespace modedrop
