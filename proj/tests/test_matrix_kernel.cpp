#include <doctest.h>

#include <cmath>

#include "modedrop/errors.hpp"
#include "modedrop/matrix_kernel.hpp"
#include "test_support.hpp"

using namespace modedrop;
using test_support::diag;
using test_support::random_hermitian;
using test_support::random_matrix;

TEST_CASE("herm_eig: identity and diagonal inputs") {
  const HermitianEigen id = herm_eig(ComplexMatrix::Identity(2, 2));
  CHECK(id.values(0) == doctest::Approx(1.0));
  CHECK(id.values(1) == doctest::Approx(1.0));
  CHECK((id.vectors.adjoint() * id.vectors - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);

  const HermitianEigen d = herm_eig(diag({1.0, 2.0}));
  CHECK(d.values(0) == doctest::Approx(2.0));
  CHECK(d.values(1) == doctest::Approx(1.0));
  // first eigenvector is the second coordinate axis, up to phase
  CHECK(std::abs(d.vectors(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("herm_eig and svd reconstruct random matrices") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(s % 16);
    const HermitianMatrix a = random_hermitian(n, 7, s);
    const HermitianEigen e = herm_eig(a);
    const double scale = std::max(1.0, a.norm());
    CHECK((e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint() - a).norm() <
          1e-10 * scale);
    CHECK((e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(n, n)).norm() < 1e-10);
    for (Eigen::Index k = 1; k < n; ++k) CHECK(e.values(k - 1) >= e.values(k));
  }
  const ComplexMatrix h = random_matrix(4, 8, 3);
  const SingularDecomposition dec = svd(h);
  ComplexMatrix sigma = ComplexMatrix::Zero(4, 8);
  for (Eigen::Index k = 0; k < 4; ++k) sigma(k, k) = dec.singular_values(k);
  CHECK((dec.u * sigma * dec.v.adjoint() - h).norm() < 1e-10 * h.norm());
  for (Eigen::Index k = 1; k < 4; ++k) CHECK(dec.singular_values(k - 1) >= dec.singular_values(k));
}

TEST_CASE("svd: small exact cases") {
  const SingularDecomposition id = svd(ComplexMatrix::Identity(2, 2));
  CHECK(id.singular_values(0) == doctest::Approx(1.0));
  CHECK(id.singular_values(1) == doctest::Approx(1.0));
  const SingularDecomposition d = svd(diag({2.0, 0.0}));
  CHECK(d.singular_values(0) == doctest::Approx(2.0));
  CHECK(d.singular_values(1) == doctest::Approx(0.0));
}

TEST_CASE("inv_sqrt_psd") {
  CHECK((inv_sqrt_psd(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)).norm() < 1e-14);
  CHECK((inv_sqrt_psd(diag({4.0, 1.0})) - diag({0.5, 1.0})).norm() < 1e-14);

  const ComplexMatrix h = random_matrix(4, 4, 5);
  const HermitianMatrix w = hermitize(ComplexMatrix::Identity(4, 4) + h * h.adjoint());
  const HermitianMatrix r = inv_sqrt_psd(w);
  CHECK((r * w * r - ComplexMatrix::Identity(4, 4)).norm() < 1e-9);
  CHECK((r * w - w * r).norm() < 1e-9);
  CHECK(min_eigenvalue(r) > 0.0);

  CHECK_THROWS_AS(inv_sqrt_psd(diag({1.0, 0.0})), SingularMatrix);
  CHECK_THROWS_AS(inv_sqrt_psd(diag({1.0, 1e-13})), SingularMatrix);
}

TEST_CASE("nonpos_eigenmodes") {
  CHECK(nonpos_eigenmodes(ComplexMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK((nonpos_eigenmodes(diag({-0.5, 1.0})) - diag({0.5, 0.0})).norm() < 1e-14);
  // an exact zero eigenvalue is dropped but carries no weight
  CHECK(nonpos_eigenmodes(diag({0.0, 2.0})).norm() == 0.0);

  for (std::uint64_t s = 0; s < 50; ++s) {
    const HermitianMatrix a = random_hermitian(5, 9, s);
    const HermitianMatrix sm = nonpos_eigenmodes(a);
    CHECK(min_eigenvalue(sm) >= -1e-12);
    CHECK(min_eigenvalue(hermitize(a + sm)) >= -eigenmode_drop_threshold(a) - 1e-12);
  }
}

TEST_CASE("psd_repair") {
  const HermitianMatrix psd = diag({1.0, 0.25});
  CHECK((psd_repair(psd) - psd).norm() == 0.0);
  CHECK((psd_repair(diag({1.0, -1e-10})) - diag({1.0, 0.0})).norm() < 1e-15);
  CHECK_THROWS_AS(psd_repair(diag({1.0, -1.0})), NotNearPsd);
  try {
    psd_repair(diag({1.0, -1.0}));
  } catch (const NotNearPsd& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(-1.0));
  }
}

TEST_CASE("log_det_hpd") {
  CHECK(log_det_hpd(ComplexMatrix::Identity(3, 3)) == doctest::Approx(0.0));
  CHECK(log_det_hpd(diag({2.0, 3.0})) == doctest::Approx(std::log(6.0)));
  CHECK_THROWS_AS(log_det_hpd(diag({1.0, -1.0})), SingularMatrix);
}

TEST_CASE("hermitize stores an exactly conjugate-symmetric matrix") {
  const HermitianMatrix h = hermitize(random_matrix(4, 4, 1));
  CHECK((h - ComplexMatrix(h.adjoint())).norm() == 0.0);
}
