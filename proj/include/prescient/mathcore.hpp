// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace prescient::mathcore {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Central record of the numeric tolerances used across the library.
struct Tolerances {
  double gaussian_q_abs = 1e-12;      // absolute error budget of gaussian_q
  double survival_inverse_rel = 1e-10;  // relative tolerance of the root solve
  double marcum_tail = 1e-12;         // truncation bound of the mixture series
  double hermitian_rel = 1e-10;       // Hermitian-input acceptance threshold
  double eig_residual_rel = 1e-10;    // eigendecomposition reconstruction bound
  double feasibility_rel = 1e-8;      // precoder constraint slack tolerance
};

const Tolerances& tolerances();

/// Upper tail of the standard normal: 1 - Phi(x).
double gaussian_q(double x);

/// Survival e^{-x} sum_{r<m} x^r / r! of an m-stage Erlang-type count
/// (equivalently P[Poisson(x) <= m-1]). Stable for large x via log-space
/// summation. m >= 1, x >= 0.
double erlang_survival(int m, double x);

/// d/dx of erlang_survival(m, x) = -e^{-x} x^{m-1} / (m-1)!.
double erlang_survival_deriv(int m, double x);

/// Inverse of erlang_survival in x for fixed m: returns x with
/// erlang_survival(m, x) = p, bracketing + safeguarded Newton.
double erlang_survival_inverse(int m, double p);

/// Complementary cdf of a central chi-square with an even number of
/// degrees of freedom, evaluated through the closed finite sum.
double chisq_survival(int dof, double x);

/// Returns x with chisq_survival(dof, x) = p, relative tolerance 1e-10.
double chisq_survival_inverse(int dof, double p);

/// Generalized Marcum Q: survival at b^2 of a noncentral chi-square with
/// 2*order degrees of freedom and noncentrality a^2, computed as a
/// Poisson-weighted mixture of central chi-square survivals, truncated when
/// the unaccumulated Poisson mass drops below the configured tail bound.
double marcum_q(int order, double a, double b);

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // sorted descending
  ComplexMatrix eigenvectors;    // orthonormal columns, same order
};

/// Eigendecomposition of a Hermitian matrix; rejects inputs whose
/// anti-Hermitian part exceeds the acceptance threshold.
SpectralDecomposition hermitian_eig(const ComplexMatrix& m);

/// Orthonormal basis of the right null space of m. Columns with singular
/// value <= tol * sigma_max are treated as null directions. A zero-column
/// result signals a trivial null space.
ComplexMatrix nullspace_basis(const ComplexMatrix& m, double tol);

}  // namespace prescient::mathcore
