#pragma once

#include <cmath>

#include "z2kms/numerics.hpp"

namespace z2kms {

/// Functional on a full matrix algebra, phi(x) = Tr(F x).
struct LinearFunctional {
  CMatrix density;

  LinearFunctional() = default;
  explicit LinearFunctional(CMatrix f) : density(std::move(f)) { require_square(density, "LinearFunctional"); }

  static LinearFunctional zero(Eigen::Index d) { return LinearFunctional(CMatrix::Zero(d, d)); }

  Eigen::Index dim() const { return density.rows(); }

  cplx operator()(const CMatrix& x) const {
    require_same_shape(density, x, "LinearFunctional");
    return density.transpose().cwiseProduct(x).sum();
  }

  /// Hermitian functionals satisfy conj(phi(x*)) = phi(x), i.e. F = F*.
  bool is_hermitian(double tol = kDefaultTol) const { return hermiticity_defect(density) <= tol; }
  bool is_positive(double tol = kDefaultTol) const { return is_psd(density, tol); }

  LinearFunctional operator+(const LinearFunctional& o) const { return LinearFunctional(density + o.density); }
  LinearFunctional operator-(const LinearFunctional& o) const { return LinearFunctional(density - o.density); }
  LinearFunctional operator*(double c) const { return LinearFunctional(c * density); }
  LinearFunctional operator-() const { return LinearFunctional(-density); }
};

/// Density of the Gibbs state Tr(e^{-beta H} x) / Tr(e^{-beta H}) for Hermitian H.
inline CMatrix gibbs_density(const CMatrix& hamiltonian, double beta) {
  const HermEig eig = herm_eig(hamiltonian, 1e-12 * (1.0 + max_abs(hamiltonian)));
  const Eigen::Index d = eig.values.size();
  // Shift by the dominant exponent so the largest weight is exactly 1.
  double shift = 0.0;
  if (d > 0) shift = beta >= 0 ? eig.values(0) : eig.values(d - 1);
  RVector w(d);
  for (Eigen::Index i = 0; i < d; ++i) w(i) = std::exp(-beta * (eig.values(i) - shift));
  w /= w.sum();
  return eig.vectors * w.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

inline LinearFunctional gibbs_state(const CMatrix& hamiltonian, double beta) {
  return LinearFunctional(gibbs_density(hamiltonian, beta));
}

/// Analytic continuation alpha_{i beta}(b) = e^{-beta H} b e^{beta H} of the
/// dynamics alpha_t(b) = e^{itH} b e^{-itH}.
struct ImaginaryTimeShift {
  CMatrix forward;   // e^{-beta H}
  CMatrix backward;  // e^{+beta H}

  ImaginaryTimeShift(const CMatrix& hamiltonian, double beta)
      : forward(herm_func(hamiltonian, [beta](double x) { return std::exp(-beta * x); },
                          1e-12 * (1.0 + max_abs(hamiltonian)))),
        backward(herm_func(hamiltonian, [beta](double x) { return std::exp(beta * x); },
                           1e-12 * (1.0 + max_abs(hamiltonian)))) {}

  CMatrix operator()(const CMatrix& b) const { return forward * b * backward; }
};

/// Real-time automorphism alpha_t(b) = e^{itH} b e^{-itH}.
inline CMatrix evolve(const CMatrix& hamiltonian, double t, const CMatrix& b) {
  const CMatrix u = mat_exp(cplx(0, t) * hamiltonian);
  return u * b * u.adjoint();
}

}  // namespace z2kms
