#pragma once

// Dense complex-matrix kernel on top of Eigen: Hermitian eigensystems,
// functional calculus, exponentials, norms, positivity and kernels.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "z2kms/error.hpp"

namespace z2kms {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

inline double max_abs(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Largest entry of |A - A*|.
inline double hermiticity_defect(const CMatrix& a) {
  return max_abs(a - a.adjoint());
}

inline void require_square(const CMatrix& a, const char* where) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": matrix is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": operand shapes differ");
  }
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }
inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

struct HermEig {
  RVector values;   // ascending
  CMatrix vectors;  // columns are orthonormal eigenvectors
};

/// Eigendecomposition A = U diag(values) U* of a Hermitian matrix.
inline HermEig herm_eig(const CMatrix& a, double tol = kDefaultTol) {
  require_square(a, "herm_eig");
  if (hermiticity_defect(a) > tol) {
    throw Error(ErrorCode::NotHermitian,
                "herm_eig: |A - A*| = " + std::to_string(hermiticity_defect(a)));
  }
  if (!a.allFinite()) throw Error(ErrorCode::NoConvergence, "herm_eig: non-finite input");
  // Symmetrize so round-off in the lower triangle does not leak in.
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "herm_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// f(A) for Hermitian A, evaluated on the spectrum.
template <class Fn>
CMatrix herm_func(const CMatrix& a, Fn&& f, double tol = kDefaultTol) {
  const HermEig eig = herm_eig(a, tol);
  CVector fx(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) fx(i) = cplx(f(eig.values(i)));
  return eig.vectors * fx.asDiagonal() * eig.vectors.adjoint();
}

/// Matrix exponential. Hermitian and skew-Hermitian inputs go through the
/// eigendecomposition; anything else uses Pade scaling and squaring.
inline CMatrix mat_exp(const CMatrix& a) {
  require_square(a, "mat_exp");
  if (a.size() == 0) return a;
  const double scale = 1e-13 * (1.0 + max_abs(a));
  if (hermiticity_defect(a) <= scale) {
    return herm_func(a, [](double x) { return std::exp(x); }, scale);
  }
  if (max_abs(a + a.adjoint()) <= scale) {
    const CMatrix k = cplx(0, -1) * a;  // A = iK with K Hermitian
    const HermEig eig = herm_eig(k, scale);
    CVector fx(eig.values.size());
    for (Eigen::Index i = 0; i < fx.size(); ++i) fx(i) = std::exp(cplx(0, eig.values(i)));
    return eig.vectors * fx.asDiagonal() * eig.vectors.adjoint();
  }
  return a.exp();
}

/// Largest singular value.
inline double op_norm(const CMatrix& a) {
  require_square(a, "op_norm");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Orthonormal columns spanning {v : ||L v|| ~ 0}; the kernel dimension is the
/// number of singular values <= tol plus the rank deficit of a wide L.
inline CMatrix nullspace(const CMatrix& l, double tol = kDefaultTol) {
  const Eigen::Index cols = l.cols();
  if (cols == 0) return CMatrix(0, 0);
  if (l.rows() == 0) return CMatrix::Identity(cols, cols);
  Eigen::BDCSVD<CMatrix> svd(l, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Kernel of L given only its Gram matrix L*L. The cutoff applies to the
/// singular values of L, i.e. to the square roots of the Gram eigenvalues.
inline CMatrix nullspace_from_gram(const CMatrix& gram, double tol) {
  require_square(gram, "nullspace_from_gram");
  if (gram.size() == 0) return CMatrix(0, 0);
  const HermEig eig = herm_eig(gram, 1e-8 * (1.0 + max_abs(gram)));
  Eigen::Index count = 0;
  while (count < eig.values.size() && std::sqrt(std::max(eig.values(count), 0.0)) <= tol) {
    ++count;
  }
  return eig.vectors.leftCols(count);
}

/// Smallest eigenvalue of the Hermitian part of A.
inline double min_eigenvalue(const CMatrix& a) {
  require_square(a, "min_eigenvalue");
  if (a.size() == 0) return 0.0;
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

inline bool is_psd(const CMatrix& a, double tol = kDefaultTol) {
  return hermiticity_defect(a) <= tol && min_eigenvalue(a) >= -tol;
}

inline bool is_unitary(const CMatrix& u, double tol = kDefaultTol) {
  return u.rows() == u.cols() && max_abs(u.adjoint() * u - identity(u.rows())) <= tol;
}

/// Principal square root of a positive semidefinite matrix.
inline CMatrix sqrt_psd(const CMatrix& a, double tol = kDefaultTol) {
  return herm_func(a, [](double x) { return std::sqrt(std::max(x, 0.0)); }, tol);
}

struct Polar {
  CMatrix isometry;  // partial isometry u with x = u |x|
  CMatrix modulus;   // |x| = (x* x)^{1/2}
};

/// Polar decomposition x = u|x| with u the partial isometry supported on the
/// range of |x| (singular values <= tol are treated as zero).
inline Polar polar(const CMatrix& x, double tol = kDefaultTol) {
  require_square(x, "polar");
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  const CMatrix u = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).adjoint();
  const CMatrix m = svd.matrixV().leftCols(rank) * s.head(rank).cast<cplx>().asDiagonal() *
                    svd.matrixV().leftCols(rank).adjoint();
  return {u, m};
}

/// Tr(A* B).
inline cplx hs_inner(const CMatrix& a, const CMatrix& b) {
  return a.conjugate().cwiseProduct(b).sum();
}

}  // namespace z2kms
