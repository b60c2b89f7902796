#pragma once

// Reference computations used by the tests. Everything here works directly on
// occupation-number bits and never calls the library's functional calculus.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "z2kms/z2kms.hpp"

namespace oracle {

using z2kms::CMatrix;
using z2kms::cplx;
using z2kms::CVector;
using z2kms::RVector;

/// Normalized Boltzmann weights e^{-beta E_s} / Z with E_s = sum of lambda_k over occupied k.
inline RVector gibbs_weights(const std::vector<double>& lambdas, double beta) {
  const std::size_t n = lambdas.size();
  const Eigen::Index d = Eigen::Index{1} << n;
  RVector w(d);
  for (Eigen::Index s = 0; s < d; ++s) {
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if ((static_cast<std::uint64_t>(s) >> k) & 1U) e += lambdas[k];
    }
    w(s) = std::exp(-beta * e);
  }
  return w / w.sum();
}

/// Tr(e^{-beta H} x) / Z.
inline cplx gibbs_expectation(const std::vector<double>& lambdas, double beta, const CMatrix& x) {
  const RVector w = gibbs_weights(lambdas, beta);
  cplx acc = 0.0;
  for (Eigen::Index s = 0; s < w.size(); ++s) acc += w(s) * x(s, s);
  return acc;
}

/// Diagonal of prod over odd k of sgn(beta lambda_k)(1 - 2 n_k).
inline RVector twisted_ratio(const std::vector<double>& lambdas, const std::vector<int>& parities, double beta) {
  const std::size_t n = lambdas.size();
  const Eigen::Index d = Eigen::Index{1} << n;
  RVector u = RVector::Ones(d);
  for (std::size_t k = 0; k < n; ++k) {
    if (parities[k] != -1) continue;
    const double sgn = beta * lambdas[k] > 0 ? 1.0 : -1.0;
    for (Eigen::Index s = 0; s < d; ++s) u(s) *= ((static_cast<std::uint64_t>(s) >> k) & 1U) ? -sgn : sgn;
  }
  return u;
}

inline cplx twisted_expectation(const std::vector<double>& lambdas, const std::vector<int>& parities, double beta,
                                const CMatrix& x) {
  const RVector w = gibbs_weights(lambdas, beta);
  const RVector u = twisted_ratio(lambdas, parities, beta);
  cplx acc = 0.0;
  for (Eigen::Index s = 0; s < w.size(); ++s) acc += w(s) * u(s) * x(s, s);
  return acc;
}

/// prod over odd modes of tanh(|beta lambda| / 2).
inline double c_product(const std::vector<double>& lambdas, const std::vector<int>& parities, double beta) {
  double c = 1.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (parities[k] == -1) c *= std::tanh(0.5 * std::abs(beta * lambdas[k]));
  }
  return c;
}

inline CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int k = 0; k < n; ++k) v(k) = cplx(g(rng), g(rng));
  return v;
}

/// Random spectrum with |lambda| in [0.3, 2.5], random signs and parities.
inline z2kms::ModeBasis random_basis(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> mag(0.3, 2.5);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> l;
  std::vector<int> g;
  for (int k = 0; k < n; ++k) {
    l.push_back(coin(rng) ? mag(rng) : -mag(rng));
    g.push_back(coin(rng) ? 1 : -1);
  }
  return z2kms::ModeBasis(l, g);
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  return a;
}

inline CMatrix field_product(const z2kms::ModeBasis& basis, const std::vector<CVector>& xs) {
  CMatrix out = z2kms::identity(basis.dim());
  for (const CVector& x : xs) out = out * z2kms::field(basis, x);
  return out;
}

inline CMatrix diag(std::initializer_list<double> v) {
  RVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x.cast<cplx>().asDiagonal();
}

}  // namespace oracle
