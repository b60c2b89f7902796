#pragma once

// Jordan-Wigner realization of CAR(C^n) on the 2^n-dimensional Fock space.
//
// Occupation basis: state index s has bit k set iff mode k (0-based) is
// occupied; mode 0 is the least significant bit. The lowering operator of
// mode k carries the string (-1)^{#occupied modes below k}, so that
// e_s = a*_{k1} a*_{k2} ... a*_{km} |0> for k1 < k2 < ... < km.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "z2kms/numerics.hpp"

namespace z2kms {

/// Joint eigenbasis of the one-particle Hamiltonian H and grading G.
struct ModeBasis {
  std::vector<double> lambdas;  // eigenvalues of H
  std::vector<int> parities;    // eigenvalues of G, each +1 or -1

  ModeBasis() = default;
  ModeBasis(std::vector<double> l, std::vector<int> g) : lambdas(std::move(l)), parities(std::move(g)) {
    validate();
  }

  /// All modes odd (canonical grading G = -1).
  static ModeBasis all_odd(std::vector<double> l) {
    std::vector<int> g(l.size(), -1);
    return ModeBasis(std::move(l), std::move(g));
  }
  static ModeBasis all_even(std::vector<double> l) {
    std::vector<int> g(l.size(), +1);
    return ModeBasis(std::move(l), std::move(g));
  }

  void validate() const {
    if (lambdas.size() != parities.size()) {
      throw Error(ErrorCode::DimensionMismatch, "ModeBasis: lambdas and parities differ in length");
    }
    for (double l : lambdas) {
      if (!std::isfinite(l)) throw Error(ErrorCode::InvalidInput, "ModeBasis: non-finite eigenvalue");
    }
    for (int g : parities) {
      if (g != 1 && g != -1) throw Error(ErrorCode::InvalidInput, "ModeBasis: parity must be +1 or -1");
    }
  }

  int modes() const { return static_cast<int>(lambdas.size()); }
  /// Fock dimension 2^n; spectra longer than kMaxFockModes are fine for
  /// c_{beta H} but have no Fock space here.
  static constexpr int kMaxFockModes = 30;
  Eigen::Index dim() const {
    if (modes() > kMaxFockModes) throw Error(ErrorCode::CapExceeded, "ModeBasis: no Fock space beyond 30 modes");
    return Eigen::Index{1} << modes();
  }
  bool is_odd(int k) const { return parities.at(static_cast<std::size_t>(k)) == -1; }

  std::vector<int> odd_modes() const {
    std::vector<int> out;
    for (int k = 0; k < modes(); ++k) {
      if (is_odd(k)) out.push_back(k);
    }
    return out;
  }

  /// One-particle H and G as n x n diagonal matrices.
  CMatrix hamiltonian() const {
    CMatrix h = CMatrix::Zero(modes(), modes());
    for (int k = 0; k < modes(); ++k) h(k, k) = lambdas[static_cast<std::size_t>(k)];
    return h;
  }
  CMatrix grading() const {
    CMatrix g = CMatrix::Zero(modes(), modes());
    for (int k = 0; k < modes(); ++k) g(k, k) = parities[static_cast<std::size_t>(k)];
    return g;
  }
};

/// Coefficients of a one-particle vector in the mode basis.
using OneParticleVector = CVector;
/// Dense operator on the Fock space.
using FockOperator = CMatrix;

inline OneParticleVector unit_vector(int n, int k, cplx scale = 1.0) {
  OneParticleVector v = OneParticleVector::Zero(n);
  v(k) = scale;
  return v;
}

namespace detail {

inline void require_vector(const ModeBasis& basis, const OneParticleVector& v, const char* where) {
  if (v.size() != basis.modes()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": vector has " + std::to_string(v.size()) + " entries, basis has " +
                    std::to_string(basis.modes()) + " modes");
  }
}

inline double string_sign(std::uint64_t s, int k) {
  const std::uint64_t below = s & ((std::uint64_t{1} << k) - 1);
  return (std::popcount(below) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

/// Jordan-Wigner lowering operator of a single mode.
inline FockOperator mode_annihilator(const ModeBasis& basis, int k) {
  if (k < 0 || k >= basis.modes()) throw Error(ErrorCode::IndexOutOfRange, "mode_annihilator");
  const Eigen::Index d = basis.dim();
  FockOperator a = FockOperator::Zero(d, d);
  const std::uint64_t bit = std::uint64_t{1} << k;
  for (Eigen::Index s = 0; s < d; ++s) {
    const auto us = static_cast<std::uint64_t>(s);
    if (us & bit) a(static_cast<Eigen::Index>(us ^ bit), s) = detail::string_sign(us, k);
  }
  return a;
}

/// a(phi) = sum_k conj(phi_k) a_k, antilinear in phi.
inline FockOperator annihilator(const ModeBasis& basis, const OneParticleVector& phi) {
  detail::require_vector(basis, phi, "annihilator");
  const Eigen::Index d = basis.dim();
  FockOperator a = FockOperator::Zero(d, d);
  for (int k = 0; k < basis.modes(); ++k) {
    const cplx c = std::conj(phi(k));
    if (c == cplx(0)) continue;
    const std::uint64_t bit = std::uint64_t{1} << k;
    for (Eigen::Index s = 0; s < d; ++s) {
      const auto us = static_cast<std::uint64_t>(s);
      if (us & bit) a(static_cast<Eigen::Index>(us ^ bit), s) += c * detail::string_sign(us, k);
    }
  }
  return a;
}

/// a*(phi), linear in phi.
inline FockOperator creator(const ModeBasis& basis, const OneParticleVector& phi) {
  return annihilator(basis, phi).adjoint();
}

/// Field operator Phi(xi) = a*(xi) + a(xi); real-linear in xi.
inline FockOperator field(const ModeBasis& basis, const OneParticleVector& xi) {
  const FockOperator a = annihilator(basis, xi);
  return a.adjoint() + a;
}

/// (-1)^N, diagonal in the occupation basis.
inline FockOperator parity_operator(const ModeBasis& basis) {
  const Eigen::Index d = basis.dim();
  FockOperator p = FockOperator::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    p(s, s) = (std::popcount(static_cast<std::uint64_t>(s)) % 2 == 0) ? 1.0 : -1.0;
  }
  return p;
}

/// Dual field Phi'(xi) = (a*(xi) - a(xi)) (-1)^N.
inline FockOperator dual_field(const ModeBasis& basis, const OneParticleVector& xi) {
  const FockOperator a = annihilator(basis, xi);
  return (a.adjoint() - a) * parity_operator(basis);
}

/// Occupation projection P_k = a*_k a_k.
inline FockOperator number_projection(const ModeBasis& basis, int k) {
  if (k < 0 || k >= basis.modes()) throw Error(ErrorCode::IndexOutOfRange, "number_projection");
  const Eigen::Index d = basis.dim();
  FockOperator p = FockOperator::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    if ((static_cast<std::uint64_t>(s) >> k) & 1U) p(s, s) = 1.0;
  }
  return p;
}

/// Second-quantized Hamiltonian dGamma(H) = sum_k lambda_k a*_k a_k.
inline FockOperator dgamma(const ModeBasis& basis) {
  const Eigen::Index d = basis.dim();
  FockOperator h = FockOperator::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    double e = 0.0;
    for (int k = 0; k < basis.modes(); ++k) {
      if ((static_cast<std::uint64_t>(s) >> k) & 1U) e += basis.lambdas[static_cast<std::size_t>(k)];
    }
    h(s, s) = e;
  }
  return h;
}

/// Gamma(G) for the grading of the basis: the product of (1 - 2 P_k) over odd modes.
inline FockOperator grading_unitary(const ModeBasis& basis) {
  const Eigen::Index d = basis.dim();
  std::uint64_t odd_mask = 0;
  for (int k : basis.odd_modes()) odd_mask |= std::uint64_t{1} << k;
  FockOperator g = FockOperator::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    g(s, s) = (std::popcount(static_cast<std::uint64_t>(s) & odd_mask) % 2 == 0) ? 1.0 : -1.0;
  }
  return g;
}

/// Second quantization Gamma(V) of a one-particle unitary, fixed by
/// Gamma(V) a*(phi) Gamma(V)* = a*(V phi) and Gamma(V)|0> = |0>.
inline FockOperator second_quantize(const ModeBasis& basis, const CMatrix& v, double tol = kDefaultTol) {
  const int n = basis.modes();
  if (v.rows() != n || v.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "second_quantize: unitary must be n x n");
  }
  if (!is_unitary(v, tol)) throw Error(ErrorCode::NotUnitary, "second_quantize: V is not unitary");
  const Eigen::Index d = basis.dim();
  FockOperator out = FockOperator::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    // e_s = a*_{k1} ... a*_{km}|0>; apply a*(V e_k) right-to-left.
    CVector psi = CVector::Zero(d);
    psi(0) = 1.0;
    for (int k = n - 1; k >= 0; --k) {
      if (!((static_cast<std::uint64_t>(s) >> k) & 1U)) continue;
      CVector next = CVector::Zero(d);
      for (int j = 0; j < n; ++j) {
        const cplx c = v(j, k);
        if (c == cplx(0)) continue;
        const std::uint64_t bit = std::uint64_t{1} << j;
        for (Eigen::Index t = 0; t < d; ++t) {
          const auto ut = static_cast<std::uint64_t>(t);
          if (!(ut & bit) && psi(t) != cplx(0)) {
            next(static_cast<Eigen::Index>(ut | bit)) += c * detail::string_sign(ut, j) * psi(t);
          }
        }
      }
      psi = std::move(next);
    }
    out.col(s) = psi;
  }
  return out;
}

/// Sparse operator with exactly one nonzero entry per column:
/// op e_s = phase[s] e_{target[s]}. Products of field operators over
/// basis vectors (Majorana words) have this form.
struct MonomialOperator {
  std::vector<std::uint32_t> target;
  std::vector<cplx> phase;

  static MonomialOperator identity(Eigen::Index d) {
    MonomialOperator m;
    m.target.resize(static_cast<std::size_t>(d));
    m.phase.assign(static_cast<std::size_t>(d), 1.0);
    for (std::size_t s = 0; s < m.target.size(); ++s) m.target[s] = static_cast<std::uint32_t>(s);
    return m;
  }

  /// this * other
  MonomialOperator times(const MonomialOperator& other) const {
    MonomialOperator m;
    m.target.resize(target.size());
    m.phase.resize(target.size());
    for (std::size_t s = 0; s < target.size(); ++s) {
      const std::uint32_t mid = other.target[s];
      m.target[s] = target[mid];
      m.phase[s] = phase[mid] * other.phase[s];
    }
    return m;
  }

  FockOperator dense() const {
    const auto d = static_cast<Eigen::Index>(target.size());
    FockOperator out = FockOperator::Zero(d, d);
    for (std::size_t s = 0; s < target.size(); ++s) out(target[s], static_cast<Eigen::Index>(s)) = phase[s];
    return out;
  }

  /// out += c * this^dagger
  void add_adjoint_to(FockOperator& out, cplx c) const {
    for (std::size_t s = 0; s < target.size(); ++s) {
      out(static_cast<Eigen::Index>(s), target[s]) += c * std::conj(phase[s]);
    }
  }
};

/// Field operator over a real basis vector: index k < n gives Phi(e_k),
/// index n + k gives Phi(i e_k).
inline MonomialOperator majorana(const ModeBasis& basis, int index) {
  const int n = basis.modes();
  if (index < 0 || index >= 2 * n) throw Error(ErrorCode::IndexOutOfRange, "majorana");
  const int k = index % n;
  const bool imaginary = index >= n;
  const std::uint64_t bit = std::uint64_t{1} << k;
  MonomialOperator m;
  const auto d = static_cast<std::size_t>(basis.dim());
  m.target.resize(d);
  m.phase.resize(d);
  for (std::size_t s = 0; s < d; ++s) {
    const auto us = static_cast<std::uint64_t>(s);
    const double sign = detail::string_sign(us, k);
    m.target[s] = static_cast<std::uint32_t>(us ^ bit);
    if (!imaginary) {
      m.phase[s] = sign;
    } else {
      // Phi(i e) = i a*(e) - i a(e)
      m.phase[s] = (us & bit) ? cplx(0, -sign) : cplx(0, sign);
    }
  }
  return m;
}

/// Coordinates of xi in the real basis {e_1..e_n, i e_1..i e_n}.
inline RVector real_coordinates(const OneParticleVector& xi) {
  RVector r(2 * xi.size());
  r.head(xi.size()) = xi.real();
  r.tail(xi.size()) = xi.imag();
  return r;
}

}  // namespace z2kms
