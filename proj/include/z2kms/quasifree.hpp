#pragma once

// Quasifree functionals on CAR(C^n): the KMS covariance, the twisted
// covariance, pairing-expansion evaluation, the constant c_{beta H} and the
// inner approximants u_n of the grading.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "z2kms/car_fock.hpp"
#include "z2kms/functional.hpp"

namespace z2kms {

/// Hermitian quasifree functional x -> weight * mu_T(x).
///
/// two_point(p, q) = mu_T(Phi(v_p) Phi(v_q)) over the real basis
/// v = (e_1, ..., e_n, i e_1, ..., i e_n); values on arbitrary vectors follow
/// by real-bilinearity.
struct QuasifreeFunctional {
  ModeBasis basis;
  double weight = 1.0;
  CMatrix covariance;  // anti-selfadjoint T on C^n
  CMatrix two_point;   // 2n x 2n

  QuasifreeFunctional scaled(double c) const {
    QuasifreeFunctional out = *this;
    out.weight *= c;
    return out;
  }

  /// Unit-weight two-point value mu_T(Phi(xi) Phi(eta)).
  cplx two_point_value(const OneParticleVector& xi, const OneParticleVector& eta) const {
    return real_coordinates(xi).cast<cplx>().dot(two_point * real_coordinates(eta).cast<cplx>());
  }
};

/// mu_T with mu_T(Phi(xi)Phi(eta)) = Re<xi,eta> + i Re<xi, T eta>.
inline QuasifreeFunctional quasifree_from_covariance(const ModeBasis& basis, const CMatrix& t, double weight = 1.0) {
  const int n = basis.modes();
  if (t.rows() != n || t.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "quasifree_from_covariance: T must be n x n");
  }
  QuasifreeFunctional f{basis, weight, t, CMatrix::Zero(2 * n, 2 * n)};
  auto vec = [n](int p) { return unit_vector(n, p % n, p < n ? cplx(1, 0) : cplx(0, 1)); };
  for (int p = 0; p < 2 * n; ++p) {
    const CVector vp = vec(p);
    for (int q = 0; q < 2 * n; ++q) {
      const CVector vq = vec(q);
      const cplx plain = vp.dot(vq);  // <vp, vq>, antilinear in vp
      const cplx twisted = vp.dot(t * vq);
      f.two_point(p, q) = cplx(plain.real(), twisted.real());
    }
  }
  return f;
}

/// The KMS state omega_beta = mu_{T_beta}, T_beta = -i tanh(beta H / 2).
inline QuasifreeFunctional kms_covariance(const ModeBasis& basis, double beta) {
  const int n = basis.modes();
  CMatrix t = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) t(k, k) = cplx(0, -std::tanh(0.5 * beta * basis.lambdas[static_cast<std::size_t>(k)]));
  return quasifree_from_covariance(basis, t);
}

/// Threshold on |beta lambda| below which (1 - e^{+-beta lambda})^{-1} is
/// treated as singular.
inline constexpr double kDegenerateCutoff = 1e-8;

/// Unit-weight twisted functional mu_{T_beta^G},
/// T_beta^G = i (1 - G e^{beta H}) / (1 + G e^{beta H}).
inline QuasifreeFunctional twisted_covariance(const ModeBasis& basis, double beta) {
  const int n = basis.modes();
  CMatrix t = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double x = beta * basis.lambdas[static_cast<std::size_t>(k)];
    if (basis.is_odd(k)) {
      if (std::abs(x) < kDegenerateCutoff) {
        throw Error(ErrorCode::DegenerateSpectrum,
                    "twisted_covariance: odd mode " + std::to_string(k) + " has beta*lambda = " + std::to_string(x));
      }
      t(k, k) = cplx(0, -1.0 / std::tanh(0.5 * x));
    } else {
      t(k, k) = cplx(0, -std::tanh(0.5 * x));
    }
  }
  return quasifree_from_covariance(basis, t);
}

namespace detail {

// Signed sum over pairings of {0..m-1} by contraction of the first element:
// E(1..m) = sum_j (-1)^{j} M(1,j) E(rest). Exact zeros are pruned.
template <class PairFn>
cplx pairing_sum(std::uint64_t mask, const PairFn& pair) {
  if (mask == 0) return 1.0;
  const int first = std::countr_zero(mask);
  const std::uint64_t rest = mask & (mask - 1);
  cplx total = 0.0;
  int position = 0;
  for (std::uint64_t scan = rest; scan != 0; scan &= scan - 1) {
    const int j = std::countr_zero(scan);
    const cplx m = pair(first, j);
    if (m != cplx(0)) {
      const cplx sub = pairing_sum(rest & ~(std::uint64_t{1} << j), pair);
      total += (position % 2 == 0 ? m : -m) * sub;
    }
    ++position;
  }
  return total;
}

}  // namespace detail

/// Signed pairing expansion of an even string given the matrix of its
/// two-point contractions M(i, j), i < j.
inline cplx pairing_expansion(const CMatrix& contractions) {
  const auto m = contractions.rows();
  if (m % 2 != 0) return 0.0;
  if (m > 62) throw Error(ErrorCode::CapExceeded, "pairing_expansion: string too long");
  const std::uint64_t mask = m == 0 ? 0 : ((std::uint64_t{1} << m) - 1);
  return detail::pairing_sum(mask, [&](int i, int j) { return contractions(i, j); });
}

/// f(Phi(xi_1) ... Phi(xi_m)).
inline cplx eval_quasifree(const QuasifreeFunctional& f, std::span<const OneParticleVector> points) {
  const auto m = static_cast<Eigen::Index>(points.size());
  if (m == 0) return f.weight;
  if (m % 2 != 0) return 0.0;
  for (const auto& p : points) detail::require_vector(f.basis, p, "eval_quasifree");
  CMatrix contractions = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      contractions(i, j) = f.two_point_value(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  return f.weight * pairing_expansion(contractions);
}

inline cplx eval_quasifree(const QuasifreeFunctional& f, std::initializer_list<OneParticleVector> points) {
  return eval_quasifree(f, std::span<const OneParticleVector>(points.begin(), points.size()));
}

/// Density operator F with Tr(F x) = f(x), reconstructed from the values of
/// f on the 4^n Majorana words (which are orthogonal with Tr(w* w) = 2^n).
inline LinearFunctional density_of(const QuasifreeFunctional& f) {
  const ModeBasis& basis = f.basis;
  const int n = basis.modes();
  const int letters = 2 * n;
  if (n > 12) throw Error(ErrorCode::CapExceeded, "density_of: more than 12 modes");
  const Eigen::Index d = basis.dim();
  std::vector<MonomialOperator> gens;
  gens.reserve(static_cast<std::size_t>(letters));
  for (int p = 0; p < letters; ++p) gens.push_back(majorana(basis, p));

  CMatrix density = CMatrix::Zero(d, d);
  const double norm = 1.0 / static_cast<double>(d);
  const std::uint64_t words = std::uint64_t{1} << letters;
  std::vector<int> idx;
  for (std::uint64_t w = 0; w < words; ++w) {
    if (std::popcount(w) % 2 != 0) continue;
    idx.clear();
    for (std::uint64_t s = w; s != 0; s &= s - 1) idx.push_back(std::countr_zero(s));
    const cplx value =
        f.weight * detail::pairing_sum((std::uint64_t{1} << idx.size()) - 1,
                                       [&](int i, int j) { return f.two_point(idx[static_cast<std::size_t>(i)],
                                                                              idx[static_cast<std::size_t>(j)]); });
    if (value == cplx(0)) continue;
    MonomialOperator word = MonomialOperator::identity(d);
    for (int p : idx) word = word.times(gens[static_cast<std::size_t>(p)]);
    word.add_adjoint_to(density, value * norm);
  }
  return LinearFunctional(std::move(density));
}

enum class Verdict { Holds, Fails, Undetermined };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

struct SpectrumReport {
  std::vector<double> c_partial;      // products over the first m odd modes, m = 1..
  std::vector<double> trace_partial;  // partial sums of e^{-|beta lambda|}
  Verdict verdict = Verdict::Holds;

  double c() const { return c_partial.empty() ? 1.0 : c_partial.back(); }
  double trace() const { return trace_partial.empty() ? 0.0 : trace_partial.back(); }
};

/// Single-mode factor (1 - e^{-|x|}) / (1 + e^{-|x|}).
inline double c_factor(double beta_lambda) {
  const double e = std::exp(-std::abs(beta_lambda));
  return (1.0 - e) / (1.0 + e);
}

/// c_{beta H} = prod over odd modes of (1 - e^{-|beta lambda|}) / (1 + e^{-|beta lambda|}).
/// A vanishing odd beta*lambda makes the product exactly zero and the verdict Fails.
inline SpectrumReport c_beta_H(const ModeBasis& basis, double beta) {
  SpectrumReport r;
  double c = 1.0;
  double tr = 0.0;
  for (int k : basis.odd_modes()) {
    const double x = beta * basis.lambdas[static_cast<std::size_t>(k)];
    if (x == 0.0) r.verdict = Verdict::Fails;
    c *= c_factor(x);
    tr += std::exp(-std::abs(x));
    r.c_partial.push_back(c);
    r.trace_partial.push_back(tr);
  }
  return r;
}

/// u_n = prod over the first n odd modes of sgn(beta lambda_k) (1 - 2 P_k).
inline FockOperator grading_approximants(const ModeBasis& basis, double beta, int n) {
  const std::vector<int> odd = basis.odd_modes();
  if (n < 0 || n > static_cast<int>(odd.size())) {
    throw Error(ErrorCode::IndexOutOfRange, "grading_approximants: n = " + std::to_string(n) + " but only " +
                                                std::to_string(odd.size()) + " odd modes");
  }
  const Eigen::Index d = basis.dim();
  CVector diag = CVector::Ones(d);
  for (int i = 0; i < n; ++i) {
    const int k = odd[static_cast<std::size_t>(i)];
    const double x = beta * basis.lambdas[static_cast<std::size_t>(k)];
    if (std::abs(x) < kDegenerateCutoff) {
      throw Error(ErrorCode::DegenerateSpectrum, "grading_approximants: beta*lambda vanishes on mode " +
                                                     std::to_string(k));
    }
    const double sgn = x > 0 ? 1.0 : -1.0;
    for (Eigen::Index s = 0; s < d; ++s) {
      const bool occupied = (static_cast<std::uint64_t>(s) >> k) & 1U;
      diag(s) *= occupied ? -sgn : sgn;
    }
  }
  return diag.asDiagonal();
}

struct DominationMargin {
  double lower;  // min eigenvalue of F_omega - F_rho
  double upper;  // min eigenvalue of F_omega + F_rho
  double hermiticity;

  double worst() const { return std::min(lower, upper); }
};

inline DominationMargin domination_margin(const LinearFunctional& rho, const LinearFunctional& omega) {
  require_same_shape(rho.density, omega.density, "domination_check");
  return {min_eigenvalue(omega.density - rho.density), min_eigenvalue(omega.density + rho.density),
          hermiticity_defect(rho.density)};
}

/// True iff rho is hermitian and omega -+ rho are both positive (within tol),
/// which gives |rho(a*b)|^2 <= omega(a*a) omega(b*b).
inline bool domination_check(const LinearFunctional& rho, const LinearFunctional& omega, double tol = kDefaultTol) {
  const DominationMargin m = domination_margin(rho, omega);
  return m.hermiticity <= tol && m.worst() >= -tol;
}

/// Weight mu_0(Gamma(G)) of the twisted tracial functional mu_0( . Gamma(G)).
inline double tracial_twisted_check(const ModeBasis& basis) {
  const FockOperator g = grading_unitary(basis);
  return g.trace().real() / static_cast<double>(basis.dim());
}

}  // namespace z2kms
