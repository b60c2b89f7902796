#pragma once

// The Z2 crossed product of a finite matrix algebra by a grading Ad_G,
// realized as pairs (a, b) ~ a + b u with u^2 = 1 and u a u = gamma(a).

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "z2kms/car_fock.hpp"
#include "z2kms/functional.hpp"
#include "z2kms/quasifree.hpp"

namespace z2kms {

struct CrossedElement {
  CMatrix even;  // a
  CMatrix odd;   // b, the coefficient of the group generator

  Eigen::Index dim() const { return even.rows(); }

  CrossedElement operator+(const CrossedElement& o) const { return {even + o.even, odd + o.odd}; }
  CrossedElement operator-(const CrossedElement& o) const { return {even - o.even, odd - o.odd}; }
  CrossedElement operator*(cplx c) const { return {c * even, c * odd}; }
};

/// Pair algebra over M_d with gamma = Ad_G for a selfadjoint unitary G.
class Z2CrossedProduct {
 public:
  explicit Z2CrossedProduct(CMatrix grading, double tol = kDefaultTol) : grading_(std::move(grading)) {
    require_square(grading_, "Z2CrossedProduct");
    if (!is_unitary(grading_, tol) || hermiticity_defect(grading_) > tol) {
      throw Error(ErrorCode::NotUnitary, "Z2CrossedProduct: grading must be a selfadjoint unitary");
    }
  }

  Eigen::Index dim() const { return grading_.rows(); }
  const CMatrix& grading() const { return grading_; }

  CMatrix gamma(const CMatrix& a) const { return grading_ * a * grading_; }

  CrossedElement unit() const { return {identity(dim()), CMatrix::Zero(dim(), dim())}; }
  CrossedElement generator() const { return {CMatrix::Zero(dim(), dim()), identity(dim())}; }
  CrossedElement embed(const CMatrix& a) const { return {a, CMatrix::Zero(dim(), dim())}; }

  /// (a, b)(a', b') = (a a' + b gamma(b'), a b' + b gamma(a'))
  CrossedElement multiply(const CrossedElement& x, const CrossedElement& y) const {
    check(x);
    check(y);
    return {x.even * y.even + x.odd * gamma(y.odd), x.even * y.odd + x.odd * gamma(y.even)};
  }

  /// (a, b)* = (a*, gamma(b*))
  CrossedElement star(const CrossedElement& x) const {
    check(x);
    return {x.even.adjoint(), gamma(x.odd.adjoint())};
  }

  /// Norm in the faithful representation a (x) 1 + b G (x) flip on C^d (x) C^2,
  /// whose two diagonal blocks are a + bG and a - bG.
  double norm(const CrossedElement& x) const {
    check(x);
    const CMatrix bg = x.odd * grading_;
    return std::max(op_norm(x.even + bg), op_norm(x.even - bg));
  }

  /// Canonical conditional expectation (a, b) -> a.
  static CMatrix cond_expectation(const CrossedElement& x) { return x.even; }

 private:
  void check(const CrossedElement& x) const {
    if (x.even.rows() != dim() || x.even.cols() != dim() || x.odd.rows() != dim() || x.odd.cols() != dim()) {
      throw Error(ErrorCode::DimensionMismatch, "Z2CrossedProduct: element dimension mismatch");
    }
  }

  CMatrix grading_;
};

/// A pair (omega, rho) of functionals on the base algebra.
struct ExtensionPair {
  LinearFunctional omega;  // state part
  LinearFunctional rho;    // twisted part
};

/// The functional (a, b) -> omega(a) + rho(b) on the crossed product.
struct CrossedFunctional {
  ExtensionPair parts;

  cplx operator()(const CrossedElement& x) const { return parts.omega(x.even) + parts.rho(x.odd); }

  const LinearFunctional& restrict_even() const { return parts.omega; }
  const LinearFunctional& restrict_odd() const { return parts.rho; }

  CrossedFunctional operator+(const CrossedFunctional& o) const {
    return {{parts.omega + o.parts.omega, parts.rho + o.parts.rho}};
  }
  CrossedFunctional operator*(double c) const { return {{parts.omega * c, parts.rho * c}}; }
};

/// Extension of a gamma-invariant state by a dominated hermitian functional.
inline CrossedFunctional extend_state(const Z2CrossedProduct& cp, const ExtensionPair& pair, double tol = kDefaultTol) {
  if (pair.omega.dim() != cp.dim() || pair.rho.dim() != cp.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "extend_state: functional dimension differs from algebra");
  }
  // omega(gamma(x)) = omega(x) for all x iff [F_omega, G] = 0.
  if (max_abs(commutator(pair.omega.density, cp.grading())) > tol) {
    throw Error(ErrorCode::NotGammaInvariant, "extend_state: omega is not gamma-invariant");
  }
  if (!domination_check(pair.rho, pair.omega, tol)) {
    const DominationMargin m = domination_margin(pair.rho, pair.omega);
    throw Error(ErrorCode::NotDominated,
                "extend_state: rho is not dominated by omega (margin " + std::to_string(m.worst()) + ")");
  }
  return CrossedFunctional{pair};
}

/// Canonical extension omega o E.
inline CrossedFunctional canonical_extension(const Z2CrossedProduct& cp, const LinearFunctional& omega,
                                             double tol = kDefaultTol) {
  return extend_state(cp, {omega, LinearFunctional::zero(cp.dim())}, tol);
}

/// Dynamics data: alpha_t = Ad e^{itH} applied componentwise to pairs.
struct Dynamics {
  CMatrix hamiltonian;
  double beta;
};

inline CrossedElement analytic_shift(const ImaginaryTimeShift& shift, const CrossedElement& y) {
  return {shift(y.even), shift(y.odd)};
}

/// max |phi(x alpha_{i beta}(y)) - phi(y x)| over the supplied pairs.
inline double verify_kms(const Z2CrossedProduct& cp, const CrossedFunctional& phi, const Dynamics& dyn,
                         std::span<const std::pair<CrossedElement, CrossedElement>> pairs) {
  const ImaginaryTimeShift shift(dyn.hamiltonian, dyn.beta);
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const cplx lhs = phi(cp.multiply(x, analytic_shift(shift, y)));
    const cplx rhs = phi(cp.multiply(y, x));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Untwisted KMS residual for a functional on the base algebra.
inline double verify_kms(const LinearFunctional& phi, const Dynamics& dyn,
                         std::span<const std::pair<CMatrix, CMatrix>> pairs) {
  const ImaginaryTimeShift shift(dyn.hamiltonian, dyn.beta);
  double worst = 0.0;
  for (const auto& [a, b] : pairs) worst = std::max(worst, std::abs(phi(a * shift(b)) - phi(b * a)));
  return worst;
}

/// max |rho(a alpha_{i beta}(b)) - rho(b gamma(a))| with gamma = Ad_G.
inline double verify_twisted_kms(const LinearFunctional& rho, const Dynamics& dyn, const CMatrix& grading,
                                 std::span<const std::pair<CMatrix, CMatrix>> pairs) {
  const ImaginaryTimeShift shift(dyn.hamiltonian, dyn.beta);
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    const cplx lhs = rho(a * shift(b));
    const cplx rhs = rho(b * grading * a * grading.adjoint());
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Smallest value of phi(x* x) / norm(x)^2 over the samples.
inline double min_positivity(const Z2CrossedProduct& cp, const CrossedFunctional& phi,
                             std::span<const CrossedElement> samples) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : samples) {
    const double n = cp.norm(x);
    if (n == 0.0) continue;
    worst = std::min(worst, phi(cp.multiply(cp.star(x), x)).real() / (n * n));
  }
  return worst;
}

/// Seeded random elements: complex Gaussian combinations of words of bounded
/// length in the a_k, a*_k.
class RandomElementGenerator {
 public:
  RandomElementGenerator(const ModeBasis& basis, std::uint64_t seed, int max_word_length = 4, int terms = 6)
      : basis_(basis), rng_(seed), max_len_(max_word_length), terms_(terms) {
    for (int k = 0; k < basis.modes(); ++k) {
      letters_.push_back(mode_annihilator(basis, k));
      letters_.push_back(letters_.back().adjoint());
    }
  }

  CMatrix operator()() {
    const Eigen::Index d = basis_.dim();
    CMatrix out = CMatrix::Zero(d, d);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> length(0, max_len_);
    std::uniform_int_distribution<std::size_t> letter(0, letters_.empty() ? 0 : letters_.size() - 1);
    for (int t = 0; t < terms_; ++t) {
      CMatrix word = identity(d);
      const int len = letters_.empty() ? 0 : length(rng_);
      for (int i = 0; i < len; ++i) word = word * letters_[letter(rng_)];
      const double re = gauss(rng_);
      const double im = gauss(rng_);
      out += cplx(re, im) * word;
    }
    return out;
  }

  CrossedElement crossed() {
    CMatrix a = (*this)();
    CMatrix b = (*this)();
    return {std::move(a), std::move(b)};
  }

  std::vector<std::pair<CMatrix, CMatrix>> pairs(int count) {
    std::vector<std::pair<CMatrix, CMatrix>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      CMatrix a = (*this)();
      CMatrix b = (*this)();
      out.emplace_back(std::move(a), std::move(b));
    }
    return out;
  }

  std::vector<std::pair<CrossedElement, CrossedElement>> crossed_pairs(int count) {
    std::vector<std::pair<CrossedElement, CrossedElement>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      CrossedElement x = crossed();
      CrossedElement y = crossed();
      out.emplace_back(std::move(x), std::move(y));
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  ModeBasis basis_;
  std::mt19937_64 rng_;
  int max_len_;
  int terms_;
  std::vector<CMatrix> letters_;
};

/// Extension of the Fock-space Gibbs state with u -> Gamma(G):
/// (a, b) -> Tr(e^{-beta H}(a + b Gamma(G))) / Z.
inline CrossedFunctional gibbs_extension(const ModeBasis& basis, double beta) {
  const CMatrix f = gibbs_density(dgamma(basis), beta);
  const CMatrix g = grading_unitary(basis);
  return CrossedFunctional{{LinearFunctional(f), LinearFunctional(g * f)}};
}

}  // namespace z2kms
