#pragma once

// Standard-form GNS data for a faithful state on a finite-dimensional
// *-algebra M of d x d matrices, the twisted center Z(M, V), the Kallman
// split of a grading into inner and freely acting parts, the Xi map, and the
// doubled (Araki-Wyss) realization of the quasifree KMS state.
//
// The GNS space is M itself inside the Hilbert-Schmidt space HS(C^d), with
// Omega = D^{1/2}, pi(a) xi = a xi, J xi = xi*, Delta xi = D xi D^{-1} and
// V xi = G xi G*. Then J x* J is right multiplication by x, so
// J x* J = x V reads  xi x = x G xi G*  for all xi in M.

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "z2kms/car_fock.hpp"
#include "z2kms/functional.hpp"
#include "z2kms/quasifree.hpp"

namespace z2kms {

/// Relative cutoff on singular values when solving the homogeneous linear
/// systems below; structured problems here have O(1) spectral gaps.
inline constexpr double kSolveCutoff = 1e-7;

/// Modified Gram-Schmidt in the Hilbert-Schmidt inner product. Elements whose
/// residual norm falls below tol are dropped.
inline std::vector<CMatrix> orthonormalize(const std::vector<CMatrix>& ops, double tol = 1e-9) {
  std::vector<CMatrix> out;
  for (const CMatrix& op : ops) {
    CMatrix r = op;
    for (int pass = 0; pass < 2; ++pass) {
      for (const CMatrix& b : out) r -= hs_inner(b, r) * b;
    }
    const double nrm = r.norm();
    if (nrm > tol * std::max(1.0, op.norm())) out.push_back(r / nrm);
  }
  return out;
}

/// Unital *-subalgebra of M_d spanned by a Hilbert-Schmidt orthonormal basis.
struct MatrixAlgebra {
  Eigen::Index ambient_dim = 0;
  std::vector<CMatrix> basis;       // orthonormal
  std::vector<CMatrix> generators;  // generate the algebra together with the unit
  CMatrix unit;
  bool full = false;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }

  /// Elements the defining linear conditions are imposed on.
  const std::vector<CMatrix>& equation_set() const { return generators.empty() ? basis : generators; }

  CVector coordinates(const CMatrix& x) const {
    CVector c(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) c(i) = hs_inner(basis[static_cast<std::size_t>(i)], x);
    return c;
  }

  CMatrix element(const CVector& c) const {
    CMatrix x = CMatrix::Zero(ambient_dim, ambient_dim);
    for (Eigen::Index i = 0; i < dim(); ++i) x += c(i) * basis[static_cast<std::size_t>(i)];
    return x;
  }

  /// Orthogonal (trace-preserving) projection of HS(C^d) onto the algebra.
  CMatrix project(const CMatrix& x) const { return full ? x : element(coordinates(x)); }

  double distance(const CMatrix& x) const { return (x - project(x)).norm(); }

  bool contains(const CMatrix& x, double tol = kDefaultTol) const {
    return distance(x) <= tol * std::max(1.0, x.norm());
  }

  /// All of M_d, basis of matrix units. Optional generators (e.g. field
  /// operators) shorten the linear systems built on it.
  static MatrixAlgebra full_algebra(Eigen::Index d, std::vector<CMatrix> gens = {}) {
    MatrixAlgebra a;
    a.ambient_dim = d;
    a.full = true;
    a.unit = identity(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        CMatrix e = CMatrix::Zero(d, d);
        e(i, j) = 1.0;
        a.basis.push_back(std::move(e));
      }
    }
    a.generators = std::move(gens);
    return a;
  }

  /// Diagonal matrices C^d.
  static MatrixAlgebra diagonal_algebra(Eigen::Index d) {
    MatrixAlgebra a;
    a.ambient_dim = d;
    a.unit = identity(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, i) = 1.0;
      a.basis.push_back(std::move(e));
    }
    return a;
  }

  /// The unital *-algebra generated by gens inside the corner unit M_d unit.
  static MatrixAlgebra generated_by(const std::vector<CMatrix>& gens, const CMatrix& unit, double tol = 1e-9) {
    if (gens.empty() && unit.size() == 0) throw Error(ErrorCode::InvalidInput, "generated_by: no data");
    MatrixAlgebra a;
    a.ambient_dim = unit.rows();
    a.unit = unit;
    std::vector<CMatrix> letters;
    for (const CMatrix& g : gens) {
      require_same_shape(g, unit, "generated_by");
      letters.push_back(g);
      if (hermiticity_defect(g) > tol) letters.push_back(g.adjoint());
    }
    a.basis = orthonormalize({unit}, tol);
    for (std::size_t next = 0; next < a.basis.size(); ++next) {
      const CMatrix current = a.basis[next];
      for (const CMatrix& g : letters) {
        std::vector<CMatrix> candidate = a.basis;
        candidate.push_back(g * current);
        std::vector<CMatrix> ortho = orthonormalize(candidate, tol);
        if (ortho.size() > a.basis.size()) a.basis.push_back(ortho.back());
      }
    }
    a.generators = gens;
    return a;
  }

  static MatrixAlgebra generated_by(const std::vector<CMatrix>& gens, double tol = 1e-9) {
    if (gens.empty()) throw Error(ErrorCode::InvalidInput, "generated_by: no generators");
    return generated_by(gens, identity(gens.front().rows()), tol);
  }

  /// Span of ops, checked to be a unital *-algebra.
  static MatrixAlgebra from_span(const std::vector<CMatrix>& ops, double tol = 1e-9) {
    if (ops.empty()) throw Error(ErrorCode::InvalidInput, "from_span: empty span");
    MatrixAlgebra a;
    a.ambient_dim = ops.front().rows();
    a.unit = identity(a.ambient_dim);
    std::vector<CMatrix> all{a.unit};
    all.insert(all.end(), ops.begin(), ops.end());
    a.basis = orthonormalize(all, tol);
    a.verify_closure(1e-8);
    return a;
  }

  void verify_closure(double tol) const {
    for (const CMatrix& x : basis) {
      if (!contains(x.adjoint(), tol)) throw Error(ErrorCode::NotAnAlgebra, "span is not closed under adjoint");
      for (const CMatrix& y : basis) {
        if (!contains(x * y, tol)) throw Error(ErrorCode::NotAnAlgebra, "span is not closed under products");
      }
    }
  }

  /// Compression p M p for a central projection p.
  MatrixAlgebra compress(const CMatrix& p, double tol = 1e-9) const {
    MatrixAlgebra a;
    a.ambient_dim = ambient_dim;
    a.unit = p;
    std::vector<CMatrix> ops;
    ops.reserve(basis.size());
    for (const CMatrix& b : basis) ops.push_back(p * b * p);
    a.basis = orthonormalize(ops, tol);
    for (const CMatrix& g : generators) a.generators.push_back(p * g * p);
    return a;
  }
};

/// Block-diagonal direct sum of two algebras.
inline MatrixAlgebra direct_sum(const MatrixAlgebra& a, const MatrixAlgebra& b) {
  const Eigen::Index d = a.ambient_dim + b.ambient_dim;
  auto embed = [&](const CMatrix& x, bool first) {
    CMatrix out = CMatrix::Zero(d, d);
    if (first) {
      out.topLeftCorner(a.ambient_dim, a.ambient_dim) = x;
    } else {
      out.bottomRightCorner(b.ambient_dim, b.ambient_dim) = x;
    }
    return out;
  };
  MatrixAlgebra s;
  s.ambient_dim = d;
  s.unit = embed(a.unit, true) + embed(b.unit, false);
  for (const CMatrix& x : a.basis) s.basis.push_back(embed(x, true));
  for (const CMatrix& x : b.basis) s.basis.push_back(embed(x, false));
  return s;
}

/// Orthonormal basis of {x in M : L(x) = 0} for a linear map L given as a
/// list of linear maps whose outputs must all vanish.
template <class LinearMap>
std::vector<CMatrix> solve_in_algebra(const MatrixAlgebra& alg, const std::vector<LinearMap>& conditions) {
  const Eigen::Index m = alg.dim();
  if (m == 0) return {};
  const Eigen::Index d = alg.ambient_dim;
  CMatrix gram = CMatrix::Zero(m, m);
  CMatrix images(d * d, m);
  for (const LinearMap& cond : conditions) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const CMatrix img = cond(alg.basis[static_cast<std::size_t>(i)]);
      images.col(i) = Eigen::Map<const CVector>(img.data(), d * d);
    }
    gram.noalias() += images.adjoint() * images;
  }
  const double scale = std::sqrt(std::max(gram.cwiseAbs().maxCoeff(), 1.0));
  const CMatrix kernel = nullspace_from_gram(gram, kSolveCutoff * scale);
  std::vector<CMatrix> out;
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) out.push_back(alg.element(kernel.col(c)));
  return out;
}

/// Center of the algebra.
inline std::vector<CMatrix> center(const MatrixAlgebra& alg) {
  std::vector<std::function<CMatrix(const CMatrix&)>> conds;
  for (const CMatrix& y : alg.equation_set()) conds.emplace_back([y](const CMatrix& x) { return CMatrix(x * y - y * x); });
  return solve_in_algebra(alg, conds);
}

/// {x in M : x y = gamma(y) x for all y in M}.
template <class Gamma>
std::vector<CMatrix> intertwiners(const MatrixAlgebra& alg, const Gamma& gamma) {
  std::vector<std::function<CMatrix(const CMatrix&)>> conds;
  for (const CMatrix& y : alg.equation_set()) {
    const CMatrix gy = gamma(y);
    conds.emplace_back([y, gy](const CMatrix& x) { return CMatrix(x * y - gy * x); });
  }
  return solve_in_algebra(alg, conds);
}

/// gamma is freely acting iff x y = gamma(y) x for all y forces x = 0.
template <class Gamma>
bool freely_acting_test(const MatrixAlgebra& alg, const Gamma& gamma) {
  return intertwiners(alg, gamma).empty();
}

inline bool freely_acting_test(const MatrixAlgebra& alg, const CMatrix& grading) {
  return freely_acting_test(alg, [&grading](const CMatrix& y) { return CMatrix(grading * y * grading.adjoint()); });
}

/// Minimal central projections, read off from the spectral projections of a
/// generic selfadjoint central element.
inline std::vector<CMatrix> minimal_central_projections(const MatrixAlgebra& alg) {
  const std::vector<CMatrix> z = center(alg);
  const Eigen::Index d = alg.ambient_dim;
  if (z.empty()) return {};
  CMatrix generic = CMatrix::Zero(d, d);
  // Fixed irrational weights keep the combination generic and deterministic.
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double w = std::sqrt(2.0 + static_cast<double>(i)) + 0.1 * std::sqrt(3.0 + 7.0 * static_cast<double>(i));
    generic += w * (z[i] + z[i].adjoint());
  }
  const HermEig eig = herm_eig(generic, 1e-8 * (1.0 + max_abs(generic)));
  // Restrict to the support of the unit.
  std::vector<CMatrix> out;
  Eigen::Index start = 0;
  const double gap = 1e-6 * (1.0 + eig.values.cwiseAbs().maxCoeff());
  while (start < eig.values.size()) {
    Eigen::Index stop = start + 1;
    while (stop < eig.values.size() && eig.values(stop) - eig.values(stop - 1) < gap) ++stop;
    const CMatrix v = eig.vectors.middleCols(start, stop - start);
    const CMatrix p = v * v.adjoint();
    const CMatrix pu = alg.unit * p;
    if (pu.norm() > 1e-6 && alg.contains(p, 1e-7)) out.push_back(p);
    start = stop;
  }
  return out;
}

struct GnsData {
  MatrixAlgebra algebra;
  CMatrix density;      // D, in the algebra, trace 1
  CMatrix density_inv;  // D^{-1} on the support of the unit
  CMatrix omega;        // Omega = D^{1/2}
  CMatrix grading;      // G, V xi = G xi G*

  Eigen::Index gns_dim() const { return algebra.dim(); }

  CMatrix left(const CMatrix& a, const CMatrix& xi) const { return a * xi; }
  CMatrix modular_delta(const CMatrix& xi) const { return density * xi * density_inv; }
  CMatrix modular_j(const CMatrix& xi) const { return xi.adjoint(); }
  CMatrix grading_v(const CMatrix& xi) const { return grading * xi * grading.adjoint(); }
  static cplx inner(const CMatrix& xi, const CMatrix& eta) { return hs_inner(xi, eta); }

  /// omega(a) = <Omega, a Omega> = Tr(D a).
  cplx state(const CMatrix& a) const { return inner(omega, a * omega); }
  LinearFunctional state_functional() const { return LinearFunctional(density); }

  /// sigma_t(a) = Delta^{it} a Delta^{-it} = D^{it} a D^{-it}.
  CMatrix modular_flow(double t, const CMatrix& a) const {
    const double tol = 1e-10;
    const CMatrix dit = herm_func(density, [t](double x) { return x > 0 ? std::exp(cplx(0, t * std::log(x))) : cplx(0); }, tol);
    return dit * a * dit.adjoint();
  }

  /// Delta as a matrix in the orthonormal basis of the algebra.
  CMatrix delta_matrix() const {
    const Eigen::Index m = gns_dim();
    CMatrix out(m, m);
    for (Eigen::Index j = 0; j < m; ++j) out.col(j) = algebra.coordinates(modular_delta(algebra.basis[static_cast<std::size_t>(j)]));
    return out;
  }

  /// max over the equation set of |xi x - x V(xi)|.
  double twisted_relation_residual(const CMatrix& x) const {
    double worst = 0.0;
    for (const CMatrix& xi : algebra.equation_set()) worst = std::max(worst, max_abs(xi * x - x * grading_v(xi)));
    return worst;
  }
};

/// GNS data of the state Tr(D .) restricted to alg, with grading Ad_G.
inline GnsData build_gns(const MatrixAlgebra& alg, const CMatrix& density, const CMatrix& grading,
                         double tol = kDefaultTol) {
  require_same_shape(density, alg.unit, "build_gns");
  require_same_shape(grading, alg.unit, "build_gns");
  if (hermiticity_defect(density) > tol) throw Error(ErrorCode::NotFaithful, "build_gns: density is not Hermitian");
  if (!is_unitary(grading, tol)) throw Error(ErrorCode::GradingNotInvariant, "build_gns: grading is not unitary");
  for (const CMatrix& b : alg.basis) {
    if (!alg.contains(grading * b * grading.adjoint(), 1e-8)) {
      throw Error(ErrorCode::GradingNotInvariant, "build_gns: Ad_G does not preserve the algebra");
    }
  }
  GnsData g;
  g.algebra = alg;
  g.grading = grading;
  g.density = alg.project(0.5 * (density + density.adjoint()));
  const cplx tr = g.density.trace();
  if (std::abs(tr - cplx(1.0)) > 1e-8) {
    throw Error(ErrorCode::NotFaithful, "build_gns: density does not have unit trace on the algebra");
  }
  if (max_abs(commutator(g.density, grading)) > 1e-8) {
    throw Error(ErrorCode::GradingNotInvariant, "build_gns: state is not invariant under the grading");
  }
  // Faithful on the algebra: D is invertible on the support of the unit.
  const HermEig eig = herm_eig(g.density, 1e-9);
  const HermEig unit_eig = herm_eig(alg.unit, 1e-9);
  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < unit_eig.values.size(); ++i) {
    if (unit_eig.values(i) > 0.5) ++support;
  }
  Eigen::Index positive = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) < -1e-10) throw Error(ErrorCode::NotFaithful, "build_gns: density is not positive");
    if (eig.values(i) > 1e-12) ++positive;
  }
  if (positive < support) throw Error(ErrorCode::NotFaithful, "build_gns: density is singular on the algebra");
  g.density_inv = herm_func(g.density, [](double x) { return x > 1e-12 ? 1.0 / x : 0.0; }, 1e-9);
  g.omega = herm_func(g.density, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; }, 1e-9);
  return g;
}

struct TwistedCenterBasis {
  int dim = 0;
  std::vector<CMatrix> basis;  // orthonormal, each with xi x = x V(xi)
  std::vector<CMatrix> selfadjoint_unit_ball_extremes;
  double relation_residual = 0.0;  // max |J x* J - x V| over basis
  double gamma_residual = 0.0;     // max |G x G* - x|
  double modular_residual = 0.0;   // max |[D, x]|
};

namespace detail {

// Selfadjoint unitary on the corner p proportional to y, with the sign fixed
// by Tr(D u) >= 0.
inline CMatrix normalized_block_unitary(const CMatrix& y, const CMatrix& p, const CMatrix& density) {
  CMatrix u = polar(y, 1e-9 * std::max(1.0, y.norm())).isometry;
  const cplx phase2 = (u * u).trace() / p.trace();
  u /= std::sqrt(phase2);
  u = 0.5 * (u + u.adjoint());
  const double weight = (density * u).trace().real();
  if (weight < -1e-14) u = -u;
  return u;
}

}  // namespace detail

/// Z(M, V) = {x in M : J x* J = x V}.
inline TwistedCenterBasis twisted_center(const GnsData& g, double tol = kDefaultTol) {
  std::vector<std::function<CMatrix(const CMatrix&)>> conds;
  for (const CMatrix& xi : g.algebra.equation_set()) {
    const CMatrix vxi = g.grading_v(xi);
    conds.emplace_back([xi, vxi](const CMatrix& x) { return CMatrix(xi * x - x * vxi); });
  }
  TwistedCenterBasis tc;
  tc.basis = solve_in_algebra(g.algebra, conds);
  tc.dim = static_cast<int>(tc.basis.size());
  for (const CMatrix& x : tc.basis) {
    tc.relation_residual = std::max(tc.relation_residual, g.twisted_relation_residual(x));
    tc.gamma_residual = std::max(tc.gamma_residual, max_abs(g.grading_v(x) - x));
    tc.modular_residual = std::max(tc.modular_residual, max_abs(commutator(g.density, x)));
  }
  (void)tol;
  if (tc.basis.empty()) return tc;

  // Each factor block carries at most one normalized selfadjoint unitary;
  // extreme points of the selfadjoint unit ball are their signed sums.
  std::vector<CMatrix> units;
  for (const CMatrix& p : minimal_central_projections(g.algebra)) {
    const CMatrix* best = nullptr;
    double best_norm = 0.0;
    std::vector<CMatrix> restricted;
    restricted.reserve(tc.basis.size());
    for (const CMatrix& x : tc.basis) restricted.push_back(p * x);
    for (const CMatrix& y : restricted) {
      if (y.norm() > best_norm) {
        best_norm = y.norm();
        best = &y;
      }
    }
    if (best != nullptr && best_norm > 1e-7) units.push_back(detail::normalized_block_unitary(*best, p, g.density));
  }
  if (units.size() <= 16) {
    const std::uint64_t count = std::uint64_t{1} << units.size();
    for (std::uint64_t signs = 0; signs < count; ++signs) {
      CMatrix e = CMatrix::Zero(g.algebra.ambient_dim, g.algebra.ambient_dim);
      for (std::size_t i = 0; i < units.size(); ++i) e += ((signs >> i) & 1U) ? -units[i] : units[i];
      tc.selfadjoint_unit_ball_extremes.push_back(std::move(e));
    }
  }
  return tc;
}

struct KallmanSplit {
  CMatrix p;    // maximal central projection on which Ad_V is inner
  CMatrix u_p;  // selfadjoint partial isometry implementing Ad_V on p M p, u_p* u_p = p
  MatrixAlgebra inner_block;
  MatrixAlgebra free_block;
  std::vector<CMatrix> block_projections;  // minimal central projections
  std::vector<bool> block_inner;
};

/// Split M along its minimal central projections: gamma-fixed blocks where
/// the grading has a nonzero intertwiner are inner, the rest (including
/// blocks swapped in pairs) are freely acting.
inline KallmanSplit kallman_split(const GnsData& g, double tol = kDefaultTol) {
  (void)tol;
  const Eigen::Index d = g.algebra.ambient_dim;
  KallmanSplit out;
  out.p = CMatrix::Zero(d, d);
  out.u_p = CMatrix::Zero(d, d);
  auto gamma = [&g](const CMatrix& y) { return CMatrix(g.grading * y * g.grading.adjoint()); };
  out.block_projections = minimal_central_projections(g.algebra);
  for (const CMatrix& pi : out.block_projections) {
    bool inner = false;
    if (max_abs(gamma(pi) - pi) < 1e-7) {
      const MatrixAlgebra block = g.algebra.compress(pi);
      const std::vector<CMatrix> xs = intertwiners(block, gamma);
      if (!xs.empty()) {
        inner = true;
        out.p += pi;
        out.u_p += detail::normalized_block_unitary(xs.front(), pi, g.density);
      }
    }
    out.block_inner.push_back(inner);
  }
  out.inner_block = g.algebra.compress(out.p);
  out.free_block = g.algebra.compress(g.algebra.unit - out.p);
  return out;
}

/// Xi(R)(a) = <Omega, a R Omega> = Tr(R D a) for R in the selfadjoint unit
/// ball of the twisted center.
inline LinearFunctional xi_map(const GnsData& g, const CMatrix& r, double tol = 1e-8) {
  require_same_shape(r, g.density, "xi_map");
  const double scale = std::max(1.0, r.norm());
  if (!g.algebra.contains(r, tol) || hermiticity_defect(r) > tol * scale ||
      g.twisted_relation_residual(r) > tol * scale) {
    throw Error(ErrorCode::NotInTwistedCenter, "xi_map: R is not a selfadjoint twisted-center element");
  }
  if (op_norm(r) > 1.0 + tol) throw Error(ErrorCode::NotDominated, "xi_map: ||R|| > 1");
  return LinearFunctional(r * g.density);
}

/// Inverse of xi_map: R = E_M(F_rho) D^{-1}.
inline CMatrix xi_inverse(const GnsData& g, const LinearFunctional& rho, double tol = 1e-8) {
  require_same_shape(rho.density, g.density, "xi_inverse");
  const CMatrix r = g.algebra.project(rho.density) * g.density_inv;
  const double scale = std::max(1.0, r.norm());
  if (hermiticity_defect(r) > tol * scale || g.twisted_relation_residual(r) > tol * scale) {
    throw Error(ErrorCode::NotInTwistedCenter, "xi_inverse: rho does not come from the twisted center");
  }
  if (op_norm(r) > 1.0 + tol) throw Error(ErrorCode::NotDominated, "xi_inverse: rho is not dominated by the state");
  return 0.5 * (r + r.adjoint());
}

/// ||[alpha_t(x), y]_gamma|| with [b, c]_gamma = b c - gamma(c) b.
inline double graded_commutator_norm(const CMatrix& hamiltonian, double t, const CMatrix& x, const CMatrix& y,
                                     const CMatrix& grading) {
  const CMatrix xt = evolve(hamiltonian, t, x);
  return op_norm(xt * y - grading * y * grading.adjoint() * xt);
}

/// Doubled Fock-space realization of the GNS representation of omega_beta on
/// F (x) conj(F), T = (1 + e^{-beta H})^{-1}.
class ArakiWyss {
 public:
  static constexpr int kMaxModes = 5;

  ArakiWyss(const ModeBasis& basis, double beta) : basis_(basis), beta_(beta) {
    if (basis.modes() > kMaxModes) {
      throw Error(ErrorCode::CapExceeded, "araki_wyss: at most " + std::to_string(kMaxModes) + " modes");
    }
    const int n = basis.modes();
    sqrt_t_ = RVector(n);
    sqrt_1mt_ = RVector(n);
    for (int k = 0; k < n; ++k) {
      const double x = beta * basis.lambdas[static_cast<std::size_t>(k)];
      const double t = 1.0 / (1.0 + std::exp(-x));
      sqrt_t_(k) = std::sqrt(t);
      sqrt_1mt_(k) = std::sqrt(1.0 / (1.0 + std::exp(x)));
    }
    parity_ = parity_operator(basis);
    fock_id_ = identity(basis.dim());
  }

  Eigen::Index dim() const { return basis_.dim() * basis_.dim(); }
  const ModeBasis& basis() const { return basis_; }

  CVector omega() const {
    CVector v = CVector::Zero(dim());
    v(0) = 1.0;
    return v;
  }

  /// a_beta(phi) = a(sqrt(T) phi) (x) 1 + (-1)^N (x) conj(a*(sqrt(1-T) phi)).
  CMatrix annihilator(const OneParticleVector& phi) const {
    const OneParticleVector p1 = sqrt_t_.cast<cplx>().cwiseProduct(phi);
    const OneParticleVector p2 = sqrt_1mt_.cast<cplx>().cwiseProduct(phi);
    const CMatrix first = z2kms::annihilator(basis_, p1);
    const CMatrix second = creator(basis_, p2).conjugate();
    return Eigen::kroneckerProduct(first, fock_id_).eval() + Eigen::kroneckerProduct(parity_, second).eval();
  }

  CMatrix creator_op(const OneParticleVector& phi) const { return annihilator(phi).adjoint(); }

  /// V = Gamma(G) (x) conj(Gamma(G)).
  CMatrix grading() const {
    const CMatrix g = grading_unitary(basis_);
    return Eigen::kroneckerProduct(g, g.conjugate()).eval();
  }

  /// Antilinear J = [(-1)^{N(N-1)/2} (x) conj(same)] F with F the flip.
  CVector apply_j(const CVector& v) const {
    const Eigen::Index d = basis_.dim();
    CVector out(dim());
    for (Eigen::Index s = 0; s < d; ++s) {
      for (Eigen::Index t = 0; t < d; ++t) {
        out(s * d + t) = phase(s) * phase(t) * std::conj(v(t * d + s));
      }
    }
    return out;
  }

  /// The linear operator J X J.
  CMatrix conjugate_by_j(const CMatrix& x) const {
    CMatrix out(dim(), dim());
    for (Eigen::Index c = 0; c < dim(); ++c) {
      CVector e = CVector::Zero(dim());
      e(c) = 1.0;
      out.col(c) = apply_j(x * apply_j(e));
    }
    return out;
  }

  /// R_m = prod over the first m odd modes of sgn(beta lambda) (1 - 2 a*_beta a_beta).
  CMatrix r_truncated(int m) const {
    const std::vector<int> odd = basis_.odd_modes();
    if (m < 0 || m > static_cast<int>(odd.size())) throw Error(ErrorCode::IndexOutOfRange, "r_truncated");
    CMatrix r = identity(dim());
    for (int i = 0; i < m; ++i) {
      const int k = odd[static_cast<std::size_t>(i)];
      const double x = beta_ * basis_.lambdas[static_cast<std::size_t>(k)];
      if (std::abs(x) < kDegenerateCutoff) throw Error(ErrorCode::DegenerateSpectrum, "r_truncated");
      const CMatrix a = annihilator(unit_vector(basis_.modes(), k));
      const CMatrix factor = identity(dim()) - 2.0 * a.adjoint() * a;
      r = r * (x > 0 ? factor : CMatrix(-factor));
    }
    return r;
  }

  /// <Omega_beta, a*_beta(phi) a_beta(psi) Omega_beta>.
  cplx two_point(const OneParticleVector& phi, const OneParticleVector& psi) const {
    const CVector w = annihilator(psi) * omega();
    const CVector v = annihilator(phi) * omega();
    return v.dot(w);
  }

 private:
  static double phase(Eigen::Index s) {
    const int n = std::popcount(static_cast<std::uint64_t>(s));
    return ((n * (n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  }

  ModeBasis basis_;
  double beta_;
  RVector sqrt_t_;
  RVector sqrt_1mt_;
  CMatrix parity_;
  CMatrix fock_id_;
};

inline ArakiWyss araki_wyss(const ModeBasis& basis, double beta) { return ArakiWyss(basis, beta); }

}  // namespace z2kms
