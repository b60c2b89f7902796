#pragma once

// Batch front end: model spec files, the four report commands and their
// JSON / CSV serialization. Every record carries its tolerance and the verdict
// is computed from value and tolerance, never stored.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "z2kms/z2kms.hpp"

namespace z2kms::report {

using json = nlohmann::ordered_json;

inline constexpr Eigen::Index kDefaultCap = Eigen::Index{1} << 10;
/// The twisted-center solve works on HS(C^d), so gns-center stops earlier.
inline constexpr int kGnsMaxModes = 5;

struct Tolerances {
  double oracle = 1e-9;
  double kms = 1e-9;
  double twisted_kms = 1e-9;
  double domination = 1e-10;
  double coincidence = 1e-10;
  double extension = 1e-10;
  double center = 1e-9;
  double xi = 1e-9;
  double positivity = 1e-10;
  double stabilization = 1e-4;

  /// --tol: one value for every residual tolerance (not the scan stabilization).
  void override_residuals(double t) { oracle = kms = twisted_kms = domination = coincidence = extension = center = xi = positivity = t; }
};

struct Generator {
  std::string kind;  // "ising" or "linear"
  double mass = 1.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double step = 0.0;
  int parity = -1;
  int points = 1;

  /// ising: mass cosh(theta_j) on linspace(theta_min, theta_max, points), all odd;
  /// linear: k * step for k = 1..points with the given parity.
  std::vector<double> lambdas() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    if (kind == "ising") {
      for (int j = 0; j < points; ++j) {
        const double theta = points == 1 ? 0.5 * (theta_min + theta_max)
                                         : theta_min + (theta_max - theta_min) * j / (points - 1);
        out.push_back(mass * std::cosh(theta));
      }
    } else {
      for (int k = 1; k <= points; ++k) out.push_back(k * step);
    }
    return out;
  }

  int mode_parity() const { return kind == "ising" ? -1 : parity; }
};

struct ModelSpec {
  std::vector<double> lambdas;
  std::vector<int> parities;
  double beta = 1.0;
  std::optional<Generator> generator;
  Tolerances tol;
  std::uint64_t seed = 0;
  int samples = 200;

  /// Explicit modes followed by generated ones.
  ModeBasis basis() const {
    std::vector<double> l = lambdas;
    std::vector<int> g = parities;
    if (generator) {
      for (double x : generator->lambdas()) {
        l.push_back(x);
        g.push_back(generator->mode_parity());
      }
    }
    return ModeBasis(std::move(l), std::move(g));
  }

  json to_json() const {
    json j;
    j["modes"] = json::array();
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      j["modes"].push_back({{"lambda", lambdas[k]}, {"parity", parities[k] > 0 ? "+1" : "-1"}});
    }
    j["beta"] = beta;
    if (generator) {
      json g{{"kind", generator->kind}};
      if (generator->kind == "ising") {
        g["mass"] = generator->mass;
        g["theta_min"] = generator->theta_min;
        g["theta_max"] = generator->theta_max;
      } else {
        g["step"] = generator->step;
        g["parity"] = generator->parity > 0 ? "+1" : "-1";
      }
      g["points"] = generator->points;
      j["generator"] = g;
    }
    j["tolerances"] = {{"oracle", tol.oracle},       {"kms", tol.kms},
                       {"twisted_kms", tol.twisted_kms}, {"domination", tol.domination},
                       {"coincidence", tol.coincidence}, {"extension", tol.extension},
                       {"center", tol.center},       {"xi", tol.xi},
                       {"positivity", tol.positivity}, {"stabilization", tol.stabilization}};
    j["seed"] = seed;
    j["samples"] = samples;
    return j;
  }
};

namespace detail {

[[noreturn]] inline void bad_input(const std::string& what) { throw Error(ErrorCode::InvalidInput, "spec: " + what); }

inline int parse_parity(const json& p) {
  if (p.is_number_integer()) {
    const int v = p.get<int>();
    if (v == 1 || v == -1) return v;
  } else if (p.is_string()) {
    const std::string s = p.get<std::string>();
    if (s == "+1" || s == "1") return 1;
    if (s == "-1") return -1;
  }
  bad_input("parity must be \"+1\" or \"-1\"");
}

inline double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) bad_input(std::string("missing numeric field '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) bad_input(std::string("field '") + key + "' is not finite");
  return v;
}

}  // namespace detail

inline ModelSpec parse_spec(const json& j) {
  if (!j.is_object()) detail::bad_input("top level must be an object");
  ModelSpec s;
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) detail::bad_input("'modes' must be a list");
    for (const json& m : j.at("modes")) {
      s.lambdas.push_back(detail::finite_number(m, "lambda"));
      if (!m.contains("parity")) detail::bad_input("mode without parity");
      s.parities.push_back(detail::parse_parity(m.at("parity")));
    }
  }
  s.beta = detail::finite_number(j, "beta");
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    Generator gen;
    if (!g.contains("kind") || !g.at("kind").is_string()) detail::bad_input("generator needs a 'kind'");
    gen.kind = g.at("kind").get<std::string>();
    if (!g.contains("points") || !g.at("points").is_number_integer()) detail::bad_input("generator needs integer 'points'");
    gen.points = g.at("points").get<int>();
    if (gen.points < 1) detail::bad_input("generator points must be >= 1");
    if (gen.kind == "ising") {
      gen.mass = detail::finite_number(g, "mass");
      if (gen.mass <= 0) detail::bad_input("ising mass must be > 0");
      gen.theta_min = detail::finite_number(g, "theta_min");
      gen.theta_max = detail::finite_number(g, "theta_max");
      if (gen.theta_max < gen.theta_min) detail::bad_input("theta_max < theta_min");
    } else if (gen.kind == "linear") {
      gen.step = detail::finite_number(g, "step");
      gen.parity = g.contains("parity") ? detail::parse_parity(g.at("parity")) : -1;
    } else {
      detail::bad_input("unknown generator kind '" + gen.kind + "'");
    }
    s.generator = gen;
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    auto read = [&t](const char* key, double& dst) {
      if (t.contains(key)) {
        dst = detail::finite_number(t, key);
        if (dst < 0) detail::bad_input(std::string("tolerance '") + key + "' is negative");
      }
    };
    read("oracle", s.tol.oracle);
    read("kms", s.tol.kms);
    read("twisted_kms", s.tol.twisted_kms);
    read("domination", s.tol.domination);
    read("coincidence", s.tol.coincidence);
    read("extension", s.tol.extension);
    read("center", s.tol.center);
    read("xi", s.tol.xi);
    read("positivity", s.tol.positivity);
    read("stabilization", s.tol.stabilization);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) detail::bad_input("'seed' must be a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("samples")) {
    if (!j.at("samples").is_number_integer() || j.at("samples").get<int>() < 1) detail::bad_input("'samples' must be >= 1");
    s.samples = j.at("samples").get<int>();
  }
  s.basis();  // validates parities and the mode count
  return s;
}

inline ModelSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("spec is not valid JSON: ") + e.what());
  }
  return parse_spec(j);
}

enum class Comparison { AtMost, AtLeast, Below, Info };

inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::AtMost: return "<=";
    case Comparison::AtLeast: return ">=";
    case Comparison::Below: return "<";
    case Comparison::Info: return "info";
  }
  return "info";
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  Comparison cmp = Comparison::AtMost;

  Verdict verdict() const {
    switch (cmp) {
      case Comparison::AtMost: return value <= tolerance ? Verdict::Holds : Verdict::Fails;
      case Comparison::AtLeast: return value >= tolerance ? Verdict::Holds : Verdict::Fails;
      case Comparison::Below: return value < tolerance ? Verdict::Holds : Verdict::Fails;
      case Comparison::Info: return Verdict::Undetermined;
    }
    return Verdict::Undetermined;
  }

  json to_json() const {
    return {{"name", name},
            {"value", value},
            {"tolerance", tolerance},
            {"comparison", to_string(cmp)},
            {"verdict", std::string(z2kms::to_string(verdict()))}};
  }
};

struct Report {
  std::string command;
  json echo;
  std::vector<Check> checks;
  json data = json::object();
  double seconds = 0.0;

  void add(std::string name, double value, double tolerance, Comparison cmp = Comparison::AtMost) {
    checks.push_back({std::move(name), value, tolerance, cmp});
  }

  bool all_pass() const {
    return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.verdict() == Verdict::Fails; });
  }
  int exit_code() const { return all_pass() ? 0 : 2; }

  /// Everything except timing; byte-identical across reruns of the same spec.
  json body() const {
    json j;
    j["command"] = {{"name", command}, {"input", echo}};
    j["checks"] = json::array();
    int failed = 0;
    for (const Check& c : checks) {
      j["checks"].push_back(c.to_json());
      if (c.verdict() == Verdict::Fails) ++failed;
    }
    for (const auto& [k, v] : data.items()) j[k] = v;
    j["summary"] = {{"checks", checks.size()}, {"failed", failed}, {"exit_code", exit_code()}};
    return j;
  }

  json to_json() const {
    json j = body();
    j["timing"] = {{"seconds", seconds}};
    return j;
  }

  std::string csv() const {
    std::ostringstream out;
    out << "command,name,value,tolerance,comparison,verdict\n";
    char buf[64];
    for (const Check& c : checks) {
      out << command << ',' << c.name << ',';
      std::snprintf(buf, sizeof buf, "%.17g", c.value);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", c.tolerance);
      out << buf << ',' << to_string(c.cmp) << ',' << z2kms::to_string(c.verdict()) << '\n';
    }
    return out.str();
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void require_cap(const ModeBasis& basis, Eigen::Index cap) {
  if (basis.dim() > cap) {
    throw Error(ErrorCode::CapExceeded, "Fock dimension " + std::to_string(basis.dim()) + " exceeds cap " +
                                            std::to_string(cap));
  }
}

inline json to_json(const std::vector<double>& v) { return json(v); }

inline json model_summary(const ModeBasis& basis, double beta) {
  return {{"modes", basis.modes()},
          {"odd_modes", basis.odd_modes().size()},
          {"fock_dim", basis.dim()},
          {"beta", beta}};
}

/// Twisted functional rho_beta = c mu_{T^G} as a density; zero when c = 0.
inline LinearFunctional twisted_density(const ModeBasis& basis, double beta, double c) {
  if (c == 0.0) return LinearFunctional::zero(basis.dim());
  return density_of(twisted_covariance(basis, beta).scaled(c));
}

/// prod over odd modes of sgn(beta lambda) (1 - 2 P_k), the density ratio of
/// rho_beta to omega_beta.
inline CMatrix twisted_ratio(const ModeBasis& basis, double beta) {
  return grading_approximants(basis, beta, static_cast<int>(basis.odd_modes().size()));
}

inline double sign_product(const ModeBasis& basis, double beta) {
  double s = 1.0;
  for (int k : basis.odd_modes()) {
    if (beta * basis.lambdas[static_cast<std::size_t>(k)] < 0) s = -s;
  }
  return s;
}

}  // namespace detail

/// Quasifree KMS state, twisted functional, crossed product, the three
/// extensions and their verification.
inline Report cmd_kms_check(const ModelSpec& spec, Eigen::Index cap = kDefaultCap) {
  const detail::Stopwatch clock;
  const ModeBasis basis = spec.basis();
  detail::require_cap(basis, cap);
  const Tolerances& tol = spec.tol;
  const double beta = spec.beta;

  Report r;
  r.command = "kms-check";
  r.echo = spec.to_json();
  r.data["model"] = detail::model_summary(basis, beta);

  const CMatrix h = dgamma(basis);
  const CMatrix g = grading_unitary(basis);
  const LinearFunctional omega_gibbs = gibbs_state(h, beta);
  const LinearFunctional omega = density_of(kms_covariance(basis, beta));
  r.add("omega_quasifree_vs_gibbs", max_abs(omega.density - omega_gibbs.density), tol.oracle);

  const SpectrumReport spectrum = c_beta_H(basis, beta);
  const double c = spectrum.c();
  r.data["c_beta_H"] = {{"value", c},
                        {"partials", spectrum.c_partial},
                        {"trace_partials", spectrum.trace_partial},
                        {"verdict", std::string(to_string(spectrum.verdict))}};

  const LinearFunctional rho = detail::twisted_density(basis, beta, c);
  if (c > 0.0) {
    const CMatrix expected = omega_gibbs.density * detail::twisted_ratio(basis, beta);
    r.add("rho_quasifree_vs_gibbs_ratio", max_abs(rho.density - expected), tol.oracle);
  } else {
    // Tracial / degenerate case: only the zero twisted functional survives at c = 0.
    if (beta == 0.0) r.add("tracial_twisted_weight", std::abs(tracial_twisted_check(basis)), 0.0);
    r.add("twisted_extremal_weight", std::abs(rho(identity(basis.dim()))), 0.0);
  }

  const Z2CrossedProduct cp(g);
  const CrossedFunctional can = canonical_extension(cp, omega, tol.domination);
  const CrossedFunctional plus = extend_state(cp, {omega, rho}, tol.domination);
  const CrossedFunctional minus = extend_state(cp, {omega, -rho}, tol.domination);
  const CrossedElement u = cp.generator();
  r.data["extensions"] = {{"canonical", can(u).real()}, {"plus", plus(u).real()}, {"minus", minus(u).real()}};
  r.add("extension_plus_weight", std::abs(plus(u) - c), tol.extension);
  r.add("extension_minus_weight", std::abs(minus(u) + c), tol.extension);
  r.add("extension_canonical_weight", std::abs(can(u)), tol.extension);

  RandomElementGenerator rng(basis, spec.seed);
  const Dynamics dyn{h, beta};
  const auto crossed_pairs = rng.crossed_pairs(spec.samples);
  r.add("kms_residual_canonical", verify_kms(cp, can, dyn, crossed_pairs), tol.kms);
  r.add("kms_residual_plus", verify_kms(cp, plus, dyn, crossed_pairs), tol.kms);
  r.add("kms_residual_minus", verify_kms(cp, minus, dyn, crossed_pairs), tol.kms);
  const auto pairs = rng.pairs(spec.samples);
  r.add("twisted_kms_residual", verify_twisted_kms(rho, dyn, g, pairs), tol.twisted_kms);

  r.add("domination_margin_at_c", domination_margin(rho, omega).worst(), -tol.domination, Comparison::AtLeast);
  if (c > 0.0) {
    r.add("domination_margin_at_1.05c", domination_margin(rho * 1.05, omega).worst(), -tol.domination);
  }

  std::vector<CrossedElement> samples;
  for (int i = 0; i < spec.samples; ++i) samples.push_back(rng.crossed());
  r.add("positivity_canonical", min_positivity(cp, can, samples), -tol.positivity, Comparison::AtLeast);
  r.add("positivity_plus", min_positivity(cp, plus, samples), -tol.positivity, Comparison::AtLeast);
  r.add("positivity_minus", min_positivity(cp, minus, samples), -tol.positivity, Comparison::AtLeast);

  // The Fock-space Gibbs extension u -> Gamma(G) is the plus extension when
  // every odd beta*lambda is positive, the minus one otherwise.
  const CrossedFunctional gibbs = gibbs_extension(basis, beta);
  const double s = detail::sign_product(basis, beta);
  r.add("gibbs_extension_weight", std::abs(gibbs(u) - s * plus(u)), tol.coincidence);
  // At c = 0 the finite Gibbs extension is one of many twisted functionals;
  // only its weight is compared.
  if (c > 0.0) {
    r.add("gibbs_extension_odd_density", max_abs(gibbs.parts.rho.density - s * rho.density), tol.coincidence);
  }
  r.data["gibbs_extension"] = {{"value", gibbs(u).real()}, {"matches", s > 0 ? "plus" : "minus"}};
  r.data["unique_extension_at_finite_scale"] = c == 0.0;

  r.seconds = clock.seconds();
  return r;
}

/// c_{beta H} under successive doubling of the generator's grid.
inline Report cmd_scan_condition(const ModelSpec& spec, int levels = 3) {
  const detail::Stopwatch clock;
  if (!spec.generator) throw Error(ErrorCode::InvalidInput, "scan-condition needs a generator");
  if (levels < 1) throw Error(ErrorCode::InvalidInput, "scan-condition needs at least one level");
  Report r;
  r.command = "scan-condition";
  r.echo = spec.to_json();
  r.echo["levels"] = levels;

  json rows = json::array();
  std::vector<double> cs;
  SpectrumReport last;
  for (int level = 0; level < levels; ++level) {
    ModelSpec refined = spec;
    refined.generator->points = spec.generator->points << level;
    const ModeBasis basis = refined.basis();
    last = c_beta_H(basis, spec.beta);
    cs.push_back(last.c());
    rows.push_back({{"points", refined.generator->points},
                    {"odd_modes", basis.odd_modes().size()},
                    {"c", last.c()},
                    {"trace", last.trace()},
                    {"c_partials", last.c_partial},
                    {"trace_partials", last.trace_partial}});
  }
  r.data["levels"] = rows;

  double max_step = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < cs.size(); ++i) max_step = std::max(max_step, cs[i] - cs[i - 1]);
  std::string trend = "constant";
  if (spec.generator->kind == "ising") {
    if (cs.size() > 1) r.add("c_strictly_decreasing", max_step, 0.0, Comparison::Below);
    trend = "decreasing";
    r.add("c_final_over_initial", cs.back() / cs.front(), 0.0, Comparison::Info);
  } else if (!last.c_partial.empty()) {
    const std::vector<double>& p = last.c_partial;
    const double diff = p.size() > 1 ? std::abs(p[p.size() - 1] - p[p.size() - 2]) : p.back();
    r.add("c_partials_stabilized", diff, spec.tol.stabilization);
    r.add("c_positive_floor", p.back(), spec.tol.stabilization, Comparison::AtLeast);
    trend = "stabilizing";
  } else {
    r.add("c_constant_one", std::abs(cs.back() - 1.0), 0.0);
  }
  // Finite grids cannot decide the infinite-spectrum condition.
  r.data["gibbs_type_condition"] = {{"verdict", std::string(to_string(Verdict::Undetermined))}, {"trend", trend}};
  r.seconds = clock.seconds();
  return r;
}

namespace detail {

struct DemoResult {
  std::string name;
  int twisted_center_dim;
  int center_dim;
  int extreme_points;
  CMatrix p;
};

inline json demo_json(const DemoResult& d) {
  json p = json::array();
  for (Eigen::Index i = 0; i < d.p.rows(); ++i) p.push_back(d.p(i, i).real());
  return {{"name", d.name},
          {"twisted_center_dim", d.twisted_center_dim},
          {"center_dim", d.center_dim},
          {"extreme_points", d.extreme_points},
          {"kallman_p_diagonal", p}};
}

inline DemoResult run_demo(std::string name, const MatrixAlgebra& alg, const CMatrix& d, const CMatrix& g) {
  const GnsData gns = build_gns(alg, d, g);
  const TwistedCenterBasis tc = twisted_center(gns);
  return {std::move(name), tc.dim, static_cast<int>(center(alg).size()),
          static_cast<int>(tc.selfadjoint_unit_ball_extremes.size()), kallman_split(gns).p};
}

inline CMatrix diag(std::initializer_list<double> v) {
  RVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x.cast<cplx>().asDiagonal();
}

}  // namespace detail

/// Built-in demo algebras: flip on C+C, inner grading on M_2, the block
/// algebra M_2 + (C+C), trivial grading, and two inner factors.
inline std::vector<detail::DemoResult> gns_demos() {
  using detail::diag;
  CMatrix flip(2, 2);
  flip << 0, 1, 1, 0;
  CMatrix block_g = CMatrix::Zero(4, 4);
  block_g.topLeftCorner(2, 2) = diag({1, -1});
  block_g.bottomRightCorner(2, 2) = flip;
  const MatrixAlgebra m2 = MatrixAlgebra::full_algebra(2);
  const MatrixAlgebra cc = MatrixAlgebra::diagonal_algebra(2);
  const MatrixAlgebra block = direct_sum(m2, cc);
  const MatrixAlgebra two = direct_sum(m2, m2);
  std::vector<detail::DemoResult> out;
  out.push_back(detail::run_demo("inner_m2", m2, diag({0.75, 0.25}), diag({1, -1})));
  out.push_back(detail::run_demo("flip_cc", cc, diag({0.5, 0.5}), flip));
  out.push_back(detail::run_demo("block_m2_cc", block, diag({0.375, 0.125, 0.25, 0.25}), block_g));
  out.push_back(detail::run_demo("identity_block", block, diag({0.375, 0.125, 0.25, 0.25}), identity(4)));
  out.push_back(detail::run_demo("two_factors", two, diag({0.3, 0.1, 0.4, 0.2}), diag({1, -1, 1, -1})));
  return out;
}

/// GNS of omega_beta on the CAR algebra, its twisted center, Kallman split
/// and Xi, cross-checked against the quasifree twisted functional.
inline Report cmd_gns_center(const ModelSpec& spec, Eigen::Index cap = kDefaultCap) {
  const detail::Stopwatch clock;
  const ModeBasis basis = spec.basis();
  detail::require_cap(basis, cap);
  if (basis.modes() > kGnsMaxModes) {
    throw Error(ErrorCode::CapExceeded, "gns-center: at most " + std::to_string(kGnsMaxModes) + " modes");
  }
  const Tolerances& tol = spec.tol;
  const double beta = spec.beta;
  Report r;
  r.command = "gns-center";
  r.echo = spec.to_json();
  r.data["model"] = detail::model_summary(basis, beta);

  std::vector<CMatrix> gens;
  for (int k = 0; k < basis.modes(); ++k) {
    gens.push_back(mode_annihilator(basis, k));
    gens.push_back(gens.back().adjoint());
  }
  const MatrixAlgebra alg = MatrixAlgebra::full_algebra(basis.dim(), gens);
  const CMatrix g = grading_unitary(basis);
  const GnsData gns = build_gns(alg, gibbs_density(dgamma(basis), beta), g);
  const TwistedCenterBasis tc = twisted_center(gns);
  const KallmanSplit ks = kallman_split(gns);

  r.data["gns_dim"] = gns.gns_dim();
  r.data["twisted_center_dim"] = tc.dim;
  r.add("twisted_center_dim_is_one", std::abs(tc.dim - 1), 0.0);
  r.add("twisted_center_relation", tc.relation_residual, tol.center);
  r.add("twisted_center_gamma_fixed", tc.gamma_residual, tol.center);
  r.add("twisted_center_modular_fixed", tc.modular_residual, tol.center);
  r.add("kallman_p_is_unit", max_abs(ks.p - identity(basis.dim())), tol.center);
  r.add("omega_delta_fixed", max_abs(gns.modular_delta(gns.omega) - gns.omega), tol.center);
  r.add("omega_j_fixed", max_abs(gns.modular_j(gns.omega) - gns.omega), tol.center);
  r.add("omega_v_fixed", max_abs(gns.grading_v(gns.omega) - gns.omega), tol.center);

  if (!tc.selfadjoint_unit_ball_extremes.empty()) {
    const CMatrix& unit_r = tc.selfadjoint_unit_ball_extremes.front();
    const LinearFunctional xi = xi_map(gns, unit_r);
    const double c = c_beta_H(basis, beta).c();
    r.data["xi_weight"] = xi(identity(basis.dim())).real();
    RandomElementGenerator rng(basis, spec.seed);
    const int count = std::min(spec.samples, 100);
    if (c > 0.0) {
      const LinearFunctional rho = detail::twisted_density(basis, beta, c);
      double worst = 0.0;
      for (int i = 0; i < count; ++i) {
        const CMatrix a = rng();
        worst = std::max(worst, std::abs(xi(a) - rho(a)));
      }
      r.add("xi_vs_quasifree_rho", worst, tol.xi);
    } else {
      // Tracial / degenerate: the extremal twisted weight vanishes.
      r.add("xi_weight_zero", std::abs(xi(identity(basis.dim()))), tol.xi);
    }
    double roundtrip = 0.0;
    std::uniform_real_distribution<double> t(-1.0, 1.0);
    for (int i = 0; i < 8; ++i) {
      const CMatrix rr = t(rng.engine()) * unit_r;
      roundtrip = std::max(roundtrip, max_abs(xi_inverse(gns, xi_map(gns, rr)) - rr));
    }
    r.add("xi_roundtrip", roundtrip, tol.xi);
    const auto pairs = rng.pairs(count);
    r.add("xi_twisted_kms", verify_twisted_kms(xi, Dynamics{dgamma(basis), beta}, g, pairs), tol.twisted_kms);
    r.add("xi_domination", domination_margin(xi, gns.state_functional()).worst(), -tol.domination,
          Comparison::AtLeast);
  }

  json demos = json::array();
  for (const auto& d : gns_demos()) demos.push_back(detail::demo_json(d));
  r.data["demos"] = demos;
  r.seconds = clock.seconds();
  return r;
}

/// |omega(a u_n) - rho(a)| across a schedule of n for a fixed probe set.
inline Report cmd_un_limit(const ModelSpec& spec, std::vector<int> schedule, Eigen::Index cap = kDefaultCap) {
  const detail::Stopwatch clock;
  const ModeBasis basis = spec.basis();
  const std::vector<int> odd = basis.odd_modes();
  Report r;
  r.command = "un-limit";
  r.echo = spec.to_json();
  r.echo["schedule"] = schedule;
  r.data["rows"] = json::array();
  if (schedule.empty()) {
    r.seconds = clock.seconds();
    return r;
  }
  for (int n : schedule) {
    if (n < 1 || n > static_cast<int>(odd.size())) {
      throw Error(ErrorCode::IndexOutOfRange, "un-limit: schedule entry " + std::to_string(n) + " outside 1.." +
                                                  std::to_string(odd.size()));
    }
  }
  detail::require_cap(basis, cap);
  const double beta = spec.beta;
  const SpectrumReport spectrum = c_beta_H(basis, beta);
  const double c = spectrum.c();
  const LinearFunctional omega = gibbs_state(dgamma(basis), beta);
  const LinearFunctional rho = detail::twisted_density(basis, beta, c);

  const int n_modes = basis.modes();
  const int first = odd.front();
  const int last = odd.back();
  struct Probe {
    std::string name;
    CMatrix a;
  };
  const std::vector<Probe> probes{
      {"one", identity(basis.dim())},
      {"phi1_phi_i1", field(basis, unit_vector(n_modes, first)) * field(basis, unit_vector(n_modes, first, cplx(0, 1)))},
      {"p_last", number_projection(basis, last)},
  };
  std::vector<std::vector<double>> errors(probes.size());
  for (int n : schedule) {
    const CMatrix un = grading_approximants(basis, beta, n);
    json row{{"n", n}, {"c_partial", spectrum.c_partial[static_cast<std::size_t>(n - 1)]}};
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double e = std::abs(omega(probes[i].a * un) - rho(probes[i].a));
      errors[i].push_back(e);
      row[probes[i].name] = e;
    }
    r.data["rows"].push_back(row);
  }
  r.data["c_beta_H"] = c;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double rise = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < errors[i].size(); ++j) rise = std::max(rise, errors[i][j] - errors[i][j - 1]);
    if (errors[i].size() > 1) r.add(probes[i].name + "_nonincreasing", rise, spec.tol.oracle);
  }
  r.seconds = clock.seconds();
  return r;
}

}  // namespace z2kms::report
