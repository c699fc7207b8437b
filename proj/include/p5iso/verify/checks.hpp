#pragma once
// Verification suites shared by the CLI and the acceptance binary.

#include <algorithm>
#include <chrono>
#include <functional>
#include <set>
#include <sstream>

#include "p5iso/io/golden.hpp"
#include "p5iso/lax/lax2.hpp"
#include "p5iso/lax/rank4.hpp"
#include "p5iso/monodromy/monodromy.hpp"
#include "p5iso/numerics/experiments.hpp"
#include "p5iso/verify/oracles.hpp"

namespace p5iso::verify {

using RF = RationalFunction;
using GR = GaussianRational;
using json = nlohmann::json;

struct Check {
  std::string name;
  std::string expected_ref;
  bool pass = false;
  std::string result;
  double residual = 0;
};

enum class Status { Pass, Fail, Error };

inline std::string status_name(Status s) { return s == Status::Pass ? "pass" : s == Status::Fail ? "fail" : "error"; }

struct Report {
  std::string command;
  Status status = Status::Pass;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  json data = json::object();

  void add(std::vector<Check> cs) {
    for (auto& c : cs) checks.push_back(std::move(c));
  }
  // status = pass iff every check passes; an error status is sticky
  void finalize() {
    std::stable_sort(checks.begin(), checks.end(), [](const Check& a, const Check& b) { return a.name < b.name; });
    if (status == Status::Error) return;
    status = Status::Pass;
    for (auto& c : checks)
      if (!c.pass) status = Status::Fail;
  }
  json to_json() const {
    json cs = json::array();
    for (auto& c : checks)
      cs.push_back({{"name", c.name}, {"expected_ref", c.expected_ref}, {"result", c.pass ? "pass" : "fail"},
                    {"detail", c.result}, {"residual", c.residual}});
    json j{{"command", command}, {"status", status_name(status)}, {"checks", cs}, {"artifacts", artifacts}};
    if (!data.empty()) j["data"] = data;
    return j;
  }
};

inline Check exact_check(std::string name, std::string ref, const RF& derived, const RF& target) {
  bool ok = derived == target;
  return {std::move(name), std::move(ref), ok, ok ? "exact match" : "differs: derived - target = " + (derived - target).str(),
          ok ? 0.0 : 1.0};
}

inline Check numeric_check(std::string name, std::string ref, double value, double tol, const std::string& what) {
  std::ostringstream os;
  os << what << " = " << value << " (tolerance " << tol << ")";
  return {std::move(name), std::move(ref), std::isfinite(value) && value < tol, os.str(), value};
}

// Independent tasks run in a pool; the caller sorts the merged checks.
using Task = std::function<std::vector<Check>()>;

inline std::vector<Check> run_tasks(const std::vector<Task>& tasks) {
  auto parts = parallel_map(tasks, [](const Task& t) {
    try {
      return t();
    } catch (const std::exception& e) {
      return std::vector<Check>{{"task_error", "", false, e.what(), 1.0}};
    }
  });
  std::vector<Check> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---------------------------------------------------------------------------
// Rank-2 Lax pair.

inline const LaxPairRank2& lax2_pair() {
  static const LaxPairRank2 lp = solve_lax_pair();
  return lp;
}
inline const ScalarODE& derived_q_equation() {
  static const ScalarODE q = derive_p5_scalar(lax2_pair());
  return q;
}
inline ScalarODE display_q_equation() {
  auto& g = golden_display("q_equation");
  return {g.at("unknown"), g.at("dsym"), 2, golden_expr(g)};
}

inline std::vector<Check> q_equation_checks() {
  std::vector<Check> out;
  auto cmp = compare_scalar_odes(derived_q_equation(), display_q_equation());
  int bad = 0;
  for (auto& c : cmp) {
    bad += !c.match;
    out.push_back({"q_equation.coeff[" + c.monomial + "]", "golden:displays.q_equation", c.match,
                   c.match ? "exact match: " + c.derived : "derived " + c.derived + " vs displayed " + c.target,
                   c.match ? 0.0 : 1.0});
  }
  out.push_back({"q_equation.display", "golden:displays.q_equation", bad == 0,
                 std::to_string(cmp.size() - bad) + " of " + std::to_string(cmp.size()) + " coefficients match",
                 double(bad)});
  return out;
}

inline std::vector<Check> p5_params_checks() {
  auto& g = golden_display("p5_params");
  auto p = p5_standard_params(symbolic_theta());
  return {exact_check("p5_params.alpha", "golden:displays.p5_params", p.alpha, golden_expr(g, "alpha")),
          exact_check("p5_params.beta", "golden:displays.p5_params", p.beta, golden_expr(g, "beta")),
          exact_check("p5_params.gamma", "golden:displays.p5_params", p.gamma, golden_expr(g, "gamma")),
          exact_check("p5_params.delta", "golden:displays.p5_params", p.delta, golden_expr(g, "delta"))};
}

inline std::vector<Check> suite_lax2() {
  return run_tasks({
      q_equation_checks,
      p5_params_checks,
      [] {
        return std::vector<Check>{
            exact_check("q_equation.standard_p5_after_moebius", "derived:p5_standard_rhs",
                        scalar_in_y(derived_q_equation()), p5_standard_rhs_symbolic(p5_standard_params(symbolic_theta()))),
            exact_check("lax_pair.cubic_tangency", "golden:displays.m1_cubic", cubic_tangency_residual(lax2_pair()),
                        RF(0))};
      },
  });
}

// ---------------------------------------------------------------------------
// Rank 4.

inline const FSystem& f_system() {
  static const FSystem fs = derive_f_system();
  return fs;
}
inline const BSystem& b_system() {
  static const BSystem b = derive_b_hamiltonian();
  return b;
}

inline std::vector<Check> f_system_checks() {
  auto& g = golden_display("f_system");
  return {exact_check("f_system.2t_df0", "golden:displays.f_system", f_system().two_t_df0(), golden_expr(g, "2*t*df0")),
          exact_check("f_system.2t_df1", "golden:displays.f_system", f_system().two_t_df1(), golden_expr(g, "2*t*df1"))};
}

inline std::vector<Check> cubic_shape_checks() {
  MultiPoly c = rank4_fiber_cubic_symbolic();
  std::set<Exponents> allowed;
  for (auto& m : golden_display("rank4_cubic_shape").at("support")) {
    MultiPoly mp = parse_poly(m.get<std::string>())
                       .substitute("v1", MultiPoly::var("x3"))
                       .substitute("v2", MultiPoly::var("x4"))
                       .substitute("v3", MultiPoly::var("y"));
    for (auto& [e, unused] : mp.coefficients_in({"y", "x3", "x4"})) allowed.insert(e);
  }
  int outside = 0, nonaffine = 0;
  for (auto& [e, coef] : c.coefficients_in({"y", "x3", "x4"})) {
    outside += !allowed.count(e);
    nonaffine += coef.total_degree() > 1;
  }
  bool golden_ok = c == golden_expr(golden_derived("rank4_fiber_cubic")).as_polynomial();
  return {{"rank4_cubic.support", "golden:displays.rank4_cubic_shape", outside == 0,
           std::to_string(outside) + " monomials outside the allowed support", double(outside)},
          {"rank4_cubic.affine_coefficients", "golden:displays.rank4_cubic_shape", nonaffine == 0,
           std::to_string(nonaffine) + " coefficients of degree > 1 in p1, p2, p3", double(nonaffine)},
          {"rank4_cubic.recorded", "golden:derived.rank4_fiber_cubic", golden_ok,
           golden_ok ? "equals recorded polynomial" : "differs from recorded polynomial", golden_ok ? 0.0 : 1.0}};
}

inline std::vector<Check> cyclic_checks() {
  auto act = find_cyclic_eps_action(f_system());
  auto c = check_cyclic_symmetry(act, f_system());
  std::string desc;
  for (int j = 0; j < 4; ++j) desc += (j ? ", " : "") + std::string("eps") + std::to_string(j) + " -> " + act[j].str();
  return {{"cyclic_symmetry.invariant", "golden:derived.cyclic_eps_action", c.invariant, desc, c.invariant ? 0.0 : 1.0},
          {"cyclic_symmetry.order_four", "golden:derived.cyclic_eps_action", c.order_four,
           c.order_four ? "fourth power is the identity, lower powers are not" : "order is not 4",
           c.order_four ? 0.0 : 1.0}};
}

inline std::vector<Check> b_display_checks() {
  auto& g = golden_display("b_system");
  RF t = RF::var("t");
  const auto& b = b_system();
  return {exact_check("b_system.4t_db1", "golden:displays.b_system", RF(4) * t * b.db1, golden_expr(g, "4*t*db1")),
          exact_check("b_system.4t_db3", "golden:displays.b_system", RF(4) * t * b.db3, golden_expr(g, "4*t*db3")),
          exact_check("b_system.h1", "golden:displays.b_system", b.h1, golden_expr(g, "h1")),
          exact_check("b_system.t_h2", "golden:displays.b_system", t * b.h2, golden_expr(g, "t*h2")),
          exact_check("b_system.h3", "golden:displays.b_system", b.h3, golden_expr(g, "h3"))};
}

inline std::vector<Check> suite_lax4() {
  return run_tasks({f_system_checks, cubic_shape_checks, cyclic_checks, [] {
                      RF t = RF::var("t");
                      auto f = f_from_b(RF::var("b1"), RF::var("b3"), t);
                      auto e = eps_from_a(RF::var("a1"), RF::var("a2"), RF::var("a3"));
                      Derivation D = Derivation::dt({{"b1", b_system().db1}, {"b3", b_system().db3}});
                      std::map<std::string, RF> sub{{"f0", f[0]},   {"f1", f[1]},   {"eps0", e[0]},
                                                    {"eps1", e[1]}, {"eps2", e[2]}, {"eps3", e[3]}};
                      return std::vector<Check>{
                          exact_check("b_to_f.df0", "derived:f_system", D(f[0]), f_system().df0.substitute(sub)),
                          exact_check("b_to_f.df1", "derived:f_system", D(f[1]), f_system().df1.substitute(sub))};
                    }});
}

inline std::vector<Check> suite_hamiltonian() {
  auto out = b_display_checks();
  RF H = golden_expr(golden_display("b_system"), "H");
  auto r = hamiltonian_residuals(b_system(), H);
  auto zero = [](std::string n, const RF& x) {
    bool ok = x.is_zero();
    return Check{std::move(n), "golden:displays.b_system.H", ok, ok ? "identity holds" : "residual " + x.str(),
                 ok ? 0.0 : 1.0};
  };
  out.push_back(zero("hamilton.t_db1_minus_dH_db3", r.with_t_1));
  out.push_back(zero("hamilton.t_db3_plus_dH_db1", r.with_t_2));
  out.push_back(zero("hamilton_without_t.db1_minus_dH_db3", r.without_t_1));
  out.push_back(zero("hamilton_without_t.db3_plus_dH_db1", r.without_t_2));
  return out;
}

inline std::vector<Check> suite_canonical() {
  auto c = derive_canonical_fg();
  auto& g = golden_display("canonical_fg");
  RF t = RF::var("t");
  bool ksum = (c.k[0] + c.k[1] + c.k[2] + c.k[3]).is_zero();
  return {exact_check("canonical_fg.2t_df", "golden:displays.canonical_fg", RF(2) * t * c.df, golden_expr(g, "2*t*df")),
          exact_check("canonical_fg.2t_dg", "golden:displays.canonical_fg", RF(2) * t * c.dg, golden_expr(g, "2*t*dg")),
          {"canonical_fg.trace_free_e", "derived:canonical_e_matrix", ksum, ksum ? "k0+k1+k2+k3 = 0" : "nonzero trace",
           ksum ? 0.0 : 1.0}};
}

// ---------------------------------------------------------------------------
// Formal local lattices against the brute-force search.

inline std::vector<Check> suite_lemma21(int per_case = 50, int K = 8, uint64_t seed = 20261016) {
  std::vector<Task> tasks;
  for (int m = 1; m <= 3; ++m)
    for (bool nonzero : {false, true})
      tasks.push_back([=] {
        oracle::ExactRng rng(seed + 10 * m + nonzero);
        int disagree = 0;
        std::string first;
        for (int k = 0; k < per_case; ++k) {
          GR a = nonzero ? rng.nonzero_gauss() : GR(0);
          auto A = oracle::conjugate_normal(oracle::normal_series(m, a), oracle::random_gauge(rng, 2), K);
          auto nf = normal_form(make_connection(A, GR(m), K));
          bool unique = classify_lattices(nf).kind == LatticeKind::Unique;
          bool brute_unique = oracle::brute_force_lattices(m, a) == 1;
          if (unique != brute_unique) {
            ++disagree;
            if (first.empty()) first = "first disagreement at a = " + a.str();
          }
        }
        std::string name = "lemma21.m" + std::to_string(m) + (nonzero ? ".a_nonzero" : ".a_zero");
        return std::vector<Check>{{name, "oracle:brute_force_lattices", disagree == 0,
                                   std::to_string(per_case - disagree) + " of " + std::to_string(per_case) +
                                       " instances agree" + (first.empty() ? "" : "; " + first),
                                   double(disagree)}};
      });
  return run_tasks(tasks);
}

// ---------------------------------------------------------------------------
// Monodromy-space charts and the fibres of pr.

inline Rank2MonodromyPoint random_monodromy_point(oracle::ExactRng& r, const MonodromyParams& s) {
  for (;;) {
    GR a1 = r.gauss(), a2 = r.gauss();
    GR P1 = a1 * (s.s1 - a1) - GR(1), P2 = a2 * (s.s2 - a2) - GR(1), Q = s.s3 - a1 * a2;
    if (P1.is_zero() || P2.is_zero() || Q.is_zero()) continue;
    Rank2MonodromyPoint p;
    p.m0 = {a1, GR(1), P1, s.s1 - a1};
    p.m1 = {a2, P2 / Q, Q, s.s2 - a2};
    fill_stokes(p, s.s3);
    return gm_scale(p, r.nonzero_gauss());
  }
}

inline std::vector<Check> chart_checks(int n, uint64_t seed) {
  oracle::ExactRng rng(seed);
  const std::array<MonChart, 4> charts{MonChart::B1, MonChart::C1, MonChart::B2, MonChart::C2};
  std::map<MonChart, int> bad_rel;
  int bad_trip = 0, trips = 0;
  auto nonzero = [](const std::vector<GR>& v) {
    return std::any_of(v.begin(), v.end(), [](const GR& x) { return !x.is_zero(); });
  };
  for (int k = 0; k < n; ++k) {
    MonodromyParams s{rng.gauss(), rng.gauss(), rng.nonzero_gauss()};
    auto p = random_monodromy_point(rng, s);
    for (auto c : charts) {
      auto cp = chart_coords(p, c);
      bad_rel[c] += nonzero(chart_relations(cp, s));
      for (auto d : charts) {
        if (d == c) continue;
        ++trips;
        auto back = chart_transition(chart_transition(cp, d, s), c, s);
        bad_trip += !(back.coords == cp.coords);
      }
    }
  }
  std::vector<Check> out;
  for (auto c : charts)
    out.push_back({"charts.relations." + chart_name(c), "golden:displays.chart_b1", bad_rel[c] == 0,
                   std::to_string(n - bad_rel[c]) + " of " + std::to_string(n) + " points satisfy the relations",
                   double(bad_rel[c])});
  out.push_back({"charts.round_trips", "derived:chart_transition", bad_trip == 0,
                 std::to_string(trips - bad_trip) + " of " + std::to_string(trips) + " transitions round-trip exactly",
                 double(bad_trip)});
  return out;
}

inline std::vector<Check> parabolic_checks(int n, uint64_t seed) {
  oracle::ExactRng rng(seed);
  int bad = 0, used = 0;
  for (int k = 0; used < n && k < 10 * n; ++k) {
    GR c1 = rng.gauss(), y1 = rng.gauss(), a2 = rng.gauss(), s2 = rng.gauss();
    GR s3 = (GR(1) + c1 * y1) * a2 + c1 * y1 * y1 * (GR(1) + a2 * (a2 - s2));
    if (s3.is_zero()) continue;
    ++used;
    auto p = from_parabolic_chart(c1, y1, a2, s2, s3);
    auto v = validate_rank2(p, MonodromyParams{GR(2), s2, s3});
    bool ok = parabolic_chart_residual(c1, y1, a2, s2, s3).is_zero() && v.ok();
    bad += !ok;
  }
  return {{"charts.parabolic", "golden:displays.parabolic_chart", bad == 0 && used == n,
           std::to_string(used - bad) + " of " + std::to_string(used) + " solved points satisfy the chart relation",
           double(bad)}};
}

// (a1, a2, s) with a prescribed zero pattern of (P1, P2, Q), reducible mod p
// without changing that pattern.
struct FiberSample {
  GR a1, a2;
  MonodromyParams s;
  std::array<long, 3> mod;  // P1, P2, Q mod p
};

inline std::optional<FiberSample> fiber_sample(oracle::ExactRng& r, int mask, long p) {
  bool z1 = mask & 1, z2 = mask & 2, zq = mask & 4;
  GR a1(r.nonzero_rational(6, 4)), a2(r.nonzero_rational(6, 4));
  GR s1 = z1 ? a1 + a1.inv() : GR(r.rational(6, 4)), s2 = z2 ? a2 + a2.inv() : GR(r.rational(6, 4));
  GR s3 = zq ? a1 * a2 : GR(r.nonzero_rational(6, 4));
  if (s3.is_zero()) return std::nullopt;
  MonodromyParams s{s1, s2, s3};
  GR P1 = a1 * (s1 - a1) - GR(1), P2 = a2 * (s2 - a2) - GR(1), Q = s3 - a1 * a2;
  std::array<GR, 3> v{P1, P2, Q};
  std::array<bool, 3> z{z1, z2, zq};
  FiberSample out{a1, a2, s, {}};
  for (int k = 0; k < 3; ++k) {
    if (v[k].is_zero() != z[k]) return std::nullopt;
    auto m = oracle::mod_p(v[k].re(), p);
    if (!m || (*m == 0) != z[k]) return std::nullopt;
    out.mod[k] = *m;
  }
  return out;
}

inline std::vector<Check> fiber_checks(int per_branch, uint64_t seed, long p = 31) {
  std::vector<Task> tasks;
  for (int mask = 0; mask < 8; ++mask)
    tasks.push_back([=] {
      oracle::ExactRng rng(seed + mask);
      int bad = 0, used = 0;
      std::string first;
      for (int tries = 0; used < per_branch && tries < 100 * per_branch; ++tries) {
        auto smp = fiber_sample(rng, mask, p);
        if (!smp) continue;
        ++used;
        auto r = pr_fiber_classify(smp->a1, smp->a2, smp->s);
        long long brute = oracle::brute_orbits(p, smp->mod[0], smp->mod[1], smp->mod[2]);
        bool ok = r.count(p) == brute;
        if (r.cls == FiberClass::OnePoint) ok = ok && brute == 1;
        if (r.cls == FiberClass::Empty) ok = ok && brute == 0;
        if (r.cls == FiberClass::Line) ok = ok && brute == p;
        if (!ok && first.empty())
          first = "; first disagreement: " + fiber_class_name(r.cls) + " predicts " + std::to_string(r.count(p)) +
                  ", brute force " + std::to_string(brute);
        bad += !ok;
      }
      std::string branch = std::string(mask & 1 ? "P1=0" : "P1!=0") + "," + (mask & 2 ? "P2=0" : "P2!=0") + "," +
                           (mask & 4 ? "Q=0" : "Q!=0");
      return std::vector<Check>{{"pr_fiber.brute_force[" + branch + "]", "oracle:brute_orbits_mod_p",
                                 bad == 0 && used == per_branch,
                                 std::to_string(used - bad) + " of " + std::to_string(used) + " samples agree" + first,
                                 double(bad + (per_branch - used))}};
    });
  return run_tasks(tasks);
}

inline std::vector<Check> suite_charts(int n = 100, uint64_t seed = 20261016) {
  return run_tasks({[=] { return chart_checks(n, seed); }, [=] { return parabolic_checks(n, seed + 1); },
                    [=] { return fiber_checks(n, seed + 2); }});
}

// ---------------------------------------------------------------------------
// Numerical experiments.

inline std::vector<Check> isomonodromy_checks(const std::vector<ThetaNum>& thetas, double t0, double t1,
                                              const IntegratorConfig& cfg, double tol = 1e-6) {
  const auto& R = Rank2Numeric::get();
  auto reports = parallel_map(thetas, [&](const ThetaNum& th) {
    std::complex<double> a0(0.3, 0.1), b0(0.7, -0.2);
    return isomonodromy_drift(th, {a0, b0, R.solve_c1(a0, b0, t0, th)}, t0, t1, cfg);
  });
  std::vector<Check> out;
  for (size_t k = 0; k < thetas.size(); ++k) {
    auto& th = thetas[k];
    std::ostringstream nm;
    nm << "isomonodromy[" << k << "] theta=(" << th.theta0.real() << "," << th.theta1.real() << ","
       << th.theta_inf.real() << ")";
    for (const char* inv : {"tr(mon0)", "tr(mon1)"})
      out.push_back(numeric_check(nm.str() + "." + inv, "invariant:local_monodromy_trace", reports[k].drift_of(inv),
                                  tol, "drift"));
  }
  return out;
}

inline std::vector<ThetaNum> isomonodromy_thetas(int extra, uint64_t seed = 20261016) {
  std::vector<ThetaNum> out{{1.0 / 3, 1.0 / 5, 1.0 / 7}};
  oracle::ExactRng r(seed);
  auto nonint = [&] {
    for (;;) {
      double x = r.real(-1.5, 1.5);
      if (std::abs(x - std::round(x)) > 0.05) return x;
    }
  };
  for (int k = 0; k < extra; ++k) out.push_back({nonint(), nonint(), nonint()});
  return out;
}

inline Theta riccati_compatible_theta(std::array<int, 3> eps, GR theta0, GR theta1) {
  Theta th{theta0, theta1, GR(0)};
  th.theta_inf = reducible_theta(eps[0], eps[1], eps[2], th) - GR(1);
  return th;
}

inline std::vector<Check> riccati_checks(const Theta& th, std::complex<double> u0, double t0, double t1,
                                         const IntegratorConfig& cfg, double tol = 1e-6) {
  auto r = riccati_embed_check({1, 1, 1}, th, u0, t0, t1, cfg);
  std::ostringstream os;
  os << "P5 residual = " << r.residual.max << " on " << r.residual.used << " samples (" << r.residual.excluded
     << " near q in {0,1} excluded, " << r.u.poles.size() << " poles detoured)";
  return {{"riccati.p5_residual", "derived:p5_q_equation", r.pass(tol), os.str(), r.residual.max},
          numeric_check("riccati.mon0_eigenvalue_drift", "invariant:local_exponents", r.eig_drift, tol, "drift")};
}

inline std::vector<Check> fb_checks(const std::array<std::complex<double>, 4>& eps, std::complex<double> b1,
                                    std::complex<double> b3, double t0, double t1, const IntegratorConfig& cfg) {
  auto r = f_b_consistency(eps, b1, b3, t0, t1, cfg);
  return {numeric_check("f_b.deviation", "golden:displays.b_system", r.max_deviation, 1e-8,
                        "max |f(b(t)) - f(t)| over " + std::to_string(r.compared) + " grid points"),
          numeric_check("f_b.constraints", "golden:displays.f_system", r.constraint_residual, 1e-9,
                        "max |f0+f2-t/2|, |f1+f3-t/2|")};
}

}  // namespace p5iso::verify
