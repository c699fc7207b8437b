#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <future>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "p5iso/lax/lax2.hpp"
#include "p5iso/lax/rank4.hpp"
#include "p5iso/monodromy/monodromy.hpp"
#include "p5iso/numerics/compiled.hpp"
#include "p5iso/numerics/ode.hpp"

namespace p5iso {

using CMat = Matrix<std::complex<double>>;
using MatField = std::function<CMat(std::complex<double> z)>;

inline std::array<std::complex<double>, 3> theta_to_s(const ThetaNum& th) {
  using std::numbers::pi;
  return {2.0 * std::cos(pi * th.theta0), 2.0 * std::cos(pi * th.theta1),
          std::exp(std::complex<double>(0, pi) * th.theta_inf)};
}

// ---------------------------------------------------------------------------
// Loop monodromy of d/dz + A(z), horizontal sections Y' = -A Y.

struct Loop {
  std::complex<double> center;
  double radius = 0.5;
  double base_angle = 0;  // base point center + radius e^{i base_angle}
  bool ccw = true;
  std::complex<double> base_point() const { return center + std::polar(radius, base_angle); }
  Loop reversed() const { return {center, radius, base_angle, !ccw}; }
};

struct MonodromyEstimate {
  std::complex<double> base_point;
  Loop loop;
  CMat matrix = CMat(0, 0);
  double error_estimate = 0;
};

namespace num_detail {

inline CMat run_loop(const MatField& A, size_t n, const Loop& loop, const IntegratorConfig& cfg) {
  Field f = [&](std::complex<double> z, const cvec& y, cvec& dy) {
    CMat a = A(z);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        std::complex<double> s = 0;
        for (size_t k = 0; k < n; ++k) s += a(i, k) * y[k * n + j];
        dy[i * n + j] = -s;
      }
  };
  cvec y0(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) y0[i * n + i] = 1.0;
  double sweep = loop.ccw ? 2 * std::numbers::pi : -2 * std::numbers::pi;
  Path path{PathPiece::circle_arc(loop.center, loop.radius, loop.base_angle, loop.base_angle + sweep)};
  auto tr = integrate_ode(f, y0, path, cfg);
  if (tr.blowup) throw InvalidLoop("solution blew up along the loop");
  CMat M(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) M(i, j) = tr.samples.back().y[i * n + j];
  return M;
}

inline double max_diff(const CMat& a, const CMat& b) {
  double m = 0;
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace num_detail

inline MonodromyEstimate loop_monodromy(const MatField& A, size_t n, const Loop& loop,
                                        const std::vector<std::complex<double>>& singularities,
                                        const IntegratorConfig& cfg = {}) {
  if (!(loop.radius > 0)) throw InvalidLoop("radius must be positive");
  for (auto& s : singularities)
    if (std::abs(std::abs(s - loop.center) - loop.radius) < 1e-9 * std::max(1.0, loop.radius))
      throw InvalidLoop("loop passes through a singular point");
  MonodromyEstimate est;
  est.base_point = loop.base_point();
  est.loop = loop;
  est.matrix = num_detail::run_loop(A, n, loop, cfg);
  IntegratorConfig fine = cfg;
  fine.rel_tol *= 1e-2;
  fine.abs_tol *= 1e-2;
  est.error_estimate = std::max(num_detail::max_diff(est.matrix, num_detail::run_loop(A, n, loop, fine)), 1e-15);
  return est;
}

inline std::complex<double> cdet(const CMat& m) {
  size_t n = m.rows();
  CMat a = m;
  std::complex<double> d = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    for (size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (std::abs(a(p, c)) == 0) return 0;
    if (p != c) {
      for (size_t k = 0; k < n; ++k) std::swap(a(p, k), a(c, k));
      d = -d;
    }
    d *= a(c, c);
    for (size_t r = c + 1; r < n; ++r) {
      auto f = a(r, c) / a(c, c);
      for (size_t k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return d;
}

inline std::array<std::complex<double>, 2> eigenvalues2(const CMat& m) {
  auto tr = m(0, 0) + m(1, 1), det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  auto d = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + d) / 2.0, (tr - d) / 2.0};
}

// ---------------------------------------------------------------------------
// Rank-2 numeric context compiled from the derived Lax pair.

struct Rank2Numeric {
  std::array<CompiledRF, 4> A;  // over z, a0, b0, c1, t, theta0, theta1, theta
  std::array<CompiledRF, 3> flow;  // over a0, b0, c1, t, theta0, theta1, theta
  CompiledRF ddb0;                 // b0'' along the flow
  CompiledRF cubic;                // M1 cubic residual over the same order with c1

  static const Rank2Numeric& get() {
    static const Rank2Numeric r = [] {
      Rank2Numeric r;
      auto lp = solve_lax_pair();
      std::vector<std::string> zo{"z", "a0", "b0", "c1", "t", "theta0", "theta1", "theta"};
      std::vector<std::string> fo{"a0", "b0", "c1", "t", "theta0", "theta1", "theta"};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.A[2 * i + j] = CompiledRF(lp.A_op.matrix(i, j), zo);
      const char* names[3] = {"a0", "b0", "c1"};
      for (int k = 0; k < 3; ++k) r.flow[k] = CompiledRF(lp.flow.at(names[k]), fo);
      r.ddb0 = CompiledRF(Derivation::dt(lp.flow)(lp.flow.at("b0")), fo);
      using RF = RationalFunction;
      r.cubic = CompiledRF(
          m1_cubic_residual(RF::var("a0"), RF::var("b0"), RF::var("c1"), RF::var("t"), symbolic_theta()), fo);
      return r;
    }();
    return r;
  }

  static cvec params(const cvec& s, std::complex<double> t, const ThetaNum& th) {
    return {s[0], s[1], s[2], t, th.theta0, th.theta1, th.theta()};
  }

  MatField a_field(const cvec& s, std::complex<double> t, const ThetaNum& th) const {
    return [this, s, t, th](std::complex<double> z) {
      cvec x{z, s[0], s[1], s[2], t, th.theta0, th.theta1, th.theta()};
      CMat m(2, 2);
      for (int k = 0; k < 4; ++k) m(k / 2, k % 2) = A[k](x);
      return m;
    };
  }

  Field flow_field(const ThetaNum& th) const {
    return [this, th](std::complex<double> t, const cvec& y, cvec& dy) {
      cvec x = params(y, t, th);
      for (int k = 0; k < 3; ++k) dy[k] = flow[k](x);
    };
  }

  // c1 completing (a0, b0) to a point on the M1 cubic (affine in c1).
  std::complex<double> solve_c1(std::complex<double> a0, std::complex<double> b0, std::complex<double> t,
                                const ThetaNum& th) const {
    auto f0 = cubic(params({a0, b0, 0.0}, t, th)), f1 = cubic(params({a0, b0, 1.0}, t, th));
    if (std::abs(f1 - f0) < 1e-300) throw InvalidParameter("cubic does not determine c1");
    return -f0 / (f1 - f0);
  }
};

struct DriftEntry {
  std::string invariant;
  std::complex<double> at_t0, at_t1;
  double drift = 0;
};

struct DriftReport {
  std::vector<DriftEntry> entries;
  std::vector<std::complex<double>> poles;
  double max_drift() const {
    double m = 0;
    for (auto& e : entries) m = std::max(m, e.drift);
    return m;
  }
  double drift_of(const std::string& name) const {
    for (auto& e : entries)
      if (e.invariant == name) return e.drift;
    throw InvalidParameter("no invariant " + name);
  }
};

inline nlohmann::json drift_to_json(const DriftReport& r) {
  auto c = [](std::complex<double> z) { return nlohmann::json::array({z.real(), z.imag()}); };
  nlohmann::json arr = nlohmann::json::array();
  for (auto& e : r.entries)
    arr.push_back({{"invariant", e.invariant}, {"at_t0", c(e.at_t0)}, {"at_t1", c(e.at_t1)}, {"drift", e.drift}});
  nlohmann::json poles = nlohmann::json::array();
  for (auto& p : r.poles) poles.push_back(c(p));
  return {{"entries", arr}, {"poles", poles}, {"max_drift", r.max_drift()}};
}

// Loops of radius 1/2 around 0 and 1 sharing the base point z = 1/2.
inline std::array<MonodromyEstimate, 2> rank2_local_monodromies(const MatField& A, const IntegratorConfig& cfg) {
  std::vector<std::complex<double>> sing{0.0, 1.0};
  return {loop_monodromy(A, 2, Loop{0.0, 0.5, 0.0, true}, sing, cfg),
          loop_monodromy(A, 2, Loop{1.0, 0.5, std::numbers::pi, true}, sing, cfg)};
}

struct Rank2Invariants {
  std::complex<double> tr0, tr1, tr01;
};

inline Rank2Invariants rank2_invariants(const cvec& s, std::complex<double> t, const ThetaNum& th,
                                        const IntegratorConfig& cfg) {
  auto m = rank2_local_monodromies(Rank2Numeric::get().a_field(s, t, th), cfg);
  return {m[0].matrix.trace(), m[1].matrix.trace(), (m[0].matrix * m[1].matrix).trace()};
}

// Integrates the Lax flow from (a0, b0, c1) at t0 to t1 and compares
// conjugation invariants of the monodromy at both ends.
inline DriftReport isomonodromy_drift(const ThetaNum& th, const cvec& start, std::complex<double> t0,
                                      std::complex<double> t1, const IntegratorConfig& cfg = {}) {
  const auto& R = Rank2Numeric::get();
  auto routed = integrate_rerouted(R.flow_field(th), start, t0, t1, cfg, {"a0", "b0", "c1"});
  const cvec& end = routed.traj.samples.back().y;
  auto i0 = rank2_invariants(start, t0, th, cfg);
  auto i1 = t0 == t1 ? i0 : rank2_invariants(end, t1, th, cfg);
  DriftReport r;
  r.poles = routed.poles;
  r.entries.push_back({"tr(mon0)", i0.tr0, i1.tr0, std::abs(i1.tr0 - i0.tr0)});
  r.entries.push_back({"tr(mon1)", i0.tr1, i1.tr1, std::abs(i1.tr1 - i0.tr1)});
  r.entries.push_back({"tr(mon0*mon1)", i0.tr01, i1.tr01, std::abs(i1.tr01 - i0.tr01)});
  return r;
}

// ---------------------------------------------------------------------------
// P5 in q: q = y/(y-1) with y solving standard P5 at the parameters of the
// derived equation.

inline std::complex<double> p5_q_rhs(std::complex<double> q, std::complex<double> dq, std::complex<double> t,
                                     const ThetaNum& th) {
  auto p = p5_standard_params(th);
  auto qm = q - 1.0;
  auto y = q / qm, dy = -dq / (qm * qm);
  auto d2y = p5_standard_rhs(y, dy, t, p);
  auto ym = y - 1.0;
  return -d2y / (ym * ym) + 2.0 * dy * dy / (ym * ym * ym);
}

struct P5Residual {
  double max = 0;
  size_t used = 0, excluded = 0;
};

// Samples carry state (q, q') and derivative (q', q'').
inline P5Residual p5_residual(const Trajectory& tr, const ThetaNum& th, double polar_tol = 1e-8) {
  P5Residual r;
  for (auto& s : tr.samples) {
    auto q = s.y[0], dq = s.y[1], d2q = s.dy[1];
    if (std::abs(q) < polar_tol || std::abs(q - 1.0) < polar_tol || std::abs(s.t) < polar_tol) {
      ++r.excluded;
      continue;
    }
    double res = std::abs(d2q - p5_q_rhs(q, dq, s.t, th)) / std::max(1.0, std::abs(d2q));
    r.max = std::max(r.max, res);
    ++r.used;
  }
  return r;
}

inline RoutedTrajectory integrate_p5(const ThetaNum& th, std::complex<double> q0, std::complex<double> dq0,
                                     std::complex<double> t0, std::complex<double> t1,
                                     const IntegratorConfig& cfg = {}) {
  Field f = [th](std::complex<double> t, const cvec& y, cvec& dy) {
    dy[0] = y[1];
    dy[1] = p5_q_rhs(y[0], y[1], t, th);
  };
  return integrate_rerouted(f, {q0, dq0}, t0, t1, cfg, {"q", "dq"});
}

// q = -b0 along the Lax flow, as a trajectory of (q, q').
inline Trajectory lax_q_trajectory(const ThetaNum& th, const Trajectory& flow) {
  const auto& R = Rank2Numeric::get();
  Trajectory out;
  out.names = {"q", "dq"};
  for (auto& s : flow.samples) {
    cvec x = Rank2Numeric::params(s.y, s.t, th);
    auto db0 = R.flow[1](x);
    out.samples.push_back({s.t, {-s.y[1], -db0}, {-db0, -R.ddb0(x)}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Riccati solutions on the reducible locus.

struct RiccatiReport {
  RoutedTrajectory u;
  Trajectory q;
  P5Residual residual;
  std::array<std::complex<double>, 2> mon0_eig_t0{}, mon0_eig_t1{};
  double eig_drift = 0;
  bool pass(double tol = 1e-6) const { return residual.used > 0 && residual.max < tol; }
};

inline RiccatiReport riccati_embed_check(std::array<int, 3> eps, const Theta& th, std::complex<double> u0,
                                         std::complex<double> t0, std::complex<double> t1,
                                         const IntegratorConfig& cfg = {}) {
  using RF = RationalFunction;
  auto ric = derive_riccati(eps, th);
  ThetaSym ths = lift(th);
  RF u = RF::var("u"), t = RF::var("t");
  auto g = reducible_general(eps[0], eps[1], eps[2], RF(1), u, t, ths);
  auto m1 = normalize_to_m1(g).first;
  Derivation D = Derivation::dt({{"u", ric.ode.rhs}});
  RF q = RF(-1) * m1.b0, dq = D(q), d2q = D(dq);
  std::vector<std::string> ord{"u", "t"};
  CompiledRF du_c(ric.ode.rhs, ord), q_c(q, ord), dq_c(dq, ord), d2q_c(d2q, ord);
  CompiledRF a0_c(m1.a0, ord), b0_c(m1.b0, ord), c1_c(m1.c1, ord);
  Field f = [&](std::complex<double> tt, const cvec& y, cvec& dy) { dy[0] = du_c({y[0], tt}); };
  RiccatiReport rep;
  rep.u = integrate_rerouted(f, {u0}, t0, t1, cfg, {"u"});
  rep.q.names = {"q", "dq"};
  for (auto& s : rep.u.traj.samples) {
    cvec x{s.y[0], s.t};
    rep.q.samples.push_back({s.t, {q_c(x), dq_c(x)}, {dq_c(x), d2q_c(x)}});
  }
  ThetaNum thn = to_numeric(th);
  rep.residual = p5_residual(rep.q, thn);
  const auto& R = Rank2Numeric::get();
  auto eig_at = [&](const Sample& s) {
    cvec x{s.y[0], s.t};
    cvec pt{a0_c(x), b0_c(x), c1_c(x)};
    auto m = loop_monodromy(R.a_field(pt, s.t, thn), 2, Loop{0.0, 0.5, 0.0, true}, {0.0, 1.0}, cfg);
    auto e = eigenvalues2(m.matrix);
    if (std::abs(e[0]) < std::abs(e[1]) || (std::abs(e[0]) == std::abs(e[1]) && std::arg(e[0]) < std::arg(e[1])))
      std::swap(e[0], e[1]);
    return e;
  };
  rep.mon0_eig_t0 = eig_at(rep.u.traj.samples.front());
  rep.mon0_eig_t1 = eig_at(rep.u.traj.samples.back());
  auto d1 = std::max(std::abs(rep.mon0_eig_t0[0] - rep.mon0_eig_t1[0]), std::abs(rep.mon0_eig_t0[1] - rep.mon0_eig_t1[1]));
  auto d2 = std::max(std::abs(rep.mon0_eig_t0[0] - rep.mon0_eig_t1[1]), std::abs(rep.mon0_eig_t0[1] - rep.mon0_eig_t1[0]));
  rep.eig_drift = std::min(d1, d2);
  return rep;
}

// ---------------------------------------------------------------------------
// Rank 4: f-system, b-system and the monodromy of z d/dz + M around 0.

struct Rank4Numeric {
  CompiledRF df0, df1;   // over f0, f1, t, eps0..eps3
  CompiledRF db1, db3;   // over b1, b3, a1, a2, a3, t
  std::array<CompiledRF, 16> M;  // D matrix over z, f0, f1, t, eps0..eps3

  static const Rank4Numeric& get() {
    static const Rank4Numeric r = [] {
      using RF = RationalFunction;
      Rank4Numeric r;
      auto fs = derive_f_system();
      auto bs = derive_b_hamiltonian();
      std::vector<std::string> fo{"f0", "f1", "t", "eps0", "eps1", "eps2", "eps3"};
      std::vector<std::string> bo{"b1", "b3", "a1", "a2", "a3", "t"};
      r.df0 = CompiledRF(fs.df0, fo);
      r.df1 = CompiledRF(fs.df1, fo);
      r.db1 = CompiledRF(bs.db1, bo);
      r.db3 = CompiledRF(bs.db3, bo);
      RF t = RF::var("t");
      std::array<RF, 4> e{RF::var("eps0"), RF::var("eps1"), RF::var("eps2"), RF::var("eps3")};
      std::array<RF, 4> f{RF::var("f0"), RF::var("f1"), t / RF(2) - RF::var("f0"), t / RF(2) - RF::var("f1")};
      auto Dm = d_matrix_f_form(e, f);
      std::vector<std::string> zo{"z", "f0", "f1", "t", "eps0", "eps1", "eps2", "eps3"};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.M[4 * i + j] = CompiledRF(Dm(i, j), zo);
      return r;
    }();
    return r;
  }

  Field f_field(const std::array<std::complex<double>, 4>& eps) const {
    return [this, eps](std::complex<double> t, const cvec& y, cvec& dy) {
      cvec x{y[0], y[1], t, eps[0], eps[1], eps[2], eps[3]};
      dy[0] = df0(x);
      dy[1] = df1(x);
    };
  }
  Field b_field(const std::array<std::complex<double>, 3>& a) const {
    return [this, a](std::complex<double> t, const cvec& y, cvec& dy) {
      cvec x{y[0], y[1], a[0], a[1], a[2], t};
      dy[0] = db1(x);
      dy[1] = db3(x);
    };
  }
  // d/dz + M(z)/z for the operator z d/dz + M
  MatField a_field(const cvec& f, std::complex<double> t, const std::array<std::complex<double>, 4>& eps) const {
    return [this, f, t, eps](std::complex<double> z) {
      cvec x{z, f[0], f[1], t, eps[0], eps[1], eps[2], eps[3]};
      CMat m(4, 4);
      for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = M[k](x) / z;
      return m;
    };
  }
};

inline void check_eps_sum(const std::array<std::complex<double>, 4>& eps) {
  if (std::abs(eps[0] + eps[1] + eps[2] + eps[3]) > 1e-12) throw InvalidParams("sum of eps is not 0");
}

inline DriftReport isomonodromy_drift_rank4(const std::array<std::complex<double>, 4>& eps, const cvec& f_start,
                                            std::complex<double> t0, std::complex<double> t1,
                                            const IntegratorConfig& cfg = {}) {
  check_eps_sum(eps);
  const auto& R = Rank4Numeric::get();
  auto routed = integrate_rerouted(R.f_field(eps), f_start, t0, t1, cfg, {"f0", "f1"});
  auto cp = [&](const cvec& f, std::complex<double> t) {
    auto m = loop_monodromy(R.a_field(f, t, eps), 4, Loop{0.0, 0.5, 0.0, true}, {0.0}, cfg);
    return charpoly(m.matrix);
  };
  auto c0 = cp(f_start, t0), c1 = cp(routed.traj.samples.back().y, t1);
  DriftReport r;
  r.poles = routed.poles;
  for (int k = 0; k < 4; ++k)
    r.entries.push_back({"charpoly(mon0)[" + std::to_string(k) + "]", c0[k], c1[k], std::abs(c1[k] - c0[k])});
  return r;
}

struct FBReport {
  double max_deviation = 0;
  double constraint_residual = 0;
  size_t compared = 0;
  std::vector<std::complex<double>> grid;
  bool pass(double dev_tol = 1e-8, double cons_tol = 1e-9) const {
    return compared > 0 && max_deviation < dev_tol && constraint_residual < cons_tol;
  }
};

// Integrates the f-system from f(b(t0)) and the b-system from b(t0)
// independently and compares them through the entry dictionary on a grid.
inline FBReport f_b_consistency(const std::array<std::complex<double>, 4>& eps, std::complex<double> b1,
                                std::complex<double> b3, std::complex<double> t0, std::complex<double> t1,
                                const IntegratorConfig& cfg = {}, int grid = 10) {
  check_eps_sum(eps);
  const auto& R = Rank4Numeric::get();
  auto a = a_from_eps(eps);
  auto f = f_from_b(b1, b3, t0);
  cvec yf{f[0], f[1]}, yb{b1, b3};
  FBReport rep;
  for (int k = 0; k <= grid; ++k) {
    std::complex<double> t = t0 + (t1 - t0) * (double(k) / grid);
    if (k > 0) {
      std::complex<double> tp = t0 + (t1 - t0) * (double(k - 1) / grid);
      auto tf = integrate_ode(R.f_field(eps), yf, tp, t, cfg);
      auto tb = integrate_ode(R.b_field(a), yb, tp, t, cfg);
      if (tf.blowup || tb.blowup) throw PathBlocked("pole on the comparison grid");
      yf = tf.samples.back().y;
      yb = tb.samples.back().y;
    }
    auto fb = f_from_b(yb[0], yb[1], t);
    double dev = std::max(std::abs(fb[0] - yf[0]), std::abs(fb[1] - yf[1]));
    double cons = std::max(std::abs(fb[0] + fb[2] - t / 2.0), std::abs(fb[1] + fb[3] - t / 2.0));
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.constraint_residual = std::max(rep.constraint_residual, cons);
    rep.grid.push_back(t);
    ++rep.compared;
  }
  return rep;
}

// ---------------------------------------------------------------------------

template <class In, class F>
auto parallel_map(const std::vector<In>& xs, F f) -> std::vector<decltype(f(xs[0]))> {
  using Out = decltype(f(xs[0]));
  size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<Out>> futs;
  std::vector<Out> out;
  out.reserve(xs.size());
  for (size_t start = 0; start < xs.size(); start += workers) {
    futs.clear();
    for (size_t i = start; i < std::min(xs.size(), start + workers); ++i)
      futs.push_back(std::async(std::launch::async, [&f, &xs, i] { return f(xs[i]); }));
    for (auto& fu : futs) out.push_back(fu.get());
  }
  return out;
}

}  // namespace p5iso
