#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "p5iso/numerics/experiments.hpp"
#include "support/gen.hpp"

using namespace p5iso;
using C = std::complex<double>;
using GR = GaussianRational;

namespace {

C rc(double lo = -1, double hi = 1) { return {gen::real(lo, hi), gen::real(lo, hi)}; }

double non_integer(double lo, double hi) {
  for (;;) {
    double x = gen::real(lo, hi);
    if (std::abs(x - std::round(x)) > 0.05) return x;
  }
}

MatField euler(C theta) {
  return [theta](C z) {
    CMat m(2, 2);
    m(0, 0) = theta / 2.0 / z;
    m(1, 1) = -theta / 2.0 / z;
    return m;
  };
}

Theta compatible_theta(GR t0, GR t1) {
  Theta th{t0, t1, GR(0)};
  th.theta_inf = reducible_theta(1, 1, 1, th) - GR(1);
  return th;
}

}  // namespace

TEST(IntegrateOde, Exponential) {
  Field f = [](C, const cvec& y, cvec& dy) { dy[0] = y[0]; };
  auto tr = integrate_ode(f, {1.0}, 0.0, 1.0, {});
  EXPECT_LT(std::abs(tr.samples.back().y[0] - std::exp(1.0)), 1e-9);
  EXPECT_FALSE(tr.blowup);
}

TEST(IntegrateOde, PowerMonodromyAroundZero) {
  for (double e : {1.0, 0.5}) {
    Field f = [e](C z, const cvec& y, cvec& dy) { dy[0] = e / z * y[0]; };
    Path p{PathPiece::circle_arc(0.0, 1.0, 0.0, 2 * std::numbers::pi)};
    auto tr = integrate_ode(f, {1.0}, p, {});
    EXPECT_LT(std::abs(tr.samples.back().y[0] - std::exp(C(0, 2 * std::numbers::pi * e))), 1e-9) << e;
  }
}

TEST(IntegrateOde, FixedStepOrderAtLeastFive) {
  Field f = [](C t, const cvec& y, cvec& dy) { dy[0] = C(0, 1) * t * y[0]; };
  auto err = [&](int n) {
    IntegratorConfig cfg;
    cfg.fixed_steps = n;
    auto tr = integrate_ode(f, {1.0}, 0.0, 2.0, cfg);
    return std::abs(tr.samples.back().y[0] - std::exp(C(0, 2.0)));
  };
  for (int n : {10, 20, 40}) EXPECT_GT(err(n) / err(2 * n), 0.8 * 32) << n;
}

TEST(IntegrateOde, TighterToleranceReducesError) {
  Field f = [](C t, const cvec& y, cvec& dy) { dy[0] = std::cos(t) * y[0]; };
  double prev = 1;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    IntegratorConfig cfg;
    cfg.max_step = 10;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    auto tr = integrate_ode(f, {1.0}, 0.0, 3.0, cfg);
    double e = std::abs(tr.samples.back().y[0] - std::exp(std::sin(3.0)));
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_LT(prev, 1e-9);
}

TEST(IntegrateOde, PoleDetectionAndReroute) {
  Field f = [](C, const cvec& y, cvec& dy) { dy[0] = y[0] * y[0]; };
  auto tr = integrate_ode(f, {1.0}, 0.0, 2.0, {});
  ASSERT_TRUE(tr.blowup);
  EXPECT_LT(std::abs(*tr.blowup - 1.0), 1e-3);
  auto routed = integrate_rerouted(f, {1.0}, 0.0, 2.0, {});
  EXPECT_EQ(routed.poles.size(), 1u);
  EXPECT_LT(std::abs(routed.traj.samples.back().y[0] - (-1.0)), 1e-8);
  EXPECT_LT(std::abs(routed.traj.samples.back().t - 2.0), 1e-14);
  EXPECT_THROW(integrate_rerouted(f, {1.0}, 0.0, 1.0 + 1e-3, {}), PathBlocked);
}

TEST(IntegrateOde, Errors) {
  Field f = [](C, const cvec& y, cvec& dy) { dy[0] = y[0]; };
  IntegratorConfig bad;
  bad.rel_tol = -1;
  EXPECT_THROW(integrate_ode(f, {1.0}, 0.0, 1.0, bad), InvalidParameter);
  IntegratorConfig few;
  few.max_steps = 5;
  EXPECT_THROW(integrate_ode(f, {1.0}, 0.0, 50.0, few), IntegrationFailure);
}

TEST(IntegrateOde, CsvHeader) {
  Field f = [](C, const cvec& y, cvec& dy) { dy[0] = y[1], dy[1] = -y[0]; };
  auto tr = integrate_ode(f, {1.0, 0.0}, 0.0, 1.0, {}, {"q", "dq"});
  std::ostringstream os;
  write_csv(os, tr);
  std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), "t_re,t_im,q_re,q_im,dq_re,dq_im");
  size_t lines = std::count(out.begin(), out.end(), '\n');
  EXPECT_EQ(lines, tr.samples.size() + 1);
}

TEST(LoopMonodromy, EulerTrace) {
  for (int k = 0; k < 5; ++k) {
    double th = non_integer(-2, 2);
    auto m = loop_monodromy(euler(th), 2, Loop{0.0, 0.5, 0.0, true}, {0.0});
    EXPECT_LT(std::abs(m.matrix.trace() - 2 * std::cos(std::numbers::pi * th)), 1e-8);
    EXPECT_LT(std::abs(cdet(m.matrix) - 1.0), std::max(10 * m.error_estimate, 1e-10));
  }
}

TEST(LoopMonodromy, ReversedLoopIsInverse) {
  auto A = euler(0.37);
  Loop l{0.0, 0.5, 0.3, true};
  auto f = loop_monodromy(A, 2, l, {0.0}), b = loop_monodromy(A, 2, l.reversed(), {0.0});
  CMat p = f.matrix * b.matrix;
  double off = std::max({std::abs(p(0, 0) - 1.0), std::abs(p(1, 1) - 1.0), std::abs(p(0, 1)), std::abs(p(1, 0))});
  EXPECT_LT(off, 2 * (f.error_estimate + b.error_estimate) + 1e-12);
}

TEST(LoopMonodromy, InvalidLoop) {
  EXPECT_THROW(loop_monodromy(euler(0.3), 2, Loop{0.5, 0.5, 0.0, true}, {0.0, 1.0}), InvalidLoop);
  EXPECT_THROW(loop_monodromy(euler(0.3), 2, Loop{0.0, 0.0, 0.0, true}, {0.0}), InvalidLoop);
}

TEST(LoopMonodromy, BasePointChangeIsConjugation) {
  ThetaNum th{0.31, 0.17, 0.23};
  const auto& R = Rank2Numeric::get();
  for (int k = 0; k < 3; ++k) {
    C a0 = rc(), b0 = rc(0.3, 1), t = C(gen::real(1, 2), 0);
    C c1 = R.solve_c1(a0, b0, t, th);
    auto A = R.a_field({a0, b0, c1}, t, th);
    auto m1 = loop_monodromy(A, 2, Loop{0.0, 0.5, 0.0, true}, {0.0, 1.0});
    auto m2 = loop_monodromy(A, 2, Loop{0.0, 0.5, 2.0, true}, {0.0, 1.0});
    EXPECT_LT(std::abs(m1.matrix.trace() - m2.matrix.trace()), 2 * (m1.error_estimate + m2.error_estimate) + 1e-12);
    EXPECT_LT(std::abs(cdet(m1.matrix) - 1.0), std::max(10 * m1.error_estimate, 1e-10));
  }
}

TEST(LoopMonodromy, M1PointLocalTraces) {
  for (int k = 0; k < 5; ++k) {
    ThetaNum th{non_integer(-1.5, 1.5), non_integer(-1.5, 1.5), gen::real(-1, 1)};
    const auto& R = Rank2Numeric::get();
    C a0 = rc(), b0 = rc(0.3, 1), t = C(gen::real(1, 2), gen::real(-0.5, 0.5));
    C c1 = R.solve_c1(a0, b0, t, th);
    auto m = rank2_local_monodromies(R.a_field({a0, b0, c1}, t, th), {});
    auto s = theta_to_s(th);
    EXPECT_LT(std::abs(m[0].matrix.trace() - s[0]), 1e-6);
    EXPECT_LT(std::abs(m[1].matrix.trace() - s[1]), 1e-6);
  }
}

TEST(ThetaToS, Examples) {
  EXPECT_LT(std::abs(theta_to_s({0.0, 0.0, 0.0})[0] - 2.0), 1e-15);
  EXPECT_LT(std::abs(theta_to_s({1.0, 0.0, 0.0})[0] + 2.0), 1e-15);
  EXPECT_LT(std::abs(theta_to_s({0.0, 0.0, 0.5})[2] - C(0, 1)), 1e-15);
}

TEST(Isomonodromy, ZeroDisplacement) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  const auto& R = Rank2Numeric::get();
  C a0(0.3, 0.1), b0(0.7, -0.2);
  auto r = isomonodromy_drift(th, {a0, b0, R.solve_c1(a0, b0, 1.0, th)}, 1.0, 1.0);
  EXPECT_EQ(r.max_drift(), 0.0);
}

TEST(Isomonodromy, SampleThetaUnitDisplacement) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  const auto& R = Rank2Numeric::get();
  C a0(0.3, 0.1), b0(0.7, -0.2);
  auto r = isomonodromy_drift(th, {a0, b0, R.solve_c1(a0, b0, 1.0, th)}, 1.0, 2.0);
  EXPECT_LT(r.drift_of("tr(mon0)"), 1e-6);
  EXPECT_LT(r.drift_of("tr(mon1)"), 1e-6);
  EXPECT_LT(r.drift_of("tr(mon0*mon1)"), 1e-6);
}

TEST(Isomonodromy, RandomParameters) {
  const auto& R = Rank2Numeric::get();
  std::vector<ThetaNum> ths;
  for (int k = 0; k < 5; ++k) ths.push_back({non_integer(-1.5, 1.5), non_integer(-1.5, 1.5), gen::real(-1, 1)});
  auto reports = parallel_map(ths, [&](const ThetaNum& th) {
    C a0(0.2, -0.1), b0(0.6, 0.3);
    return isomonodromy_drift(th, {a0, b0, R.solve_c1(a0, b0, 1.0, th)}, 1.0, 2.0);
  });
  for (auto& r : reports) EXPECT_LT(r.max_drift(), 1e-6);
}

// The Möbius-transformed standard q equation agrees with the one derived from the Lax pair.
TEST(P5Residual, QEquationMatchesDerivation) {
  auto q = derive_p5_scalar(solve_lax_pair());
  CompiledRF rhs(q.rhs, {"q", "dq", "t", "theta0", "theta1", "theta"});
  for (int k = 0; k < 20; ++k) {
    ThetaNum th{rc(), rc(), rc()};
    C qq = rc(), dq = rc(), t = rc(0.5, 2);
    C expect = rhs({qq, dq, t, th.theta0, th.theta1, th.theta()});
    EXPECT_LT(std::abs(p5_q_rhs(qq, dq, t, th) - expect), 1e-10 * std::max(1.0, std::abs(expect)));
  }
}

TEST(P5Residual, SelfConsistentTrajectory) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  auto tr = integrate_p5(th, C(0.3, 0.1), C(0.2, 0), 1.0, 2.0);
  auto r = p5_residual(tr.traj, th);
  EXPECT_GT(r.used, 0u);
  EXPECT_LT(r.max, 1e-9);
}

TEST(P5Residual, LaxFlowTrajectory) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  const auto& R = Rank2Numeric::get();
  C a0(0.3, 0.1), b0(0.7, -0.2);
  auto fl = integrate_rerouted(R.flow_field(th), {a0, b0, R.solve_c1(a0, b0, 1.0, th)}, 1.0, 2.0, {});
  auto r = p5_residual(lax_q_trajectory(th, fl.traj), th);
  EXPECT_GT(r.used, 10u);
  EXPECT_LT(r.max, 1e-6);
}

TEST(P5Residual, CorruptedTrajectoryDetected) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  auto tr = integrate_p5(th, C(0.3, 0.1), C(0.2, 0), 1.0, 2.0).traj;
  for (auto& s : tr.samples) {
    for (auto& v : s.y) v *= 1.01;
    for (auto& v : s.dy) v *= 1.01;
  }
  EXPECT_GT(p5_residual(tr, th).max, 1e-3);
}

TEST(P5Residual, PolarSamplesExcluded) {
  ThetaNum th{1.0 / 3, 1.0 / 5, 1.0 / 7};
  Trajectory tr;
  tr.samples.push_back({1.0, {0.0, 1.0}, {1.0, 0.0}});
  tr.samples.push_back({1.0, {1.0, 1.0}, {1.0, 0.0}});
  auto r = p5_residual(tr, th);
  EXPECT_EQ(r.excluded, 2u);
  EXPECT_EQ(r.used, 0u);
}

TEST(Riccati, EmbeddingPasses) {
  auto th = compatible_theta(GR::frac(1, 3), GR::frac(1, 5));
  auto r = riccati_embed_check({1, 1, 1}, th, 0.5, 1.0, 2.0);
  EXPECT_TRUE(r.pass());
  EXPECT_LT(r.eig_drift, 1e-6);
}

TEST(Riccati, IncompatibleTheta) {
  Theta th{GR::frac(1, 3), GR::frac(1, 5), GR::frac(1, 7)};
  EXPECT_THROW(riccati_embed_check({1, 1, 1}, th, 0.5, 1.0, 2.0), NoSuchReduciblePoint);
}

TEST(Riccati, PoleIsRerouted) {
  auto th = compatible_theta(GR(2), GR::frac(1, 5));
  auto r = riccati_embed_check({1, 1, 1}, th, 3.0, 1.0, 2.0);
  EXPECT_FALSE(r.u.poles.empty());
  EXPECT_TRUE(r.pass());
  EXPECT_LT(r.eig_drift, 1e-6);
}

TEST(FBConsistency, AgreesAndKeepsConstraints) {
  for (int k = 0; k < 3; ++k) {
    std::array<C, 4> eps{rc(-0.3, 0.3), rc(-0.3, 0.3), rc(-0.3, 0.3), 0.0};
    eps[3] = -(eps[0] + eps[1] + eps[2]);
    auto r = f_b_consistency(eps, rc(-0.2, 0.2), rc(-0.2, 0.2), 1.0, 2.0);
    EXPECT_LT(r.max_deviation, 1e-8);
    EXPECT_LT(r.constraint_residual, 1e-9);
    EXPECT_TRUE(r.pass());
  }
  EXPECT_THROW(f_b_consistency({0.1, 0.0, 0.0, 0.0}, 0.1, 0.1, 1.0, 2.0), InvalidParams);
}

TEST(Rank4Isomonodromy, CharpolyOfLocalMonodromyIsConstant) {
  std::array<C, 4> eps{0.1, 0.2, -0.05, -0.25};
  auto f = f_from_b(C(0.1), C(0.05), C(1.0));
  auto r = isomonodromy_drift_rank4(eps, {f[0], f[1]}, 1.0, 2.0);
  EXPECT_LT(r.max_drift(), 1e-6);
  EXPECT_LT(std::abs(r.entries[0].at_t0 - 1.0), 1e-8);
}

TEST(ParallelMap, MatchesSerial) {
  std::vector<int> xs(37);
  for (int i = 0; i < 37; ++i) xs[i] = i;
  auto ys = parallel_map(xs, [](int x) { return x * x + 1; });
  for (int i = 0; i < 37; ++i) EXPECT_EQ(ys[i], i * i + 1);
}

TEST(DriftJson, Fields) {
  DriftReport r;
  r.entries.push_back({"tr(mon0)", C(1, 0), C(1, 1e-9), 1e-9});
  auto j = drift_to_json(r);
  EXPECT_EQ(j["entries"][0]["invariant"], "tr(mon0)");
  EXPECT_TRUE(j["entries"][0].contains("at_t0"));
  EXPECT_TRUE(j["entries"][0].contains("at_t1"));
  EXPECT_DOUBLE_EQ(j["entries"][0]["drift"].get<double>(), 1e-9);
}
