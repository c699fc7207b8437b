#include <gtest/gtest.h>

#include "p5iso/io/golden.hpp"
#include "p5iso/io/json_io.hpp"
#include "p5iso/moduli/rank2.hpp"
#include "support/gen.hpp"

using namespace p5iso;
using GR = GaussianRational;
using RF = RationalFunction;

namespace {

Theta random_theta() { return {gen::gauss(), gen::gauss(), gen::gauss()}; }

// A point on the cubic: pick a0, b0, t and solve for c1 (affine in c1 when b0(b0+1) != 0).
Rank2ChartPoint random_m1_point(const Theta& th) {
  for (;;) {
    GR a0 = gen::gauss(), b0 = gen::nonzero_gauss(), t = gen::nonzero_gauss();
    if ((b0 * (b0 + GR(1))).is_zero()) continue;
    GR r0 = m1_cubic_residual(a0, b0, GR(0), t, th);
    GR r1 = m1_cubic_residual(a0, b0, GR(1), t, th);
    GR c1 = -r0 / (r1 - r0);
    return Rank2ChartPoint::m1(a0, b0, c1, t);
  }
}

Matrix<RF> gauge_matrix(const GaugeTransformT<GR>& G) {
  RF z = RF::var("z");
  return Matrix<RF>{{RF(G.lambda1), RF(G.alpha) + RF(G.beta) * z}, {RF(0), RF(G.lambda2)}};
}

Matrix<RF> inverse2(const Matrix<RF>& m) {
  RF d = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return Matrix<RF>{{m(1, 1) / d, RF(-1) * m(0, 1) / d}, {RF(-1) * m(1, 0) / d, m(0, 0) / d}};
}

// A' = G^{-1} A G + G^{-1} dG/dz
Matrix<RF> conjugate(const Matrix<RF>& A, const Matrix<RF>& G) {
  Matrix<RF> Gi = inverse2(G), dG = G.map([](const RF& x) { return x.partial("z"); });
  return Gi * A * G + Gi * dG;
}

bool invariant_line(const Matrix<RF>& A, const std::array<RF, 2>& w) {
  RF v0 = w[0].partial("z") + A(0, 0) * w[0] + A(0, 1) * w[1];
  RF v1 = w[1].partial("z") + A(1, 0) * w[0] + A(1, 1) * w[1];
  return (v0 * w[1] - v1 * w[0]).is_zero();
}

}  // namespace

TEST(Theta, ThetaIsThetaInfPlusOne) {
  for (int k = 0; k < 20; ++k) {
    Theta th = random_theta();
    EXPECT_EQ(th.theta(), th.theta_inf + GR(1));
  }
}

TEST(ChartResiduals, B0ZeroWithHalfTheta0) {
  for (int k = 0; k < 20; ++k) {
    Theta th = random_theta();
    auto p = Rank2ChartPoint::m1(th.theta0 / GR(2), GR(0), gen::gauss(), gen::nonzero_gauss());
    auto r = chart_residuals(p, th);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_TRUE(r[0].is_zero());
  }
}

TEST(ChartResiduals, SingularPointTheta0Zero) {
  Theta th{GR(0), gen::gauss(), gen::gauss()};
  GR t = gen::nonzero_gauss();
  GR c1 = th.theta1 * th.theta1 / GR(4) - th.theta() * t / GR(2) + t * t / GR(4);
  auto p = Rank2ChartPoint::m1(GR(0), GR(0), c1, t);
  EXPECT_TRUE(chart_residuals(p, th)[0].is_zero());
  EXPECT_TRUE(to_general(p, th).c[0].is_zero());
}

TEST(ChartResiduals, GenericPointOffCubic) {
  Theta th{GR::frac(1, 2), GR::frac(1, 3), GR(2)};
  auto p = Rank2ChartPoint::m1(GR(5), GR(2), GR(7), GR(3));
  EXPECT_FALSE(chart_residuals(p, th)[0].is_zero());
  EXPECT_FALSE(on_moduli(p, th));
}

TEST(ChartResiduals, TZeroRejected) {
  Theta th = random_theta();
  EXPECT_THROW(chart_residuals(Rank2ChartPoint::m1(GR(0), GR(0), GR(0), GR(0)), th), InvalidParameter);
}

TEST(ChartResiduals, CubicMatchesTranscription) {
  auto th = symbolic_theta();
  RF a0 = RF::var("a0"), b0 = RF::var("b0"), c1 = RF::var("c1"), t = RF::var("t");
  RF lhs = m1_cubic_residual(a0, b0, c1, t, th);
  EXPECT_EQ(lhs, a0 * a0 - golden_expr(golden_display("m1_cubic")));
}

TEST(ToOperator, SingularPointHasC0Zero) {
  Theta th{GR(0), GR::frac(3, 2), GR::frac(1, 5)};
  GR t(2);
  GR c1 = th.theta1 * th.theta1 / GR(4) - th.theta() * t / GR(2) + t * t / GR(4);
  auto op = to_operator(Rank2ChartPoint::m1(GR(0), GR(0), c1, t), th);
  RF z = RF::var("z");
  RF upper = op.matrix(0, 1) * z * (z - RF(1));
  EXPECT_TRUE(upper.substitute("z", RF(0)).is_zero());
}

TEST(ToOperator, M2ComplementB1Zero) {
  Theta th = random_theta();
  GR t = gen::nonzero_gauss();
  for (GR A2 : {t / GR(2), -t / GR(2)}) {
    GR C3 = th.theta() * t / GR(2) - t * t / GR(2) - A2;
    GR C1 = gen::gauss();
    GR C2 = th.theta1 * th.theta1 / GR(4) - A2 * A2 - th.theta0 * th.theta0 / GR(4) - C3 - C1;
    auto p = Rank2ChartPoint::m2(A2, GR(0), C1, C2, C3, t);
    EXPECT_TRUE(on_moduli(p, th));
    auto op = to_operator(p, th);
    EXPECT_TRUE(op.matrix.trace().is_zero());
    // C3 without the -A2 term leaves the infinity relation off by exactly A2
    auto q = Rank2ChartPoint::m2(A2, GR(0), C1, C2 - A2, th.theta() * t / GR(2) - t * t / GR(2), t);
    auto r = chart_residuals(q, th);
    EXPECT_TRUE(r[0].is_zero());
    EXPECT_TRUE(r[1].is_zero());
    EXPECT_EQ(r[2], A2);
    EXPECT_THROW(to_operator(q, th), NotOnModuli);
  }
}

TEST(ToOperator, TracelessAndRejectsOffModuli) {
  for (int k = 0; k < 10; ++k) {
    Theta th = random_theta();
    auto p = random_m1_point(th);
    EXPECT_TRUE(to_operator(p, th).matrix.trace().is_zero());
    p.c1 += GR(1);
    EXPECT_THROW(to_operator(p, th), NotOnModuli);
  }
}

TEST(ToOperator, EntriesMatchMatrixForm) {
  Theta th{GR::frac(1, 3), GR(-2), GR::frac(1, 2)};
  auto p = random_m1_point(th);
  auto c = m1_c_coeffs(p, th);
  EXPECT_EQ(c[3], p.t * p.t / GR(4));
  EXPECT_EQ(c[2], th.theta() * p.t / GR(2) - (p.b0 + GR(2)) * p.t * p.t / GR(4));
  auto op = to_operator(p, th);
  RF z = RF::var("z"), zz = z * (z - RF(1));
  EXPECT_EQ(op.matrix(1, 0) * zz, z + RF(p.b0));
  EXPECT_EQ(op.matrix(0, 0) * zz, RF(p.a0));
  RF cz = RF(c[0]) + RF(c[1]) * z + RF(c[2]) * z * z + RF(c[3]) * z * z * z;
  EXPECT_EQ(op.matrix(0, 1) * zz, cz);
}

TEST(ChartTransition, RoundTripM1M2M1) {
  for (int k = 0; k < 15; ++k) {
    Theta th = random_theta();
    auto p = random_m1_point(th);
    auto q = chart_transition(p, Rank2Chart::M2, th);
    EXPECT_TRUE(on_moduli(q, th));
    auto back = chart_transition(q, Rank2Chart::M1, th);
    EXPECT_EQ(back.a0, p.a0);
    EXPECT_EQ(back.b0, p.b0);
    EXPECT_EQ(back.c1, p.c1);
    EXPECT_EQ(back.t, p.t);
    auto again = chart_transition(back, Rank2Chart::M2, th);
    EXPECT_EQ(again.A2, q.A2);
    EXPECT_EQ(again.B1, q.B1);
    EXPECT_EQ(again.C1, q.C1);
    EXPECT_EQ(again.C2, q.C2);
    EXPECT_EQ(again.C3, q.C3);
  }
}

TEST(ChartTransition, GaugeAgreesWithMatrixConjugation) {
  for (int k = 0; k < 8; ++k) {
    Theta th = random_theta();
    auto p = random_m1_point(th);
    auto g = to_general(p, th);
    auto [q, G] = normalize_to_m2(g);
    Matrix<RF> A = general_to_operator(g).matrix;
    Matrix<RF> expect = conjugate(A, gauge_matrix(G));
    EXPECT_TRUE(expect == to_operator(q, th).matrix);
  }
}

TEST(ChartTransition, OutsideOverlap) {
  Theta th = random_theta();
  auto p = Rank2ChartPoint::m1(th.theta0 / GR(2), GR(0), GR(1), GR(2));
  EXPECT_THROW(chart_transition(p, Rank2Chart::M2, th), OutsideOverlap);
  GR t(2);
  GR A2 = t / GR(2), C3 = th.theta() * t / GR(2) - t * t / GR(2) - A2;
  GR C2 = th.theta1 * th.theta1 / GR(4) - A2 * A2 - th.theta0 * th.theta0 / GR(4) - C3;
  auto q = Rank2ChartPoint::m2(A2, GR(0), GR(0), C2, C3, t);
  EXPECT_THROW(chart_transition(q, Rank2Chart::M1, th), OutsideOverlap);
}

TEST(ChartTransition, ReduciblePointStaysReducible) {
  for (int k = 0; k < 6; ++k) {
    Theta th{gen::gauss(), gen::gauss(), GR(0)};
    th.theta_inf = reducible_theta(1, 1, 1, th) - GR(1);
    GR t = gen::nonzero_gauss(), b0 = gen::nonzero_gauss(), b1 = gen::nonzero_gauss();
    auto g = reducible_general(1, 1, 1, b0, b1, t, th);
    auto [p1, G1] = normalize_to_m1(g);
    auto [p2, G2] = normalize_to_m2(to_general(p1, th));
    ASSERT_TRUE(on_moduli(p2, th));
    // e2 spans the invariant line before; follow it through both gauges
    Matrix<RF> G = gauge_matrix(G1) * gauge_matrix(G2);
    Matrix<RF> Gi = inverse2(G);
    std::array<RF, 2> w{Gi(0, 1), Gi(1, 1)};
    EXPECT_TRUE(invariant_line(to_operator(p2, th).matrix, w));
    EXPECT_TRUE(invariant_line(general_to_operator(g).matrix, {RF(0), RF(1)}));
  }
}

TEST(Reducible, Eps111Formulas) {
  Theta th{GR::frac(1, 3), GR::frac(2, 5), GR(0)};
  th.theta_inf = reducible_theta(1, 1, 1, th) - GR(1);
  GR t(3);
  auto g = reducible_general(1, 1, 1, GR(1), GR(2), t, th);
  EXPECT_EQ(g.a[0], th.theta0 / GR(2));
  EXPECT_EQ(g.a[1], th.theta1 / GR(2) - th.theta0 / GR(2) - t / GR(2));
  EXPECT_EQ(g.a[2], t / GR(2));
  EXPECT_EQ(g.a[2] * g.a[2], t * t / GR(4));
  for (auto& r : general_residuals(g, th)) EXPECT_TRUE(r.is_zero());
  ReducibleParams rp{1, 1, 1, GR(1), GR(2), t};
  auto op = reducible_operator(rp, th);
  EXPECT_TRUE(op.matrix(0, 1).is_zero());
}

TEST(Reducible, UncorrectedCompatibilityFailsInfinityRelation) {
  Theta th{GR::frac(1, 3), GR::frac(2, 5), GR(0)};
  th.theta_inf = (th.theta1 - th.theta0) - GR(1);  // theta = theta1 - theta0
  EXPECT_THROW(reducible_general(1, 1, 1, GR(1), GR(2), GR(3), th), NoSuchReduciblePoint);
  // building the entries anyway leaves the last relation off by t/2
  GR t(3);
  GeneralOperatorT<GR> g;
  g.t = t;
  g.a = {th.theta0 / GR(2), th.theta1 / GR(2) - th.theta0 / GR(2) - t / GR(2), t / GR(2)};
  g.b = {GR(1), GR(2)};
  auto r = general_residuals(g, th);
  EXPECT_TRUE(r[0].is_zero());
  EXPECT_TRUE(r[1].is_zero());
  EXPECT_TRUE(r[2].is_zero());
  EXPECT_EQ(r[3], t / GR(2));
}

TEST(Reducible, AdmissibleTriplesAtMostEight) {
  for (int k = 0; k < 30; ++k) {
    Theta th = random_theta();
    EXPECT_LE(admissible_eps(th).size(), 8u);
  }
  Theta th{GR(0), GR(0), GR(0)};  // theta = 1 = eps2 for eps2 = 1
  EXPECT_EQ(admissible_eps(th).size(), 4u);
}

TEST(Reducible, RejectsBadInput) {
  Theta th{GR(1), GR(2), GR(0)};
  th.theta_inf = reducible_theta(1, 1, 1, th) - GR(1);
  EXPECT_THROW(reducible_general(1, 1, 1, GR(0), GR(0), GR(1), th), InvalidParameter);
  EXPECT_THROW(reducible_operator(ReducibleParams{2, 1, 1, GR(1), GR(1), GR(1)}, th), InvalidParameter);
}

TEST(Reducible, NormalizedIntoM1LiesOnCubic) {
  for (int k = 0; k < 20; ++k) {
    std::array<int, 3> e{gen::integer(0, 1) ? 1 : -1, gen::integer(0, 1) ? 1 : -1, gen::integer(0, 1) ? 1 : -1};
    Theta th{gen::gauss(), gen::gauss(), GR(0)};
    th.theta_inf = reducible_theta(e[0], e[1], e[2], th) - GR(1);
    auto g = reducible_general(e[0], e[1], e[2], gen::gauss(), gen::nonzero_gauss(), gen::nonzero_gauss(), th);
    auto p = normalize_to_m1(g).first;
    EXPECT_TRUE(chart_residuals(p, th)[0].is_zero());
  }
}

TEST(Parabolic, SingularPointEveryDirection) {
  Theta th{GR(0), GR::frac(3, 7), GR::frac(1, 2)};
  GR t(5);
  GR c1 = th.theta1 * th.theta1 / GR(4) - th.theta() * t / GR(2) + t * t / GR(4);
  ParabolicPoint pp{Rank2ChartPoint::m1(GR(0), GR(0), c1, t), {}, {}};
  for (int k = 0; k < 10; ++k) {
    pp.line0 = ProjPair<GR>{gen::gauss(), gen::nonzero_gauss()};
    EXPECT_TRUE(parabolic_lift_check(pp, th));
  }
}

TEST(Parabolic, DiagonalResidue) {
  for (int m : {1, 2, 3}) {
    Theta th{GR(m), GR::frac(1, 3), GR::frac(1, 2)};
    GR t(2);
    GR c1 = th.theta1 * th.theta1 / GR(4) - th.theta0 * th.theta0 / GR(4) + t * t / GR(4) - th.theta() * t / GR(2);
    ParabolicPoint pp{Rank2ChartPoint::m1(GR::frac(m, 2), GR(0), c1, t), {}, {}};
    ASSERT_TRUE(on_moduli(pp.base, th));
    auto R = residue_matrix(to_general(pp.base, th), 0);
    EXPECT_EQ(R, (Matrix<GR>{{GR::frac(-m, 2), GR(0)}, {GR(0), GR::frac(m, 2)}}));
    pp.line0 = ProjPair<GR>{GR(1), GR(0)};
    EXPECT_TRUE(parabolic_lift_check(pp, th));
    pp.line0 = ProjPair<GR>{GR(0), GR(1)};
    EXPECT_FALSE(parabolic_lift_check(pp, th));
  }
}

TEST(Parabolic, NonIntegerThetaRejected) {
  Theta th{GR::frac(1, 2), GR::frac(1, 3), GR(1)};
  ParabolicPoint pp{Rank2ChartPoint::m1(GR::frac(1, 4), GR(0), GR(1), GR(1)), ProjPair<GR>{GR(1), GR(0)}, {}};
  EXPECT_THROW(parabolic_lift_check(pp, th), UnexpectedParabolicData);
  pp.line0.reset();
  pp.line1 = ProjPair<GR>{GR(1), GR(0)};
  EXPECT_THROW(parabolic_lift_check(pp, th), UnexpectedParabolicData);
}

TEST(Rank2Properties, ResidueEigenvalues) {
  for (int k = 0; k < 25; ++k) {
    Theta th = random_theta();
    auto g = to_general(random_m1_point(th), th);
    auto R0 = residue_matrix(g, 0), R1 = residue_matrix(g, 1);
    auto det = [](const Matrix<GR>& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); };
    EXPECT_TRUE(R0.trace().is_zero());
    EXPECT_TRUE(R1.trace().is_zero());
    EXPECT_EQ(det(R0), -th.theta0 * th.theta0 / GR(4));
    EXPECT_EQ(det(R1), -th.theta1 * th.theta1 / GR(4));
  }
}

TEST(Rank2Properties, ExtractInvertsToOperator) {
  for (int k = 0; k < 25; ++k) {
    Theta th = random_theta();
    auto p = random_m1_point(th);
    auto q = extract_m1(to_operator(p, th), p.t);
    EXPECT_EQ(q.a0, p.a0);
    EXPECT_EQ(q.b0, p.b0);
    EXPECT_EQ(q.c1, p.c1);
  }
}

TEST(Rank2Properties, AllFourRelationsOnM1) {
  for (int k = 0; k < 25; ++k) {
    Theta th = random_theta();
    auto g = to_general(random_m1_point(th), th);
    for (auto& r : general_residuals(g, th)) EXPECT_TRUE(r.is_zero());
  }
}

TEST(Rank2Properties, NumericModeMirrorsExact) {
  for (int k = 0; k < 10; ++k) {
    Theta th = random_theta();
    auto p = random_m1_point(th);
    Rank2ChartPointT<cplx> pn = Rank2ChartPointT<cplx>::m1(p.a0.to_complex(), p.b0.to_complex(), p.c1.to_complex(),
                                                           p.t.to_complex());
    EXPECT_TRUE(on_moduli(pn, to_numeric(th), 1e-10));
    pn.c1 += cplx(1e-3, 0);
    EXPECT_FALSE(on_moduli(pn, to_numeric(th), 1e-10));
  }
}

TEST(Rank2Json, RoundTrip) {
  Theta th{GR(0), GR::frac(1, 3), GR::frac(-1, 2)};
  GR t(3);
  GR c1 = th.theta1 * th.theta1 / GR(4) - th.theta() * t / GR(2) + t * t / GR(4);
  ParabolicPoint pp{Rank2ChartPoint::m1(GR(0), GR(0), c1, t), ProjPair<GR>{GR(2), GaussianRational::i()}, {}};
  auto j = point_to_json(pp, th);
  EXPECT_EQ(j["chart"], "M1");
  auto [pp2, th2] = point_from_json(json::parse(j.dump()));
  EXPECT_EQ(th2.theta_inf, th.theta_inf);
  EXPECT_EQ(pp2.base.c1, c1);
  ASSERT_TRUE(pp2.line0.has_value());
  EXPECT_EQ(pp2.line0->y2, GaussianRational::i());
  EXPECT_FALSE(pp2.line1.has_value());
  EXPECT_THROW(point_from_json(json::parse(R"({"chart":"M3","theta":{"theta0":"0","theta1":"0","theta_inf":"0"}})")),
               ParseError);
}
