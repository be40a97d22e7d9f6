#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chc/classifier.hpp"

using namespace chc;

namespace {

// frozen values of the lambda_3 = 0.2 family (evaluated from the closed forms)
constexpr double kL1 = -0.16904157598;
constexpr double kL2 = 0.76904157598;
constexpr double kB1sq = 0.21431141;
constexpr double kB2sq = 0.78568859;
constexpr double kX1 = 0.26650090;
constexpr double kR = 0.84729786;

}  // namespace

TEST_CASE("curvature triple differences sum to zero") {
  CurvatureTriple t(Vec3(0.3, -1.2, 0.45));
  CHECK(t.d().sum() == 0.0);
  CHECK(t.d()[0] == Catch::Approx(-1.65));
  CHECK_THROWS_AS(CurvatureTriple(Vec3(1, 1, 2)).require_distinct(), ClassifierError);
}

TEST_CASE("eq2 residual vanishes on family data and flags inconsistency") {
  // lambda_3 = 0 family
  CurvatureTriple t0(Vec3(-0.5, 0.5, 0.0));
  Vec3 b0(std::sqrt(0.5), std::sqrt(0.5), 0.0);
  Vec3 x0(0.25, -0.25, 0.0);
  CHECK(residual_eq2(t0, b0, x0).cwiseAbs().maxCoeff() < 1e-14);

  // deliberately inconsistent input
  CHECK(residual_eq2(t0, Vec3(1, 0, 0), Vec3::Zero()).cwiseAbs().maxCoeff() > 1.0);

  // lambda_3 = 0.2 family
  FamilyData f = family_data(0.2);
  Vec3 b(std::sqrt(f.bsq[0]), std::sqrt(f.bsq[1]), 0.0);
  CHECK(residual_eq2(CurvatureTriple(f.lambda), b, f.x).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(residual_eq2(CurvatureTriple(Vec3(1, 1, 0)), b0, x0), ClassifierError);
}

TEST_CASE("eq6 residual vanishes on family data and detects perturbations") {
  CurvatureTriple t0(Vec3(-0.5, 0.5, 0.0));
  Vec3 b0(std::sqrt(0.5), std::sqrt(0.5), 0.0);
  Vec3 x0(0.25, -0.25, 0.0);
  CHECK(residual_eq6(t0, b0, x0).cwiseAbs().maxCoeff() < 1e-12);

  FamilyData f = family_data(0.2);
  Vec3 b(std::sqrt(f.bsq[0]), std::sqrt(f.bsq[1]), 0.0);
  CHECK(residual_eq6(CurvatureTriple(f.lambda), b, f.x).cwiseAbs().maxCoeff() < 1e-10);

  Vec3 xp = x0 + Vec3(1e-3, 0, 0);
  CHECK(residual_eq6(t0, b0, xp).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("quadratic system: construction and y-form") {
  CurvatureTriple t(Vec3(-0.5, 0.5, 0.0));
  QuadraticSystem sys = build_system(t);

  // quadratic weight 8 d_i d_{i+1} d_{i+2}^{-2}
  const Vec3 d = t.d();
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    CHECK(sys.quad_weight[i] == Catch::Approx(8 * d[i] * d[i1] / (d[i2] * d[i2])));
  }

  // (1/4, -1/4, 0) is an exact root
  CHECK(sys.eval(Vec3(0.25, -0.25, 0.0)).cwiseAbs().maxCoeff() < 1e-13);

  // y-form consistency under x_i = -y_i + y_{i+1} + y_{i+2}
  Vec3 y(0.3, -0.7, 0.2);
  Vec3 x(-y[0] + y[1] + y[2], y[0] - y[1] + y[2], y[0] + y[1] - y[2]);
  for (int i = 0; i < 3; ++i)
    CHECK(x[i] + x[(i + 1) % 3] == Catch::Approx(2 * y[(i + 2) % 3]).margin(1e-15));
  CHECK((sys.eval_y(y) - sys.eval(x)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(build_system(CurvatureTriple(Vec3(0.5, 0.5, 0.0))), ClassifierError);
}

TEST_CASE("solve_system finds the family root, deterministically, at most 8 roots") {
  {
    QuadraticSystem sys = build_system(CurvatureTriple(Vec3(-0.5, 0.5, 0.0)));
    SolutionSet set = solve_system(sys);
    CHECK(set.roots.size() <= 8);
    bool found = false;
    for (const auto& r : set.roots) {
      CHECK(sys.eval(r.x).cwiseAbs().maxCoeff() < 1e-9);
      // the family root is tangential (double) here, so Newton pins its
      // position only to ~sqrt(machine eps) despite the tiny residual
      if ((r.x - Vec3(0.25, -0.25, 0.0)).norm() < 1e-6) found = true;
    }
    CHECK(found);

    SolveOptions other;
    other.seed = 987654321;
    SolutionSet set2 = solve_system(sys, other);
    REQUIRE(set2.roots.size() == set.roots.size());
    for (size_t i = 0; i < set.roots.size(); ++i)
      CHECK((set.roots[i].x - set2.roots[i].x).norm() < 1e-5);
  }
  {
    FamilyData f = family_data(0.2);
    QuadraticSystem sys = build_system(CurvatureTriple(f.lambda));
    SolutionSet set = solve_system(sys);
    bool found = false;
    for (const auto& r : set.roots)
      if ((r.x - Vec3(kX1, -kX1, 0.2)).norm() < 1e-7) found = true;
    CHECK(found);
  }
}

TEST_CASE("lambda relations") {
  auto [a, b] = lambda_relations(0.0);
  CHECK(a == Catch::Approx(-0.5));
  CHECK(b == Catch::Approx(0.5));

  auto [c, d] = lambda_relations(0.2);
  CHECK(c == Catch::Approx(kL1).margin(1e-9));
  CHECK(d == Catch::Approx(kL2).margin(1e-9));

  // discriminant zero: both coincide (flagged by equality)
  auto [e, f] = lambda_relations(1 / std::sqrt(3.0));
  CHECK(e == Catch::Approx(f).margin(1e-7));

  CHECK_THROWS_AS(lambda_relations(0.99), ClassifierError);
}

TEST_CASE("branch solutions satisfy both constraints") {
  auto sols = branch_solutions(0.2);
  REQUIRE(sols.size() == 4);
  bool seen_first = false, seen_second = false;
  for (const auto& s : sols) {
    CHECK(std::abs(s.residual_quadric) < 1e-12);
    CHECK(std::abs(s.residual_cubic) < 1e-12);
    if (std::abs(std::abs(s.x) - 0.9380832) < 1e-6 && std::abs(s.y + 0.2) < 1e-6)
      seen_first = true;
    if (std::abs(std::abs(s.x) - 1.25) < 1e-12 && std::abs(s.y - 0.85) < 1e-12)
      seen_second = true;
  }
  CHECK(seen_first);
  CHECK(seen_second);

  auto sols0 = branch_solutions(0.0);
  REQUIRE(sols0.size() == 2);  // the 1/(4*lambda3) pair does not exist
  CHECK(std::abs(std::abs(sols0[0].x) - 1.0) < 1e-14);
  CHECK(std::abs(sols0[0].y) < 1e-14);
}

TEST_CASE("ellipse exclusion certifies |lambda3| < 1/2") {
  CHECK(ellipse_exclusion(0.55));
  CHECK(ellipse_exclusion(0.51));
  for (int k = 0; k < 50; ++k) {
    const double l3 = 0.5001 + (0.5772 - 0.5001) * k / 49.0;
    CHECK(ellipse_exclusion(l3));
  }
  CHECK_THROWS_AS(ellipse_exclusion(0.3), ClassifierError);
  CHECK_THROWS_AS(ellipse_exclusion(0.7), ClassifierError);
}

TEST_CASE("b_from_lambda: values, mirror, domain") {
  auto [b1, b2] = b_from_lambda(0.0);
  CHECK(b1 == Catch::Approx(0.5).margin(1e-14));
  CHECK(b2 == Catch::Approx(0.5).margin(1e-14));

  auto [c1, c2] = b_from_lambda(0.2);
  CHECK(c1 == Catch::Approx(kB1sq).margin(1e-7));
  CHECK(c2 == Catch::Approx(kB2sq).margin(1e-7));
  CHECK(c1 + c2 == Catch::Approx(1.0).margin(1e-12));

  auto [m1, m2] = b_from_lambda(-0.2);
  CHECK(m1 + m2 == Catch::Approx(1.0).margin(1e-12));
  CHECK(m1 == Catch::Approx(c2).margin(1e-9));  // mirror symmetry

  CHECK_THROWS_AS(b_from_lambda(0.6), ClassifierError);
}

TEST_CASE("proposition-5 grid relations") {
  for (int k = 0; k <= 100; ++k) {
    const double l3 = -0.499 + 0.998 * k / 100.0;
    auto [l1, l2] = lambda_relations(l3);
    const double diffsq = (l1 - l2) * (l1 - l2) - std::pow(l1 + l2 - 4 * l3, 2);
    CHECK(diffsq == Catch::Approx(1 - 4 * l3 * l3).margin(1e-12));

    auto [b1sq, b2sq] = b_from_lambda(l3);
    CHECK(b1sq > 0.0);
    CHECK(b1sq < 1.0);
    CHECK(b1sq + b2sq == Catch::Approx(1.0).margin(1e-12));

    const double d1 = l2 - l3, d2 = l3 - l1;
    CHECK(b2sq / d1 - b1sq / d2 == Catch::Approx(4 * l3).margin(1e-11));
    CHECK(2 * d1 * l1 - 2 * d2 * l2 + 6 * (d2 - d1) * l3 + 1 ==
          Catch::Approx(0.0).margin(1e-12));

    auto rep = residual_report(Vec3(l1, l2, l3), Vec3(b1sq, b2sq, 0.0));
    // near the endpoints the 1/d_i factors amplify rounding slightly
    CHECK(detail::max_abs(rep) < 1e-9);
  }
}

TEST_CASE("residual report keys") {
  FamilyData f = family_data(0.2);
  auto rep = residual_report(f.lambda, f.bsq);
  for (const char* key : {"eq2_1", "eq2_2", "eq2_3", "eq6_1", "eq6_2", "eq6_3", "eq7_1",
                          "eq7_2", "eq7_3", "lin_rel", "diffsq_rel", "cubic_rel", "eq10_b1",
                          "eq10_b2"})
    CHECK(rep.count(key) == 1);
  CHECK(detail::max_abs(rep) < 1e-10);

  // off-family data produces visible residuals
  auto bad = residual_report(Vec3(0.1, 0.5, 0.3), Vec3(0.5, 0.5, 0.0));
  CHECK(detail::max_abs(bad) > 1e-2);
}

TEST_CASE("classification of analytic family data") {
  auto r1 = classify(Vec3(1.0819766, 1.0819766, 1.3130353), Vec3(0, 0, 1));
  CHECK(r1.family == Family::GeodesicSphere);
  REQUIRE(r1.radius.has_value());
  CHECK(*r1.radius == Catch::Approx(1.0).margin(1e-5));

  auto r2 = classify(Vec3(0.5, 0.5, 1.0), Vec3(0, 0, 1));
  CHECK(r2.family == Family::Horosphere);

  auto r3 = classify(Vec3(0.2310586, 0.2310586, 1.3130353), Vec3(0, 0, 1));
  CHECK(r3.family == Family::TubeCH1);
  CHECK(*r3.radius == Catch::Approx(1.0).margin(1e-5));

  auto r4 = classify(Vec3(0.2310586, 0.7615942, 1.0819766), Vec3(0, 1, 0));
  CHECK(r4.family == Family::TubeRH2);
  CHECK(*r4.radius == Catch::Approx(1.0).margin(1e-5));

  const double rc = std::log(2 + std::sqrt(3.0));
  auto r5 = classify(Vec3(std::sqrt(3.0) / 2, std::sqrt(3.0) / 2, 0.5 / std::sqrt(3.0)),
                     Vec3(1, 0, 0));
  CHECK(r5.family == Family::TubeRH2);
  CHECK(*r5.radius == Catch::Approx(rc).margin(1e-3));

  auto r6 = classify(Vec3(-0.5, 0.0, 0.5), Vec3(std::sqrt(0.5), 0.0, -std::sqrt(0.5)));
  CHECK(r6.family == Family::RuledW3);

  auto r7 = classify(Vec3(kL1, kL2, 0.2), Vec3(std::sqrt(kB1sq), std::sqrt(kB2sq), 0.0));
  CHECK(r7.family == Family::WEquidistant);
  REQUIRE(r7.radius.has_value());
  CHECK(*r7.radius == Catch::Approx(kR).margin(1e-6));

  auto r8 = classify(Vec3(0.1, 0.4, 0.9), Vec3(0.5, 0.5, std::sqrt(0.5)));
  CHECK(r8.family == Family::Unclassified);
  CHECK_FALSE(r8.radius.has_value());

  // umbilical negative control
  auto r9 = classify(Vec3(0.7, 0.7, 0.7), Vec3(0, 0, 1));
  CHECK(r9.family == Family::Unclassified);
}

TEST_CASE("lemma contractions on measured patches") {
  HypersurfacePatch w3 = ruled_W3();
  CHECK(check_lemma_contractions(w3, w3.center()) < 1e-3);
  CHECK(check_lemma_contractions(w3, Vec3(0.15, 0.1, -0.2)) < 1e-3);

  HypersurfacePatch tu = tube(CoreKind::RH2, 1.0);
  CHECK(check_lemma_contractions(tu, tu.center()) < 1e-3);

  // mismatched lambda labels: residual blows past 1e-1
  ShapeOperatorResult so = shape_operator(w3, w3.center());
  Vec3 swapped(so.data.lambdas[2], so.data.lambdas[1], so.data.lambdas[0]);
  CHECK(check_lemma_contractions(w3, w3.center(), 1e-3, swapped) > 1e-1);

  HypersurfacePatch sp = geodesic_sphere(1.0);
  CHECK_THROWS_AS(check_lemma_contractions(sp, sp.center()), NotApplicableError);
}

TEST_CASE("eq1 frame residual on measured patches") {
  for (const HypersurfacePatch& patch :
       {ruled_W3(), geodesic_sphere(1.0), tube(CoreKind::RH2, 1.0)}) {
    ShapeOperatorResult so = shape_operator(patch, patch.center());
    CHECK(residual_eq1(so.data) < 1e-6);
  }
}
