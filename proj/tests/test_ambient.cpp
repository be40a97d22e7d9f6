#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "chc/ambient.hpp"

using namespace chc;

namespace {

std::mt19937 rng(20240817);

AmbientPoint random_point(double rmax = 0.6) {
  std::uniform_real_distribution<double> u(-1, 1);
  Vec4 x;
  do {
    x = Vec4(u(rng), u(rng), u(rng), u(rng));
  } while (x.norm() >= rmax);
  return AmbientPoint(x);
}

Tangent random_tangent(const AmbientPoint& p) {
  std::uniform_real_distribution<double> u(-1, 1);
  return Tangent(p, Vec4(u(rng), u(rng), u(rng), u(rng)));
}

Tangent unit(const Tangent& t) { return Tangent(t.at, t.v / norm(t)); }

// independent oracle: G_11 = 1/4 (K_xx + K_yy) of the potential K = -4 log(1-|z|^2)
double potential(const Vec4& x) { return -4.0 * std::log(1.0 - x.squaredNorm()); }

double fd_metric_entry(const AmbientPoint& p, int a) {
  const double h = 1e-4;
  const int re = 2 * (a / 2), im = re + 1;
  auto shift = [&](int c, double d) {
    Vec4 x = p.x;
    x[c] += d;
    return potential(x);
  };
  double kxx = (shift(re, h) - 2 * potential(p.x) + shift(re, -h)) / (h * h);
  double kyy = (shift(im, h) - 2 * potential(p.x) + shift(im, -h)) / (h * h);
  return 0.25 * (kxx + kyy);
}

double sectional(const AmbientPoint& p, const Tangent& X, const Tangent& Y) {
  const Tangent R = curvature_closed_form(p, X, Y, Y);
  const double num = metric_eval(p, R, X);
  const double den = metric_eval(p, X, X) * metric_eval(p, Y, Y) -
                     metric_eval(p, X, Y) * metric_eval(p, X, Y);
  return num / den;
}

}  // namespace

TEST_CASE("metric at the origin is 4*Id") {
  AmbientPoint o;
  Tangent e1(o, Vec4(1, 0, 0, 0)), e2(o, Vec4(0, 1, 0, 0));
  CHECK(metric_eval(o, e1, e1) == Catch::Approx(4.0).margin(1e-14));
  CHECK(metric_eval(o, e1, e2) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("metric matches the finite-difference potential oracle") {
  AmbientPoint p(0.3, 0.0);
  Tangent e1(p, Vec4(1, 0, 0, 0));
  CHECK(metric_eval(p, e1, e1) == Catch::Approx(fd_metric_entry(p, 0)).margin(1e-5));
  for (int i = 0; i < 5; ++i) {
    AmbientPoint q = random_point();
    const Mat4 G = metric_matrix(q);
    // diagonal pair sums: G_xx + G_yy = K_xx/2 + ... only the complex-Hessian
    // combination is chart-invariant, compare G(e_re,e_re)+G(e_im,e_im) = 2 * g_kk
    for (int a = 0; a < 2; ++a) {
      double sum = G(2 * a, 2 * a) + G(2 * a + 1, 2 * a + 1);
      CHECK(sum == Catch::Approx(2.0 * fd_metric_entry(q, 2 * a)).margin(1e-4));
    }
  }
}

TEST_CASE("metric is positive definite and J-invariant at random points") {
  for (int i = 0; i < 20; ++i) {
    AmbientPoint p = random_point();
    const Mat4 G = metric_matrix(p);
    Eigen::SelfAdjointEigenSolver<Mat4> es(G);
    CHECK(es.eigenvalues().minCoeff() > 0);
    Tangent u = random_tangent(p), v = random_tangent(p);
    CHECK(metric_eval(p, apply_J(u), apply_J(v)) == Catch::Approx(metric_eval(p, u, v)).margin(1e-12));
    CHECK(metric_eval(p, apply_J(u), v) == Catch::Approx(-metric_eval(p, u, apply_J(v))).margin(1e-12));
  }
}

TEST_CASE("metric rejects points outside the ball") {
  AmbientPoint p(0.8, 0.7);
  Tangent u(p, Vec4(1, 0, 0, 0));
  CHECK_THROWS_AS(metric_eval(p, u, u), AmbientError);
}

TEST_CASE("J squares to minus the identity") {
  AmbientPoint p = random_point();
  Tangent u = random_tangent(p);
  CHECK((apply_J(apply_J(u)).v + u.v).norm() == Catch::Approx(0.0).margin(1e-15));
  CHECK(apply_J(Tangent(p, Vec4(1, 0, 0, 0))).v == Vec4(0, 1, 0, 0));
}

TEST_CASE("curvature closed form: antisymmetry and sectional values") {
  AmbientPoint p = random_point();
  Tangent X = random_tangent(p);
  Tangent RXX = curvature_closed_form(p, X, X, random_tangent(p));
  CHECK(RXX.v.norm() == Catch::Approx(0.0).margin(1e-14));

  // holomorphic plane: -1
  Tangent U = unit(X);
  CHECK(sectional(p, U, apply_J(U)) == Catch::Approx(-1.0).margin(1e-9));

  // totally real plane: -1/4. Build Y orthogonal to U and JU.
  const Mat4 G = metric_matrix(p);
  Vec4 y = random_tangent(p).v;
  auto proj = [&](const Vec4& w, const Vec4& dir) { return w - (w.dot(G * dir)) * dir; };
  y = proj(proj(y, U.v), apply_J(U.v));
  Tangent Y = unit(Tangent(p, y));
  CHECK(sectional(p, U, Y) == Catch::Approx(-0.25).margin(1e-9));
}

TEST_CASE("curvature pair symmetry R_XYZW = R_ZWXY") {
  for (int i = 0; i < 10; ++i) {
    AmbientPoint p = random_point();
    Tangent X = random_tangent(p), Y = random_tangent(p), Z = random_tangent(p),
            W = random_tangent(p);
    double lhs = metric_eval(p, curvature_closed_form(p, X, Y, Z), W);
    double rhs = metric_eval(p, curvature_closed_form(p, Z, W, X), Y);
    CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("curvature numeric agrees with closed form") {
  for (int i = 0; i < 10; ++i) {
    AmbientPoint p = random_point();
    Tangent X = unit(random_tangent(p)), Y = unit(random_tangent(p)), Z = unit(random_tangent(p));
    Tangent num = curvature_numeric(p, X, Y, Z);
    Tangent cf = curvature_closed_form(p, X, Y, Z);
    CHECK((num.v - cf.v).cwiseAbs().maxCoeff() < 1e-6);
  }
  AmbientPoint p = random_point();
  Tangent X = unit(random_tangent(p));
  CHECK(curvature_numeric(p, X, X, X).v.norm() < 1e-6);
  CHECK_THROWS_AS(curvature_numeric(p, X, X, X, 1e-12), AmbientError);
}

TEST_CASE("exp_map: identity at t=0 and radial distance law") {
  AmbientPoint o;
  Tangent v(o, Vec4(0.5, 0, 0, 0));  // unit speed: |e1| = 2
  CHECK(exp_map(o, v, 0).point.x == o.x);

  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    GeodesicState g = exp_map(o, v, t);
    CHECK(g.point.x.norm() == Catch::Approx(std::tanh(t / 2)).margin(1e-8));
    CHECK(norm(g.velocity) == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("exp_map: constant speed for generic geodesics") {
  AmbientPoint p = random_point(0.3);
  Tangent v = unit(random_tangent(p));
  for (double t : {1.0, 2.0, 3.0}) {
    GeodesicState g = exp_map(p, v, t);
    CHECK(norm(g.velocity) == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("exp_map: chart escape raises a domain error") {
  AmbientPoint o;
  Tangent v(o, Vec4(0.5, 0, 0, 0));
  CHECK_THROWS_AS(exp_map(o, v, 50.0), AmbientError);
}

TEST_CASE("parallel transport preserves inner products and commutes with J") {
  AmbientPoint p = random_point(0.3);
  Tangent dir = unit(random_tangent(p));
  Tangent u = random_tangent(p), w = random_tangent(p);

  CHECK(parallel_transport(p, dir, 0.0, u).v == u.v);

  const double t = 1.7;
  auto res = transport_along_geodesic(p, dir.v, t, {u.v, w.v, apply_J(u).v});
  const Tangent &Bu = res.vectors[0], &Bw = res.vectors[1], &BJu = res.vectors[2];
  CHECK(metric_eval(Bu, Bw) == Catch::Approx(metric_eval(p, u, w)).margin(1e-9));
  CHECK((apply_J(Bu).v - BJu.v).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("totally geodesic charts") {
  Chart2 ch1 = totally_geodesic_chart(CoreKind::CH1);
  Chart2 rh2 = totally_geodesic_chart(CoreKind::RH2);

  // CH1 is J-invariant, RH2 totally real
  auto tb = ch1.tangent_basis(0.2, -0.1);
  AmbientPoint p = ch1.map(0.2, -0.1);
  Vec4 jt = apply_J(tb[0]).v;
  CHECK(std::abs(jt[2]) + std::abs(jt[3]) == Catch::Approx(0.0).margin(1e-15));

  auto tb2 = rh2.tangent_basis(0.2, 0.3);
  AmbientPoint q = rh2.map(0.2, 0.3);
  CHECK(std::abs(metric_eval(q, apply_J(tb2[0]), tb2[1])) < 1e-12);
  CHECK(std::abs(metric_eval(q, apply_J(tb2[0]), tb2[0])) < 1e-12);

  // geodesics started tangent to the chart stay on it
  {
    Tangent v(p, Vec4(0.3, -0.4, 0, 0));
    GeodesicState g = exp_map(p, Tangent(p, v.v / norm(v)), 2.0);
    CHECK(std::abs(g.point.x[2]) + std::abs(g.point.x[3]) < 1e-8);
  }
  {
    Tangent v(q, Vec4(0.3, 0, -0.4, 0));
    GeodesicState g = exp_map(q, Tangent(q, v.v / norm(v)), 2.0);
    CHECK(std::abs(g.point.x[1]) + std::abs(g.point.x[3]) < 1e-8);
  }

  // normal bases are orthonormal and orthogonal to the chart
  auto nb = rh2.normal_basis(0.2, 0.3);
  CHECK(metric_eval(q, nb[0], nb[0]) == Catch::Approx(1.0).margin(1e-12));
  CHECK(metric_eval(q, nb[0], nb[1]) == Catch::Approx(0.0).margin(1e-12));
  CHECK(std::abs(metric_eval(q, nb[0], tb2[0])) < 1e-12);
}
