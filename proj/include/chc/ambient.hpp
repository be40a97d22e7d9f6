#pragma once

// The complex hyperbolic plane as a concrete Riemannian manifold on the unit
// ball of C^2. The metric comes from the Kahler potential -4*log(1-|z|^2),
// normalized so that holomorphic planes have sectional curvature -1 and
// totally real planes -1/4. Radial geodesics from the origin satisfy
// |z(t)| = tanh(t/2) at unit speed.

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "chc/ode.hpp"

namespace chc {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

inline constexpr double kChartEscape = 1.0 - 1e-6;

struct AmbientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point of the ball model, coordinates (Re z1, Im z1, Re z2, Im z2).
struct AmbientPoint {
  Vec4 x = Vec4::Zero();

  AmbientPoint() = default;
  explicit AmbientPoint(const Vec4& coords) : x(coords) {}
  AmbientPoint(std::complex<double> z1, std::complex<double> z2)
      : x(z1.real(), z1.imag(), z2.real(), z2.imag()) {}

  Vec2c z() const { return Vec2c(std::complex<double>(x[0], x[1]), std::complex<double>(x[2], x[3])); }
  double ball_radius_sq() const { return x.squaredNorm(); }
  bool inside_chart() const { return ball_radius_sq() < kChartEscape * kChartEscape; }
};

inline void require_inside(const AmbientPoint& p) {
  if (!p.inside_chart()) throw AmbientError("point outside ball chart");
}

struct Tangent {
  AmbientPoint at;
  Vec4 v = Vec4::Zero();

  Tangent() = default;
  Tangent(const AmbientPoint& p, const Vec4& comps) : at(p), v(comps) {}
};

struct GeodesicState {
  AmbientPoint point;
  Tangent velocity;
  double time = 0;
};

namespace detail {

// Complex basis vectors of the realification: d/dx1, d/dy1, d/dx2, d/dy2.
inline const std::array<Vec2c, 4>& complex_basis() {
  static const std::array<Vec2c, 4> basis = {
      Vec2c(1, 0), Vec2c(std::complex<double>(0, 1), 0),
      Vec2c(0, 1), Vec2c(0, std::complex<double>(0, 1))};
  return basis;
}

// Hermitian metric H(z) = 4[(1-s) I + z conj(z)^T] / (1-s)^2, s = |z|^2,
// paired as G(u,v) = Re(w_u^H H w_v) on the realification.
inline Mat2c hermitian_metric(const Vec2c& z) {
  const double s = z.squaredNorm();
  const double A = 1.0 - s;
  Mat2c H = A * Mat2c::Identity() + z * z.adjoint();
  return (4.0 / (A * A)) * H;
}

// dH/dz_k and dH/dzbar_k.
inline void hermitian_metric_derivs(const Vec2c& z, std::array<Mat2c, 2>& dHz,
                                    std::array<Mat2c, 2>& dHzb) {
  const double s = z.squaredNorm();
  const double A = 1.0 - s;
  const double A2 = 1.0 / (A * A), A3 = A2 / A;
  const Mat2c zzH = z * z.adjoint();
  for (int k = 0; k < 2; ++k) {
    Vec2c ek = Vec2c::Zero();
    ek[k] = 1.0;
    const std::complex<double> zbk = std::conj(z[k]);
    const std::complex<double> zk = z[k];
    dHz[k] = 4.0 * (zbk * A2 * Mat2c::Identity() + A2 * (ek * z.adjoint()) +
                    2.0 * zbk * A3 * zzH);
    dHzb[k] = 4.0 * (zk * A2 * Mat2c::Identity() + A2 * (z * ek.adjoint()) +
                     2.0 * zk * A3 * zzH);
  }
}

}  // namespace detail

// Real 4x4 metric G_ab = Re(w_a^H H w_b).
inline Mat4 metric_matrix(const AmbientPoint& p) {
  require_inside(p);
  const Mat2c H = detail::hermitian_metric(p.z());
  const auto& basis = detail::complex_basis();
  Mat4 G;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      G(a, b) = (basis[a].adjoint() * H * basis[b]).value().real();
  return G;
}

// dG_ab/dx_c for c = 0..3.
inline std::array<Mat4, 4> metric_matrix_derivs(const AmbientPoint& p) {
  require_inside(p);
  std::array<Mat2c, 2> dHz, dHzb;
  detail::hermitian_metric_derivs(p.z(), dHz, dHzb);
  const auto& basis = detail::complex_basis();
  const std::complex<double> I(0, 1);
  std::array<Mat4, 4> dG;
  for (int c = 0; c < 4; ++c) {
    const int k = c / 2;
    Mat2c dH = (c % 2 == 0) ? Mat2c(dHz[k] + dHzb[k]) : Mat2c(I * (dHz[k] - dHzb[k]));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        dG[c](a, b) = (basis[a].adjoint() * dH * basis[b]).value().real();
  }
  return dG;
}

inline double metric_eval(const AmbientPoint& p, const Tangent& u, const Tangent& v) {
  return u.v.dot(metric_matrix(p) * v.v);
}

inline double metric_eval(const Tangent& u, const Tangent& v) { return metric_eval(u.at, u, v); }

inline double norm(const Tangent& u) { return std::sqrt(metric_eval(u.at, u, u)); }

// Complex structure: multiplication by i in the chart.
inline Vec4 apply_J(const Vec4& v) { return Vec4(-v[1], v[0], -v[3], v[2]); }

inline Tangent apply_J(const AmbientPoint& p, const Tangent& u) {
  return Tangent(p, apply_J(u.v));
}

inline Tangent apply_J(const Tangent& u) { return Tangent(u.at, apply_J(u.v)); }

// Christoffel symbols Gamma[a](b,c), computed from the analytic metric derivatives.
inline std::array<Mat4, 4> christoffel(const AmbientPoint& p) {
  const Mat4 G = metric_matrix(p);
  const std::array<Mat4, 4> dG = metric_matrix_derivs(p);
  const Mat4 Ginv = G.inverse();
  std::array<Mat4, 4> Gamma;
  for (int a = 0; a < 4; ++a) Gamma[a].setZero();
  for (int b = 0; b < 4; ++b)
    for (int c = b; c < 4; ++c) {
      Vec4 lower;
      for (int d = 0; d < 4; ++d) lower[d] = 0.5 * (dG[b](d, c) + dG[c](d, b) - dG[d](b, c));
      const Vec4 up = Ginv * lower;
      for (int a = 0; a < 4; ++a) {
        Gamma[a](b, c) = up[a];
        Gamma[a](c, b) = up[a];
      }
    }
  return Gamma;
}

// Closed-form curvature tensor of constant holomorphic sectional curvature -1:
// R(X,Y)Z = -1/4 (<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY - 2<JX,Y>JZ).
inline Tangent curvature_closed_form(const AmbientPoint& p, const Tangent& X, const Tangent& Y,
                                     const Tangent& Z) {
  const Mat4 G = metric_matrix(p);
  const Vec4 JX = apply_J(X.v), JY = apply_J(Y.v), JZ = apply_J(Z.v);
  auto ip = [&](const Vec4& a, const Vec4& b) { return a.dot(G * b); };
  Vec4 R = ip(Y.v, Z.v) * X.v - ip(X.v, Z.v) * Y.v + ip(JY, Z.v) * JX - ip(JX, Z.v) * JY -
           2.0 * ip(JX, Y.v) * JZ;
  return Tangent(p, -0.25 * R);
}

// Cross-check oracle: curvature from finite-difference Christoffel derivatives,
// R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb} + Gamma Gamma terms.
inline Tangent curvature_numeric(const AmbientPoint& p, const Tangent& X, const Tangent& Y,
                                 const Tangent& Z, double h = 1e-4) {
  if (h < 1e-10) throw AmbientError("curvature_numeric: step underflow");
  std::array<std::array<Mat4, 4>, 4> dGamma;  // dGamma[c] = d/dx_c christoffel
  for (int c = 0; c < 4; ++c) {
    AmbientPoint pp = p, pm = p;
    pp.x[c] += h;
    pm.x[c] -= h;
    const auto Gp = christoffel(pp), Gm = christoffel(pm);
    for (int a = 0; a < 4; ++a) dGamma[c][a] = (Gp[a] - Gm[a]) / (2 * h);
  }
  const auto Gam = christoffel(p);
  Vec4 out = Vec4::Zero();
  for (int a = 0; a < 4; ++a) {
    double acc = 0;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double R = dGamma[c][a](d, b) - dGamma[d][a](c, b);
          for (int e = 0; e < 4; ++e)
            R += Gam[a](c, e) * Gam[e](d, b) - Gam[a](d, e) * Gam[e](c, b);
          acc += R * Z.v[b] * X.v[c] * Y.v[d];
        }
    out[a] = acc;
  }
  return Tangent(p, out);
}

namespace detail {

inline void chart_guard(const Eigen::VectorXd& y, double t) {
  const double r2 = y.head<4>().squaredNorm();
  if (r2 >= kChartEscape * kChartEscape)
    throw AmbientError("geodesic left the ball chart at t = " + std::to_string(t));
}

}  // namespace detail

// Geodesic flow: integrates x' = v, v'^a = -Gamma^a_{bc} v^b v^c, together with
// parallel transport of any extra vectors passed in.
inline Eigen::VectorXd geodesic_rhs(double /*t*/, const Eigen::VectorXd& y) {
  const int n_extra = static_cast<int>(y.size() - 8) / 4;
  AmbientPoint p(Vec4(y.head<4>()));
  const auto Gamma = christoffel(p);
  const Vec4 v = y.segment<4>(4);
  Eigen::VectorXd dy(y.size());
  dy.head<4>() = v;
  for (int a = 0; a < 4; ++a) dy[4 + a] = -v.dot(Gamma[a] * v);
  for (int j = 0; j < n_extra; ++j) {
    const Vec4 w = y.segment<4>(8 + 4 * j);
    for (int a = 0; a < 4; ++a) dy[8 + 4 * j + a] = -v.dot(Gamma[a] * w);
  }
  return dy;
}

struct TransportResult {
  GeodesicState end;
  std::vector<Tangent> vectors;
};

inline TransportResult transport_along_geodesic(const AmbientPoint& p, const Vec4& velocity,
                                                double t, const std::vector<Vec4>& extra,
                                                const OdeOptions& opt = {}) {
  require_inside(p);
  Eigen::VectorXd y(8 + 4 * extra.size());
  y.head<4>() = p.x;
  y.segment<4>(4) = velocity;
  for (size_t j = 0; j < extra.size(); ++j) y.segment<4>(8 + 4 * j) = extra[j];
  double max_t = 0;
  try {
    y = integrate_rk45(geodesic_rhs, y, 0.0, t, opt, [&](double tt, const Eigen::VectorXd& yy) {
      max_t = tt;
      detail::chart_guard(yy, tt);
    });
  } catch (const AmbientError&) {
    throw AmbientError("trajectory left ball chart; max attained t = " + std::to_string(max_t));
  }
  TransportResult res;
  res.end.point = AmbientPoint(Vec4(y.head<4>()));
  res.end.velocity = Tangent(res.end.point, y.segment<4>(4));
  res.end.time = t;
  res.vectors.reserve(extra.size());
  for (size_t j = 0; j < extra.size(); ++j)
    res.vectors.emplace_back(res.end.point, Vec4(y.segment<4>(8 + 4 * j)));
  return res;
}

inline GeodesicState exp_map(const AmbientPoint& p, const Tangent& v, double t,
                             const OdeOptions& opt = {}) {
  if (t == 0) return GeodesicState{p, Tangent(p, v.v), 0};
  return transport_along_geodesic(p, v.v, t, {}, opt).end;
}

inline Tangent parallel_transport(const AmbientPoint& p, const Tangent& velocity, double t,
                                  const Tangent& w, const OdeOptions& opt = {}) {
  if (t == 0) return w;
  return transport_along_geodesic(p, velocity.v, t, {w.v}, opt).vectors[0];
}

// Totally geodesic 2-charts: CH1 = {z2 = 0}, RH2 = {both coordinates real}.
enum class CoreKind { CH1, RH2 };

struct Chart2 {
  CoreKind kind;
  // map (u1, u2) into the chart
  AmbientPoint map(double u1, double u2) const {
    return kind == CoreKind::CH1 ? AmbientPoint(std::complex<double>(u1, u2), 0.0)
                                 : AmbientPoint(u1, u2);
  }
  // coordinate tangent basis of the chart at (u1, u2)
  std::array<Tangent, 2> tangent_basis(double u1, double u2) const {
    AmbientPoint p = map(u1, u2);
    if (kind == CoreKind::CH1)
      return {Tangent(p, Vec4(1, 0, 0, 0)), Tangent(p, Vec4(0, 1, 0, 0))};
    return {Tangent(p, Vec4(1, 0, 0, 0)), Tangent(p, Vec4(0, 0, 1, 0))};
  }
  // metric-orthonormal basis of the normal space at (u1, u2)
  std::array<Tangent, 2> normal_basis(double u1, double u2) const {
    AmbientPoint p = map(u1, u2);
    const Mat4 G = metric_matrix(p);
    std::array<Vec4, 2> raw;
    if (kind == CoreKind::CH1) {
      raw = {Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1)};
    } else {
      raw = {Vec4(0, 1, 0, 0), Vec4(0, 0, 0, 1)};
    }
    // Gram-Schmidt in the metric
    Vec4 n1 = raw[0] / std::sqrt(raw[0].dot(G * raw[0]));
    Vec4 n2 = raw[1] - (raw[1].dot(G * n1)) * n1;
    n2 /= std::sqrt(n2.dot(G * n2));
    return {Tangent(p, n1), Tangent(p, n2)};
  }
};

inline Chart2 totally_geodesic_chart(CoreKind kind) { return Chart2{kind}; }

}  // namespace chc
