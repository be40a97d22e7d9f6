#pragma once

// Jacobi fields along unit-speed normal geodesics, the displacement map
// Phi^r(p) = exp_p(r xi_p), the 2x2 matrices D(t) and C(r) = -D'(r) D(r)^{-1},
// and shape operators of displaced hypersurfaces.

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "chc/classifier.hpp"
#include "chc/hypersurfaces.hpp"
#include "chc/ode.hpp"

namespace chc {

struct JacobiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FocalPointError : JacobiError {
  Vec3 u;
  FocalPointError(const std::string& msg, const Vec3& uu) : JacobiError(msg), u(uu) {}
};

// ---------------------------------------------------------------------------
// Scalar profiles f_i, g_i and their t-derivatives

inline double f_profile(double lambda, double t) {
  return std::cosh(t / 2) - 2 * lambda * std::sinh(t / 2);
}

inline double f_profile_prime(double lambda, double t) {
  return 0.5 * std::sinh(t / 2) - lambda * std::cosh(t / 2);
}

inline double g_profile(double lambda, double t) {
  return (std::cosh(t / 2) - 1) * (1 + 2 * std::cosh(t / 2) - 2 * lambda * std::sinh(t / 2));
}

inline double g_profile_prime(double lambda, double t) {
  const double c = std::cosh(t / 2), s = std::sinh(t / 2);
  return 0.5 * s * (1 + 2 * c - 2 * lambda * s) + (c - 1) * (s - lambda * c);
}

// ---------------------------------------------------------------------------
// Jacobi fields: 4 zeta'' - zeta - 3 <zeta, J cdot> J cdot = 0 along c(t),
// zeta(0) = v, zeta'(0) = -S_p v.

struct JacobiInput {
  Tangent v;   // initial value zeta(0)
  Tangent sv;  // S_p v, giving zeta'(0) = -S_p v
  Tangent xi;  // unit normal = initial geodesic velocity c'(0)

  void validate() const {
    if ((v.at.x - xi.at.x).norm() > 1e-12 || (sv.at.x - xi.at.x).norm() > 1e-12)
      throw JacobiError("JacobiInput: v, sv and xi must share a base point");
  }
};

struct JacobiValue {
  Tangent zeta;
  Tangent zeta_prime;
  GeodesicState geodesic;  // c(t), c'(t)
};

// Solves the ODE in a parallel orthonormal frame {c', Jc', E2, E3}, where the
// coefficient system is linear with constant coefficients, then transports the
// frame to c(t).
inline JacobiValue jacobi_integrate(const JacobiInput& input, double t,
                                    const OdeOptions& opt = {}) {
  input.validate();
  const AmbientPoint p = input.xi.at;
  const Mat4 G = metric_matrix(p);
  const Vec4 xi = input.xi.v / norm(input.xi);

  // orthonormal frame at p: e0 = xi, e1 = J xi, e2/e3 by Gram-Schmidt
  std::array<Vec4, 4> frame = {xi, apply_J(xi), Vec4::Zero(), Vec4::Zero()};
  int have = 2;
  for (int c = 0; c < 4 && have < 4; ++c) {
    Vec4 w = Vec4::Unit(c);
    for (int k = 0; k < have; ++k) w -= w.dot(G * frame[k]) * frame[k];
    const double n = std::sqrt(w.dot(G * w));
    if (n > 1e-6) frame[have++] = w / n;
  }
  if (have < 4) throw JacobiError("jacobi_integrate: frame construction failed");

  // coefficients of v, sv in the frame
  Eigen::Vector4d a0, ap0;
  for (int k = 0; k < 4; ++k) {
    a0[k] = input.v.v.dot(G * frame[k]);
    ap0[k] = -input.sv.v.dot(G * frame[k]);
  }

  // 4 a_k'' = a_k + 3 a_1 delta_{k1}  (J c' is the k = 1 parallel direction)
  Eigen::VectorXd y(8);
  y.head<4>() = a0;
  y.tail<4>() = ap0;
  y = integrate_rk45(
      [](double, const Eigen::VectorXd& s) {
        Eigen::VectorXd ds(8);
        ds.head<4>() = s.tail<4>();
        for (int k = 0; k < 4; ++k) ds[4 + k] = 0.25 * s[k];
        ds[5] += 0.75 * s[1];
        return ds;
      },
      y, 0.0, t, opt);

  // transport the frame (unit-speed geodesic along xi)
  TransportResult tr = transport_along_geodesic(p, xi, t, {frame[1], frame[2], frame[3]}, opt);
  std::array<Vec4, 4> frame_t = {tr.end.velocity.v, tr.vectors[0].v, tr.vectors[1].v,
                                 tr.vectors[2].v};
  JacobiValue out;
  Vec4 z = Vec4::Zero(), zp = Vec4::Zero();
  for (int k = 0; k < 4; ++k) {
    z += y[k] * frame_t[k];
    zp += y[4 + k] * frame_t[k];
  }
  out.zeta = Tangent(tr.end.point, z);
  out.zeta_prime = Tangent(tr.end.point, zp);
  out.geodesic = tr.end;
  return out;
}

// closed form for a principal vector v with S v = lambda v:
// zeta(t) = f(t) B_v(t) + <v, J xi> g(t) J c'(t)
inline Tangent jacobi_closed_form(const JacobiInput& input, double lambda, double t,
                                  const OdeOptions& opt = {}) {
  input.validate();
  const AmbientPoint p = input.xi.at;
  const Mat4 G = metric_matrix(p);
  const Vec4 xi = input.xi.v / norm(input.xi);
  const double bv = input.v.v.dot(G * apply_J(xi));
  TransportResult tr = transport_along_geodesic(p, xi, t, {input.v.v}, opt);
  const Vec4 Jc = apply_J(tr.end.velocity).v;
  return Tangent(tr.end.point,
                 f_profile(lambda, t) * tr.vectors[0].v + bv * g_profile(lambda, t) * Jc);
}

// shape-operator image of Phi^r_* v on the displaced hypersurface: -zeta'(r)
inline Tangent displaced_shape(const JacobiInput& input, double r, const OdeOptions& opt = {}) {
  JacobiValue jv = jacobi_integrate(input, r, opt);
  return Tangent(jv.zeta_prime.at, -jv.zeta_prime.v);
}

// ---------------------------------------------------------------------------
// The 2x2 displacement matrices

struct DisplacementFrame {
  double r = 0;
  Vec3 lambda;
  Vec3 b;

  void validate() const {
    if (std::abs(b.squaredNorm() - 1) > 1e-12)
      throw JacobiError("DisplacementFrame: b is not a unit vector");
  }
};

// Proposition-5 family frame: 2 lambda_3 = tanh(r/2), the lambda-relations and
// the closed-form b^2 (positive square roots, b_3 = 0).
inline DisplacementFrame family_frame(double lambda3) {
  FamilyData f = family_data(lambda3);
  DisplacementFrame fr;
  fr.r = f.r;
  fr.lambda = f.lambda;
  fr.b = Vec3(std::sqrt(f.bsq[0]), std::sqrt(f.bsq[1]), 0.0);
  fr.validate();
  return fr;
}

struct DisplacementMatrices {
  Eigen::Matrix2d D;
  Eigen::Matrix2d Dprime;
  Eigen::Matrix2d C;
};

inline DisplacementMatrices build_D(const DisplacementFrame& frame, double t) {
  frame.validate();
  if (std::abs(frame.b[2]) > 1e-10)
    throw JacobiError("build_D: requires the b_3 = 0 convention");
  if (frame.lambda[0] == frame.lambda[1])
    throw JacobiError("build_D: lambda_1 = lambda_2");
  const double b1 = frame.b[0], b2 = frame.b[1];
  const double f1 = f_profile(frame.lambda[0], t), f2 = f_profile(frame.lambda[1], t);
  const double g1 = g_profile(frame.lambda[0], t), g2 = g_profile(frame.lambda[1], t);
  DisplacementMatrices m;
  m.D << f1 + b1 * b1 * g1, b1 * b2 * g1, b1 * b2 * g2, f2 + b2 * b2 * g2;
  const double fp1 = f_profile_prime(frame.lambda[0], t), fp2 = f_profile_prime(frame.lambda[1], t);
  const double gp1 = g_profile_prime(frame.lambda[0], t), gp2 = g_profile_prime(frame.lambda[1], t);
  m.Dprime << fp1 + b1 * b1 * gp1, b1 * b2 * gp1, b1 * b2 * gp2, fp2 + b2 * b2 * gp2;
  if (std::abs(m.D.determinant()) < 1e-12) throw JacobiError("build_D: singular D(t)");
  m.C = -m.Dprime * m.D.inverse();
  return m;
}

// Residuals of the displacement identities at t = r for a family frame.
struct DCReport {
  double det_D;        // det D(r) - sech^3(r/2)
  double det_Dprime;   // det D'(r) + sech^3(r/2)/4
  double det_D_deriv;  // (det D)'(r)
  double det_C;        // det C(r) + 1/4
  double tr_C;         // tr C(r)
  double eig_C;        // max deviation of the eigenvalues of C(r) from -1/2, +1/2

  double max_abs() const {
    double worst = 0;
    for (double v : {det_D, det_Dprime, det_D_deriv, det_C, tr_C, eig_C})
      worst = std::max(worst, std::abs(v));
    return worst;
  }
};

inline DCReport verify_DC_identities(const DisplacementFrame& frame) {
  frame.validate();
  const double r = frame.r;
  if (std::abs(2 * frame.lambda[2] - std::tanh(r / 2)) > 1e-10)
    throw JacobiError("verify_DC_identities: frame violates 2 lambda_3 = tanh(r/2)");
  {
    auto [l1, l2] = lambda_relations(frame.lambda[2]);
    if (std::abs(frame.lambda[0] - l1) > 1e-10 || std::abs(frame.lambda[1] - l2) > 1e-10)
      throw JacobiError("verify_DC_identities: lambda_1, lambda_2 violate the relations");
  }
  DisplacementMatrices m = build_D(frame, r);
  const double sech3 = std::pow(1.0 / std::cosh(r / 2), 3);
  DCReport rep;
  rep.det_D = m.D.determinant() - sech3;
  rep.det_Dprime = m.Dprime.determinant() + sech3 / 4;
  rep.det_D_deriv = m.Dprime(0, 0) * m.D(1, 1) + m.D(0, 0) * m.Dprime(1, 1) -
                    m.Dprime(0, 1) * m.D(1, 0) - m.D(0, 1) * m.Dprime(1, 0);
  rep.det_C = m.C.determinant() + 0.25;
  rep.tr_C = m.C.trace();
  const Eigen::Vector2cd ev = m.C.eigenvalues();
  double e0 = ev[0].real(), e1 = ev[1].real();
  if (e0 > e1) std::swap(e0, e1);
  rep.eig_C = std::max({std::abs(e0 + 0.5), std::abs(e1 - 0.5), std::abs(ev[0].imag()),
                        std::abs(ev[1].imag())});
  return rep;
}

// ---------------------------------------------------------------------------
// Displacement of a whole patch: q(u) = exp_{F(u)}(r xi(u)), oriented by the
// transported geodesic velocity eta^r = c'(r).

inline HypersurfacePatch displace_patch(const HypersurfacePatch& patch, double r,
                                        const OdeOptions& opt = {}) {
  if (r == 0) return patch;
  HypersurfacePatch q = patch;
  std::ostringstream name;
  name << patch.name << "+displaced(" << r << ")";
  q.name = name.str();
  q.flip_sign = false;
  q.immersion = [patch, r, opt](const Vec3& u) {
    const Tangent xi = unit_normal(patch, u);
    return exp_map(xi.at, xi, r, opt).point;
  };
  q.normal = [patch, r, opt](const Vec3& u) {
    const Tangent xi = unit_normal(patch, u);
    return exp_map(xi.at, xi, r, opt).velocity;
  };
  for (const Vec3& u : patch.grid_nodes()) {
    const double sv = min_singular_value(q, u);
    if (sv < 1e-6) {
      std::ostringstream msg;
      msg << q.name << ": focal point at u = (" << u.transpose() << "), min singular value "
          << sv;
      throw FocalPointError(msg.str(), u);
    }
  }
  return q;
}

}  // namespace chc
