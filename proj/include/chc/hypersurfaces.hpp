#pragma once

// Model hypersurfaces of the ball: geodesic spheres, horospheres, tubes around
// the totally geodesic cores, the ruled minimal hypersurface W^3, and a
// finite-difference shape-operator estimator producing principal curvature
// data at patch nodes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chc/ambient.hpp"

namespace chc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotApplicableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immersion of a 3-parameter box with a deterministic unit-normal rule.
// If `normal` is unset, the normal is computed from the tangent nullspace and
// the sign fixed by <n, J dF/du1> > 0.
struct HypersurfacePatch {
  std::string name;
  std::function<AmbientPoint(const Vec3&)> immersion;
  std::function<Tangent(const Vec3&)> normal;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
  std::array<int, 3> grid = {3, 3, 3};
  double fd_step = 1e-3;        // parameter step for immersion derivatives
  double fd_step_shape = 1e-3;  // parameter step for normal derivatives
  bool flip_sign = false;       // orientation flip applied on top of the rule

  Vec3 center() const { return 0.5 * (lo + hi); }

  std::vector<Vec3> grid_nodes() const {
    std::vector<Vec3> nodes;
    for (int i = 0; i < grid[0]; ++i)
      for (int j = 0; j < grid[1]; ++j)
        for (int k = 0; k < grid[2]; ++k) {
          Vec3 u;
          const std::array<int, 3> idx = {i, j, k};
          for (int a = 0; a < 3; ++a)
            u[a] = grid[a] == 1 ? center()[a]
                                : lo[a] + (hi[a] - lo[a]) * idx[a] / double(grid[a] - 1);
          nodes.push_back(u);
        }
    return nodes;
  }

  HypersurfacePatch flipped() const {
    HypersurfacePatch q = *this;
    q.flip_sign = !flip_sign;
    return q;
  }
};

// Principal curvature data at one node: eigenvalues ascending, metric-orthonormal
// eigenframe, Hopf components b_i = <J xi, U_i>.
struct PrincipalData {
  Vec3 lambdas;
  std::array<Tangent, 3> frame;
  Vec3 b;
  Vec3 at;  // parameter-box location
};

struct ShapeOperatorResult {
  Mat3 S;  // matrix in a metric-orthonormal tangent basis
  PrincipalData data;
  Tangent xi;
  double symmetry_residual = 0;
};

namespace detail {

// 4th-order central difference of a vector-valued function of one parameter slot.
template <class F>
Vec4 fd_derivative(F&& f, const Vec3& u, int axis, double h) {
  auto at = [&](double d) {
    Vec3 uu = u;
    uu[axis] += d;
    return f(uu);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

}  // namespace detail

inline AmbientPoint patch_point(const HypersurfacePatch& patch, const Vec3& u) {
  return patch.immersion(u);
}

inline std::array<Tangent, 3> tangent_basis(const HypersurfacePatch& patch, const Vec3& u) {
  AmbientPoint p = patch.immersion(u);
  auto coords = [&](const Vec3& uu) { return patch.immersion(uu).x; };
  std::array<Tangent, 3> T;
  for (int a = 0; a < 3; ++a)
    T[a] = Tangent(p, detail::fd_derivative(coords, u, a, patch.fd_step));
  return T;
}

// Smallest metric singular value of the differential (rank / focal check).
inline double min_singular_value(const HypersurfacePatch& patch, const Vec3& u) {
  auto T = tangent_basis(patch, u);
  const Mat4 G = metric_matrix(T[0].at);
  Eigen::Matrix<double, 4, 3> M;
  const Mat4 L = Eigen::LLT<Mat4>(G).matrixL();
  for (int a = 0; a < 3; ++a) M.col(a) = L.transpose() * T[a].v;
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(M);
  return svd.singularValues().minCoeff();
}

inline Tangent unit_normal(const HypersurfacePatch& patch, const Vec3& u) {
  Tangent n;
  if (patch.normal) {
    n = patch.normal(u);
  } else {
    auto T = tangent_basis(patch, u);
    const AmbientPoint p = T[0].at;
    const Mat4 G = metric_matrix(p);
    Eigen::Matrix<double, 3, 4> M;
    for (int a = 0; a < 3; ++a) M.row(a) = (G * T[a].v).transpose();
    Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(M);
    lu.setThreshold(1e-10);
    if (lu.dimensionOfKernel() != 1)
      throw RankError(patch.name + ": ambiguous normal direction");
    Vec4 raw = lu.kernel().col(0);
    raw /= std::sqrt(raw.dot(G * raw));
    const double ref = raw.dot(G * apply_J(T[0]).v);
    if (ref < 0) raw = -raw;
    n = Tangent(p, raw);
  }
  if (patch.flip_sign) n.v = -n.v;
  return n;
}

inline ShapeOperatorResult shape_operator(const HypersurfacePatch& patch, const Vec3& u) {
  auto T = tangent_basis(patch, u);
  const AmbientPoint p = T[0].at;
  const Mat4 G = metric_matrix(p);
  const auto Gamma = christoffel(p);

  {
    Eigen::Matrix<double, 4, 3> M;
    for (int a = 0; a < 3; ++a) M.col(a) = T[a].v;
    Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(M);
    if (svd.singularValues().minCoeff() < 1e-8)
      throw RankError(patch.name + ": immersion differential rank-deficient at node");
  }

  const Tangent xi = unit_normal(patch, u);

  // Weingarten: S T_a = -(d xi/du_a + Gamma(T_a, xi))
  auto xi_coords = [&](const Vec3& uu) { return unit_normal(patch, uu).v; };
  Mat3 h;
  for (int a = 0; a < 3; ++a) {
    Vec4 dxi = detail::fd_derivative(xi_coords, u, a, patch.fd_step_shape);
    for (int c = 0; c < 4; ++c) dxi[c] += T[a].v.dot(Gamma[c] * xi.v);
    const Vec4 W = -dxi;
    for (int b = 0; b < 3; ++b) h(a, b) = W.dot(G * T[b].v);
  }

  ShapeOperatorResult res;
  res.symmetry_residual = (h - h.transpose()).cwiseAbs().maxCoeff();
  const Mat3 hsym = 0.5 * (h + h.transpose());
  Mat3 P;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) P(a, b) = T[a].v.dot(G * T[b].v);

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat3> es(hsym, P);
  res.data.lambdas = es.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    Vec4 Ui = Vec4::Zero();
    for (int a = 0; a < 3; ++a) Ui += es.eigenvectors()(a, i) * T[a].v;
    res.data.frame[i] = Tangent(p, Ui);
  }
  const Vec4 Jxi = apply_J(xi).v;
  for (int i = 0; i < 3; ++i) res.data.b[i] = Jxi.dot(G * res.data.frame[i].v);
  res.data.at = u;
  res.xi = xi;

  // S in the orthonormalized basis (for reporting)
  const Mat3 L = Eigen::LLT<Mat3>(P).matrixL();
  res.S = L.inverse() * hsym * L.transpose().inverse().eval();
  return res;
}

// ---------------------------------------------------------------------------
// Constructors

namespace detail {

// chart of S^3 directions, nondegenerate for |a|, |b| < pi/2
inline Vec4 sphere_direction(const Vec3& u) {
  const double a = u[0], b = u[1], c = u[2];
  return Vec4(std::cos(a) * std::cos(b) * std::cos(c), std::cos(a) * std::cos(b) * std::sin(c),
              std::cos(a) * std::sin(b), std::sin(a));
}

}  // namespace detail

inline HypersurfacePatch geodesic_sphere(double r) {
  if (r <= 0) throw std::invalid_argument("geodesic_sphere: radius must be positive");
  HypersurfacePatch patch;
  patch.name = "sphere";
  const double rho = std::tanh(r / 2);
  patch.immersion = [rho](const Vec3& u) { return AmbientPoint(Vec4(rho * detail::sphere_direction(u))); };
  patch.normal = [rho](const Vec3& u) {
    AmbientPoint p(Vec4(rho * detail::sphere_direction(u)));
    Vec4 radial = detail::sphere_direction(u);
    const Mat4 G = metric_matrix(p);
    radial /= std::sqrt(radial.dot(G * radial));
    return Tangent(p, -radial);  // inward: curvatures positive
  };
  patch.lo = Vec3(-0.1, 0.0, 0.2);
  patch.hi = Vec3(0.5, 0.6, 0.8);
  return patch;
}

inline HypersurfacePatch horosphere() {
  // level set |1 - z1|^2 / (1 - |z|^2) = 1 based at the ideal point (1, 0),
  // passing through the origin; solved for x0 with (x1, x2, x3) as parameters
  HypersurfacePatch patch;
  patch.name = "horosphere";
  auto point = [](const Vec3& u) {
    const double disc = 1 - 4 * u[0] * u[0] - 2 * (u[1] * u[1] + u[2] * u[2]);
    const double x0 = 0.5 * (1 - std::sqrt(disc));
    return AmbientPoint(Vec4(x0, u[0], u[1], u[2]));
  };
  patch.immersion = [point](const Vec3& u) { return point(u); };
  patch.normal = [point](const Vec3& u) {
    AmbientPoint p = point(u);
    const Vec4& x = p.x;
    const double q = (1 - x[0]) * (1 - x[0]) + x[1] * x[1];  // |1 - z1|^2
    const double A = 1 - x.squaredNorm();
    Vec4 dB(-2 * (1 - x[0]) / q + 2 * x[0] / A, 2 * x[1] / q + 2 * x[1] / A, 2 * x[2] / A,
            2 * x[3] / A);
    const Mat4 G = metric_matrix(p);
    Vec4 grad = G.inverse() * dB;
    grad /= std::sqrt(grad.dot(G * grad));
    return Tangent(p, -grad);  // toward the ideal point: curvatures positive
  };
  patch.lo = Vec3(-0.25, -0.25, -0.25);
  patch.hi = Vec3(0.25, 0.25, 0.25);
  return patch;
}

inline HypersurfacePatch tube(CoreKind core, double r, const OdeOptions& ode = {}) {
  if (r <= 0) throw std::invalid_argument("tube: radius must be positive");
  HypersurfacePatch patch;
  patch.name = core == CoreKind::CH1 ? "tube-ch1" : "tube-rh2";
  const Chart2 chart = totally_geodesic_chart(core);
  auto unit_nu = [chart](const Vec3& u) {
    auto nb = chart.normal_basis(u[0], u[1]);
    return Tangent(nb[0].at, std::cos(u[2]) * nb[0].v + std::sin(u[2]) * nb[1].v);
  };
  patch.immersion = [unit_nu, r, ode](const Vec3& u) {
    Tangent nu = unit_nu(u);
    return exp_map(nu.at, nu, r, ode).point;
  };
  patch.normal = [unit_nu, r, ode](const Vec3& u) {
    Tangent nu = unit_nu(u);
    GeodesicState g = exp_map(nu.at, nu, r, ode);
    return Tangent(g.point, -g.velocity.v);  // toward the core
  };
  patch.lo = Vec3(-0.2, -0.2, 0.3);
  patch.hi = Vec3(0.2, 0.2, 1.1);
  return patch;
}

// Unit-speed horocycle in the totally geodesic RH2, geodesic curvature 1/2,
// through the origin. Returns position, unit tangent and the in-plane normal.
struct HorocycleState {
  AmbientPoint point;
  Tangent tangent;
  Tangent normal;
};

inline HorocycleState horocycle_in_RH2(double s, const OdeOptions& ode = {}) {
  const double kappa = 0.5;
  auto rhs = [kappa](double, const Eigen::VectorXd& y) {
    AmbientPoint p(Vec4(y.head<4>()));
    const auto Gamma = christoffel(p);
    const Vec4 T = y.segment<4>(4), N = y.segment<4>(8);
    Eigen::VectorXd dy(12);
    dy.head<4>() = T;
    for (int a = 0; a < 4; ++a) {
      dy[4 + a] = -T.dot(Gamma[a] * T) + kappa * N[a];
      dy[8 + a] = -T.dot(Gamma[a] * N) - kappa * T[a];
    }
    return dy;
  };
  Eigen::VectorXd y0(12);
  y0.setZero();
  y0[4] = 0.5;  // e1 direction, |e1| = 2 at the origin
  y0[10] = 0.5;
  Eigen::VectorXd y = s == 0 ? y0 : integrate_rk45(rhs, y0, 0.0, s, ode);
  HorocycleState st;
  st.point = AmbientPoint(Vec4(y.head<4>()));
  st.tangent = Tangent(st.point, y.segment<4>(4));
  st.normal = Tangent(st.point, y.segment<4>(8));
  return st;
}

// Ruled minimal hypersurface: attach to each horocycle point the totally
// geodesic CH1 tangent to span{N, JN}, the complex orthogonal complement of
// the horocycle tangent.
inline HypersurfacePatch ruled_W3(const OdeOptions& ode = {}) {
  HypersurfacePatch patch;
  patch.name = "w3";
  patch.immersion = [ode](const Vec3& u) {
    HorocycleState h = horocycle_in_RH2(u[0], ode);
    const Vec4 w = u[1] * h.normal.v + u[2] * apply_J(h.normal).v;
    if (w.norm() < 1e-14) return h.point;
    return exp_map(h.point, Tangent(h.point, w), 1.0, ode).point;
  };
  patch.lo = Vec3(-0.35, -0.35, -0.35);
  patch.hi = Vec3(0.35, 0.35, 0.35);
  return patch;
}

// ---------------------------------------------------------------------------
// Principal-curvature oracles (Jacobi fields along the radial geodesics)

inline Vec3 sphere_oracle(double r) {
  Vec3 v(0.5 / std::tanh(r / 2), 0.5 / std::tanh(r / 2), 1.0 / std::tanh(r));
  std::sort(v.begin(), v.end());
  return v;
}

inline Vec3 horosphere_oracle() { return Vec3(0.5, 0.5, 1.0); }

inline Vec3 tube_oracle(CoreKind core, double r) {
  Vec3 v = core == CoreKind::CH1
               ? Vec3(0.5 * std::tanh(r / 2), 0.5 * std::tanh(r / 2), 1.0 / std::tanh(r))
               : Vec3(std::tanh(r), 0.5 * std::tanh(r / 2), 0.5 / std::tanh(r / 2));
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Predicates

struct HopfResult {
  bool is_hopf;
  Vec3 b;
};

// Eigenvalues closer than this are treated as one multiplicity class.
inline constexpr double kClusterTol = 1e-4;

inline std::vector<std::vector<int>> cluster_eigenvalues(const Vec3& lambdas,
                                                         double tol = kClusterTol) {
  std::vector<std::vector<int>> clusters{{0}};
  for (int i = 1; i < 3; ++i) {
    if (lambdas[i] - lambdas[clusters.back().front()] < tol)
      clusters.back().push_back(i);
    else
      clusters.push_back({i});
  }
  return clusters;
}

inline HopfResult hopf_check(const PrincipalData& data, double angle_tol = 1e-4) {
  auto clusters = cluster_eigenvalues(data.lambdas);
  double best = 0;
  for (const auto& cl : clusters) {
    double proj = 0;
    for (int i : cl) proj += data.b[i] * data.b[i];
    best = std::max(best, proj);
  }
  const double bsq = data.b.squaredNorm();
  // sin^2 of the angle between J xi and the closest principal subspace
  const double sin2 = std::max(0.0, bsq - best) / bsq;
  return HopfResult{sin2 < angle_tol * angle_tol, data.b};
}

inline HopfResult hopf_check(const HypersurfacePatch& patch, const Vec3& u,
                             double angle_tol = 1e-4) {
  return hopf_check(shape_operator(patch, u).data, angle_tol);
}

// Deviation of the measured second fundamental form from the trivial bilinear
// extension of 2 II(Z, J xi) = xi, with Z = (X_+ - X_-)/sqrt(2) built from the
// +-1/2 principal vectors.
inline double ruled_form_check(const HypersurfacePatch& patch, const Vec3& u,
                               double eig_tol = 1e-2) {
  ShapeOperatorResult so = shape_operator(patch, u);
  const AmbientPoint p = so.xi.at;
  const Mat4 G = metric_matrix(p);
  int ip = -1, im = -1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(so.data.lambdas[i] - 0.5) < eig_tol) ip = i;
    if (std::abs(so.data.lambdas[i] + 0.5) < eig_tol) im = i;
  }
  if (ip < 0 || im < 0)
    throw NotApplicableError("ruled_form_check: principal curvatures +-1/2 not present");

  const Vec4 Jxi = apply_J(so.xi).v;
  auto ip_of = [&](const Vec4& a, const Vec4& b) { return a.dot(G * b); };
  Vec4 Xp = so.data.frame[ip].v, Xm = so.data.frame[im].v;
  if (ip_of(Xp, Jxi) < 0) Xp = -Xp;
  if (ip_of(Xm, Jxi) < 0) Xm = -Xm;
  const Vec4 Z = (Xp - Xm) / std::sqrt(2.0);

  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const Vec4 &A = so.data.frame[i].v, &B = so.data.frame[j].v;
      const double measured = (i == j) ? so.data.lambdas[i] : 0.0;  // <S U_i, U_j>
      const double predicted =
          0.5 * (ip_of(A, Z) * ip_of(B, Jxi) + ip_of(A, Jxi) * ip_of(B, Z));
      worst = std::max(worst, std::abs(measured - predicted));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// CSV export: params, ambient coords, lambda_1..3, b_1..3

inline void export_csv(const HypersurfacePatch& patch, std::ostream& os) {
  os << "u1,u2,u3,x1,y1,x2,y2,lambda1,lambda2,lambda3,b1,b2,b3\n";
  for (const Vec3& u : patch.grid_nodes()) {
    ShapeOperatorResult so = shape_operator(patch, u);
    const Vec4& x = so.xi.at.x;
    os << u[0] << ',' << u[1] << ',' << u[2] << ',' << x[0] << ',' << x[1] << ',' << x[2] << ','
       << x[3];
    for (int i = 0; i < 3; ++i) os << ',' << so.data.lambdas[i];
    for (int i = 0; i < 3; ++i) os << ',' << so.data.b[i];
    os << '\n';
  }
}

}  // namespace chc
