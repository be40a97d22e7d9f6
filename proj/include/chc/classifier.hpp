#pragma once

// Constraint residuals for constant-principal-curvature data, the quadratic
// system in the connection coefficients x_i with its multistart solver, the
// one-parameter family relations for the non-Hopf branch, and the decision
// procedure mapping measured principal data to a model family.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chc/hypersurfaces.hpp"

namespace chc {

struct ClassifierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// lambda triple with the differences d_i = lambda_{i+1} - lambda_{i+2} (mod 3)
struct CurvatureTriple {
  Vec3 lambda;

  explicit CurvatureTriple(const Vec3& l) : lambda(l) {}

  Vec3 d() const {
    return Vec3(lambda[1] - lambda[2], lambda[2] - lambda[0], lambda[0] - lambda[1]);
  }

  void require_distinct() const {
    const Vec3 dd = d();
    for (int i = 0; i < 3; ++i)
      if (dd[i] == 0) throw ClassifierError("coincident principal curvatures");
  }
};

// residual of 3 b_i^2 = 1 + 4 d_{i+2} x_{i+2} - 4 d_{i+1} x_{i+1}
inline Vec3 residual_eq2(const CurvatureTriple& t, const Vec3& b, const Vec3& x) {
  t.require_distinct();
  const Vec3 d = t.d();
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    r[i] = 3 * b[i] * b[i] - 1 - 4 * d[i2] * x[i2] + 4 * d[i1] * x[i1];
  }
  return r;
}

// residual of the Gauss constraint
// 0 = 8 l_i l_{i+1} - 2 - 12 b_{i+2}^2 + 9 d_{i+2}^{-2} b_{i+2}^2 (1 - b_{i+2}^2)
//     + 8 (x_i x_{i+1} - x_i x_{i+2} - x_{i+1} x_{i+2})
//     + 6 d_{i+2}^{-1} ((b_{i+2}^2 - b_{i+1}^2) x_i - (b_{i+2}^2 - b_i^2) x_{i+1}
//                       + b_{i+1}^2 l_i - b_i^2 l_{i+1})
inline Vec3 residual_eq6(const CurvatureTriple& t, const Vec3& b, const Vec3& x) {
  t.require_distinct();
  const Vec3 d = t.d();
  const Vec3& l = t.lambda;
  Vec3 b2(b[0] * b[0], b[1] * b[1], b[2] * b[2]);
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    const double di2 = 1.0 / d[i2];
    r[i] = 8 * l[i] * l[i1] - 2 - 12 * b2[i2] + 9 * di2 * di2 * b2[i2] * (1 - b2[i2]) +
           8 * (x[i] * x[i1] - x[i] * x[i2] - x[i1] * x[i2]) +
           6 * di2 * ((b2[i2] - b2[i1]) * x[i] - (b2[i2] - b2[i]) * x[i1] + b2[i1] * l[i] -
                      b2[i] * l[i1]);
  }
  return r;
}

// Quadratic system in x after eliminating b_i^2: equation i reads
//   (x_i + x_{i+1})^2 + sum_j Lambda(i,j) x_j = Omega(i),
// obtained by dividing the raw form by its quadratic weight 8 d_i d_{i+1} d_{i+2}^{-2}.
// In the variables y_i (x_i = -y_i + y_{i+1} + y_{i+2}) equation i becomes
//   4 y_{i+2}^2 + sum_j LambdaBar(i,j) y_j = Omega(i).
struct QuadraticSystem {
  Mat3 Lambda;
  Vec3 Omega;
  Mat3 LambdaBar;
  Vec3 quad_weight;  // 8 d_i d_{i+1} d_{i+2}^{-2}

  Vec3 eval(const Vec3& x) const {
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
      const int i1 = (i + 1) % 3;
      const double s = x[i] + x[i1];
      r[i] = s * s + Lambda.row(i).dot(x) - Omega[i];
    }
    return r;
  }

  Vec3 eval_y(const Vec3& y) const {
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
      const int i2 = (i + 2) % 3;
      r[i] = 4 * y[i2] * y[i2] + LambdaBar.row(i).dot(y) - Omega[i];
    }
    return r;
  }

  Mat3 jacobian(const Vec3& x) const {
    Mat3 J = Lambda;
    for (int i = 0; i < 3; ++i) {
      const int i1 = (i + 1) % 3;
      const double s = 2 * (x[i] + x[i1]);
      J(i, i) += s;
      J(i, i1) += s;
    }
    return J;
  }
};

inline QuadraticSystem build_system(const CurvatureTriple& t) {
  t.require_distinct();
  const Vec3 d = t.d();
  const Vec3& l = t.lambda;
  QuadraticSystem sys;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    const double di2 = 1.0 / d[i2];
    const double w = 8 * d[i] * d[i1] * di2 * di2;
    sys.quad_weight[i] = w;
    Vec3 lin = Vec3::Zero();
    lin[i] = 2 * d[i] * (4 + 2 * l[i] * di2 - di2 * di2);
    lin[i1] = -2 * d[i1] * (4 - 2 * l[i1] * di2 - di2 * di2);
    lin[i2] = -4 * (l[i] + l[i1]);
    const double cst = di2 * di2 - 2 + 4 * l[i] * l[i1];
    sys.Lambda.row(i) = lin / w;
    sys.Omega[i] = -cst / w;
  }
  // x_j = -y_j + y_{j+1} + y_{j+2}: coefficient of y_m in x_j is 1 - 2*delta_jm
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m) {
      double acc = 0;
      for (int j = 0; j < 3; ++j) acc += sys.Lambda(i, j) * (j == m ? -1.0 : 1.0);
      sys.LambdaBar(i, m) = acc;
    }
  return sys;
}

struct SolveOptions {
  unsigned seed = 20250824;
  int n_starts = 200;
  double box = 5.0;
  double dedup_radius = 1e-6;
  double residual_tol = 1e-9;
  int max_iters = 80;
};

struct SolutionSet {
  struct Root {
    Vec3 x;
    double residual;
    int from_start;
  };
  std::vector<Root> roots;
  int starts = 0;
  double dedup_radius = 0;
};

inline SolutionSet solve_system(const QuadraticSystem& sys, const SolveOptions& opt = {}) {
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-opt.box, opt.box);
  SolutionSet set;
  set.starts = opt.n_starts;
  set.dedup_radius = opt.dedup_radius;
  for (int s = 0; s < opt.n_starts; ++s) {
    Vec3 x(uni(rng), uni(rng), uni(rng));
    bool ok = false;
    for (int it = 0; it < opt.max_iters; ++it) {
      const Vec3 F = sys.eval(x);
      if (F.cwiseAbs().maxCoeff() < 1e-13) {
        ok = true;
        break;
      }
      const Mat3 J = sys.jacobian(x);
      Eigen::FullPivLU<Mat3> lu(J);
      if (lu.rcond() < 1e-14) break;
      const Vec3 step = lu.solve(F);
      double alpha = 1.0;
      const double f0 = F.norm();
      Vec3 xn = x - step;
      // damping: halve until the residual norm decreases
      for (int k = 0; k < 30 && sys.eval(xn).norm() >= f0; ++k) {
        alpha *= 0.5;
        xn = x - alpha * step;
      }
      if ((xn - x).norm() < 1e-16) break;
      x = xn;
    }
    if (!ok) continue;  // diverged start, dropped
    if (x.cwiseAbs().maxCoeff() > 2 * opt.box) continue;
    if (sys.eval(x).cwiseAbs().maxCoeff() > opt.residual_tol) continue;
    bool dup = false;
    for (auto& r : set.roots)
      if ((r.x - x).norm() < opt.dedup_radius) {
        dup = true;
        break;
      }
    if (!dup) set.roots.push_back({x, sys.eval(x).cwiseAbs().maxCoeff(), s});
  }
  std::sort(set.roots.begin(), set.roots.end(), [](const auto& a, const auto& b) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(a.x[i] - b.x[i]) > 1e-9) return a.x[i] < b.x[i];
    return false;
  });
  return set;
}

// ---------------------------------------------------------------------------
// The one-parameter family of the non-Hopf branch

// 2 lambda_1 = 3 lambda_3 - sqrt(1 - 3 lambda_3^2), 2 lambda_2 = ... + sqrt(...)
inline std::pair<double, double> lambda_relations(double lambda3) {
  const double disc = 1 - 3 * lambda3 * lambda3;
  if (disc < -1e-12) throw ClassifierError("lambda_relations: 3 lambda_3^2 > 1");
  const double s = std::sqrt(std::max(disc, 0.0));
  return {0.5 * (3 * lambda3 - s), 0.5 * (3 * lambda3 + s)};
}

// (x, y) = (lambda_1 - lambda_2, lambda_1 + lambda_2 - 4 lambda_3) candidates,
// with the residuals of the two polynomial constraints they must satisfy.
struct BranchSolution {
  double x, y;
  double residual_quadric;  // x^2 - y^2 - 1 + 4 l3^2
  double residual_cubic;    // x^2 (y + 11 l3) - y^3 + l3 y^2 + 4 (10 l3^2 - 1) y + 2 l3 (34 l3^2 - 7)
};

inline std::vector<BranchSolution> branch_solutions(double lambda3) {
  const double l3 = lambda3;
  auto make = [l3](double x, double y) {
    BranchSolution b{x, y, 0, 0};
    b.residual_quadric = x * x - y * y - 1 + 4 * l3 * l3;
    b.residual_cubic = x * x * (y + 11 * l3) - y * y * y + l3 * y * y +
                       4 * (10 * l3 * l3 - 1) * y + 2 * l3 * (34 * l3 * l3 - 7);
    return b;
  };
  std::vector<BranchSolution> out;
  const double disc = 1 - 3 * l3 * l3;
  if (disc >= 0) {
    out.push_back(make(std::sqrt(disc), -l3));
    out.push_back(make(-std::sqrt(disc), -l3));
  }
  if (l3 != 0) {
    const double y = (1 - 8 * l3 * l3) / (4 * l3);
    out.push_back(make(1 / (4 * l3), y));
    out.push_back(make(-1 / (4 * l3), y));
  }
  return out;
}

// For 1/2 < |l3| < 1/sqrt(3) the b^2-constraint is an ellipse with axes < 1,
// which cannot meet b_1^2 + b_2^2 = 1; certifies |lambda_3| < 1/2.
inline bool ellipse_exclusion(double lambda3) {
  const double a = std::abs(lambda3);
  if (!(a > 0.5 && a < 1.0 / std::sqrt(3.0)))
    throw ClassifierError("ellipse_exclusion: lambda3 outside (1/2, 1/sqrt(3))");
  const double s = std::sqrt(1 - 3 * lambda3 * lambda3);
  const double q1 = 2 * lambda3 * (lambda3 - s);
  const double q2 = 2 * lambda3 * (lambda3 + s);
  return q1 > 0 && q1 < 1 && q2 > 0 && q2 < 1;
}

// b_1^2 = d_2 d_3^{-1} (4 d_1 l_3 - 1), b_2^2 = -d_1 d_3^{-1} (4 d_2 l_3 + 1)
inline std::pair<double, double> b_from_lambda(double lambda3) {
  if (std::abs(lambda3) >= 0.5) throw ClassifierError("b_from_lambda: |lambda3| >= 1/2");
  auto [l1, l2] = lambda_relations(lambda3);
  const double d1 = l2 - lambda3, d2 = lambda3 - l1, d3 = l1 - l2;
  const double b1sq = d2 / d3 * (4 * d1 * lambda3 - 1);
  const double b2sq = -d1 / d3 * (4 * d2 * lambda3 + 1);
  return {b1sq, b2sq};
}

// x_3 = l_3, 4 x_1 = 4 l_1 + 3 d_2^{-1} b_1^2, 4 x_2 = 4 l_2 - 3 d_1^{-1} b_2^2
inline Vec3 family_x(const CurvatureTriple& t, const Vec3& bsq) {
  const Vec3 d = t.d();
  return Vec3(t.lambda[0] + 0.75 * bsq[0] / d[1], t.lambda[1] - 0.75 * bsq[1] / d[0],
              t.lambda[2]);
}

// Family triple for a given lambda_3, in the paper's labelling (l1 < l2, b3 = 0).
struct FamilyData {
  Vec3 lambda;
  Vec3 bsq;
  Vec3 x;
  double r;  // 2 lambda_3 = tanh(r/2)
};

inline FamilyData family_data(double lambda3) {
  auto [l1, l2] = lambda_relations(lambda3);
  auto [b1sq, b2sq] = b_from_lambda(lambda3);
  FamilyData f;
  f.lambda = Vec3(l1, l2, lambda3);
  f.bsq = Vec3(b1sq, b2sq, 0.0);
  f.x = family_x(CurvatureTriple(f.lambda), f.bsq);
  f.r = 2 * std::atanh(2 * lambda3);
  return f;
}

// ---------------------------------------------------------------------------
// Residual report (fixed JSON key names)

inline std::map<std::string, double> residual_report(const Vec3& lambda, const Vec3& bsq) {
  CurvatureTriple t(lambda);
  t.require_distinct();
  const Vec3 d = t.d();
  const double l1 = lambda[0], l2 = lambda[1], l3 = lambda[2];
  std::map<std::string, double> rep;

  const Vec3 x = family_x(t, bsq);
  Vec3 b(std::sqrt(std::max(0.0, bsq[0])), std::sqrt(std::max(0.0, bsq[1])),
         std::sqrt(std::max(0.0, bsq[2])));
  const Vec3 r2 = residual_eq2(t, b, x);
  const Vec3 r6 = residual_eq6(t, b, x);
  const Vec3 r7 = build_system(t).eval(x);
  for (int i = 0; i < 3; ++i) {
    rep["eq2_" + std::to_string(i + 1)] = r2[i];
    rep["eq6_" + std::to_string(i + 1)] = r6[i];
    rep["eq7_" + std::to_string(i + 1)] = r7[i];
  }
  rep["lin_rel"] = 2 * d[0] * l1 - 2 * d[1] * l2 + 6 * (d[1] - d[0]) * l3 + 1;
  rep["diffsq_rel"] = (l1 - l2) * (l1 - l2) - std::pow(l1 + l2 - 4 * l3, 2) - (1 - 4 * l3 * l3);
  rep["cubic_rel"] = (10 * l1 * l1 + 10 * l2 * l2 + 6 * l1 * l2 + 1) * l3 -
                     2 * (l1 + l2) * (4 * l3 * l3 + l1 * l2 + 1) - 6 * l3 * l3 * l3;
  rep["eq10_b1"] = bsq[0] - d[1] / d[2] * (4 * d[0] * l3 - 1);
  rep["eq10_b2"] = bsq[1] + d[0] / d[2] * (4 * d[1] * l3 + 1);
  return rep;
}

// residual of <J U_i, U_{i+1}> = b_{i+2}, compared in absolute value because
// measured eigenframes carry arbitrary per-vector signs
inline double residual_eq1(const PrincipalData& data) {
  const AmbientPoint p = data.frame[0].at;
  const Mat4 G = metric_matrix(p);
  double worst = 0;
  for (int i = 0; i < 3; ++i) {
    const double lhs = apply_J(data.frame[i]).v.dot(G * data.frame[(i + 1) % 3].v);
    worst = std::max(worst, std::abs(std::abs(lhs) - std::abs(data.b[(i + 2) % 3])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Codazzi contractions (Lemmas on principal frames), measured by finite
// differences of the eigenframe over the patch.

inline double check_lemma_contractions(const HypersurfacePatch& patch, const Vec3& u,
                                       double h = 1e-3,
                                       std::optional<Vec3> lambda_override = std::nullopt) {
  ShapeOperatorResult so = shape_operator(patch, u);
  const Vec3 l = lambda_override.value_or(so.data.lambdas);
  for (int i = 0; i < 3; ++i)
    if (std::abs(l[i] - l[(i + 1) % 3]) < kClusterTol)
      throw NotApplicableError("check_lemma_contractions: clustered eigenvalues");

  const AmbientPoint p = so.xi.at;
  const Mat4 G = metric_matrix(p);
  const auto Gamma = christoffel(p);
  auto T = tangent_basis(patch, u);
  Mat3 P;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) P(a, b) = T[a].v.dot(G * T[b].v);

  // c[i][j][k] = <nabla_{U_i} U_j, U_k> measured by central differences of the
  // sign-aligned eigenframe along the parameter direction matched to U_i
  double c[3][3][3];
  for (int i = 0; i < 3; ++i) {
    Vec3 rhs;
    for (int a = 0; a < 3; ++a) rhs[a] = T[a].v.dot(G * so.data.frame[i].v);
    const Vec3 dir = P.ldlt().solve(rhs);  // parameter velocity with dF * dir = U_i

    auto frame_at = [&](double step) {
      ShapeOperatorResult s2 = shape_operator(patch, Vec3(u + step * dir));
      // align signs with the center frame
      for (int j = 0; j < 3; ++j) {
        if (s2.data.frame[j].v.dot(G * so.data.frame[j].v) < 0) s2.data.frame[j].v *= -1;
      }
      return s2;
    };
    ShapeOperatorResult fp = frame_at(h), fm = frame_at(-h);
    for (int j = 0; j < 3; ++j) {
      Vec4 dU = (fp.data.frame[j].v - fm.data.frame[j].v) / (2 * h);
      for (int cc = 0; cc < 4; ++cc) dU[cc] += so.data.frame[i].v.dot(Gamma[cc] * so.data.frame[j].v);
      for (int k = 0; k < 3; ++k) c[i][j][k] = dU.dot(G * so.data.frame[k].v);
    }
  }

  auto JU = [&](int i, int j) {
    return apply_J(so.data.frame[i]).v.dot(G * so.data.frame[j].v);
  };
  double worst = 0;
  // Lemma for three (not necessarily distinct) eigendirections:
  // Rbar_{U_i U_j U_k xi} = (l_j - l_k) c[i][j][k] - (l_i - l_k) c[j][i][k]
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        if (i == j) continue;
        const Tangent R = curvature_closed_form(p, so.data.frame[i], so.data.frame[j],
                                                so.data.frame[k]);
        const double lhs = R.v.dot(G * so.xi.v);
        const double rhs = (l[j] - l[k]) * c[i][j][k] - (l[i] - l[k]) * c[j][i][k];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  // two-eigenvalue lemma with X = Y = U_i, Z = U_j:
  // 4 (l_j - l_i) c[i][i][j] = 3 <J U_i, U_j> b_i
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double lhs = 4 * (l[j] - l[i]) * c[i][i][j];
      const double rhs = 3 * JU(i, j) * so.data.b[i];
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Classification

enum class Family {
  GeodesicSphere,
  Horosphere,
  TubeCH1,
  TubeRH2,
  RuledW3,
  WEquidistant,
  Unclassified
};

inline std::string to_string(Family f) {
  switch (f) {
    case Family::GeodesicSphere: return "GeodesicSphere";
    case Family::Horosphere: return "Horosphere";
    case Family::TubeCH1: return "TubeCH1";
    case Family::TubeRH2: return "TubeRH2";
    case Family::RuledW3: return "RuledW3";
    case Family::WEquidistant: return "WEquidistant";
    case Family::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

struct ClassificationResult {
  Family family = Family::Unclassified;
  std::optional<double> radius;
  std::map<std::string, double> residuals;
};

struct ClassifyOptions {
  double tol = 1e-3;          // relation residual tolerance (measured data)
  double cluster_tol = kClusterTol;
  double hopf_tol = 1e-4;     // angle tolerance for the Hopf predicate
};

namespace detail {

inline double max_abs(const std::map<std::string, double>& m) {
  double worst = 0;
  for (const auto& [k, v] : m) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace detail

inline ClassificationResult classify(Vec3 lambda, Vec3 b, const ClassifyOptions& opt = {}) {
  ClassificationResult res;
  // sort ascending, carry b along
  std::array<int, 3> ord = {0, 1, 2};
  std::sort(ord.begin(), ord.end(), [&](int a, int c) { return lambda[a] < lambda[c]; });
  const Vec3 ls(lambda[ord[0]], lambda[ord[1]], lambda[ord[2]]);
  const Vec3 bs(b[ord[0]], b[ord[1]], b[ord[2]]);

  auto clusters = cluster_eigenvalues(ls, opt.cluster_tol);
  const int g = static_cast<int>(clusters.size());

  double best_proj = 0;
  size_t hopf_cluster = 0;
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    double proj = 0;
    for (int i : clusters[ci]) proj += bs[i] * bs[i];
    if (proj > best_proj) {
      best_proj = proj;
      hopf_cluster = ci;
    }
  }
  const double bnorm = std::max(bs.squaredNorm(), 1e-300);
  const bool is_hopf = (1 - best_proj / bnorm) < opt.hopf_tol * opt.hopf_tol;

  if (g == 1) {
    res.residuals["umbilical"] = 1.0;  // excluded: no totally umbilical hypersurfaces
    return res;
  }

  if (g == 2 && is_hopf) {
    // cluster means: mu (multiplicity 2), nu (multiplicity 1)
    double mu = 0, nu = 0;
    for (const auto& cl : clusters) {
      double mean = 0;
      for (int i : cl) mean += ls[i];
      mean /= cl.size();
      (cl.size() == 2 ? mu : nu) = mean;
    }
    if (std::abs(mu - 0.5) < opt.tol && std::abs(nu - 1.0) < opt.tol) {
      res.family = Family::Horosphere;
      res.residuals["horosphere_mu"] = mu - 0.5;
      res.residuals["horosphere_nu"] = nu - 1.0;
      return res;
    }
    const double rc = std::log(2 + std::sqrt(3.0));
    if (std::abs(mu - std::sqrt(3.0) / 2) < opt.tol &&
        std::abs(nu - 0.5 / std::sqrt(3.0)) < opt.tol) {
      res.family = Family::TubeRH2;
      res.radius = rc;
      res.residuals["tube_rh2_mu"] = mu - std::sqrt(3.0) / 2;
      res.residuals["tube_rh2_nu"] = nu - 0.5 / std::sqrt(3.0);
      return res;
    }
    if (mu > 0.5) {
      const double r = 2 * std::atanh(1 / (2 * mu));
      if (std::abs(nu - 1 / std::tanh(r)) < opt.tol) {
        res.family = Family::GeodesicSphere;
        res.radius = r;
        res.residuals["sphere_nu"] = nu - 1 / std::tanh(r);
        return res;
      }
    }
    if (mu > 0 && mu < 0.5) {
      const double r = 2 * std::atanh(2 * mu);
      if (std::abs(nu - 1 / std::tanh(r)) < opt.tol) {
        res.family = Family::TubeCH1;
        res.radius = r;
        res.residuals["tube_ch1_nu"] = nu - 1 / std::tanh(r);
        return res;
      }
    }
    res.residuals["g2_hopf_unmatched"] = 1.0;
    return res;
  }

  if (g == 3 && is_hopf) {
    // tube around RH2: {tanh(r), tanh(r/2)/2, coth(r/2)/2}, Hopf value tanh(r)
    if (ls[2] > 0.5) {
      const double r = 2 * std::atanh(0.5 / ls[2]);
      res.residuals["tube_rh2_mid"] = ls[1] - std::tanh(r);
      res.residuals["tube_rh2_low"] = ls[0] - 0.5 * std::tanh(r / 2);
      if (detail::max_abs(res.residuals) < opt.tol && clusters[hopf_cluster].front() == 1) {
        res.family = Family::TubeRH2;
        res.radius = r;
        return res;
      }
    }
    return res;
  }

  if (g == 3 && !is_hopf) {
    // non-Hopf branch: recover the paper labelling by requiring l1 < l2,
    // a vanishing b-component on the l3 direction and Eq.-(10) positivity
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const int a = std::min(i, j), bb = std::max(i, j);  // l1 < l2 in ascending order
      const Vec3 lam(ls[a], ls[bb], ls[k]);
      const Vec3 bsq(bs[a] * bs[a], bs[bb] * bs[bb], bs[k] * bs[k]);
      if (bsq[2] > opt.tol) continue;
      const CurvatureTriple t(lam);
      const Vec3 d = t.d();
      const double b1p = d[1] / d[2] * (4 * d[0] * lam[2] - 1);
      const double b2p = -d[0] / d[2] * (4 * d[1] * lam[2] + 1);
      if (b1p <= 0 || b2p <= 0) continue;

      auto rep = residual_report(lam, bsq);
      if (detail::max_abs(rep) < opt.tol) {
        res.residuals = rep;
        if (std::abs(lam[2]) < opt.tol) {
          res.family = Family::RuledW3;
        } else {
          res.family = Family::WEquidistant;
          res.radius = 2 * std::atanh(2 * lam[2]);
        }
        return res;
      }
      if (res.residuals.empty() || detail::max_abs(rep) < detail::max_abs(res.residuals))
        res.residuals = rep;
    }
    return res;
  }

  res.residuals["unmatched"] = 1.0;
  return res;
}

inline ClassificationResult classify(const PrincipalData& data, const ClassifyOptions& opt = {}) {
  return classify(data.lambdas, data.b, opt);
}

}  // namespace chc
