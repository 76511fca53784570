#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hdgsc/common.hpp"
#include "hdgsc/mesh.hpp"

namespace hdgsc {

enum class ElementKind { Triangle, Segment };

constexpr int kMaxDegree = 6;

namespace detail {

// Legendre P_n(x) and derivative via the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, dp0 = 0.0, p1 = x, dp1 = 1.0;
  if (n == 0) {
    p = p0;
    dp = dp0;
    return;
  }
  for (int m = 1; m < n; ++m) {
    const double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
    const double dp2 = ((2 * m + 1) * (p1 + x * dp1) - m * dp0) / (m + 1);
    p0 = p1;
    dp0 = dp1;
    p1 = p2;
    dp1 = dp2;
  }
  p = p1;
  dp = dp1;
}

// Jacobi P_n^{(alpha,beta)}(x).
inline double jacobi(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = 0.5 * (alpha - beta) + 0.5 * (alpha + beta + 2.0) * x;
  for (int m = 2; m <= n; ++m) {
    const double a = 2.0 * m * (m + alpha + beta) * (2.0 * m + alpha + beta - 2.0);
    const double b = (2.0 * m + alpha + beta - 1.0) *
                     ((2.0 * m + alpha + beta) * (2.0 * m + alpha + beta - 2.0) * x +
                      alpha * alpha - beta * beta);
    const double c = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * (2.0 * m + alpha + beta);
    const double p2 = (b * p1 - c * p0) / a;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

inline double jacobi_deriv(int n, double alpha, double beta, double x) {
  if (n == 0) return 0.0;
  return 0.5 * (n + alpha + beta + 1.0) * jacobi(n - 1, alpha + 1.0, beta + 1.0, x);
}

// Scaled Legendre S_p(u,v) = v^p P_p(u/v), a bivariate polynomial, together
// with its partials. Evaluating the collapsed Dubiner coordinate this way
// avoids the v -> 0 singularity at the top vertex.
struct ScaledLegendre {
  std::vector<double> s, du, dv;
  ScaledLegendre(int pmax, double u, double v) : s(pmax + 1), du(pmax + 1), dv(pmax + 1) {
    s[0] = 1.0;
    du[0] = dv[0] = 0.0;
    if (pmax == 0) return;
    s[1] = u;
    du[1] = 1.0;
    dv[1] = 0.0;
    for (int p = 1; p < pmax; ++p) {
      s[p + 1] = ((2 * p + 1) * u * s[p] - p * v * v * s[p - 1]) / (p + 1);
      du[p + 1] = ((2 * p + 1) * (s[p] + u * du[p]) - p * v * v * du[p - 1]) / (p + 1);
      dv[p + 1] =
          ((2 * p + 1) * u * dv[p] - p * (2.0 * v * s[p - 1] + v * v * dv[p - 1])) / (p + 1);
    }
  }
};

}  // namespace detail

// Orthonormal polynomial basis on the reference triangle {x,y >= 0, x+y <= 1}
// (Dubiner family) or the reference segment [0,1] (shifted Legendre). Mass
// matrices are identities on the reference element.
class BasisSet {
public:
  BasisSet(ElementKind kind, int degree) : kind_(kind), degree_(degree) {
    if (degree < 0 || degree > kMaxDegree + 1)
      throw Error("polybasis", "unsupported degree k=" + std::to_string(degree));
    dim_ = kind == ElementKind::Triangle ? (degree + 1) * (degree + 2) / 2 : degree + 1;
  }

  ElementKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int dimension() const { return dim_; }

  // Values of all basis functions at a reference point.
  std::vector<double> eval(const Vec2& p) const {
    std::vector<double> val(dim_), gx, gy;
    eval_impl(p, val, nullptr, nullptr);
    return val;
  }

  // Values and gradients; for segments the gradient is d/dt along [0,1].
  void eval_with_grad(const Vec2& p, std::vector<double>& val, std::vector<double>& gx,
                      std::vector<double>& gy) const {
    val.resize(dim_);
    gx.resize(dim_);
    gy.resize(dim_);
    eval_impl(p, val, &gx, &gy);
  }

private:
  void eval_impl(const Vec2& p, std::vector<double>& val, std::vector<double>* gx,
                 std::vector<double>* gy) const {
    if (kind_ == ElementKind::Segment) {
      const double t = 2.0 * p.x - 1.0;
      for (int n = 0; n <= degree_; ++n) {
        double pv, dv;
        detail::legendre(n, t, pv, dv);
        const double c = std::sqrt(2.0 * n + 1.0);
        val[n] = c * pv;
        if (gx) {
          (*gx)[n] = c * dv * 2.0;
          (*gy)[n] = 0.0;
        }
      }
      return;
    }
    const double u = 2.0 * p.x + p.y - 1.0;
    const double v = 1.0 - p.y;
    const double eta = 2.0 * p.y - 1.0;
    detail::ScaledLegendre sl(degree_, u, v);
    int idx = 0;
    for (int pp = 0; pp <= degree_; ++pp)
      for (int q = 0; q <= degree_ - pp; ++q, ++idx) {
        const double c = std::sqrt(2.0 * (2 * pp + 1) * (pp + q + 1));
        const double alpha = 2.0 * pp + 1.0;
        const double j = detail::jacobi(q, alpha, 0.0, eta);
        val[idx] = c * sl.s[pp] * j;
        if (gx) {
          const double dj = detail::jacobi_deriv(q, alpha, 0.0, eta);
          (*gx)[idx] = c * 2.0 * sl.du[pp] * j;
          (*gy)[idx] = c * ((sl.du[pp] - sl.dv[pp]) * j + 2.0 * sl.s[pp] * dj);
        }
      }
  }

  ElementKind kind_;
  int degree_;
  int dim_;
};

inline BasisSet make_basis(ElementKind kind, int k) { return BasisSet(kind, k); }

struct QuadratureRule {
  ElementKind kind;
  int exactness_degree = 0;
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, t, p, dp);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    legendre(n, t, p, dp);
    x[n - 1 - i] = t;
    w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace detail

// Segment rules are Gauss-Legendre on [0,1]; triangle rules are collapsed
// (Duffy) tensor Gauss rules, exact for total degree <= `degree`.
inline QuadratureRule make_quadrature(ElementKind kind, int degree) {
  if (degree < 0 || degree > 2 * kMaxDegree + 8)
    throw Error("polybasis", "unsupported quadrature degree " + std::to_string(degree));
  QuadratureRule rule;
  rule.kind = kind;
  rule.exactness_degree = degree;
  if (kind == ElementKind::Segment) {
    const int n = degree / 2 + 1;
    std::vector<double> x, w;
    detail::gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({0.5 * (x[i] + 1.0), 0.0});
      rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
  }
  // Duffy map (xi,eta) -> (xi (1-eta), eta); the Jacobian (1-eta) raises the
  // required eta-degree by one.
  const int nxi = degree / 2 + 1;
  const int neta = (degree + 1) / 2 + 1;
  std::vector<double> xx, xw, yx, yw;
  detail::gauss_legendre(nxi, xx, xw);
  detail::gauss_legendre(neta, yx, yw);
  for (int j = 0; j < neta; ++j)
    for (int i = 0; i < nxi; ++i) {
      const double xi = 0.5 * (xx[i] + 1.0);
      const double eta = 0.5 * (yx[j] + 1.0);
      rule.points.push_back({xi * (1.0 - eta), eta});
      rule.weights.push_back(0.25 * xw[i] * yw[j] * (1.0 - eta));
    }
  return rule;
}

// Per-triangle affine geometry and per-facet lengths/normals.
struct AffineMaps {
  struct Cell {
    std::array<double, 4> jac;      // [dx/dxi dx/deta; dy/dxi dy/deta] row-major
    std::array<double, 4> inv_t;    // inverse transpose of jac
    double det = 0.0;
    Vec2 origin;                    // image of the reference origin
  };
  std::vector<Cell> cells;
  std::vector<double> facet_length;
  // Outward unit normal of facet f with respect to owner slot s (0 or 1).
  std::vector<std::array<Vec2, 2>> facet_normal;

  Vec2 to_physical(int t, const Vec2& ref) const {
    const Cell& c = cells[t];
    return {c.origin.x + c.jac[0] * ref.x + c.jac[1] * ref.y,
            c.origin.y + c.jac[2] * ref.x + c.jac[3] * ref.y};
  }

  Vec2 to_reference(int t, const Vec2& phys) const {
    const Cell& c = cells[t];
    const Vec2 d = phys - c.origin;
    const double inv_det = 1.0 / c.det;
    return {inv_det * (c.jac[3] * d.x - c.jac[1] * d.y),
            inv_det * (-c.jac[2] * d.x + c.jac[0] * d.y)};
  }

  // Pull a reference gradient back to physical coordinates.
  Vec2 phys_grad(int t, double gxi, double geta) const {
    const Cell& c = cells[t];
    return {c.inv_t[0] * gxi + c.inv_t[1] * geta, c.inv_t[2] * gxi + c.inv_t[3] * geta};
  }
};

inline AffineMaps make_affine_maps(const Mesh& mesh) {
  AffineMaps maps;
  maps.cells.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& v = mesh.triangles[t].vertices;
    const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
    AffineMaps::Cell c;
    c.origin = p0;
    c.jac = {p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y};
    c.det = c.jac[0] * c.jac[3] - c.jac[1] * c.jac[2];
    if (c.det <= 1e-14 * mesh.h_K[t] * mesh.h_K[t])
      throw Error("polybasis", "degenerate triangle " + std::to_string(t));
    const double inv_det = 1.0 / c.det;
    c.inv_t = {c.jac[3] * inv_det, -c.jac[2] * inv_det, -c.jac[1] * inv_det, c.jac[0] * inv_det};
    maps.cells[t] = c;
  }
  maps.facet_length.resize(mesh.facets.size());
  maps.facet_normal.resize(mesh.facets.size());
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& fac = mesh.facets[f];
    const Vec2 a = mesh.vertices[fac.vertices[0]], b = mesh.vertices[fac.vertices[1]];
    const Vec2 tangent = b - a;
    maps.facet_length[f] = tangent.norm();
    for (int s = 0; s < fac.num_owners; ++s) {
      // Normal orthogonal to the facet, oriented away from the owner centroid.
      Vec2 nrm{tangent.y, -tangent.x};
      const double len = nrm.norm();
      nrm = nrm * (1.0 / len);
      const Vec2 mid = (a + b) * 0.5;
      const Vec2 cvec = mesh.centroid(fac.owners[s]) - mid;
      if (nrm.dot(cvec) > 0.0) nrm = nrm * -1.0;
      maps.facet_normal[f][s] = nrm;
    }
  }
  return maps;
}

}  // namespace hdgsc
