#pragma once

#include <vector>

#include "hdgsc/hdg.hpp"

namespace hdgsc {

// Element-local post-processing: u* in P_{k+1}(K) with
//   (grad u*, grad v)_K = -(sigma^{-1} q_h, grad v)_K  for all v,
//   (u*, 1)_K = (u_h, 1)_K.
// The gradient system has the constants as kernel; the mean constraint is
// enforced with one Lagrange multiplier row.
struct PostprocessedField {
  int degree = 0;  // k + 1
  std::vector<std::vector<double>> coeffs;  // per element, dim P_{k+1}
};

inline PostprocessedField postprocess(const HdgAssembler& assembler,
                                      const DiscreteSolution& sol) {
  const Mesh& mesh = assembler.mesh();
  const AffineMaps& maps = assembler.maps();
  const int k = assembler.k();
  const BasisSet star_basis(ElementKind::Triangle, k + 1);
  const int ns = star_basis.dimension();
  const int nb = assembler.nb();
  const QuadratureRule rule = make_quadrature(ElementKind::Triangle, 2 * (k + 1));

  // Reference tables.
  std::vector<std::vector<double>> sv(rule.size()), sgx(rule.size()), sgy(rule.size());
  std::vector<std::vector<double>> kv(rule.size());
  for (std::size_t qp = 0; qp < rule.size(); ++qp) {
    star_basis.eval_with_grad(rule.points[qp], sv[qp], sgx[qp], sgy[qp]);
    kv[qp] = assembler.tri_basis().eval(rule.points[qp]);
  }

  PostprocessedField out;
  out.degree = k + 1;
  out.coeffs.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double det = maps.cells[t].det;
    const double inv_sigma = 1.0 / assembler.problem().sigma(mesh.triangles[t].tag);
    DenseMatrix a(ns + 1, ns + 1);
    std::vector<double> rhs(ns + 1, 0.0);
    for (std::size_t qp = 0; qp < rule.size(); ++qp) {
      const double w = rule.weights[qp] * det;
      std::vector<Vec2> g(ns);
      for (int i = 0; i < ns; ++i) g[i] = maps.phys_grad(int(t), sgx[qp][i], sgy[qp][i]);
      Vec2 qh{0.0, 0.0};
      double uh = 0.0;
      for (int j = 0; j < nb; ++j) {
        qh.x += sol.q[t][j] * kv[qp][j];
        qh.y += sol.q[t][nb + j] * kv[qp][j];
        uh += sol.u[t][j] * kv[qp][j];
      }
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < ns; ++j) a(i, j) += w * g[i].dot(g[j]);
        a(i, ns) += w * sv[qp][i];
        a(ns, i) += w * sv[qp][i];
        rhs[i] -= w * inv_sigma * qh.dot(g[i]);
      }
      rhs[ns] += w * uh;
    }
    const std::vector<double> x = DenseLU(std::move(a)).solve(rhs);
    out.coeffs[t].assign(x.begin(), x.begin() + ns);
  }
  return out;
}

inline double eval_ustar(const PostprocessedField& field, const BasisSet& star_basis, int t,
                         const Vec2& ref) {
  const std::vector<double> v = star_basis.eval(ref);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += field.coeffs[t][i] * v[i];
  return s;
}

}  // namespace hdgsc
