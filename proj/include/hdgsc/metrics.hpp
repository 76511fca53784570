#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hdgsc/hdg.hpp"
#include "hdgsc/postprocess.hpp"

namespace hdgsc {

struct ErrorReport {
  double e_u = 0.0;       // ||u - u_h||_Omega
  double e_q_l2 = 0.0;    // ||q - q_h||_Omega
  double e_q_vh = 0.0;    // (|sigma|^{-1} (q-q_h), (q-q_h))^{1/2}
  double e_ubar = 0.0;    // <P_M u - ubar_h, P_M u - ubar_h>^{1/2} over dT_h \ F_D
  double e_ustar = 0.0;   // ||u - u_h*||_Omega, when a post-processed field is given
  double h = 0.0;
  int cells = 0;
};

struct ConvergenceRow {
  ErrorReport errors;
  // Rates between consecutive rows; NaN marks an absent rate.
  double rate_u = std::numeric_limits<double>::quiet_NaN();
  double rate_q_l2 = std::numeric_limits<double>::quiet_NaN();
  double rate_q_vh = std::numeric_limits<double>::quiet_NaN();
  double rate_ubar = std::numeric_limits<double>::quiet_NaN();
  double rate_ustar = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

inline ErrorReport compute_errors(const HdgAssembler& assembler, const DiscreteSolution& sol,
                                  const PostprocessedField* star, int quad_degree = -1) {
  const ProblemData& problem = assembler.problem();
  if (!problem.has_exact) throw Error("metrics", "problem carries no exact solution");
  const Mesh& mesh = assembler.mesh();
  const AffineMaps& maps = assembler.maps();
  const int k = assembler.k();
  const int nb = assembler.nb();
  const QuadratureRule rule =
      make_quadrature(ElementKind::Triangle, quad_degree > 0 ? quad_degree : 2 * k + 4);

  std::vector<std::vector<double>> kv(rule.size());
  for (std::size_t qp = 0; qp < rule.size(); ++qp)
    kv[qp] = assembler.tri_basis().eval(rule.points[qp]);
  std::optional<BasisSet> star_basis;
  std::vector<std::vector<double>> svv;
  if (star) {
    star_basis.emplace(ElementKind::Triangle, star->degree);
    svv.resize(rule.size());
    for (std::size_t qp = 0; qp < rule.size(); ++qp)
      svv[qp] = star_basis->eval(rule.points[qp]);
  }

  ErrorReport rep;
  rep.h = mesh.h;
  rep.cells = int(mesh.triangles.size());
  double eu2 = 0.0, eq2 = 0.0, eqv2 = 0.0, estar2 = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Subdomain tag = mesh.triangles[t].tag;
    const double det = maps.cells[t].det;
    const double abs_inv_sigma = 1.0 / std::abs(problem.sigma(tag));
    for (std::size_t qp = 0; qp < rule.size(); ++qp) {
      const double w = rule.weights[qp] * det;
      const Vec2 x = maps.to_physical(int(t), rule.points[qp]);
      double uh = 0.0;
      Vec2 qh{0.0, 0.0};
      for (int j = 0; j < nb; ++j) {
        uh += sol.u[t][j] * kv[qp][j];
        qh.x += sol.q[t][j] * kv[qp][j];
        qh.y += sol.q[t][nb + j] * kv[qp][j];
      }
      const double du = problem.exact_u(x, tag) - uh;
      const Vec2 dq = problem.exact_q(x, tag) - qh;
      eu2 += w * du * du;
      eq2 += w * dq.dot(dq);
      eqv2 += w * abs_inv_sigma * dq.dot(dq);
      if (star) {
        double us = 0.0;
        for (std::size_t i = 0; i < svv[qp].size(); ++i) us += star->coeffs[t][i] * svv[qp][i];
        const double ds = problem.exact_u(x, tag) - us;
        estar2 += w * ds * ds;
      }
    }
  }
  rep.e_u = std::sqrt(eu2);
  rep.e_q_l2 = std::sqrt(eq2);
  rep.e_q_vh = std::sqrt(eqv2);
  rep.e_ustar = star ? std::sqrt(estar2) : 0.0;

  // Facet trace error: interior facets are counted once per owner (the sum
  // runs over element boundaries).
  const QuadratureRule seg = make_quadrature(ElementKind::Segment, 2 * k + 4);
  const BasisSet& fb = assembler.seg_basis();
  const int nf = assembler.nf();
  std::vector<std::vector<double>> fv(seg.size());
  for (std::size_t qp = 0; qp < seg.size(); ++qp) fv[qp] = fb.eval(seg.points[qp]);
  double ebar2 = 0.0;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    if (assembler.classification().labels[f] == FacetLabel::Dirichlet) continue;
    const Facet& fac = mesh.facets[f];
    const Vec2 a = mesh.vertices[fac.vertices[0]], b = mesh.vertices[fac.vertices[1]];
    const double len = maps.facet_length[f];
    const Subdomain tag = mesh.triangles[fac.owners[0]].tag;
    // Facet-wise L2 projection of the exact trace (orthonormal facet basis).
    std::vector<double> pm(nf, 0.0);
    for (std::size_t qp = 0; qp < seg.size(); ++qp) {
      const Vec2 x = a + seg.points[qp].x * (b - a);
      const double ue = problem.exact_u(x, tag);
      for (int mm = 0; mm < nf; ++mm) pm[mm] += seg.weights[qp] * ue * fv[qp][mm];
    }
    double d2 = 0.0;
    for (int mm = 0; mm < nf; ++mm) {
      const double d = pm[mm] - sol.ubar[f][mm];
      d2 += d * d;
    }
    ebar2 += fac.num_owners * len * d2;
  }
  rep.e_ubar = std::sqrt(ebar2);
  return rep;
}

// EOC computed with the actual h-ratio (mapped meshes do not halve exactly).
inline void compute_rates(ConvergenceTable& table) {
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const ErrorReport& c = table.rows[i - 1].errors;
    const ErrorReport& f = table.rows[i].errors;
    if (!(f.h < c.h)) throw Error("metrics", "rows must be ordered by decreasing h");
    const double lh = std::log(c.h / f.h);
    auto rate = [&](double ec, double ef) {
      if (ef <= 0.0 || ec <= 0.0) return std::numeric_limits<double>::quiet_NaN();
      return std::log(ec / ef) / lh;
    };
    table.rows[i].rate_u = rate(c.e_u, f.e_u);
    table.rows[i].rate_q_l2 = rate(c.e_q_l2, f.e_q_l2);
    table.rows[i].rate_q_vh = rate(c.e_q_vh, f.e_q_vh);
    table.rows[i].rate_ubar = rate(c.e_ubar, f.e_ubar);
    table.rows[i].rate_ustar = rate(c.e_ustar, f.e_ustar);
  }
}

// Maximum over interior/interface facets of the P_k moments of the jump of
// the numerical flux qhat.n = q_h.n + tau (u_h - ubar_h); near round-off for
// a converged solve.
inline double flux_jump_residual(const HdgAssembler& assembler, const DiscreteSolution& sol) {
  const Mesh& mesh = assembler.mesh();
  const AffineMaps& maps = assembler.maps();
  const QuadratureRule& seg = assembler.facet_rule();
  const BasisSet& fb = assembler.seg_basis();
  const int nf = assembler.nf();
  std::vector<std::vector<double>> fv(seg.size());
  for (std::size_t qp = 0; qp < seg.size(); ++qp) fv[qp] = fb.eval(seg.points[qp]);

  double worst = 0.0;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& fac = mesh.facets[f];
    if (fac.num_owners != 2) continue;
    const Vec2 a = mesh.vertices[fac.vertices[0]], b = mesh.vertices[fac.vertices[1]];
    const double len = maps.facet_length[f];
    const double tau_f = assembler.tau().value[f];
    std::vector<double> moments(nf, 0.0);
    for (int s = 0; s < 2; ++s) {
      const int t = fac.owners[s];
      const Vec2 nrm = maps.facet_normal[f][s];
      for (std::size_t qp = 0; qp < seg.size(); ++qp) {
        const Vec2 x = a + seg.points[qp].x * (b - a);
        const Vec2 ref = maps.to_reference(t, x);
        const Vec2 qh = assembler.eval_q(sol, t, ref);
        const double uh = assembler.eval_u(sol, t, ref);
        double ubar = 0.0;
        for (int mm = 0; mm < nf; ++mm) ubar += sol.ubar[f][mm] * fv[qp][mm];
        const double flux = qh.dot(nrm) + tau_f * (uh - ubar);
        for (int mm = 0; mm < nf; ++mm)
          moments[mm] += seg.weights[qp] * len * flux * fv[qp][mm];
      }
    }
    for (int mm = 0; mm < nf; ++mm) worst = std::max(worst, std::abs(moments[mm]));
  }
  return worst;
}

// L2 norm of q_h, used to scale the flux residual.
inline double q_norm(const HdgAssembler& assembler, const DiscreteSolution& sol) {
  // Orthonormal reference basis: ||q_h||^2_K = det_K * |coeffs|^2.
  double s = 0.0;
  for (std::size_t t = 0; t < sol.q.size(); ++t) {
    double c2 = 0.0;
    for (double c : sol.q[t]) c2 += c * c;
    s += assembler.maps().cells[t].det * c2;
  }
  return std::sqrt(s);
}

}  // namespace hdgsc
