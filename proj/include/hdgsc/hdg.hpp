#pragma once

#include <array>
#include <functional>
#include <numeric>
#include <vector>

#include "hdgsc/common.hpp"
#include "hdgsc/linalg.hpp"
#include "hdgsc/mesh.hpp"
#include "hdgsc/polybasis.hpp"

namespace hdgsc {

// Coefficient, data and (optionally) the exact solution of one problem
// instance. The sign convention is fixed as
//   div(sigma grad u) = f,   q = -sigma grad u,   div q = -f,
// which makes the HDG right-hand side (f, v) and the conforming
// variational form (sigma grad u, grad v) = -(f, v).
struct ProblemData {
  double sigma_plus = 1.0;
  double kappa = -1.001;  // contrast sigma_minus / sigma_plus, < 0

  std::function<double(const Vec2&, Subdomain)> f;
  std::function<double(const Vec2&)> u_dirichlet;
  std::function<double(const Vec2&)> u_neumann;

  bool has_exact = false;
  std::function<double(const Vec2&, Subdomain)> exact_u;
  std::function<Vec2(const Vec2&, Subdomain)> exact_grad;

  double sigma(Subdomain s) const {
    return s == Subdomain::Plus ? sigma_plus : kappa * sigma_plus;
  }

  Vec2 exact_q(const Vec2& p, Subdomain s) const {
    const Vec2 g = exact_grad(p, s);
    return g * (-sigma(s));
  }

  void validate() const {
    if (!(sigma_plus > 0.0)) throw Error("hdg", "sigma_plus must be positive");
    if (!(kappa < 0.0)) throw Error("hdg", "contrast kappa must be negative");
  }
};

// One stabilization value per facet; zero exactly on the interface, the
// owner-subdomain sign elsewhere.
struct TauField {
  std::vector<double> value;
};

inline TauField make_tau(const Mesh& mesh, const FacetClassification& cls, double gamma) {
  if (!(gamma > 0.0)) throw Error("hdg", "tau magnitude gamma must be positive");
  TauField tau;
  tau.value.resize(mesh.facets.size());
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    switch (cls.labels[f]) {
      case FacetLabel::Interface:
        tau.value[f] = 0.0;
        break;
      case FacetLabel::InteriorPlus:
        tau.value[f] = gamma;
        break;
      case FacetLabel::InteriorMinus:
        tau.value[f] = -gamma;
        break;
      case FacetLabel::Dirichlet:
      case FacetLabel::Neumann:
        tau.value[f] = mesh.triangles[mesh.facets[f].owners[0]].tag == Subdomain::Plus
                           ? gamma
                           : -gamma;
        break;
    }
  }
  return tau;
}

// Full symmetric local saddle block of one element in the layout
// [ q_x (nb) | q_y (nb) | u (nb) | trace dofs of the non-Dirichlet facets ].
// Dirichlet facets contribute boundary data to the right-hand side instead
// of trace columns.
struct LocalElementSystem {
  int element = -1;
  int nb = 0;  // dim P_k on the triangle
  int nf = 0;  // dim P_k on a facet
  std::vector<int> trace_facets;  // global facet ids, local facet order
  DenseMatrix matrix;
  std::vector<double> rhs;

  int interior_size() const { return 3 * nb; }
  int trace_size() const { return nf * int(trace_facets.size()); }
};

struct CondensedElement {
  int element = -1;
  std::vector<int> trace_facets;
  int nf = 0;
  int nt = 0;  // trace dofs of this element
  std::vector<long double> schur;  // nt x nt row-major, extended precision
  std::vector<double> rhs;

  long double schur_at(int r, int c) const { return schur[std::size_t(r) * nt + c]; }
};

// Element-wise fields q_h, u_h plus facet field ubar_h (zero on Dirichlet
// facets); coefficients in the orthonormal reference bases.
struct DiscreteSolution {
  int k = 0;
  std::vector<std::vector<double>> q;     // per element, 2*nb (x block then y block)
  std::vector<std::vector<double>> u;     // per element, nb
  std::vector<std::vector<double>> ubar;  // per facet, nf
  std::vector<std::vector<double>> ustar; // per element, dim P_{k+1}; empty until postprocess
};

// Shared discretization context: bases tabulated at the quadrature points and
// per-element geometry.
class HdgAssembler {
public:
  HdgAssembler(const Mesh& mesh, const FacetClassification& cls, int k,
               const ProblemData& problem, const TauField& tau, int quad_degree = -1)
      : mesh_(mesh),
        cls_(cls),
        k_(k),
        problem_(problem),
        tau_(tau),
        maps_(make_affine_maps(mesh)),
        tri_basis_(ElementKind::Triangle, k),
        seg_basis_(ElementKind::Segment, k),
        vol_rule_(make_quadrature(ElementKind::Triangle, quad_degree > 0 ? quad_degree : 2 * k + 2)),
        fac_rule_(make_quadrature(ElementKind::Segment, quad_degree > 0 ? quad_degree : 2 * k + 2)) {
    if (k < 0) throw Error("hdg", "polynomial degree must be >= 0");
    problem.validate();
    nb_ = tri_basis_.dimension();
    nf_ = seg_basis_.dimension();
    tabulate();
    number_trace_dofs();
  }

  const Mesh& mesh() const { return mesh_; }
  const FacetClassification& classification() const { return cls_; }
  const AffineMaps& maps() const { return maps_; }
  const ProblemData& problem() const { return problem_; }
  const TauField& tau() const { return tau_; }
  int k() const { return k_; }
  int nb() const { return nb_; }
  int nf() const { return nf_; }
  int num_trace_dofs() const { return num_trace_dofs_; }
  // Trace dof base index of a facet, -1 on Dirichlet facets.
  int trace_offset(int f) const { return trace_offset_[f]; }

  LocalElementSystem assemble_local(int t) const {
    const Triangle& tri = mesh_.triangles[t];
    const double sigma = problem_.sigma(tri.tag);
    const double det = maps_.cells[t].det;

    LocalElementSystem sys;
    sys.element = t;
    sys.nb = nb_;
    sys.nf = nf_;
    std::array<bool, 3> is_unknown{};
    for (int e = 0; e < 3; ++e) {
      const int f = tri.facets[e];
      is_unknown[e] = cls_.labels[f] != FacetLabel::Dirichlet;
      if (is_unknown[e]) sys.trace_facets.push_back(f);
    }
    const int n_int = 3 * nb_;
    const int n = n_int + nf_ * int(sys.trace_facets.size());
    sys.matrix = DenseMatrix(n, n);
    sys.rhs.assign(n, 0.0);
    DenseMatrix& m = sys.matrix;

    // Volume blocks. The reference mass matrix is the identity, so the
    // (sigma^{-1} q, r) block is diagonal.
    for (int i = 0; i < nb_; ++i) {
      m(i, i) += det / sigma;
      m(nb_ + i, nb_ + i) += det / sigma;
    }
    // (grad u, r) and its transpose.
    for (std::size_t qp = 0; qp < vol_rule_.size(); ++qp) {
      const double w = vol_rule_.weights[qp] * det;
      for (int i = 0; i < nb_; ++i)
        for (int j = 0; j < nb_; ++j) {
          const Vec2 g = maps_.phys_grad(t, vol_gx_[qp][j], vol_gy_[qp][j]);
          const double vi = vol_val_[qp][i];
          m(i, 2 * nb_ + j) += w * vi * g.x;
          m(2 * nb_ + j, i) += w * vi * g.x;
          m(nb_ + i, 2 * nb_ + j) += w * vi * g.y;
          m(2 * nb_ + j, nb_ + i) += w * vi * g.y;
        }
      // (f, v) source term.
      const Vec2 x = maps_.to_physical(t, vol_rule_.points[qp]);
      const double fv = problem_.f ? problem_.f(x, tri.tag) : 0.0;
      for (int i = 0; i < nb_; ++i) sys.rhs[2 * nb_ + i] += w * fv * vol_val_[qp][i];
    }

    // Facet blocks.
    int trace_slot = 0;
    for (int e = 0; e < 3; ++e) {
      const int f = tri.facets[e];
      const Facet& fac = mesh_.facets[f];
      const double len = maps_.facet_length[f];
      const int slot = fac.owners[0] == t ? 0 : 1;
      const Vec2 nrm = maps_.facet_normal[f][slot];
      const double tau_f = tau_.value[f];
      const FacetLabel label = cls_.labels[f];
      const int base = is_unknown[e] ? n_int + nf_ * trace_slot : -1;

      const Vec2 pa = mesh_.vertices[fac.vertices[0]];
      const Vec2 pb = mesh_.vertices[fac.vertices[1]];
      for (std::size_t qp = 0; qp < fac_rule_.size(); ++qp) {
        const double tpar = fac_rule_.points[qp].x;
        const double w = fac_rule_.weights[qp] * len;
        const Vec2 x = pa + tpar * (pb - pa);
        const Vec2 ref = maps_.to_reference(t, x);
        const std::vector<double> kv = tri_basis_.eval(ref);
        const std::vector<double>& fv = fac_val_[qp];

        for (int i = 0; i < nb_; ++i) {
          for (int j = 0; j < nb_; ++j) {
            const double mass = w * kv[i] * kv[j];
            // -<u, r.n> and transpose.
            m(i, 2 * nb_ + j) -= mass * nrm.x;
            m(2 * nb_ + j, i) -= mass * nrm.x;
            m(nb_ + i, 2 * nb_ + j) -= mass * nrm.y;
            m(2 * nb_ + j, nb_ + i) -= mass * nrm.y;
            // -<tau u, v>.
            m(2 * nb_ + i, 2 * nb_ + j) -= tau_f * mass;
          }
          if (base >= 0) {
            for (int mm = 0; mm < nf_; ++mm) {
              const double mix = w * kv[i] * fv[mm];
              // +<ubar, r.n> and transpose.
              m(i, base + mm) += mix * nrm.x;
              m(base + mm, i) += mix * nrm.x;
              m(nb_ + i, base + mm) += mix * nrm.y;
              m(base + mm, nb_ + i) += mix * nrm.y;
              // +<tau ubar, v> and transpose.
              m(2 * nb_ + i, base + mm) += tau_f * mix;
              m(base + mm, 2 * nb_ + i) += tau_f * mix;
            }
          }
        }
        if (base >= 0) {
          // -<tau ubar, vbar>.
          for (int mm = 0; mm < nf_; ++mm)
            for (int mm2 = 0; mm2 < nf_; ++mm2)
              m(base + mm, base + mm2) -= tau_f * w * fv[mm] * fv[mm2];
          if (label == FacetLabel::Neumann) {
            const double un = problem_.u_neumann ? problem_.u_neumann(x) : 0.0;
            for (int mm = 0; mm < nf_; ++mm) sys.rhs[base + mm] += w * un * fv[mm];
          }
        } else {
          // Dirichlet facet: ubar is replaced by the boundary data.
          const double ud = problem_.u_dirichlet ? problem_.u_dirichlet(x) : 0.0;
          for (int i = 0; i < nb_; ++i) {
            sys.rhs[i] -= w * ud * kv[i] * nrm.x;
            sys.rhs[nb_ + i] -= w * ud * kv[i] * nrm.y;
            sys.rhs[2 * nb_ + i] -= tau_f * w * ud * kv[i];
          }
        }
      }
      if (is_unknown[e]) ++trace_slot;
    }
    return sys;
  }

  static CondensedElement condense(const LocalElementSystem& local) {
    const int ni = local.interior_size();
    const int nt = local.trace_size();
    CondensedElement out;
    out.element = local.element;
    out.trace_facets = local.trace_facets;
    out.nf = local.nf;
    out.nt = nt;
    out.schur.assign(std::size_t(nt) * nt, 0.0L);
    out.rhs.assign(nt, 0.0);

    // The Schur complement is formed in extended precision: the interior block
    // mixes volume (~h^2) and facet (~h) scales, and near-critical contrasts
    // amplify elementwise roundoff of the condensed matrix by several orders.
    // Factor M_ii with partial pivoting, augmented with [M_it | rhs_i].
    std::vector<long double> mii(std::size_t(ni) * ni);
    std::vector<std::vector<long double>> aug(nt + 1, std::vector<long double>(ni));
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < ni; ++j) mii[std::size_t(i) * ni + j] = local.matrix(i, j);
      for (int c = 0; c < nt; ++c) aug[c][i] = local.matrix(i, ni + c);
      aug[nt][i] = local.rhs[i];
    }
    for (int p = 0; p < ni; ++p) {
      int piv = p;
      for (int i = p + 1; i < ni; ++i)
        if (std::abs(mii[std::size_t(i) * ni + p]) > std::abs(mii[std::size_t(piv) * ni + p]))
          piv = i;
      if (std::abs(mii[std::size_t(piv) * ni + p]) < 1e-14)
        throw Error("hdg", "singular local block on element " + std::to_string(local.element) +
                               " (tau sign condition violated?)");
      if (piv != p) {
        for (int j = 0; j < ni; ++j)
          std::swap(mii[std::size_t(p) * ni + j], mii[std::size_t(piv) * ni + j]);
        for (auto& v : aug) std::swap(v[p], v[piv]);
      }
      const long double d = mii[std::size_t(p) * ni + p];
      for (int i = p + 1; i < ni; ++i) {
        const long double m = mii[std::size_t(i) * ni + p] / d;
        if (m == 0.0L) continue;
        for (int j = p; j < ni; ++j) mii[std::size_t(i) * ni + j] -= m * mii[std::size_t(p) * ni + j];
        for (auto& v : aug) v[i] -= m * v[p];
      }
    }
    for (auto& v : aug)  // back substitution, per right-hand side
      for (int i = ni - 1; i >= 0; --i) {
        long double s = v[i];
        for (int j = i + 1; j < ni; ++j) s -= mii[std::size_t(i) * ni + j] * v[j];
        v[i] = s / mii[std::size_t(i) * ni + i];
      }

    for (int r = 0; r < nt; ++r) {
      long double g = local.rhs[ni + r];
      for (int i = 0; i < ni; ++i) g -= (long double)local.matrix(ni + r, i) * aug[nt][i];
      out.rhs[r] = double(g);
      for (int c = 0; c < nt; ++c) {
        long double s = local.matrix(ni + r, ni + c);
        for (int i = 0; i < ni; ++i) s -= (long double)local.matrix(ni + r, i) * aug[c][i];
        out.schur[std::size_t(r) * nt + c] = s;
      }
    }
    return out;
  }

  // Assembles the condensed global trace system.
  void assemble_global(SparseMatrix& matrix, std::vector<double>& rhs) const {
    std::vector<Triplet> triplets;
    rhs.assign(num_trace_dofs_, 0.0);
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      const CondensedElement ce = condense(assemble_local(int(t)));
      const int nt = int(ce.trace_facets.size()) * nf_;
      std::vector<int> gdof(nt);
      for (std::size_t lf = 0; lf < ce.trace_facets.size(); ++lf)
        for (int mm = 0; mm < nf_; ++mm)
          gdof[lf * nf_ + mm] = trace_offset_[ce.trace_facets[lf]] + mm;
      for (int r = 0; r < nt; ++r) {
        rhs[gdof[r]] += ce.rhs[r];
        for (int c = 0; c < nt; ++c) triplets.push_back({gdof[r], gdof[c], ce.schur_at(r, c)});
      }
    }
    matrix = SparseMatrix::from_triplets(num_trace_dofs_, std::move(triplets));
  }

  DiscreteSolution solve() const {
    SparseMatrix a;
    std::vector<double> b;
    assemble_global(a, b);
    const std::vector<double> x = num_trace_dofs_ > 0 ? sparse_lu_solve(a, b)
                                                      : std::vector<double>{};
    return recover(x);
  }

  // Element-wise recovery of (q_h, u_h) from the trace solution.
  DiscreteSolution recover(const std::vector<double>& trace) const {
    DiscreteSolution sol;
    sol.k = k_;
    sol.q.resize(mesh_.triangles.size());
    sol.u.resize(mesh_.triangles.size());
    sol.ubar.assign(mesh_.facets.size(), std::vector<double>(nf_, 0.0));
    for (std::size_t f = 0; f < mesh_.facets.size(); ++f)
      if (trace_offset_[f] >= 0)
        for (int mm = 0; mm < nf_; ++mm) sol.ubar[f][mm] = trace[trace_offset_[f] + mm];

    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      const LocalElementSystem sys = assemble_local(int(t));
      const int ni = sys.interior_size();
      DenseMatrix mii(ni, ni);
      for (int i = 0; i < ni; ++i)
        for (int j = 0; j < ni; ++j) mii(i, j) = sys.matrix(i, j);
      std::vector<double> rhs(sys.rhs.begin(), sys.rhs.begin() + ni);
      for (std::size_t lf = 0; lf < sys.trace_facets.size(); ++lf) {
        const int f = sys.trace_facets[lf];
        for (int mm = 0; mm < nf_; ++mm) {
          const double ub = sol.ubar[f][mm];
          for (int i = 0; i < ni; ++i) rhs[i] -= sys.matrix(i, ni + int(lf) * nf_ + mm) * ub;
        }
      }
      const std::vector<double> xi = DenseLU(std::move(mii)).solve(rhs);
      sol.q[t].assign(xi.begin(), xi.begin() + 2 * nb_);
      sol.u[t].assign(xi.begin() + 2 * nb_, xi.end());
    }
    return sol;
  }

  // Evaluates u_h (element field) at a reference point of element t.
  double eval_u(const DiscreteSolution& sol, int t, const Vec2& ref) const {
    const std::vector<double> v = tri_basis_.eval(ref);
    return std::inner_product(v.begin(), v.end(), sol.u[t].begin(), 0.0);
  }

  Vec2 eval_q(const DiscreteSolution& sol, int t, const Vec2& ref) const {
    const std::vector<double> v = tri_basis_.eval(ref);
    Vec2 q{0.0, 0.0};
    for (int i = 0; i < nb_; ++i) {
      q.x += sol.q[t][i] * v[i];
      q.y += sol.q[t][nb_ + i] * v[i];
    }
    return q;
  }

  const BasisSet& tri_basis() const { return tri_basis_; }
  const BasisSet& seg_basis() const { return seg_basis_; }
  const QuadratureRule& facet_rule() const { return fac_rule_; }

private:
  void tabulate() {
    vol_val_.resize(vol_rule_.size());
    vol_gx_.resize(vol_rule_.size());
    vol_gy_.resize(vol_rule_.size());
    for (std::size_t qp = 0; qp < vol_rule_.size(); ++qp)
      tri_basis_.eval_with_grad(vol_rule_.points[qp], vol_val_[qp], vol_gx_[qp], vol_gy_[qp]);
    fac_val_.resize(fac_rule_.size());
    for (std::size_t qp = 0; qp < fac_rule_.size(); ++qp)
      fac_val_[qp] = seg_basis_.eval(fac_rule_.points[qp]);
  }

  // Facet-lexicographic dof ordering (midpoint x1 then x2) keeps runs
  // reproducible independent of facet construction order.
  void number_trace_dofs() {
    std::vector<int> order;
    for (std::size_t f = 0; f < mesh_.facets.size(); ++f)
      if (cls_.labels[f] != FacetLabel::Dirichlet) order.push_back(int(f));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Vec2 ma = mesh_.facet_midpoint(a), mb = mesh_.facet_midpoint(b);
      if (ma.x != mb.x) return ma.x < mb.x;
      return ma.y < mb.y;
    });
    trace_offset_.assign(mesh_.facets.size(), -1);
    int next = 0;
    for (int f : order) {
      trace_offset_[f] = next;
      next += nf_;
    }
    num_trace_dofs_ = next;
  }

  const Mesh& mesh_;
  const FacetClassification& cls_;
  int k_;
  const ProblemData& problem_;
  const TauField& tau_;
  AffineMaps maps_;
  BasisSet tri_basis_;
  BasisSet seg_basis_;
  QuadratureRule vol_rule_;
  QuadratureRule fac_rule_;
  int nb_ = 0;
  int nf_ = 0;
  int num_trace_dofs_ = 0;
  std::vector<int> trace_offset_;
  std::vector<std::vector<double>> vol_val_, vol_gx_, vol_gy_;
  std::vector<std::vector<double>> fac_val_;
};

inline DiscreteSolution solve_hdg(const Mesh& mesh, const FacetClassification& cls, int k,
                                  const ProblemData& problem, const TauField& tau,
                                  int quad_degree = -1) {
  return HdgAssembler(mesh, cls, k, problem, tau, quad_degree).solve();
}

}  // namespace hdgsc
