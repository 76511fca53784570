#pragma once

#include <unordered_map>
#include <vector>

#include "hdgsc/hdg.hpp"
#include "hdgsc/linalg.hpp"
#include "hdgsc/mesh.hpp"
#include "hdgsc/polybasis.hpp"

namespace hdgsc {

// H1-conforming Lagrange P_k baseline for the sign-indefinite variational
// problem (sigma grad u, grad v) = -(f, v) - <u_N, v>_{Gamma_N}, with
// Dirichlet nodes eliminated.
class CgSolver {
public:
  CgSolver(const Mesh& mesh, const FacetClassification& cls, int k, const ProblemData& problem,
           int quad_degree = -1)
      : mesh_(mesh),
        cls_(cls),
        k_(k),
        problem_(problem),
        maps_(make_affine_maps(mesh)),
        rule_(make_quadrature(ElementKind::Triangle, quad_degree > 0 ? quad_degree : 2 * k + 2)) {
    if (k < 1) throw Error("cg", "the conforming method requires k >= 1");
    problem.validate();
    build_reference_lattice();
    build_lagrange_tables();
    number_dofs();
  }

  int num_dofs() const { return num_dofs_; }

  std::vector<double> solve() const {
    // Dirichlet node values.
    std::vector<char> constrained(num_dofs_, 0);
    std::vector<double> bc_value(num_dofs_, 0.0);
    for (std::size_t f = 0; f < mesh_.facets.size(); ++f) {
      if (cls_.labels[f] != FacetLabel::Dirichlet) continue;
      const Facet& fac = mesh_.facets[f];
      const Vec2 a = mesh_.vertices[fac.vertices[0]], b = mesh_.vertices[fac.vertices[1]];
      for (int v = 0; v < 2; ++v) {
        const int d = fac.vertices[v];
        constrained[d] = 1;
        bc_value[d] = problem_.u_dirichlet ? problem_.u_dirichlet(mesh_.vertices[d]) : 0.0;
      }
      for (int mm = 0; mm < k_ - 1; ++mm) {
        const int d = edge_dof(int(f), mm);
        const Vec2 x = a + double(mm + 1) / k_ * (b - a);
        constrained[d] = 1;
        bc_value[d] = problem_.u_dirichlet ? problem_.u_dirichlet(x) : 0.0;
      }
    }

    std::vector<int> reduced(num_dofs_, -1);
    int n_free = 0;
    for (int d = 0; d < num_dofs_; ++d)
      if (!constrained[d]) reduced[d] = n_free++;

    std::vector<Triplet> triplets;
    std::vector<double> rhs(n_free, 0.0);
    const int nl = int(lattice_.size());
    std::vector<int> gdof(nl);
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      element_dofs(int(t), gdof);
      const double sigma = problem_.sigma(mesh_.triangles[t].tag);
      const double det = maps_.cells[t].det;
      DenseMatrix ke(nl, nl);
      std::vector<double> fe(nl, 0.0);
      for (std::size_t qp = 0; qp < rule_.size(); ++qp) {
        const double w = rule_.weights[qp] * det;
        std::vector<Vec2> g(nl);
        for (int a = 0; a < nl; ++a)
          g[a] = maps_.phys_grad(int(t), lag_gx_[qp][a], lag_gy_[qp][a]);
        for (int a = 0; a < nl; ++a)
          for (int b = 0; b < nl; ++b) ke(a, b) += sigma * w * g[a].dot(g[b]);
        const Vec2 x = maps_.to_physical(int(t), rule_.points[qp]);
        const double fv = problem_.f ? problem_.f(x, mesh_.triangles[t].tag) : 0.0;
        for (int a = 0; a < nl; ++a) fe[a] -= w * fv * lag_val_[qp][a];
      }
      // Neumann facet contributions.
      for (int e = 0; e < 3; ++e) {
        const int f = mesh_.triangles[t].facets[e];
        if (cls_.labels[f] != FacetLabel::Neumann || problem_.u_neumann == nullptr) continue;
        if (mesh_.facets[f].owners[0] != int(t)) continue;
        const Facet& fac = mesh_.facets[f];
        const Vec2 pa = mesh_.vertices[fac.vertices[0]], pb = mesh_.vertices[fac.vertices[1]];
        const double len = maps_.facet_length[f];
        const QuadratureRule seg = make_quadrature(ElementKind::Segment, 2 * k_ + 2);
        for (std::size_t qp = 0; qp < seg.size(); ++qp) {
          const Vec2 x = pa + seg.points[qp].x * (pb - pa);
          const Vec2 ref = maps_.to_reference(int(t), x);
          const double w = seg.weights[qp] * len;
          const std::vector<double> lv = eval_lagrange(ref);
          for (int a = 0; a < nl; ++a) fe[a] -= w * problem_.u_neumann(x) * lv[a];
        }
      }
      for (int a = 0; a < nl; ++a) {
        const int ra = reduced[gdof[a]];
        if (ra < 0) continue;
        double r = fe[a];
        for (int b = 0; b < nl; ++b) {
          const int rb = reduced[gdof[b]];
          if (rb >= 0)
            triplets.push_back({ra, rb, ke(a, b)});
          else
            r -= ke(a, b) * bc_value[gdof[b]];
        }
        rhs[ra] += r;
      }
    }

    const SparseMatrix a = SparseMatrix::from_triplets(n_free, std::move(triplets));
    std::vector<double> xfree;
    try {
      xfree = n_free > 0 ? sparse_lu_solve(a, rhs) : std::vector<double>{};
    } catch (const Error& e) {
      throw Error("cg", std::string("singular conforming system (contrast near the critical "
                                    "interval?): ") + e.what());
    }
    std::vector<double> u(num_dofs_);
    for (int d = 0; d < num_dofs_; ++d) u[d] = constrained[d] ? bc_value[d] : xfree[reduced[d]];
    return u;
  }

  // Evaluates the nodal solution at a reference point of element t.
  double eval(const std::vector<double>& u, int t, const Vec2& ref) const {
    std::vector<int> gdof(lattice_.size());
    element_dofs(t, gdof);
    const std::vector<double> lv = eval_lagrange(ref);
    double s = 0.0;
    for (std::size_t a = 0; a < lattice_.size(); ++a) s += u[gdof[a]] * lv[a];
    return s;
  }

  double l2_error(const std::vector<double>& u, int quad_degree = -1) const {
    if (!problem_.has_exact) throw Error("cg", "no exact solution available");
    const QuadratureRule rule =
        make_quadrature(ElementKind::Triangle, quad_degree > 0 ? quad_degree : 2 * k_ + 4);
    double err2 = 0.0;
    for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
      const double det = maps_.cells[t].det;
      for (std::size_t qp = 0; qp < rule.size(); ++qp) {
        const Vec2 x = maps_.to_physical(int(t), rule.points[qp]);
        const double d =
            eval(u, int(t), rule.points[qp]) - problem_.exact_u(x, mesh_.triangles[t].tag);
        err2 += rule.weights[qp] * det * d * d;
      }
    }
    return std::sqrt(err2);
  }

private:
  struct LatticeNode {
    Vec2 ref;
    int kind;  // 0 vertex, 1 edge, 2 interior
    int sub;   // vertex id / edge id
    int pos;   // step index along the edge, 1..k-1
  };

  void build_reference_lattice() {
    const std::array<Vec2, 3> corners{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    for (int i = 0; i <= k_; ++i)
      for (int j = 0; j <= k_ - i; ++j) {
        LatticeNode node;
        node.ref = {double(i) / k_, double(j) / k_};
        const int l = k_ - i - j;
        if ((i == k_) || (j == k_) || (l == k_)) {
          node.kind = 0;
          node.sub = i == k_ ? 1 : (j == k_ ? 2 : 0);
        } else if (l == 0) {
          node.kind = 1;  // edge 0: between corners 1 and 2
          node.sub = 0;
          node.pos = j;  // steps from corner 1 toward corner 2
        } else if (i == 0) {
          node.kind = 1;  // edge 1: between corners 2 and 0
          node.sub = 1;
          node.pos = l;  // steps from corner 2 toward corner 0
        } else if (j == 0) {
          node.kind = 1;  // edge 2: between corners 0 and 1
          node.sub = 2;
          node.pos = i;  // steps from corner 0 toward corner 1
        } else {
          node.kind = 2;
          node.sub = 0;
        }
        lattice_.push_back(node);
      }
  }

  // Lagrange basis via Vandermonde inversion against the orthonormal basis.
  void build_lagrange_tables() {
    const BasisSet basis(ElementKind::Triangle, k_);
    const int n = basis.dimension();
    DenseMatrix vand(n, n);
    for (int a = 0; a < n; ++a) {
      const std::vector<double> v = basis.eval(lattice_[a].ref);
      for (int i = 0; i < n; ++i) vand(a, i) = v[i];
    }
    const DenseLU lu(vand);
    coeff_ = DenseMatrix(n, n);  // coeff_(i, a): L_a = sum_i coeff_(i,a) phi_i
    std::vector<double> e(n, 0.0);
    for (int a = 0; a < n; ++a) {
      e.assign(n, 0.0);
      e[a] = 1.0;
      const std::vector<double> c = lu.solve(e);
      for (int i = 0; i < n; ++i) coeff_(i, a) = c[i];
    }
    lag_val_.resize(rule_.size());
    lag_gx_.resize(rule_.size());
    lag_gy_.resize(rule_.size());
    std::vector<double> pv, px, py;
    for (std::size_t qp = 0; qp < rule_.size(); ++qp) {
      basis.eval_with_grad(rule_.points[qp], pv, px, py);
      lag_val_[qp].assign(n, 0.0);
      lag_gx_[qp].assign(n, 0.0);
      lag_gy_[qp].assign(n, 0.0);
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
          lag_val_[qp][a] += coeff_(i, a) * pv[i];
          lag_gx_[qp][a] += coeff_(i, a) * px[i];
          lag_gy_[qp][a] += coeff_(i, a) * py[i];
        }
    }
  }

  std::vector<double> eval_lagrange(const Vec2& ref) const {
    const BasisSet basis(ElementKind::Triangle, k_);
    const std::vector<double> pv = basis.eval(ref);
    const int n = basis.dimension();
    std::vector<double> lv(n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) lv[a] += coeff_(i, a) * pv[i];
    return lv;
  }

  void number_dofs() {
    const int nv = int(mesh_.vertices.size());
    const int nfac = int(mesh_.facets.size());
    const int per_edge = k_ - 1;
    interior_per_element_ = (k_ - 1) * (k_ - 2) / 2;
    edge_base_ = nv;
    interior_base_ = nv + nfac * per_edge;
    num_dofs_ = interior_base_ + int(mesh_.triangles.size()) * interior_per_element_;
  }

  int edge_dof(int facet, int m) const { return edge_base_ + facet * (k_ - 1) + m; }

  void element_dofs(int t, std::vector<int>& gdof) const {
    const Triangle& tri = mesh_.triangles[t];
    int interior_count = 0;
    for (std::size_t a = 0; a < lattice_.size(); ++a) {
      const LatticeNode& node = lattice_[a];
      if (node.kind == 0) {
        gdof[a] = tri.vertices[node.sub];
      } else if (node.kind == 1) {
        const int e = node.sub;
        const int f = tri.facets[e];
        const int from = tri.vertices[(e + 1) % 3];
        // Edge dofs are stored along the canonical facet direction.
        const int m = from == mesh_.facets[f].vertices[0] ? node.pos - 1 : k_ - 1 - node.pos;
        gdof[a] = edge_dof(f, m);
      } else {
        gdof[a] = interior_base_ + t * interior_per_element_ + interior_count++;
      }
    }
  }

  const Mesh& mesh_;
  const FacetClassification& cls_;
  int k_;
  const ProblemData& problem_;
  AffineMaps maps_;
  QuadratureRule rule_;
  std::vector<LatticeNode> lattice_;
  DenseMatrix coeff_;
  std::vector<std::vector<double>> lag_val_, lag_gx_, lag_gy_;
  int num_dofs_ = 0;
  int edge_base_ = 0;
  int interior_base_ = 0;
  int interior_per_element_ = 0;
};

}  // namespace hdgsc
