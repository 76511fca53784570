#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdgsc/mesh.hpp"
#include "hdgsc/polybasis.hpp"

using namespace hdgsc;

TEST_CASE("Gauss rule on the unit segment matches the 5-point reference values") {
  // Nodes/weights on [-1,1] from an independent reference, mapped to [0,1].
  const double xr[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                        0.5384693101056831, 0.9061798459386640};
  const double wr[5] = {0.2369268850561894, 0.4786286704993662, 0.5688888888888890,
                        0.4786286704993662, 0.2369268850561894};
  const QuadratureRule rule = make_quadrature(ElementKind::Segment, 9);
  REQUIRE(rule.points.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(rule.points[i].x == doctest::Approx(0.5 * (xr[i] + 1.0)).epsilon(1e-14));
    CHECK(rule.weights[i] == doctest::Approx(0.5 * wr[i]).epsilon(1e-14));
  }
}

static double tri_monomial(int a, int b, int degree) {
  const QuadratureRule rule = make_quadrature(ElementKind::Triangle, degree);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i)
    s += rule.weights[i] * std::pow(rule.points[i].x, a) * std::pow(rule.points[i].y, b);
  return s;
}

TEST_CASE("triangle rule integrates monomials exactly up to the requested degree") {
  // Reference values a! b! / (a+b+2)!.
  CHECK(tri_monomial(0, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tri_monomial(3, 2, 5) == doctest::Approx(0.002380952380952381).epsilon(1e-13));
  CHECK(tri_monomial(4, 4, 8) == doctest::Approx(0.00015873015873015873).epsilon(1e-12));
  CHECK(tri_monomial(6, 0, 6) == doctest::Approx(0.017857142857142856).epsilon(1e-13));
}

TEST_CASE("triangle basis is orthonormal under the reference measure") {
  for (int k = 0; k <= 4; ++k) {
    const BasisSet basis(ElementKind::Triangle, k);
    const QuadratureRule rule = make_quadrature(ElementKind::Triangle, 2 * k + 2);
    const int n = basis.dimension();
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const auto vi = basis.eval(rule.points[q]);
          s += rule.weights[q] * vi[i] * vi[j];
        }
        CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("segment basis is orthonormal on the unit interval") {
  const int k = 5;
  const BasisSet basis(ElementKind::Segment, k);
  const QuadratureRule rule = make_quadrature(ElementKind::Segment, 2 * k);
  for (int i = 0; i <= k; ++i)
    for (int j = i; j <= k; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto v = basis.eval(rule.points[q]);
        s += rule.weights[q] * v[i] * v[j];
      }
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("basis gradients match central finite differences") {
  const BasisSet basis(ElementKind::Triangle, 4);
  const double eps = 1e-6;
  const Vec2 pts[] = {{0.21, 0.33}, {0.05, 0.9}, {0.6, 0.1}, {1.0 / 3, 1.0 / 3}};
  for (const Vec2& p : pts) {
    std::vector<double> val, gx, gy;
    basis.eval_with_grad(p, val, gx, gy);
    const auto vxp = basis.eval({p.x + eps, p.y});
    const auto vxm = basis.eval({p.x - eps, p.y});
    const auto vyp = basis.eval({p.x, p.y + eps});
    const auto vym = basis.eval({p.x, p.y - eps});
    for (int i = 0; i < basis.dimension(); ++i) {
      CHECK(gx[i] == doctest::Approx((vxp[i] - vxm[i]) / (2 * eps)).epsilon(1e-5));
      CHECK(gy[i] == doctest::Approx((vyp[i] - vym[i]) / (2 * eps)).epsilon(1e-5));
    }
  }
}

TEST_CASE("basis evaluation is stable at the collapsed vertex of the reference triangle") {
  const BasisSet basis(ElementKind::Triangle, 5);
  std::vector<double> val, gx, gy;
  basis.eval_with_grad({0.0, 1.0}, val, gx, gy);
  for (int i = 0; i < basis.dimension(); ++i) {
    CHECK(std::isfinite(val[i]));
    CHECK(std::isfinite(gx[i]));
    CHECK(std::isfinite(gy[i]));
  }
}

TEST_CASE("degree beyond the supported maximum is rejected") {
  CHECK_THROWS_AS(BasisSet(ElementKind::Triangle, kMaxDegree + 2), Error);
}

static Mesh two_triangle_mesh() {
  Mesh mesh;
  mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.triangles.push_back({{0, 1, 2}, Subdomain::Plus, {}});
  mesh.triangles.push_back({{0, 2, 3}, Subdomain::Plus, {}});
  mesh.finalize();
  return mesh;
}

TEST_CASE("affine maps: jacobian determinant, round trip, outward unit normals") {
  const Mesh mesh = two_triangle_mesh();
  const AffineMaps maps = make_affine_maps(mesh);
  for (int t = 0; t < 2; ++t) {
    CHECK(maps.cells[t].det == doctest::Approx(1.0));  // 2 * area
    const Vec2 ref{0.3, 0.2};
    const Vec2 phys = maps.to_physical(t, ref);
    const Vec2 back = maps.to_reference(t, phys);
    CHECK(back.x == doctest::Approx(ref.x).epsilon(1e-14));
    CHECK(back.y == doctest::Approx(ref.y).epsilon(1e-14));
  }
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& facet = mesh.facets[f];
    for (int s = 0; s < facet.num_owners; ++s) {
      const Vec2 n = maps.facet_normal[f][s];
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-14));
      const Vec2 c = mesh.centroid(facet.owners[s]);
      const Vec2 m = mesh.facet_midpoint(int(f));
      CHECK((m - c).dot(n) > 0.0);  // points away from the owner
    }
    if (facet.num_owners == 2) {
      const Vec2 n0 = maps.facet_normal[f][0];
      const Vec2 n1 = maps.facet_normal[f][1];
      CHECK(n0.x == doctest::Approx(-n1.x).epsilon(1e-14));
      CHECK(n0.y == doctest::Approx(-n1.y).epsilon(1e-14));
    }
  }
}

TEST_CASE("physical gradient transformation is exact for an affine function") {
  const Mesh mesh = two_triangle_mesh();
  const AffineMaps maps = make_affine_maps(mesh);
  // u(x,y) = 2x - 3y + 1 pulled back to the reference element.
  const Vec2 ref{0.25, 0.5};
  const double eps = 1e-7;
  auto uref = [&](int t, const Vec2& r) {
    const Vec2 p = maps.to_physical(t, r);
    return 2.0 * p.x - 3.0 * p.y + 1.0;
  };
  for (int t = 0; t < 2; ++t) {
    const Vec2 gref{(uref(t, {ref.x + eps, ref.y}) - uref(t, {ref.x - eps, ref.y})) / (2 * eps),
                    (uref(t, {ref.x, ref.y + eps}) - uref(t, {ref.x, ref.y - eps})) / (2 * eps)};
    const Vec2 gphys = maps.phys_grad(t, gref.x, gref.y);
    CHECK(gphys.x == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(gphys.y == doctest::Approx(-3.0).epsilon(1e-6));
  }
}
