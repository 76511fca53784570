#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdgsc/problems.hpp"

using namespace hdgsc;

namespace {

// Independent check of f = div(sigma grad u) by second-order finite differences.
double fd_div_sigma_grad(const ProblemData& p, const Vec2& x, Subdomain s) {
  const double h = 1e-5;
  auto u = [&](double a, double b) { return p.exact_u({a, b}, s); };
  const double lap = (u(x.x + h, x.y) + u(x.x - h, x.y) + u(x.x, x.y + h) + u(x.x, x.y - h) -
                      4.0 * u(x.x, x.y)) /
                     (h * h);
  return p.sigma(s) * lap;  // sigma is piecewise constant
}

}  // namespace

TEST_CASE("cavity source term equals div(sigma grad u) on both subdomains") {
  for (double kappa : {-1.001, -1.5, -2.0, -3.0}) {
    const ProblemData p = cavity_problem(1.0, kappa);
    const Vec2 plus_pts[] = {{-0.7, 0.3}, {-0.25, 0.8}, {-0.5, 0.5}};
    const Vec2 minus_pts[] = {{0.3, 0.3}, {0.75, 0.6}, {0.5, 0.9}};
    for (const Vec2& x : plus_pts)
      CHECK(p.f(x, Subdomain::Plus) ==
            doctest::Approx(fd_div_sigma_grad(p, x, Subdomain::Plus)).epsilon(1e-5));
    for (const Vec2& x : minus_pts)
      CHECK(p.f(x, Subdomain::Minus) ==
            doctest::Approx(fd_div_sigma_grad(p, x, Subdomain::Minus)).epsilon(1e-5));
  }
}

TEST_CASE("cavity exact solution is continuous across the interface") {
  const ProblemData p = cavity_problem(1.0, -1.001);
  for (double y : {0.1, 0.4, 0.77}) {
    CHECK(p.exact_u({0.0, y}, Subdomain::Plus) ==
          doctest::Approx(p.exact_u({0.0, y}, Subdomain::Minus)).epsilon(1e-13));
  }
}

TEST_CASE("cavity normal flux sigma du/dx1 matches across the interface") {
  const ProblemData p = cavity_problem(2.0, -1.7);
  for (double y : {0.2, 0.5, 0.9}) {
    const double qp = p.exact_q({0.0, y}, Subdomain::Plus).x;
    const double qm = p.exact_q({0.0, y}, Subdomain::Minus).x;
    CHECK(qp == doctest::Approx(qm).epsilon(1e-13));
  }
}

TEST_CASE("cavity exact solution vanishes on the boundary") {
  const ProblemData p = cavity_problem(1.0, -2.0);
  CHECK(p.exact_u({-1.0, 0.4}, Subdomain::Plus) == doctest::Approx(0.0));
  CHECK(p.exact_u({1.0, 0.4}, Subdomain::Minus) == doctest::Approx(0.0));
  CHECK(p.exact_u({-0.3, 0.0}, Subdomain::Plus) == doctest::Approx(0.0));
  CHECK(p.exact_u({0.6, 1.0}, Subdomain::Minus) == doctest::Approx(0.0));
  CHECK(p.u_dirichlet({0.3, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("exact gradient matches finite differences of the exact solution") {
  const ProblemData p = cavity_problem(1.0, -1.3);
  const double h = 1e-6;
  const Vec2 x{-0.4, 0.6};
  const Subdomain s = Subdomain::Plus;
  const Vec2 g = p.exact_grad(x, s);
  CHECK(g.x == doctest::Approx((p.exact_u({x.x + h, x.y}, s) - p.exact_u({x.x - h, x.y}, s)) /
                               (2 * h)).epsilon(1e-6));
  CHECK(g.y == doctest::Approx((p.exact_u({x.x, x.y + h}, s) - p.exact_u({x.x, x.y - h}, s)) /
                               (2 * h)).epsilon(1e-6));
}

TEST_CASE("exact L2 norms match closed-form references at kappa = -2") {
  // Reference values integrated symbolically: ||u|| = sqrt(4/15), plus flux norms.
  const ProblemData p = cavity_problem(1.0, -2.0);
  const int nq = 200;
  double u2 = 0.0, q2 = 0.0, qv2 = 0.0;
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nq; ++j) {
      const Vec2 x{-1.0 + 2.0 * (i + 0.5) / nq, (j + 0.5) / nq};
      const Subdomain s = x.x < 0.0 ? Subdomain::Plus : Subdomain::Minus;
      const double w = 2.0 / (nq * nq);
      const double u = p.exact_u(x, s);
      const Vec2 q = p.exact_q(x, s);
      u2 += w * u * u;
      q2 += w * q.dot(q);
      qv2 += w * q.dot(q) / std::abs(p.sigma(s));
    }
  CHECK(std::sqrt(u2) == doctest::Approx(0.5163977794943222).epsilon(1e-4));
  CHECK(std::sqrt(q2) == doctest::Approx(3.198962859141773).epsilon(1e-4));
  CHECK(std::sqrt(qv2) == doctest::Approx(2.4379284732067212).epsilon(1e-4));
}

TEST_CASE("ill-posed contrasts are rejected") {
  CHECK_THROWS_AS(cavity_problem(1.0, -1.0), Error);
  CHECK_THROWS_AS(cavity_problem(1.0, 0.5), Error);
  CHECK_THROWS_AS(metamaterial_problem(-1.0), Error);
  CHECK_THROWS_AS(metamaterial_problem(kMetamaterialKappaMin + 0.01), Error);
  CHECK_THROWS_AS(metamaterial_problem(kMetamaterialKappaMax - 0.01), Error);
  CHECK_NOTHROW(metamaterial_problem(-1.5));
  CHECK_NOTHROW(metamaterial_problem(-2.0));
  CHECK_NOTHROW(cavity_problem(1.0, -1.001));
}

TEST_CASE("meta-material source acts only on the left positive region") {
  const ProblemData p = metamaterial_problem(-1.5);
  CHECK(p.f({0.5, 1.0}, Subdomain::Plus) == doctest::Approx(std::sin(M_PI * 1.0 / 2.0)));
  CHECK(p.f({0.5, 0.4}, Subdomain::Plus) == doctest::Approx(std::sin(M_PI * 0.4 / 2.0)));
  CHECK(p.f({3.8, 1.0}, Subdomain::Plus) == doctest::Approx(0.0));  // right region
  CHECK(p.f({2.0, 1.0}, Subdomain::Minus) == doctest::Approx(0.0));
  CHECK(p.u_dirichlet({0.0, 0.5}) == doctest::Approx(0.0));
  CHECK_FALSE(p.has_exact);
}

TEST_CASE("manufactured transmission solution is piecewise linear and consistent") {
  const ProblemData p = linear_transmission_manufactured(1.0, -2.0);
  // Continuity and flux match at x1 = 0.
  CHECK(p.exact_u({0.0, 0.3}, Subdomain::Plus) ==
        doctest::Approx(p.exact_u({0.0, 0.3}, Subdomain::Minus)));
  CHECK(p.exact_q({0.0, 0.3}, Subdomain::Plus).x ==
        doctest::Approx(p.exact_q({0.0, 0.3}, Subdomain::Minus).x));
  // Zero source everywhere.
  CHECK(p.f({-0.5, 0.5}, Subdomain::Plus) == doctest::Approx(0.0));
  CHECK(p.f({0.5, 0.5}, Subdomain::Minus) == doctest::Approx(0.0));
  // Linear in x1 with the advertised slopes.
  CHECK(p.exact_u({-0.5, 0.2}, Subdomain::Plus) == doctest::Approx(-2.0 * -0.5));
  CHECK(p.exact_u({0.5, 0.2}, Subdomain::Minus) == doctest::Approx(1.0 * 0.5));
}

TEST_CASE("metamaterial critical interval constants bracket the admissible contrasts") {
  CHECK(kMetamaterialKappaMin == doctest::Approx(-1.46));
  CHECK(kMetamaterialKappaMax == doctest::Approx(-0.69));
}
