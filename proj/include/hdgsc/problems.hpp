#pragma once

#include <cmath>

#include "hdgsc/hdg.hpp"
#include "hdgsc/mesh.hpp"

namespace hdgsc {

// Well-posedness interval endpoints of the meta-material layer geometry;
// contrasts inside [min, max] are rejected.
constexpr double kMetamaterialKappaMin = -1.46;
constexpr double kMetamaterialKappaMax = -0.69;

// Cavity geometry: Omega = (-1,1) x (0,1), interface at x1 = 0, Dirichlet
// everywhere.
inline DomainSpec cavity_domain() {
  DomainSpec d = rectangle_domain({-1.0, 0.0}, {1.0, 1.0});
  d.regions = {
      {{{-1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}}, Subdomain::Plus},
      {{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, Subdomain::Minus},
  };
  return d;
}

// Cavity problem with the closed-form solution
//   u = ((x1+1)^2 - a (x1+1)) sin(pi x2)  on Omega+,  a = (2 s+ + s-)/(s+ + s-)
//   u = b (x1 - 1) sin(pi x2)             on Omega-,  b = s+ / (s+ + s-)
// and f = div(sigma grad u) = sigma * Laplace(u), hand-derived per subdomain.
inline ProblemData cavity_problem(double sigma_plus, double kappa) {
  if (!(kappa < 0.0)) throw Error("problems", "contrast kappa must be negative");
  if (std::abs(kappa + 1.0) < 1e-12)
    throw Error("problems", "kappa = -1: the cavity problem is ill-posed");
  const double sp = sigma_plus;
  const double sm = kappa * sigma_plus;
  const double a = (2.0 * sp + sm) / (sp + sm);
  const double b = sp / (sp + sm);
  const double pi = M_PI;

  ProblemData p;
  p.sigma_plus = sigma_plus;
  p.kappa = kappa;
  p.u_dirichlet = [](const Vec2&) { return 0.0; };
  p.f = [=](const Vec2& x, Subdomain s) {
    if (s == Subdomain::Plus) {
      const double r = x.x + 1.0;
      return sp * std::sin(pi * x.y) * (2.0 - pi * pi * (r * r - a * r));
    }
    return -sm * pi * pi * b * (x.x - 1.0) * std::sin(pi * x.y);
  };
  p.has_exact = true;
  p.exact_u = [=](const Vec2& x, Subdomain s) {
    if (s == Subdomain::Plus) {
      const double r = x.x + 1.0;
      return (r * r - a * r) * std::sin(pi * x.y);
    }
    return b * (x.x - 1.0) * std::sin(pi * x.y);
  };
  p.exact_grad = [=](const Vec2& x, Subdomain s) -> Vec2 {
    if (s == Subdomain::Plus) {
      const double r = x.x + 1.0;
      return {(2.0 * r - a) * std::sin(pi * x.y), (r * r - a * r) * pi * std::cos(pi * x.y)};
    }
    return {b * std::sin(pi * x.y), b * (x.x - 1.0) * pi * std::cos(pi * x.y)};
  };
  return p;
}

// Meta-material layer: Omega = (0,5) x (0,2); Omega- between the chains
// (1,0)-(1.3,1)-(1,2) and (3,0)-(3.3,1)-(3,2). Boundary conditions are not
// stated in the source experiment; homogeneous Dirichlet on all of dOmega is
// the documented assumption (recorded in the run metadata by the driver).
inline DomainSpec metamaterial_domain() {
  DomainSpec d = rectangle_domain({0.0, 0.0}, {5.0, 2.0});
  d.regions = {
      {{{0.0, 0.0}, {1.0, 0.0}, {1.3, 1.0}, {1.0, 2.0}, {0.0, 2.0}}, Subdomain::Plus},
      {{{1.0, 0.0}, {3.0, 0.0}, {3.3, 1.0}, {3.0, 2.0}, {1.0, 2.0}, {1.3, 1.0}},
       Subdomain::Minus},
      {{{3.0, 0.0}, {5.0, 0.0}, {5.0, 2.0}, {3.0, 2.0}, {3.3, 1.0}}, Subdomain::Plus},
  };
  d.interface_chains = {
      {{1.0, 0.0}, {1.3, 1.0}, {1.0, 2.0}},
      {{3.0, 0.0}, {3.3, 1.0}, {3.0, 2.0}},
  };
  return d;
}

inline ProblemData metamaterial_problem(double kappa) {
  if (!(kappa < 0.0)) throw Error("problems", "contrast kappa must be negative");
  if (kappa >= kMetamaterialKappaMin && kappa <= kMetamaterialKappaMax)
    throw Error("problems", "kappa inside the ill-posed interval [" +
                                std::to_string(kMetamaterialKappaMin) + ", " +
                                std::to_string(kMetamaterialKappaMax) + "]");
  ProblemData p;
  p.sigma_plus = 1.0;
  p.kappa = kappa;
  p.u_dirichlet = [](const Vec2&) { return 0.0; };
  p.f = [](const Vec2& x, Subdomain s) {
    return (s == Subdomain::Plus && x.x < 1.3) ? std::sin(M_PI * x.y / 2.0) : 0.0;
  };
  return p;
}

// Piecewise-linear transmission solution on the cavity geometry:
//   u = sigma_minus * x1 on Omega+,  u = sigma_plus * x1 on Omega-.
// Continuous at x1 = 0 with matched flux; f = 0; nonhomogeneous Dirichlet
// data from the trace. The HDG scheme reproduces it exactly for k >= 1.
inline ProblemData linear_transmission_manufactured(double sigma_plus, double sigma_minus) {
  if (!(sigma_plus > 0.0 && sigma_minus < 0.0))
    throw Error("problems", "need sigma_plus > 0 > sigma_minus");
  if (std::abs(sigma_plus + sigma_minus) < 1e-12)
    throw Error("problems", "sigma_plus + sigma_minus must not vanish");
  ProblemData p;
  p.sigma_plus = sigma_plus;
  p.kappa = sigma_minus / sigma_plus;
  p.f = [](const Vec2&, Subdomain) { return 0.0; };
  p.u_dirichlet = [=](const Vec2& x) {
    return (x.x < 0.0 ? sigma_minus : sigma_plus) * x.x;
  };
  p.has_exact = true;
  p.exact_u = [=](const Vec2& x, Subdomain s) {
    return (s == Subdomain::Plus ? sigma_minus : sigma_plus) * x.x;
  };
  p.exact_grad = [=](const Vec2&, Subdomain s) -> Vec2 {
    return {s == Subdomain::Plus ? sigma_minus : sigma_plus, 0.0};
  };
  return p;
}

}  // namespace hdgsc
