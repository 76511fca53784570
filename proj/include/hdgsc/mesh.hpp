#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "hdgsc/common.hpp"

namespace hdgsc {

enum class Subdomain { Plus, Minus };
enum class BoundaryCondition { Dirichlet, Neumann };
enum class FacetLabel { InteriorPlus, InteriorMinus, Interface, Dirichlet, Neumann };
enum class MeshPattern { MirroredDiagonals, UniformDiagonals };

// Polygonal domain description: outer rectangle union, tagged subdomain
// polygons and tagged boundary segments. Interface chains (piecewise-linear,
// monotone in x2) drive the shearing in build_mapped_mesh.
struct DomainSpec {
  struct Region {
    std::vector<Vec2> polygon;  // counter-clockwise
    Subdomain tag = Subdomain::Plus;
  };
  struct BoundarySegment {
    Vec2 a, b;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
  };

  Vec2 lower{0.0, 0.0};
  Vec2 upper{1.0, 1.0};
  std::vector<Region> regions;
  std::vector<BoundarySegment> boundary;
  std::vector<std::vector<Vec2>> interface_chains;

  bool contains_in_region(const Vec2& p, const Region& r) const {
    // Ray casting; regions are simple polygons.
    bool inside = false;
    const auto& poly = r.polygon;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      if ((poly[i].y > p.y) != (poly[j].y > p.y)) {
        const double xint =
            poly[j].x + (poly[i].x - poly[j].x) * (p.y - poly[j].y) / (poly[i].y - poly[j].y);
        if (p.x < xint) inside = !inside;
      }
    }
    return inside;
  }

  Subdomain classify_point(const Vec2& p) const {
    for (const auto& r : regions)
      if (contains_in_region(p, r)) return r.tag;
    // Default when a single implicit Plus region covers the domain.
    return Subdomain::Plus;
  }
};

// Axis-aligned rectangle, all Dirichlet, single Plus subdomain.
inline DomainSpec rectangle_domain(Vec2 lower, Vec2 upper) {
  DomainSpec d;
  d.lower = lower;
  d.upper = upper;
  const Vec2 bl = lower, br{upper.x, lower.y}, tr = upper, tl{lower.x, upper.y};
  d.boundary = {{bl, br}, {br, tr}, {tr, tl}, {tl, bl}};
  return d;
}

struct Facet {
  std::array<int, 2> vertices{-1, -1};  // canonical: lower index first
  std::array<int, 2> owners{-1, -1};    // owning triangles; owners[1] = -1 on boundary
  int num_owners = 0;
};

struct Triangle {
  std::array<int, 3> vertices{};
  Subdomain tag = Subdomain::Plus;
  std::array<int, 3> facets{};  // facet opposite local vertex i
};

class Mesh {
public:
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Facet> facets;
  std::vector<double> h_K;  // longest edge per triangle
  double h = 0.0;

  Vec2 centroid(int t) const {
    const auto& v = triangles[t].vertices;
    return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) * (1.0 / 3.0);
  }

  double signed_area(int t) const {
    const auto& v = triangles[t].vertices;
    return 0.5 * cross(vertices[v[1]] - vertices[v[0]], vertices[v[2]] - vertices[v[0]]);
  }

  Vec2 facet_midpoint(int f) const {
    return (vertices[facets[f].vertices[0]] + vertices[facets[f].vertices[1]]) * 0.5;
  }

  double facet_length(int f) const {
    return (vertices[facets[f].vertices[1]] - vertices[facets[f].vertices[0]]).norm();
  }

  // Builds facet connectivity from triangle edges and fills h_K / h.
  void finalize() {
    facets.clear();
    std::map<std::pair<int, int>, int> index;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      auto& tri = triangles[t];
      if (signed_area(int(t)) <= 0.0)
        throw Error("mesh", "triangle " + std::to_string(t) + " is not positively oriented");
      for (int e = 0; e < 3; ++e) {
        // Facet e is opposite local vertex e.
        int a = tri.vertices[(e + 1) % 3];
        int b = tri.vertices[(e + 2) % 3];
        if (a > b) std::swap(a, b);
        auto [it, inserted] = index.try_emplace({a, b}, int(facets.size()));
        if (inserted) {
          Facet f;
          f.vertices = {a, b};
          facets.push_back(f);
        }
        Facet& f = facets[it->second];
        if (f.num_owners >= 2)
          throw Error("mesh", "facet shared by more than two triangles (non-conforming mesh)");
        f.owners[f.num_owners++] = int(t);
        tri.facets[e] = it->second;
      }
    }
    h_K.resize(triangles.size());
    h = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& v = triangles[t].vertices;
      double hk = 0.0;
      for (int e = 0; e < 3; ++e)
        hk = std::max(hk, (vertices[v[(e + 1) % 3]] - vertices[v[e]]).norm());
      h_K[t] = hk;
      h = std::max(h, hk);
    }
  }
};

struct FacetClassification {
  std::vector<FacetLabel> labels;
};

namespace detail {

inline bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol = 1e-12) {
  const Vec2 ab = b - a, ap = p - a;
  const double len2 = ab.dot(ab);
  if (std::abs(cross(ab, ap)) > tol * std::sqrt(len2)) return false;
  const double t = ap.dot(ab) / len2;
  return t >= -tol && t <= 1.0 + tol;
}

inline bool near_integer(double v, double tol = 1e-9) {
  return std::abs(v - std::round(v)) <= tol;
}

}  // namespace detail

inline FacetClassification classify_facets(const Mesh& mesh, const DomainSpec& domain) {
  FacetClassification cls;
  cls.labels.resize(mesh.facets.size());
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const Facet& fac = mesh.facets[f];
    if (fac.num_owners == 2) {
      const Subdomain t0 = mesh.triangles[fac.owners[0]].tag;
      const Subdomain t1 = mesh.triangles[fac.owners[1]].tag;
      if (t0 != t1)
        cls.labels[f] = FacetLabel::Interface;
      else
        cls.labels[f] =
            t0 == Subdomain::Plus ? FacetLabel::InteriorPlus : FacetLabel::InteriorMinus;
    } else {
      const Vec2 a = mesh.vertices[fac.vertices[0]];
      const Vec2 b = mesh.vertices[fac.vertices[1]];
      const BoundaryCondition* bc = nullptr;
      for (const auto& seg : domain.boundary)
        if (detail::on_segment(a, seg.a, seg.b) && detail::on_segment(b, seg.a, seg.b)) {
          bc = &seg.bc;
          break;
        }
      if (!bc)
        throw Error("mesh", "boundary facet " + std::to_string(f) +
                                " not contained in any tagged boundary segment");
      cls.labels[f] =
          *bc == BoundaryCondition::Dirichlet ? FacetLabel::Dirichlet : FacetLabel::Neumann;
    }
  }
  return cls;
}

// Structured grid of squares split into two triangles each; n cells per unit
// length. MirroredDiagonals reflects the diagonal direction across each
// vertical interface line so the mesh is locally symmetric at the interface.
inline Mesh build_structured_mesh(const DomainSpec& domain, int n, MeshPattern pattern) {
  if (n < 1) throw Error("mesh", "resolution must be >= 1");
  const double wx = domain.upper.x - domain.lower.x;
  const double wy = domain.upper.y - domain.lower.y;
  if (!detail::near_integer(wx * n) || !detail::near_integer(wy * n))
    throw Error("mesh", "domain extents are not an integer number of grid cells");
  const int nx = int(std::round(wx * n));
  const int ny = int(std::round(wy * n));

  // Interface x-positions: distinct vertical edges of the subdomain polygons
  // that are interior to the domain.
  std::vector<double> iface_x;
  for (const auto& r : domain.regions)
    for (std::size_t i = 0; i < r.polygon.size(); ++i) {
      const Vec2 a = r.polygon[i];
      const Vec2 b = r.polygon[(i + 1) % r.polygon.size()];
      if (std::abs(a.x - b.x) < 1e-12 && a.x > domain.lower.x + 1e-12 &&
          a.x < domain.upper.x - 1e-12) {
        bool known = false;
        for (double x : iface_x) known |= std::abs(x - a.x) < 1e-12;
        if (!known) iface_x.push_back(a.x);
      }
    }
  std::sort(iface_x.begin(), iface_x.end());
  for (double x : iface_x)
    if (!detail::near_integer((x - domain.lower.x) * n))
      throw Error("mesh", "interface at x1=" + std::to_string(x) + " is not grid-aligned");

  Mesh mesh;
  mesh.vertices.resize(std::size_t(nx + 1) * (ny + 1));
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices[vid(i, j)] = {domain.lower.x + double(i) / n, domain.lower.y + double(j) / n};

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 c{domain.lower.x + (i + 0.5) / n, domain.lower.y + (j + 0.5) / n};
      const Subdomain tag = domain.classify_point(c);
      bool up_diagonal = true;  // "/" from (i,j) to (i+1,j+1)? false mirrors it
      if (pattern == MeshPattern::MirroredDiagonals) {
        int left = 0;
        for (double x : iface_x)
          if (x < c.x) ++left;
        up_diagonal = (left % 2 == 0);
      }
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      Triangle t1, t2;
      if (up_diagonal) {
        t1.vertices = {v00, v10, v11};
        t2.vertices = {v00, v11, v01};
      } else {
        t1.vertices = {v00, v10, v01};
        t2.vertices = {v10, v11, v01};
      }
      t1.tag = t2.tag = tag;
      mesh.triangles.push_back(t1);
      mesh.triangles.push_back(t2);
    }
  mesh.finalize();
  return mesh;
}

// Structured grid whose vertical grid lines are piecewise-affinely sheared in
// x1 so that each interface chain coincides with a grid line. Chains must be
// monotone in x2 and anchored at grid-aligned base x1.
inline Mesh build_mapped_mesh(const DomainSpec& domain, int n) {
  if (n < 1) throw Error("mesh", "resolution must be >= 1");
  if (domain.interface_chains.empty())
    return build_structured_mesh(domain, n, MeshPattern::UniformDiagonals);

  const double wx = domain.upper.x - domain.lower.x;
  const double wy = domain.upper.y - domain.lower.y;
  if (!detail::near_integer(wx * n) || !detail::near_integer(wy * n))
    throw Error("mesh", "domain extents are not an integer number of grid cells");
  const int nx = int(std::round(wx * n));
  const int ny = int(std::round(wy * n));

  // Base (unsheared) x1 of each chain and its lateral offset as a function of
  // x2, linearly interpolated along the chain.
  struct Chain {
    double base_x;
    std::vector<Vec2> pts;
    double offset(double y) const {
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        if ((y >= std::min(a.y, b.y) - 1e-12) && (y <= std::max(a.y, b.y) + 1e-12)) {
          const double t = (y - a.y) / (b.y - a.y);
          return (a.x + t * (b.x - a.x)) - base_x;
        }
      }
      throw Error("mesh", "interface chain does not cover x2=" + std::to_string(y));
    }
  };
  std::vector<Chain> chains;
  for (const auto& c : domain.interface_chains) {
    if (c.size() < 2) throw Error("mesh", "interface chain needs at least two points");
    Chain ch;
    ch.base_x = c.front().x;
    ch.pts = c;
    if (!detail::near_integer((ch.base_x - domain.lower.x) * n))
      throw Error("mesh", "interface chain base is not grid-aligned");
    chains.push_back(ch);
  }
  std::sort(chains.begin(), chains.end(),
            [](const Chain& a, const Chain& b) { return a.base_x < b.base_x; });

  // Shear weight: 1 at each chain base, 0 at the outer boundary, linear in
  // between; constant between consecutive chains so interior cells translate
  // rigidly.
  auto shear = [&](double x0, double y) {
    double lo_x = domain.lower.x, lo_w = 0.0, lo_off = 0.0;
    double hi_x = domain.upper.x, hi_w = 0.0, hi_off = 0.0;
    for (const auto& ch : chains) {
      if (ch.base_x <= x0 + 1e-12 && ch.base_x > lo_x - 1e-12) {
        lo_x = ch.base_x;
        lo_w = 1.0;
        lo_off = ch.offset(y);
      }
      if (ch.base_x >= x0 - 1e-12 && ch.base_x < hi_x + 1e-12) {
        hi_x = ch.base_x;
        hi_w = 1.0;
        hi_off = ch.offset(y);
      }
    }
    if (std::abs(hi_x - lo_x) < 1e-14) return lo_w * lo_off;
    const double t = (x0 - lo_x) / (hi_x - lo_x);
    return (1.0 - t) * lo_w * lo_off + t * hi_w * hi_off;
  };

  Mesh mesh;
  mesh.vertices.resize(std::size_t(nx + 1) * (ny + 1));
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x0 = domain.lower.x + double(i) / n;
      const double y = domain.lower.y + double(j) / n;
      mesh.vertices[vid(i, j)] = {x0 + shear(x0, y), y};
    }

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      const Vec2 c = (mesh.vertices[v00] + mesh.vertices[v10] + mesh.vertices[v01] +
                      mesh.vertices[v11]) *
                     0.25;
      Triangle t1, t2;
      t1.vertices = {v00, v10, v11};
      t2.vertices = {v00, v11, v01};
      t1.tag = t2.tag = domain.classify_point(c);
      mesh.triangles.push_back(t1);
      mesh.triangles.push_back(t2);
      for (int t : {int(mesh.triangles.size()) - 2, int(mesh.triangles.size()) - 1})
        if (mesh.signed_area(t) <= 0.0)
          throw Error("mesh", "shearing produced a degenerate cell (triangle " +
                                  std::to_string(t) + ")");
    }
  mesh.finalize();
  return mesh;
}

inline char facet_label_token(FacetLabel l) {
  switch (l) {
    case FacetLabel::InteriorPlus: return 'p';
    case FacetLabel::InteriorMinus: return 'm';
    case FacetLabel::Interface: return 'I';
    case FacetLabel::Dirichlet: return 'D';
    case FacetLabel::Neumann: return 'N';
  }
  return '?';
}

// Plain-text mesh format; see README for the layout.
inline std::string mesh_to_text(const Mesh& mesh, const FacetClassification& cls) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "vertices %zu\n", mesh.vertices.size());
  out += buf;
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "triangles %zu\n", mesh.triangles.size());
  out += buf;
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d %c\n", t.vertices[0], t.vertices[1], t.vertices[2],
                  t.tag == Subdomain::Plus ? '+' : '-');
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "facets %zu\n", mesh.facets.size());
  out += buf;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    std::snprintf(buf, sizeof buf, "%d %d %c\n", mesh.facets[f].vertices[0],
                  mesh.facets[f].vertices[1], facet_label_token(cls.labels[f]));
    out += buf;
  }
  return out;
}

}  // namespace hdgsc
