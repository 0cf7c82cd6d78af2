#include "tandepth/gdem.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "tandepth/error.hpp"
#include "tandepth/log.hpp"
#include "tandepth/rng.hpp"

namespace tandepth {

namespace {

// Bowyer-Watson with triangle adjacency and long-double predicates. Raw GDEM
// clouds are at most a few 10^4 points, so walk-based location is plenty.

struct Tri {
  int v[3];    // CCW
  int nbr[3];  // nbr[i] opposite v[i], -1 = none
  bool alive = true;
};

long double orient2d(long double ax, long double ay, long double bx, long double by,
                     long double cx, long double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

class Delaunay {
 public:
  explicit Delaunay(const std::vector<Eigen::Vector3d>& points) {
    n_real_ = static_cast<int>(points.size());
    xs_.reserve(n_real_ + 3);
    ys_.reserve(n_real_ + 3);
    for (const auto& p : points) {
      xs_.push_back(p.x());
      ys_.push_back(p.y());
    }
    double xmin = xs_[0], xmax = xs_[0], ymin = ys_[0], ymax = ys_[0];
    for (int i = 1; i < n_real_; ++i) {
      xmin = std::min(xmin, xs_[i]);
      xmax = std::max(xmax, xs_[i]);
      ymin = std::min(ymin, ys_[i]);
      ymax = std::max(ymax, ys_[i]);
    }
    double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    // far enough that no representable circumcircle of real points reaches
    // the super vertices; otherwise thin hull triangles become illegal
    // against them and leave notches in the hull
    double r = std::max({xmax - xmin, ymax - ymin, 1.0}) * 1e7;
    xs_.push_back(cx - 2.0 * r);
    ys_.push_back(cy - r);
    xs_.push_back(cx + 2.0 * r);
    ys_.push_back(cy - r);
    xs_.push_back(cx);
    ys_.push_back(cy + 2.0 * r);
    tris_.push_back({{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}, true});

    for (int i = 0; i < n_real_; ++i) insert(i);
    legalize();
  }

  std::vector<std::array<int, 3>> real_triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n_real_ || t.v[1] >= n_real_ || t.v[2] >= n_real_) continue;
      out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
  }

 private:
  long double orient(int a, int b, int p) const {
    return orient2d(xs_[a], ys_[a], xs_[b], ys_[b], xs_[p], ys_[p]);
  }

  // forward rounding-error bound on orient(); sign decisions outside the
  // bound are reliable at any coordinate magnitude
  long double orient_err(int a, int b, int p) const {
    long double m = std::abs((long double)(xs_[b] - xs_[a]) * (ys_[p] - ys_[a])) +
                    std::abs((long double)(ys_[b] - ys_[a]) * (xs_[p] - xs_[a]));
    return 1e-18L * m;
  }

  bool in_circle_strict(const Tri& t, int p) const {
    long double adx = xs_[t.v[0]] - xs_[p], ady = ys_[t.v[0]] - ys_[p];
    long double bdx = xs_[t.v[1]] - xs_[p], bdy = ys_[t.v[1]] - ys_[p];
    long double cdx = xs_[t.v[2]] - xs_[p], cdy = ys_[t.v[2]] - ys_[p];
    long double al = adx * adx + ady * ady;
    long double bl = bdx * bdx + bdy * bdy;
    long double cl = cdx * cdx + cdy * cdy;
    long double det =
        adx * (bdy * cl - cdy * bl) - ady * (bdx * cl - cdx * bl) + al * (bdx * cdy - cdx * bdy);
    long double mag = std::abs(adx) * (std::abs(bdy) * cl + std::abs(cdy) * bl) +
                      std::abs(ady) * (std::abs(bdx) * cl + std::abs(cdx) * bl) +
                      al * (std::abs(bdx * cdy) + std::abs(cdx * bdy));
    return det > 1e-18L * mag;
  }

  int locate(int p) const {
    int t = last_alive_;
    int guard = static_cast<int>(tris_.size()) * 4 + 64;
    while (guard-- > 0) {
      const Tri& tr = tris_[t];
      int next = -1;
      for (int e = 0; e < 3; ++e) {
        int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
        if (orient(a, b, p) < -orient_err(a, b, p)) {
          next = tr.nbr[e];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    // degenerate walk; exhaustive fallback
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (!tris_[i].alive) continue;
      const Tri& tr = tris_[i];
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
        if (orient(a, b, p) < -4.0L * orient_err(a, b, p)) inside = false;
      }
      if (inside) return i;
    }
    return last_alive_;
  }

  void insert(int p) {
    int seed = locate(p);
    for (int j = 0; j < 3; ++j) {
      int v = tris_[seed].v[j];
      if (std::abs(xs_[v] - xs_[p]) < 1e-9 && std::abs(ys_[v] - ys_[p]) < 1e-9) return;
    }

    std::vector<int> cavity;
    std::vector<char> in_cavity(tris_.size(), 0);
    std::deque<int> queue{seed};
    in_cavity[seed] = 1;
    while (!queue.empty()) {
      int t = queue.front();
      queue.pop_front();
      cavity.push_back(t);
      for (int e = 0; e < 3; ++e) {
        int nb = tris_[t].nbr[e];
        if (nb < 0 || in_cavity[nb]) continue;
        if (in_circle_strict(tris_[nb], p)) {
          in_cavity[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
    // If p sits exactly on a cavity-boundary edge the fan would contain a
    // degenerate triangle; pull that edge's other triangle into the cavity.
    bool grew = true;
    while (grew) {
      grew = false;
      for (size_t ci = 0; ci < cavity.size() && !grew; ++ci) {
        const Tri& tr = tris_[cavity[ci]];
        for (int e = 0; e < 3; ++e) {
          int nb = tr.nbr[e];
          if (nb < 0 || in_cavity[nb]) continue;
          int a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
          if (std::abs(orient(a, b, p)) <= orient_err(a, b, p)) {
            in_cavity[nb] = 1;
            cavity.push_back(nb);
            grew = true;
            break;
          }
        }
      }
    }

    struct Edge {
      int a, b, outside;
    };
    std::vector<Edge> boundary;
    for (int t : cavity) {
      const Tri& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        int nb = tr.nbr[e];
        if (nb >= 0 && in_cavity[nb]) continue;
        boundary.push_back({tr.v[(e + 1) % 3], tr.v[(e + 2) % 3], nb});
      }
    }
    for (int t : cavity) tris_[t].alive = false;

    // fan of new triangles (p, a, b) over the boundary
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const Edge& e : boundary) {
      int idx = static_cast<int>(tris_.size());
      tris_.push_back({{p, e.a, e.b}, {e.outside, -1, -1}, true});
      created.push_back(idx);
      if (e.outside >= 0) {
        Tri& o = tris_[e.outside];
        for (int k = 0; k < 3; ++k) {
          int oa = o.v[(k + 1) % 3], ob = o.v[(k + 2) % 3];
          if (oa == e.b && ob == e.a) o.nbr[k] = idx;
        }
      }
    }
    // stitch the fan: edge (p, a) of one triangle equals edge (b, p) of the
    // one whose b is that a
    for (int i : created) {
      Tri& ti = tris_[i];
      for (int j : created) {
        if (i == j) continue;
        const Tri& tj = tris_[j];
        if (ti.v[1] == tj.v[2]) ti.nbr[2] = j;
        if (ti.v[2] == tj.v[1]) ti.nbr[1] = j;
      }
    }
    last_alive_ = created.empty() ? last_alive_ : created.back();
  }

  // Bounded Lawson pass; repairs any hull artifacts from the finite
  // super-triangle so every interior edge passes the circle test.
  void legalize() {
    for (int pass = 0; pass < 64; ++pass) {
      bool flipped = false;
      for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        if (!tris_[t].alive) continue;
        for (int e = 0; e < 3; ++e) {
          if (try_flip(t, e)) {
            flipped = true;
            break;
          }
        }
      }
      if (!flipped) return;
    }
    log_warn("triangulation legalization did not settle within the pass bound");
  }

  bool try_flip(int t, int e) {
    int nb = tris_[t].nbr[e];
    if (nb < 0 || !tris_[nb].alive) return false;
    Tri& t1 = tris_[t];
    Tri& t2 = tris_[nb];
    int a = t1.v[e];
    int b = t1.v[(e + 1) % 3];
    int c = t1.v[(e + 2) % 3];
    int d = -1;
    for (int k = 0; k < 3; ++k)
      if (t2.v[k] != b && t2.v[k] != c) d = t2.v[k];
    if (d < 0) return false;
    if (!in_circle_strict(t1, d)) return false;
    // flip only across a strictly convex quad (b and c on opposite sides
    // of the new diagonal a-d)
    long double ob = orient(a, d, b);
    long double oc = orient(a, d, c);
    long double band_b = orient_err(a, d, b);
    long double band_c = orient_err(a, d, c);
    if (!((ob > band_b && oc < -band_c) || (ob < -band_b && oc > band_c))) return false;

    int nb_ab = t1.nbr[(e + 2) % 3];
    int nb_ca = t1.nbr[(e + 1) % 3];
    int nb_bd = -1, nb_dc = -1;
    for (int k = 0; k < 3; ++k) {
      int va = t2.v[(k + 1) % 3], vb = t2.v[(k + 2) % 3];
      if ((va == b && vb == d) || (va == d && vb == b)) nb_bd = t2.nbr[k];
      if ((va == d && vb == c) || (va == c && vb == d)) nb_dc = t2.nbr[k];
    }

    t1.v[0] = a;
    t1.v[1] = b;
    t1.v[2] = d;
    t1.nbr[0] = nb_bd;
    t1.nbr[1] = nb;
    t1.nbr[2] = nb_ab;
    t2.v[0] = a;
    t2.v[1] = d;
    t2.v[2] = c;
    t2.nbr[0] = nb_dc;
    t2.nbr[1] = nb_ca;
    t2.nbr[2] = t;
    relink(nb_bd, nb, t);
    relink(nb_ca, t, nb);
    return true;
  }

  void relink(int t, int from, int to) {
    if (t < 0) return;
    for (int k = 0; k < 3; ++k)
      if (tris_[t].nbr[k] == from) tris_[t].nbr[k] = to;
  }

  int n_real_;
  int last_alive_ = 0;
  std::vector<double> xs_, ys_;
  std::vector<Tri> tris_;
};

double tri_area_xy(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  return 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

}  // namespace

TriangulatedSurface triangulate_2_5d(const GdemCloud& raw) {
  if (raw.points.size() < 3)
    raise(Errc::DegenerateTerrain,
          "need at least 3 points, got " + std::to_string(raw.points.size()));
  for (const auto& p : raw.points)
    if (!p.allFinite()) raise(Errc::DegenerateTerrain, "non-finite terrain point");

  Delaunay dt(raw.points);
  auto tris = dt.real_triangles();

  TriangulatedSurface surface;
  surface.vertices = raw.points;
  surface.triangles.reserve(tris.size());
  for (auto& t : tris) {
    const auto& a = raw.points[t[0]];
    const auto& b = raw.points[t[1]];
    const auto& c = raw.points[t[2]];
    double cross = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (cross < 0.0) std::swap(t[1], t[2]);
    surface.triangles.push_back(t);
  }
  if (surface.triangles.empty())
    raise(Errc::DegenerateTerrain, "all points collinear in the XY projection");
  return surface;
}

GdemCloud densify(const TriangulatedSurface& surface, double density_pts_per_m2, uint64_t seed) {
  if (density_pts_per_m2 <= 0.0)
    raise(Errc::ConfigError, "density must be positive, got " + std::to_string(density_pts_per_m2));

  std::vector<double> cumulative;
  cumulative.reserve(surface.triangles.size());
  double total = 0.0;
  for (const auto& t : surface.triangles) {
    double area =
        tri_area_xy(surface.vertices[t[0]], surface.vertices[t[1]], surface.vertices[t[2]]);
    if (!(area > 0.0) || !std::isfinite(area)) area = 0.0;
    total += area;
    cumulative.push_back(total);
  }

  long long count = std::llround(total * density_pts_per_m2);
  if (count < 1) {
    log_warn("EmptyDensification: expected count " + std::to_string(total * density_pts_per_m2) +
             " < 1, returning the raw points");
    GdemCloud raw;
    raw.points = surface.vertices;
    raw.seed = seed;
    return raw;
  }

  Rng rng(seed);
  GdemCloud cloud;
  cloud.points.reserve(static_cast<size_t>(count));
  cloud.density_pts_per_m2 = density_pts_per_m2;
  cloud.source_tag = GdemCloud::Source::Densified;
  cloud.seed = seed;

  for (long long i = 0; i < count; ++i) {
    double r = rng.uniform() * total;
    size_t idx = std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin();
    if (idx >= cumulative.size()) idx = cumulative.size() - 1;
    const auto& t = surface.triangles[idx];
    const auto& a = surface.vertices[t[0]];
    const auto& b = surface.vertices[t[1]];
    const auto& c = surface.vertices[t[2]];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    cloud.points.emplace_back(a + u * (b - a) + v * (c - a));
  }
  return cloud;
}

}  // namespace tandepth
