#include "foldopt/delaunay.hpp"

#include "foldopt/error.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <unordered_map>

namespace foldopt::delaunay {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double abx = static_cast<long double>(b.x()) - a.x();
  const long double aby = static_cast<long double>(b.y()) - a.y();
  const long double acx = static_cast<long double>(c.x()) - a.x();
  const long double acy = static_cast<long double>(c.y()) - a.y();
  return static_cast<double>(abx * acy - aby * acx);
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const long double adx = static_cast<long double>(a.x()) - d.x();
  const long double ady = static_cast<long double>(a.y()) - d.y();
  const long double bdx = static_cast<long double>(b.x()) - d.x();
  const long double bdy = static_cast<long double>(b.y()) - d.y();
  const long double cdx = static_cast<long double>(c.x()) - d.x();
  const long double cdy = static_cast<long double>(c.y()) - d.y();
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                          ad * (bdx * cdy - bdy * cdx);
  return static_cast<double>(det);
}

namespace {

struct Tri {
  std::array<std::size_t, 3> v;
  bool alive = true;
};

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

class Builder {
 public:
  explicit Builder(std::vector<Vec2> pts) : pts_(std::move(pts)) {}

  std::vector<Triangle> run(std::size_t real_count) {
    for (std::size_t i = 0; i < real_count; ++i) insert(i);
    std::vector<Triangle> out;
    for (const Tri& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= real_count || t.v[1] >= real_count || t.v[2] >= real_count) continue;
      out.push_back(t.v);
    }
    return out;
  }

  void add_super(std::size_t a, std::size_t b, std::size_t c) { add({a, b, c}); }

 private:
  void add(std::array<std::size_t, 3> v) {
    const std::size_t id = tris_.size();
    tris_.push_back({v, true});
    for (int k = 0; k < 3; ++k) edges_[edge_key(v[k], v[(k + 1) % 3])] = id;
  }

  void kill(std::size_t id) {
    Tri& t = tris_[id];
    t.alive = false;
    for (int k = 0; k < 3; ++k) {
      auto it = edges_.find(edge_key(t.v[k], t.v[(k + 1) % 3]));
      if (it != edges_.end() && it->second == id) edges_.erase(it);
    }
  }

  long neighbor(std::size_t a, std::size_t b) const {
    auto it = edges_.find(edge_key(b, a));
    return it == edges_.end() ? -1 : static_cast<long>(it->second);
  }

  bool contains(const Tri& t, const Vec2& p) const {
    for (int k = 0; k < 3; ++k)
      if (orient(pts_[t.v[k]], pts_[t.v[(k + 1) % 3]], p) < 0.0) return false;
    return true;
  }

  void insert(std::size_t pi) {
    const Vec2& p = pts_[pi];
    long start = -1;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      if (tris_[i].alive && contains(tris_[i], p)) {
        start = static_cast<long>(i);
        break;
      }
    }
    if (start < 0) throw Error("delaunay: point outside the enclosing triangle");

    std::vector<char> in_cavity(tris_.size(), 0);
    std::vector<std::size_t> cavity;
    std::deque<std::size_t> queue{static_cast<std::size_t>(start)};
    in_cavity[start] = 1;
    while (!queue.empty()) {
      const std::size_t id = queue.front();
      queue.pop_front();
      cavity.push_back(id);
      const Tri& t = tris_[id];
      for (int k = 0; k < 3; ++k) {
        const long n = neighbor(t.v[k], t.v[(k + 1) % 3]);
        if (n < 0 || in_cavity[n]) continue;
        const Tri& nt = tris_[n];
        if (incircle(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], p) > 0.0) {
          in_cavity[n] = 1;
          queue.push_back(static_cast<std::size_t>(n));
        }
      }
    }

    // The cavity must be star-shaped from p; grow it across any boundary edge
    // that p does not strictly see.
    std::vector<std::pair<std::size_t, std::size_t>> boundary;
    for (bool grown = true; grown;) {
      grown = false;
      boundary.clear();
      for (std::size_t id : cavity) {
        const Tri& t = tris_[id];
        for (int k = 0; k < 3; ++k) {
          const std::size_t a = t.v[k];
          const std::size_t b = t.v[(k + 1) % 3];
          const long n = neighbor(a, b);
          if (n >= 0 && in_cavity[n]) continue;
          if (orient(pts_[a], pts_[b], p) <= 0.0) {
            if (n < 0) throw Error("delaunay: degenerate cavity on the hull");
            in_cavity[n] = 1;
            cavity.push_back(static_cast<std::size_t>(n));
            grown = true;
            break;
          }
          boundary.emplace_back(a, b);
        }
        if (grown) break;
      }
    }

    for (std::size_t id : cavity) kill(id);
    for (const auto& [a, b] : boundary) add({a, b, pi});
  }

  std::vector<Vec2> pts_;
  std::vector<Tri> tris_;
  std::unordered_map<std::uint64_t, std::size_t> edges_;
};

bool has_edge(const std::vector<Triangle>& tris, std::size_t a, std::size_t b) {
  for (const Triangle& t : tris)
    for (int k = 0; k < 3; ++k) {
      const std::size_t u = t[k];
      const std::size_t v = t[(k + 1) % 3];
      if ((u == a && v == b) || (u == b && v == a)) return true;
    }
  return false;
}

}  // namespace

std::vector<Triangle> triangulate(const std::vector<Vec2>& points) {
  if (points.size() < 3) throw InputError("delaunay: need at least 3 points");
  Vec2 lo = points.front();
  Vec2 hi = points.front();
  for (const Vec2& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 c = 0.5 * (lo + hi);
  const double m = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  std::vector<Vec2> pts = points;
  const std::size_t n = points.size();
  pts.emplace_back(c.x() - 40.0 * m, c.y() - 20.0 * m);
  pts.emplace_back(c.x() + 40.0 * m, c.y() - 20.0 * m);
  pts.emplace_back(c.x(), c.y() + 40.0 * m);
  Builder builder(std::move(pts));
  builder.add_super(n, n + 1, n + 2);
  return builder.run(n);
}

ConformingResult triangulate_conforming(std::vector<Vec2> loop_points,
                                        const std::vector<Vec2>& interior_points) {
  for (int round = 0; round < 32; ++round) {
    std::vector<Vec2> pts = loop_points;
    pts.insert(pts.end(), interior_points.begin(), interior_points.end());
    std::vector<Triangle> tris = triangulate(pts);

    std::vector<Vec2> refined;
    bool missing = false;
    const std::size_t m = loop_points.size();
    for (std::size_t k = 0; k < m; ++k) {
      refined.push_back(loop_points[k]);
      if (!has_edge(tris, k, (k + 1) % m)) {
        refined.push_back(0.5 * (loop_points[k] + loop_points[(k + 1) % m]));
        missing = true;
      }
    }
    if (!missing) {
      ConformingResult out;
      out.points = std::move(pts);
      out.loop.resize(m);
      for (std::size_t k = 0; k < m; ++k) out.loop[k] = k;
      out.triangles = std::move(tris);
      return out;
    }
    loop_points = std::move(refined);
  }
  throw Error("delaunay: boundary recovery did not converge");
}

}  // namespace foldopt::delaunay
