#include "bscreg/mesh.hpp"

#include <boost/polygon/voronoi.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace {
struct IPoint {
  int x, y;
};
}  // namespace

namespace boost::polygon {
template <>
struct geometry_concept<IPoint> {
  typedef point_concept type;
};
template <>
struct point_traits<IPoint> {
  typedef int coordinate_type;
  static inline coordinate_type get(const IPoint& p, orientation_2d o) { return o == HORIZONTAL ? p.x : p.y; }
};
}  // namespace boost::polygon

namespace bscreg {

namespace {

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

std::vector<Tri> delaunay(const std::vector<Vec2>& pts, double h) {
  Vec2 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double ext = std::max((hi - lo).maxCoeff(), 1e-300);
  const double scale = double(1 << 28) / ext;
  std::vector<IPoint> ip(pts.size());
  for (size_t i = 0; i < pts.size(); ++i)
    ip[i] = {int(std::lround((pts[i].x() - lo.x()) * scale)), int(std::lround((pts[i].y() - lo.y()) * scale))};

  boost::polygon::voronoi_diagram<double> vd;
  boost::polygon::construct_voronoi(ip.begin(), ip.end(), &vd);

  std::vector<Tri> tris;
  const double min_area = 1e-10 * h * h;
  for (const auto& v : vd.vertices()) {
    std::vector<int> ids;
    const auto* e = v.incident_edge();
    do {
      ids.push_back(int(e->cell()->source_index()));
      e = e->rot_next();
    } while (e != v.incident_edge());
    for (size_t j = 1; j + 1 < ids.size(); ++j) {
      Tri t{ids[0], ids[j], ids[j + 1]};
      double a = tri_area(pts[t[0]], pts[t[1]], pts[t[2]]);
      if (a < 0) std::swap(t[1], t[2]);
      if (std::abs(a) > min_area) tris.push_back(t);
    }
  }
  return tris;
}

std::vector<Vec2> boundary_nodes(const ConvexBody& body, double h) {
  const size_t n = body.size();
  std::vector<double> turn(n), arc(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) {
    Vec2 e1 = body.vertex(i) - body.vertex(i + n - 1), e2 = body.vertex(i + 1) - body.vertex(i);
    turn[i] = std::atan2(cross(e1, e2), e1.dot(e2));
    arc[i + 1] = arc[i] + e2.norm();
  }
  // Rounded corners of approximated domains come as clusters of small edges; keep the sharpest vertex
  // of each cluster so no boundary segment is much shorter than h.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return turn[a] > turn[b]; });
  std::vector<size_t> corners;
  for (size_t i : order) {
    if (turn[i] <= 10.0 * std::numbers::pi / 180.0) break;
    bool near = false;
    for (size_t c : corners) {
      double d = std::abs(arc[i] - arc[c]);
      if (std::min(d, arc[n] - d) < 0.75 * h) near = true;
    }
    if (!near) corners.push_back(i);
  }
  std::sort(corners.begin(), corners.end());
  if (corners.empty()) corners.push_back(0);
  std::vector<Vec2> out;
  for (size_t c = 0; c < corners.size(); ++c) {
    size_t a = corners[c];
    size_t b = corners[(c + 1) % corners.size()];
    if (b <= a) b += n;
    std::vector<double> cum{0.0};
    for (size_t i = a; i < b; ++i) cum.push_back(cum.back() + (body.vertex(i + 1) - body.vertex(i)).norm());
    const double L = cum.back();
    int m = std::max(1, int(std::ceil(L / h - 1e-9)));
    size_t seg = 0;
    for (int j = 0; j < m; ++j) {
      double s = L * j / m;
      while (seg + 1 < cum.size() - 1 && cum[seg + 1] <= s) ++seg;
      Vec2 p0 = body.vertex(a + seg), p1 = body.vertex(a + seg + 1);
      double len = cum[seg + 1] - cum[seg];
      double t = len > 0 ? (s - cum[seg]) / len : 0.0;
      out.push_back(p0 + t * (p1 - p0));
    }
  }
  return out;
}

std::vector<std::vector<int>> node_neighbours(size_t n, const std::vector<Tri>& tris) {
  std::vector<std::set<int>> s(n);
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i) {
      s[t[i]].insert(t[(i + 1) % 3]);
      s[t[i]].insert(t[(i + 2) % 3]);
    }
  std::vector<std::vector<int>> out(n);
  for (size_t i = 0; i < n; ++i) out[i].assign(s[i].begin(), s[i].end());
  return out;
}

}  // namespace

void Mesh::finalize() {
  area.resize(tris.size());
  grad_op.resize(tris.size());
  lumped.assign(nodes.size(), 0.0);
  for (size_t t = 0; t < tris.size(); ++t) {
    const Vec2 &a = nodes[tris[t][0]], &b = nodes[tris[t][1]], &c = nodes[tris[t][2]];
    double A = tri_area(a, b, c);
    if (!(A > 0)) throw Error(ErrorCode::MeshFail, "degenerate or inverted triangle");
    area[t] = A;
    Eigen::Matrix<double, 2, 3> G;
    G << b.y() - c.y(), c.y() - a.y(), a.y() - b.y(), c.x() - b.x(), a.x() - c.x(), b.x() - a.x();
    grad_op[t] = G / (2 * A);
    for (int i = 0; i < 3; ++i) lumped[tris[t][i]] += A / 3;
  }
}

double Mesh::min_angle_deg() const {
  double m = 180.0;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      Vec2 u = nodes[t[(i + 1) % 3]] - nodes[t[i]], v = nodes[t[(i + 2) % 3]] - nodes[t[i]];
      double ang = std::atan2(std::abs(cross(u, v)), u.dot(v)) * 180.0 / std::numbers::pi;
      m = std::min(m, ang);
    }
  }
  return m;
}

double Mesh::total_area() const {
  double s = 0.0;
  for (double a : area) s += a;
  return s;
}

Vec2 Mesh::tri_gradient(size_t t, const Eigen::VectorXd& u) const {
  const auto& T = tris[t];
  return grad_op[t] * Eigen::Vector3d(u[T[0]], u[T[1]], u[T[2]]);
}

Mesh triangulate(const ConvexBody& body, double h) {
  const double diam = diameter(body);
  if (!(h > 0) || h > diam / 4) throw Error(ErrorCode::MeshFail, "target edge length must lie in (0, diam/4]");

  Mesh M;
  M.h = h;
  std::vector<Vec2> bnodes = boundary_nodes(body, h);
  ConvexBody poly = convex_hull(bnodes, body.center());

  const double dy = h * std::sqrt(3.0) / 2;
  Vec2 lo = bnodes[0], hi = bnodes[0];
  for (const auto& p : bnodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 c = body.center();
  std::vector<Vec2> inner;
  const int j0 = int(std::floor((lo.y() - c.y()) / dy)) - 1, j1 = int(std::ceil((hi.y() - c.y()) / dy)) + 1;
  const int i0 = int(std::floor((lo.x() - c.x()) / h)) - 2, i1 = int(std::ceil((hi.x() - c.x()) / h)) + 2;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      Vec2 p(c.x() + (i + 0.5 * (j & 1)) * h, c.y() + j * dy);
      if (poly.gauge(p) >= 1) continue;
      double d = INFINITY;
      for (size_t e = 0; e < poly.size(); ++e) d = std::min(d, poly.edge_offset(e) - poly.edge_normal(e).dot(p - poly.center()));
      if (d >= 0.6 * h) inner.push_back(p);
    }
  }

  M.nodes = bnodes;
  M.nodes.insert(M.nodes.end(), inner.begin(), inner.end());
  M.boundary.assign(M.nodes.size(), 0);
  std::fill(M.boundary.begin(), M.boundary.begin() + long(bnodes.size()), 1);

  for (int round = 0; round < 2; ++round) {
    M.tris = delaunay(M.nodes, h);
    auto nb = node_neighbours(M.nodes.size(), M.tris);
    for (int sweep = 0; sweep < 4; ++sweep) {
      std::vector<Vec2> next = M.nodes;
      for (size_t i = 0; i < M.nodes.size(); ++i) {
        if (M.boundary[i] || nb[i].empty()) continue;
        Vec2 s = Vec2::Zero();
        for (int j : nb[i]) s += M.nodes[j];
        next[i] = s / double(nb[i].size());
      }
      bool ok = true;
      for (const auto& t : M.tris)
        if (tri_area(next[t[0]], next[t[1]], next[t[2]]) <= 0) ok = false;
      if (!ok) break;
      M.nodes = next;
    }
  }
  M.tris = delaunay(M.nodes, h);
  M.finalize();
  double ang = M.min_angle_deg();
  if (ang < 20.0) throw Error(ErrorCode::MeshFail, "minimum angle " + std::to_string(ang) + " below 20 degrees");
  double cover = M.total_area() / poly.area();
  if (std::abs(cover - 1.0) > 1e-9) throw Error(ErrorCode::MeshFail, "triangulation does not cover the polygon");
  return M;
}

double grad_sup(const ScalarField& f) {
  double m = 0.0;
  for (size_t t = 0; t < f.mesh->tris.size(); ++t) m = std::max(m, f.mesh->tri_gradient(t, f.values).norm());
  return m;
}

double grad_sup_boundary(const ScalarField& f) {
  const Mesh& M = *f.mesh;
  double m = 0.0;
  for (size_t t = 0; t < M.tris.size(); ++t) {
    const auto& T = M.tris[t];
    if (M.boundary[T[0]] || M.boundary[T[1]] || M.boundary[T[2]]) m = std::max(m, M.tri_gradient(t, f.values).norm());
  }
  return m;
}

Locator::Locator(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& M = *mesh_;
  lo_ = M.nodes[0];
  Vec2 hi = M.nodes[0];
  for (const auto& p : M.nodes) {
    lo_ = lo_.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  cell_ = std::max(2 * M.h, 1e-12);
  nx_ = int((hi.x() - lo_.x()) / cell_) + 1;
  ny_ = int((hi.y() - lo_.y()) / cell_) + 1;
  buckets_.assign(size_t(nx_) * ny_, {});
  for (size_t t = 0; t < M.tris.size(); ++t) {
    Vec2 a = M.nodes[M.tris[t][0]], b = a;
    for (int i = 1; i < 3; ++i) {
      a = a.cwiseMin(M.nodes[M.tris[t][i]]);
      b = b.cwiseMax(M.nodes[M.tris[t][i]]);
    }
    int x0 = int((a.x() - lo_.x()) / cell_), x1 = int((b.x() - lo_.x()) / cell_);
    int y0 = int((a.y() - lo_.y()) / cell_), y1 = int((b.y() - lo_.y()) / cell_);
    for (int x = x0; x <= std::min(x1, nx_ - 1); ++x)
      for (int y = y0; y <= std::min(y1, ny_ - 1); ++y) buckets_[size_t(y) * nx_ + x].push_back(int(t));
  }
}

std::optional<std::pair<int, Eigen::Vector3d>> Locator::locate(const Vec2& x, double tol) const {
  const Mesh& M = *mesh_;
  int bx = int(std::floor((x.x() - lo_.x()) / cell_)), by = int(std::floor((x.y() - lo_.y()) / cell_));
  std::optional<std::pair<int, Eigen::Vector3d>> best;
  double best_min = -INFINITY;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      int X = bx + dx, Y = by + dy;
      if (X < 0 || Y < 0 || X >= nx_ || Y >= ny_) continue;
      for (int t : buckets_[size_t(Y) * nx_ + X]) {
        const auto& T = M.tris[t];
        const Vec2 &a = M.nodes[T[0]], &b = M.nodes[T[1]], &c = M.nodes[T[2]];
        double A = M.area[t];
        Eigen::Vector3d l(tri_area(x, b, c) / A, tri_area(a, x, c) / A, tri_area(a, b, x) / A);
        double mn = l.minCoeff();
        if (mn > best_min) {
          best_min = mn;
          best = std::make_pair(t, l);
        }
      }
    }
  }
  if (!best || best_min < -tol) return std::nullopt;
  return best;
}

std::optional<double> Locator::evaluate(const Eigen::VectorXd& values, const Vec2& x) const {
  auto hit = locate(x);
  if (!hit) return std::nullopt;
  const auto& T = mesh_->tris[hit->first];
  const auto& l = hit->second;
  return l[0] * values[T[0]] + l[1] * values[T[1]] + l[2] * values[T[2]];
}

Eigen::VectorXd transfer(const ScalarField& src, const Mesh& dst, const ScalarFn& fallback) {
  Locator loc(src.mesh);
  Eigen::VectorXd out(dst.nodes.size());
  for (size_t i = 0; i < dst.nodes.size(); ++i) {
    auto v = loc.evaluate(src.values, dst.nodes[i]);
    out[long(i)] = v ? *v : fallback(dst.nodes[i]);
  }
  return out;
}

}  // namespace bscreg
