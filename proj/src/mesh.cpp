#include "nitsche/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>

namespace nitsche {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

std::pair<int, int> sorted_pair(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

int classify_unit_square(const Point& a, const Point& b) {
  if (a.y() == 0.0 && b.y() == 0.0) return 0;
  if (a.x() == 1.0 && b.x() == 1.0) return 1;
  if (a.y() == 1.0 && b.y() == 1.0) return 2;
  if (a.x() == 0.0 && b.x() == 0.0) return 3;
  return -1;
}

std::vector<std::vector<int>> vertex_triangles(const Mesh& mesh) {
  std::vector<std::vector<int>> star(mesh.vertices().size());
  const auto& tris = mesh.triangles();
  for (int k = 0; k < static_cast<int>(tris.size()); ++k)
    for (int v : tris[k].v) star[v].push_back(k);
  return star;
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryTag> tags)
    : vertices_(std::move(vertices)), tags_(std::move(tags)) {
  const int nv = static_cast<int>(vertices_.size());
  triangles_.reserve(triangles.size());
  for (const auto& t : triangles) {
    for (int v : t)
      if (v < 0 || v >= nv) throw MeshError("triangle references vertex out of range");
    Triangle tri;
    tri.v = t;
    triangles_.push_back(tri);
  }
  build_topology();
  build_boundary(tags_);
  compute_geometry();
}

double Mesh::signed_area(int k) const {
  const auto& v = triangles_[k].v;
  return 0.5 * cross(vertices_[v[1]] - vertices_[v[0]], vertices_[v[2]] - vertices_[v[0]]);
}

void Mesh::build_topology() {
  std::map<std::pair<int, int>, int> index;
  triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (int k = 0; k < static_cast<int>(triangles_.size()); ++k) {
    const auto& v = triangles_[k].v;
    for (int i = 0; i < 3; ++i) {
      const auto key = sorted_pair(v[(i + 1) % 3], v[(i + 2) % 3]);
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.tri = {k, -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.tri[1] >= 0) throw MeshError("non-manifold edge: more than two triangles");
        e.tri[1] = k;
      }
      triangle_edges_[k][i] = it->second;
    }
  }
  for (int k = 0; k < static_cast<int>(triangles_.size()); ++k) {
    for (int i = 0; i < 3; ++i) {
      const Edge& e = edges_[triangle_edges_[k][i]];
      triangles_[k].neighbors[i] = e.tri[0] == k ? e.tri[1] : e.tri[0];
    }
  }
}

void Mesh::build_boundary(const std::vector<BoundaryTag>& tags) {
  std::map<std::pair<int, int>, int> tag_segment;
  for (const auto& t : tags) tag_segment[sorted_pair(t.v0, t.v1)] = t.segment;

  boundary_vertex_.assign(vertices_.size(), false);
  boundary_edges_.clear();
  num_segments_ = 0;
  for (int k = 0; k < static_cast<int>(triangles_.size()); ++k) {
    const auto& v = triangles_[k].v;
    for (int i = 0; i < 3; ++i) {
      const int e = triangle_edges_[k][i];
      if (!edges_[e].is_boundary()) continue;
      BoundaryEdge be;
      be.v = {v[(i + 1) % 3], v[(i + 2) % 3]};
      be.triangle = k;
      be.local_edge = i;
      be.edge = e;
      const Point a = vertices_[be.v[0]];
      const Point b = vertices_[be.v[1]];
      if (tags.empty()) {
        be.segment = classify_unit_square(a, b);
        if (be.segment < 0) throw MeshError("boundary edge does not lie on a side of the unit square");
      } else {
        auto it = tag_segment.find(sorted_pair(be.v[0], be.v[1]));
        if (it == tag_segment.end()) throw MeshError("boundary edge without a segment tag");
        be.segment = it->second;
      }
      const Point t = b - a;
      be.length = t.norm();
      be.normal = Point(t.y(), -t.x()) / be.length;
      boundary_vertex_[be.v[0]] = boundary_vertex_[be.v[1]] = true;
      num_segments_ = std::max(num_segments_, be.segment + 1);
      boundary_edges_.push_back(be);
    }
  }
  if (!tags.empty() && tags.size() != boundary_edges_.size())
    throw MeshError("boundary tag count does not match topological boundary");
  if (tags_.empty()) {
    for (const auto& be : boundary_edges_) tags_.push_back({be.v[0], be.v[1], be.segment});
  }
}

void Mesh::compute_geometry() {
  diameters_.resize(triangles_.size());
  corner_element_.assign(triangles_.size(), false);
  stats_ = MeshStats{};
  stats_.h_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(triangles_.size()); ++k) {
    const auto& v = triangles_[k].v;
    const double area = signed_area(k);
    if (!(area > 0.0)) throw MeshError("triangle " + std::to_string(k) + " is not counter-clockwise");
    double hk = 0.0, perimeter = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double len = (vertices_[v[(i + 1) % 3]] - vertices_[v[i]]).norm();
      hk = std::max(hk, len);
      perimeter += len;
    }
    diameters_[k] = hk;
    const double rho = 2.0 * area / perimeter;
    stats_.h = std::max(stats_.h, hk);
    stats_.h_min = std::min(stats_.h_min, hk);
    stats_.shape_regularity = std::max(stats_.shape_regularity, hk / rho);
    corner_element_[k] = boundary_vertex_[v[0]] && boundary_vertex_[v[1]] && boundary_vertex_[v[2]];
    if (corner_element_[k]) ++stats_.corner_elements;
  }
  stats_.vertices = vertices_.size();
  stats_.triangles = triangles_.size();
  stats_.edges = edges_.size();
  stats_.boundary_edges = boundary_edges_.size();
}

Mesh Mesh::with_vertices(std::vector<Point> vertices) const {
  if (vertices.size() != vertices_.size()) throw MeshError("vertex count mismatch");
  std::vector<std::array<int, 3>> tris;
  tris.reserve(triangles_.size());
  for (const auto& t : triangles_) tris.push_back(t.v);
  return Mesh(std::move(vertices), std::move(tris), tags_);
}

Mesh build_structured(int n) {
  if (n < 2) throw MeshError("build_structured: n_per_side must be >= 2");
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  // exact unit coordinates on the far sides
  for (int j = 0; j <= n; ++j) vertices[j * (n + 1) + n].x() = 1.0;
  for (int i = 0; i <= n; ++i) vertices[n * (n + 1) + i].y() = 1.0;

  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * n * n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(tris));
}

Mesh jitter(const Mesh& mesh, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0 && magnitude <= 0.25)) throw MeshError("jitter: magnitude must lie in [0, 0.25]");
  std::vector<Point> pts = mesh.vertices();
  if (magnitude == 0.0) return mesh.with_vertices(std::move(pts));

  constexpr int kMaxHalvings = 30;
  const double radius = magnitude * mesh.stats().h_min;
  const auto star = vertex_triangles(mesh);
  const auto& tris = mesh.triangles();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  auto star_positive = [&](int v) {
    for (int k : star[v]) {
      const auto& t = tris[k].v;
      if (!(cross(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]]) > 0.0)) return false;
    }
    return true;
  };

  for (int v = 0; v < static_cast<int>(pts.size()); ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    const double angle = 2.0 * std::numbers::pi * uniform();
    const double r = radius * std::sqrt(uniform());
    Point offset(r * std::cos(angle), r * std::sin(angle));
    const Point origin = pts[v];
    bool placed = false;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
      pts[v] = origin + offset;
      if (star_positive(v)) {
        placed = true;
        break;
      }
      offset *= 0.5;
    }
    if (!placed) {
      pts[v] = origin;
      if (!star_positive(v)) throw MeshError("jitter: cannot restore positive orientation");
    }
  }
  return mesh.with_vertices(std::move(pts));
}

std::vector<int> ordered_segment_edges(const Mesh& mesh, int segment) {
  const auto& bes = mesh.boundary_edges();
  std::map<int, int> by_start;
  std::map<int, int> ends;
  for (int i = 0; i < static_cast<int>(bes.size()); ++i) {
    if (bes[i].segment != segment) continue;
    by_start[bes[i].v[0]] = i;
    ends[bes[i].v[1]] = i;
  }
  std::vector<int> order;
  if (by_start.empty()) return order;
  int first = by_start.begin()->second;
  for (const auto& [start, e] : by_start) {
    if (!ends.contains(start)) {
      first = e;
      break;
    }
  }
  int current = first;
  while (order.size() < by_start.size()) {
    order.push_back(current);
    auto it = by_start.find(bes[current].v[1]);
    if (it == by_start.end() || it->second == first) break;
    current = it->second;
  }
  if (order.size() != by_start.size()) throw MeshError("boundary segment is not a single chain of edges");
  return order;
}

PatchSet build_patches(const Mesh& mesh, int edges_per_patch) {
  if (edges_per_patch < 5) throw MeshError("build_patches: edges_per_patch must be >= 5");
  const auto& bes = mesh.boundary_edges();
  const auto star = vertex_triangles(mesh);
  PatchSet set;
  for (int s = 0; s < mesh.num_segments(); ++s) {
    const auto chain = ordered_segment_edges(mesh, s);
    const int m = static_cast<int>(chain.size());
    if (m < 5)
      throw MeshError("build_patches: side " + std::to_string(s) + " has " + std::to_string(m) +
                      " edges, at least 5 required");
    const int count = std::max(1, m / edges_per_patch);
    int offset = 0;
    for (int p = 0; p < count; ++p) {
      const int len = (p + 1 == count) ? m - offset : edges_per_patch;
      BoundaryPatch patch;
      patch.id = static_cast<int>(set.patches.size());
      patch.segment = s;
      patch.edges.assign(chain.begin() + offset, chain.begin() + offset + len);
      patch.vertices.push_back(bes[patch.edges.front()].v[0]);
      for (int e : patch.edges) {
        patch.vertices.push_back(bes[e].v[1]);
        patch.measure += bes[e].length;
      }
      patch.interior_vertices.assign(patch.vertices.begin() + 1, patch.vertices.end() - 1);
      std::vector<int> tris;
      for (int v : patch.vertices) tris.insert(tris.end(), star[v].begin(), star[v].end());
      std::sort(tris.begin(), tris.end());
      tris.erase(std::unique(tris.begin(), tris.end()), tris.end());
      patch.triangles = std::move(tris);
      set.patches.push_back(std::move(patch));
      offset += len;
    }
  }
  const double h = mesh.stats().h;
  set.c1 = std::numeric_limits<double>::infinity();
  for (const auto& p : set.patches) {
    set.c1 = std::min(set.c1, p.measure / h);
    set.c2 = std::max(set.c2, p.measure / h);
  }
  return set;
}

PatchCheck check_patches(const Mesh& mesh, const PatchSet& set) {
  const auto& bes = mesh.boundary_edges();
  std::vector<int> used(bes.size(), 0);
  std::ostringstream msg;
  bool ok = true;
  for (const auto& p : set.patches) {
    if (p.interior_vertices.size() < 4) {
      ok = false;
      msg << "patch " << p.id << " has " << p.interior_vertices.size() << " inner nodes (< 4); ";
    }
    for (int e : p.edges) {
      if (bes[e].segment != p.segment) {
        ok = false;
        msg << "patch " << p.id << " spans more than one side; ";
      }
      ++used[e];
    }
  }
  for (std::size_t e = 0; e < bes.size(); ++e) {
    if (used[e] != 1) {
      ok = false;
      msg << "boundary edge " << e << " covered " << used[e] << " times; ";
    }
  }
  return {ok, msg.str()};
}

void write_mesh(const Mesh& mesh, std::ostream& os) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "vertices " << mesh.vertices().size() << '\n';
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << '\n';
  os << "triangles " << mesh.triangles().size() << '\n';
  for (const auto& t : mesh.triangles()) os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "boundary " << mesh.boundary_edges().size() << '\n';
  for (const auto& be : mesh.boundary_edges()) os << be.v[0] << ' ' << be.v[1] << ' ' << be.segment << '\n';
  os.precision(old);
}

Mesh read_mesh(std::istream& is) {
  auto header = [&is](const char* expected) {
    std::string word;
    std::size_t count = 0;
    if (!(is >> word >> count) || word != expected)
      throw MeshError(std::string("mesh file: expected header '") + expected + "'");
    return count;
  };
  const std::size_t nv = header("vertices");
  std::vector<Point> pts(nv);
  for (auto& p : pts)
    if (!(is >> p.x() >> p.y())) throw MeshError("mesh file: truncated vertex list");
  const std::size_t nt = header("triangles");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris)
    if (!(is >> t[0] >> t[1] >> t[2])) throw MeshError("mesh file: truncated triangle list");
  const std::size_t nb = header("boundary");
  std::vector<BoundaryTag> tags(nb);
  for (auto& b : tags)
    if (!(is >> b.v0 >> b.v1 >> b.segment)) throw MeshError("mesh file: truncated boundary list");
  return Mesh(std::move(pts), std::move(tris), std::move(tags));
}

}  // namespace nitsche
