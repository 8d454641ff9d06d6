#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nitsche {

using Point = Eigen::Vector2d;

/// Raised when a mesh or patch construction violates its preconditions.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counter-clockwise triangle. neighbors[i] is the triangle across the edge
/// opposite vertex i, or -1 on the boundary.
struct Triangle {
  std::array<int, 3> v{};
  std::array<int, 3> neighbors{-1, -1, -1};
};

/// Undirected mesh edge with v[0] < v[1]. tri[1] == -1 for boundary edges.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> tri{-1, -1};
  bool is_boundary() const { return tri[1] < 0; }
};

struct BoundaryEdge {
  std::array<int, 2> v{};  // oriented counter-clockwise around the domain
  int triangle = -1;
  int local_edge = -1;  // edge opposite this local vertex of `triangle`
  int edge = -1;        // index into Mesh::edges()
  int segment = -1;     // straight side Gamma_i
  Point normal = Point::Zero();
  double length = 0.0;
};

/// Input form of a boundary edge, as read from a mesh file.
struct BoundaryTag {
  int v0 = 0;
  int v1 = 0;
  int segment = 0;
};

struct MeshStats {
  double h = 0.0;      // max_K h_K, h_K = longest edge of K
  double h_min = 0.0;  // min_K h_K
  double shape_regularity = 0.0;  // max_K h_K / rho_K
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;
  std::size_t corner_elements = 0;
};

/// Immutable conforming triangulation with boundary topology.
class Mesh {
 public:
  /// Builds topology from raw arrays. If `tags` is empty, boundary edges are
  /// classified onto the sides of the unit square (0: y=0, 1: x=1, 2: y=1,
  /// 3: x=0).
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryTag> tags = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  /// Edge index of the edge opposite local vertex i of triangle k.
  int triangle_edge(int k, int i) const { return triangle_edges_[k][i]; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  /// Triangles with all three vertices on the boundary.
  bool is_corner_element(int k) const { return corner_element_[k]; }
  double element_diameter(int k) const { return diameters_[k]; }
  double signed_area(int k) const;
  int num_segments() const { return num_segments_; }

  const MeshStats& stats() const { return stats_; }

  /// Same connectivity and boundary tags, new coordinates.
  Mesh with_vertices(std::vector<Point> vertices) const;

 private:
  void build_topology();
  void build_boundary(const std::vector<BoundaryTag>& tags);
  void compute_geometry();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<BoundaryTag> tags_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> corner_element_;
  std::vector<double> diameters_;
  int num_segments_ = 0;
  MeshStats stats_;
};

/// Unit square, n cells per side, each cell split along its
/// (lower-left, upper-right) diagonal.
Mesh build_structured(int n_per_side);

/// Moves interior vertices by at most magnitude * h_min in a seeded
/// pseudo-random direction, halving a vertex offset until all adjacent
/// triangles stay positively oriented.
Mesh jitter(const Mesh& mesh, double magnitude, std::uint64_t seed);

/// A run of consecutive boundary edges F_j on one side, with the boundary
/// elements P_j touching it.
struct BoundaryPatch {
  int id = 0;
  int segment = 0;
  std::vector<int> edges;              // indices into Mesh::boundary_edges(), in order
  std::vector<int> vertices;           // ordered vertices of closed F_j
  std::vector<int> interior_vertices;  // vertices of the open face
  std::vector<int> triangles;          // P_j
  double measure = 0.0;
};

struct PatchSet {
  std::vector<BoundaryPatch> patches;
  double c1 = 0.0;  // min_j meas(F_j) / h
  double c2 = 0.0;  // max_j meas(F_j) / h
};

/// Partitions every side into runs of `edges_per_patch` edges; the last run
/// on a side absorbs the remainder.
PatchSet build_patches(const Mesh& mesh, int edges_per_patch = 5);

/// Boundary edge indices of one side, ordered along the side.
std::vector<int> ordered_segment_edges(const Mesh& mesh, int segment);

struct PatchCheck {
  bool ok = true;
  std::string message;
};

/// Checks the patch invariants: single side, at least four inner nodes,
/// disjoint runs covering every side.
PatchCheck check_patches(const Mesh& mesh, const PatchSet& set);

void write_mesh(const Mesh& mesh, std::ostream& os);
Mesh read_mesh(std::istream& is);

}  // namespace nitsche
