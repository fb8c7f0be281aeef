#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace afem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  bool on_boundary = false;
};

/// Active element of a triangulation. Vertices are stored counter-clockwise;
/// the refinement edge is the local edge opposite v[ref_edge].
struct Triangle {
  std::array<std::size_t, 3> v{};
  int ref_edge = 0;
  int generation = 0;
  // Index of the element of the previous snapshot that contains this one.
  // Unset on initial meshes.
  std::optional<std::size_t> parent;
};

/// Input record for build_initial: three vertex indices plus a refinement
/// edge label (ignored under LabelPolicy::kLongestEdge).
struct TriangleInput {
  std::array<std::size_t, 3> v{};
  int ref_edge = 0;
};

enum class LabelPolicy {
  kKeep,         // use the supplied labels, reject incompatible ones
  kLongestEdge,  // relabel with the longest edge, then fix up pairs
};

struct MeshEdge {
  std::array<std::size_t, 2> v{};  // v[0] < v[1]
  // Incident active triangles; tri[1] is unset on boundary edges.
  std::array<std::optional<std::size_t>, 2> tri;
  std::array<int, 2> local{-1, -1};  // local edge index inside tri[i]
  bool on_boundary() const { return !tri[1].has_value(); }
};

/// One bisection performed during a refine call, with the vertex triples of
/// the parent and both children (indices into the output vertex list).
struct Bisection {
  std::array<std::size_t, 3> parent{};
  std::array<std::array<std::size_t, 3>, 2> children{};
};

struct MeshStats {
  double min_angle = 0.0;
  double max_neighbor_area_ratio = 1.0;
  std::size_t max_vertex_valence = 0;
  double h_max = 0.0;
  double h_min = 0.0;
};

class Triangulation;
using MeshPtr = std::shared_ptr<const Triangulation>;

/// Immutable snapshot of a conforming triangulation. Refinement produces a
/// new snapshot; vertex indices of the input are preserved and new vertices
/// are appended, each remembering the edge it bisects.
class Triangulation {
 public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<MeshEdge>& edges() const { return edges_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  Point point(std::size_t vertex) const {
    return {vertices_[vertex].x, vertices_[vertex].y};
  }
  std::array<Point, 3> corners(std::size_t tri) const;
  double area(std::size_t tri) const;
  double total_area() const;

  // Edge index of the local edge `local` (opposite v[local]) of `tri`.
  std::size_t edge_of(std::size_t tri, int local) const {
    return tri_edges_[tri][static_cast<std::size_t>(local)];
  }
  std::optional<std::size_t> neighbor(std::size_t tri, int local) const;

  // Triangles incident to a vertex.
  std::span<const std::size_t> vertex_triangles(std::size_t vertex) const;

  // For vertices created by refinement, the endpoints of the bisected edge;
  // {kNone, kNone} for vertices of the initial mesh.
  const std::vector<std::array<std::size_t, 2>>& vertex_parents() const {
    return vertex_parents_;
  }

  // Bisections performed by the refine call that produced this snapshot.
  const std::vector<Bisection>& bisections() const { return bisections_; }

  int max_generation() const;

  std::uint64_t id() const { return id_; }
  const std::vector<std::uint64_t>& ancestors() const { return ancestors_; }
  bool is_refinement_of(const Triangulation& coarse) const;

  // Full structural re-check: orientation, positive areas, edges shared by
  // at most two elements, no vertex in the interior of a boundary edge.
  bool is_conforming() const;

 private:
  friend Triangulation build_snapshot(std::vector<Vertex>,
                                      std::vector<Triangle>,
                                      std::vector<std::array<std::size_t, 2>>,
                                      std::vector<Bisection>,
                                      std::vector<std::uint64_t>);

  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<MeshEdge> edges_;
  std::vector<std::array<std::size_t, 3>> tri_edges_;
  std::vector<std::size_t> vt_offsets_;
  std::vector<std::size_t> vt_items_;
  std::vector<std::array<std::size_t, 2>> vertex_parents_;
  std::vector<Bisection> bisections_;
  std::uint64_t id_ = 0;
  std::vector<std::uint64_t> ancestors_;
};

/// Builds generation-0 triangulation. Clockwise input triangles are
/// reoriented (with their label adjusted); boundary flags are recomputed
/// from edge incidence.
Triangulation build_initial(std::vector<Vertex> vertices,
                            std::span<const TriangleInput> triangles,
                            LabelPolicy policy = LabelPolicy::kLongestEdge);
MeshPtr make_initial(std::vector<Vertex> vertices,
                     std::span<const TriangleInput> triangles,
                     LabelPolicy policy = LabelPolicy::kLongestEdge);

/// Newest-vertex bisection with recursive completion. Every marked element
/// is bisected `ell` times; completion bisects other elements only as far as
/// conformity requires.
Triangulation refine(const Triangulation& mesh,
                     std::span<const std::size_t> marked, int ell = 1);
MeshPtr refine(const MeshPtr& mesh, std::span<const std::size_t> marked,
               int ell = 1);
MeshPtr refine_uniform(const MeshPtr& mesh, int sweeps = 1);

// h_tau = area^(1/2)
std::vector<double> meshsize(const Triangulation& mesh);

// Active elements sharing at least one vertex with tri, including tri,
// in increasing index order.
std::vector<std::size_t> patch(const Triangulation& mesh, std::size_t tri);

MeshStats mesh_stats(const Triangulation& mesh);

// Interior angles of an element sorted ascending.
std::array<double, 3> sorted_angles(const Triangulation& mesh, std::size_t tri);

// Locate the element containing p (brute force); nullopt outside the mesh.
std::optional<std::size_t> locate(const Triangulation& mesh, Point p);

namespace meshes {
MeshPtr single_triangle(Point a, Point b, Point c);
// Unit square split by the diagonal (0,0)-(1,1).
MeshPtr unit_square_two();
// n x n grid of the unit square, every cell split by its (0,0)-(1,1)
// diagonal.
MeshPtr unit_square_grid(int n);
// (-1,1)^2 minus [0,1)x(-1,0]: three unit squares, each cut into four by
// its diagonals.
MeshPtr lshape();
}  // namespace meshes

// Text format: "NV NT", NV lines "x y bflag", NT lines "v0 v1 v2 ref_edge".
void write_mesh(std::ostream& os, const Triangulation& mesh);
MeshPtr read_mesh(std::istream& is,
                  LabelPolicy policy = LabelPolicy::kKeep);
MeshPtr read_mesh_file(const std::string& path,
                       LabelPolicy policy = LabelPolicy::kKeep);
void write_mesh_file(const std::string& path, const Triangulation& mesh);

// Legacy ASCII VTK unstructured grid, optional per-cell scalar field.
void write_vtk(std::ostream& os, const Triangulation& mesh,
               std::span<const double> cell_data = {},
               const std::string& cell_data_name = "eta");

}  // namespace afem
