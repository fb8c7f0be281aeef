#include "afem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "afem/error.hpp"

namespace afem {

namespace {

constexpr std::size_t kNone = Triangulation::kNone;

std::atomic<std::uint64_t> g_next_mesh_id{1};

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

double signed_area(Point a, Point b, Point c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double dist(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Vertices of the local edge opposite vertex `local`.
std::array<std::size_t, 2> local_edge(const std::array<std::size_t, 3>& v,
                                      int local) {
  const auto i = static_cast<std::size_t>(local);
  return {v[(i + 1) % 3], v[(i + 2) % 3]};
}

// Uniform bucket grid over vertex positions, used to find vertices lying in
// the interior of boundary edges.
class VertexGrid {
 public:
  explicit VertexGrid(const std::vector<Vertex>& verts) : verts_(verts) {
    xmin_ = ymin_ = std::numeric_limits<double>::infinity();
    double xmax = -xmin_, ymax = -ymin_;
    for (const auto& v : verts) {
      xmin_ = std::min(xmin_, v.x);
      ymin_ = std::min(ymin_, v.y);
      xmax = std::max(xmax, v.x);
      ymax = std::max(ymax, v.y);
    }
    n_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(verts.size()))));
    dx_ = std::max(xmax - xmin_, 1e-300) / static_cast<double>(n_);
    dy_ = std::max(ymax - ymin_, 1e-300) / static_cast<double>(n_);
    buckets_.resize(n_ * n_);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      buckets_[cell(ix(verts[i].x), iy(verts[i].y))].push_back(i);
    }
  }

  template <class Fn>
  void visit(double x0, double y0, double x1, double y1, Fn&& fn) const {
    const std::size_t i0 = ix(std::min(x0, x1)), i1 = ix(std::max(x0, x1));
    const std::size_t j0 = iy(std::min(y0, y1)), j1 = iy(std::max(y0, y1));
    for (std::size_t i = i0; i <= i1; ++i)
      for (std::size_t j = j0; j <= j1; ++j)
        for (std::size_t v : buckets_[cell(i, j)]) fn(v);
  }

 private:
  std::size_t clampi(double t) const {
    if (!(t > 0.0)) return 0;
    return std::min(n_ - 1, static_cast<std::size_t>(t));
  }
  std::size_t ix(double x) const { return clampi((x - xmin_) / dx_); }
  std::size_t iy(double y) const { return clampi((y - ymin_) / dy_); }
  std::size_t cell(std::size_t i, std::size_t j) const { return i * n_ + j; }

  const std::vector<Vertex>& verts_;
  double xmin_, ymin_, dx_, dy_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> buckets_;
};

bool has_hanging_vertex(const Triangulation& mesh) {
  const auto& verts = mesh.vertices();
  VertexGrid grid(verts);
  for (const auto& e : mesh.edges()) {
    if (!e.on_boundary()) continue;
    const Point a = mesh.point(e.v[0]), b = mesh.point(e.v[1]);
    const double len = dist(a, b);
    bool found = false;
    grid.visit(a.x, a.y, b.x, b.y, [&](std::size_t k) {
      if (found || k == e.v[0] || k == e.v[1]) return;
      const Point p = mesh.point(k);
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (std::abs(cross) > 1e-12 * len * len) return;
      const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) /
                       (len * len);
      if (t > 1e-12 && t < 1.0 - 1e-12) found = true;
    });
    if (found) return true;
  }
  return false;
}

}  // namespace

// Builds adjacency and bookkeeping for a list of active triangles.
Triangulation build_snapshot(std::vector<Vertex> vertices,
                             std::vector<Triangle> triangles,
                             std::vector<std::array<std::size_t, 2>> parents,
                             std::vector<Bisection> bisections,
                             std::vector<std::uint64_t> ancestors) {
  Triangulation m;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  m.vertex_parents_ = std::move(parents);
  m.bisections_ = std::move(bisections);
  m.ancestors_ = std::move(ancestors);
  m.id_ = g_next_mesh_id.fetch_add(1);

  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(m.triangles_.size() * 2);
  m.tri_edges_.resize(m.triangles_.size());
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& v = m.triangles_[t].v;
    for (int i = 0; i < 3; ++i) {
      const auto ev = local_edge(v, i);
      const auto key = edge_key(ev[0], ev[1]);
      auto [it, inserted] = index.try_emplace(key, m.edges_.size());
      if (inserted) {
        MeshEdge e;
        e.v = {std::min(ev[0], ev[1]), std::max(ev[0], ev[1])};
        e.tri[0] = t;
        e.local[0] = i;
        m.edges_.push_back(e);
      } else {
        MeshEdge& e = m.edges_[it->second];
        if (e.tri[1]) {
          throw Error(ErrorCode::kNonConforming,
                      "edge (" + std::to_string(e.v[0]) + "," +
                          std::to_string(e.v[1]) +
                          ") shared by more than two triangles");
        }
        // Neighbours must traverse the shared edge in opposite directions.
        const auto& w = m.triangles_[*e.tri[0]].v;
        const auto first = local_edge(w, e.local[0]);
        if (first[0] == ev[0]) {
          throw Error(ErrorCode::kNonConforming,
                      "overlapping triangles across an edge");
        }
        e.tri[1] = t;
        e.local[1] = i;
      }
      m.tri_edges_[t][static_cast<std::size_t>(i)] = it->second;
    }
  }

  for (auto& vert : m.vertices_) vert.on_boundary = false;
  for (const auto& e : m.edges_) {
    if (e.on_boundary()) {
      m.vertices_[e.v[0]].on_boundary = true;
      m.vertices_[e.v[1]].on_boundary = true;
    }
  }

  m.vt_offsets_.assign(m.vertices_.size() + 1, 0);
  for (const auto& t : m.triangles_)
    for (auto v : t.v) ++m.vt_offsets_[v + 1];
  for (std::size_t i = 0; i < m.vertices_.size(); ++i)
    m.vt_offsets_[i + 1] += m.vt_offsets_[i];
  m.vt_items_.resize(m.vt_offsets_.back());
  std::vector<std::size_t> fill(m.vt_offsets_.begin(), m.vt_offsets_.end() - 1);
  for (std::size_t t = 0; t < m.triangles_.size(); ++t)
    for (auto v : m.triangles_[t].v) m.vt_items_[fill[v]++] = t;
  return m;
}

std::array<Point, 3> Triangulation::corners(std::size_t tri) const {
  const auto& v = triangles_[tri].v;
  return {point(v[0]), point(v[1]), point(v[2])};
}

double Triangulation::area(std::size_t tri) const {
  const auto c = corners(tri);
  return signed_area(c[0], c[1], c[2]);
}

double Triangulation::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) s += area(t);
  return s;
}

std::optional<std::size_t> Triangulation::neighbor(std::size_t tri,
                                                   int local) const {
  const auto& e = edges_[edge_of(tri, local)];
  if (e.on_boundary()) return std::nullopt;
  return *e.tri[0] == tri ? e.tri[1] : e.tri[0];
}

std::span<const std::size_t> Triangulation::vertex_triangles(
    std::size_t vertex) const {
  return {vt_items_.data() + vt_offsets_[vertex],
          vt_offsets_[vertex + 1] - vt_offsets_[vertex]};
}

int Triangulation::max_generation() const {
  int g = 0;
  for (const auto& t : triangles_) g = std::max(g, t.generation);
  return g;
}

bool Triangulation::is_refinement_of(const Triangulation& coarse) const {
  if (coarse.id_ == id_) return true;
  return std::find(ancestors_.begin(), ancestors_.end(), coarse.id_) !=
         ancestors_.end();
}

bool Triangulation::is_conforming() const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& v = triangles_[t].v;
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) return false;
    if (!(area(t) > 0.0)) return false;
    if (triangles_[t].ref_edge < 0 || triangles_[t].ref_edge > 2) return false;
  }
  // Rebuilding the adjacency re-validates edge multiplicity and orientation.
  try {
    const auto copy = build_snapshot(vertices_, triangles_, vertex_parents_, {}, {});
    (void)copy;
  } catch (const Error&) {
    return false;
  }
  return !has_hanging_vertex(*this);
}

namespace {

// Chain t -> neighbour across t's refinement edge whenever that neighbour
// labels a different edge. A cycle means recursive completion cannot end.
bool labels_have_cycle(const Triangulation& m,
                       const std::vector<int>& labels) {
  const std::size_t n = m.num_triangles();
  std::vector<std::size_t> next(n, kNone);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t e = m.edge_of(t, labels[t]);
    const auto& edge = m.edges()[e];
    if (edge.on_boundary()) continue;
    const std::size_t nb = *edge.tri[0] == t ? *edge.tri[1] : *edge.tri[0];
    if (m.edge_of(nb, labels[nb]) != e) next[t] = nb;
  }
  std::vector<char> state(n, 0);  // 0 new, 1 on path, 2 done
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s]) continue;
    std::vector<std::size_t> path;
    std::size_t t = s;
    while (t != kNone && state[t] == 0) {
      state[t] = 1;
      path.push_back(t);
      t = next[t];
    }
    if (t != kNone && state[t] == 1) return true;
    for (auto p : path) state[p] = 2;
  }
  return false;
}

std::vector<int> longest_edge_labels(const Triangulation& m) {
  std::vector<int> labels(m.num_triangles(), 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& v = m.triangles()[t].v;
    int best = 0;
    double best_len = -1.0;
    std::uint64_t best_key = 0;
    for (int i = 0; i < 3; ++i) {
      const auto ev = local_edge(v, i);
      const double len = dist(m.point(ev[0]), m.point(ev[1]));
      const auto key = edge_key(ev[0], ev[1]);
      // Ties resolved by the global edge key so that two neighbours whose
      // longest edges coincide in length pick the same one.
      if (len > best_len * (1.0 + 1e-12) ||
          (std::abs(len - best_len) <= 1e-12 * best_len && key < best_key)) {
        best = i;
        best_len = len;
        best_key = key;
      }
    }
    labels[t] = best;
  }
  return labels;
}

}  // namespace

Triangulation build_initial(std::vector<Vertex> vertices,
                            std::span<const TriangleInput> input,
                            LabelPolicy policy) {
  if (vertices.empty() || input.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty mesh");
  }
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite vertex coordinate");
    }
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  const double bbox_area = (xmax - xmin) * (ymax - ymin);

  std::vector<Triangle> tris;
  tris.reserve(input.size());
  for (const auto& in : input) {
    for (auto v : in.v) {
      if (v >= vertices.size()) {
        throw Error(ErrorCode::kInvalidArgument, "vertex index out of range");
      }
    }
    if (in.v[0] == in.v[1] || in.v[1] == in.v[2] || in.v[0] == in.v[2]) {
      throw Error(ErrorCode::kDegenerateTriangle, "repeated vertex");
    }
    if (policy == LabelPolicy::kKeep && (in.ref_edge < 0 || in.ref_edge > 2)) {
      throw Error(ErrorCode::kIncompatibleLabels, "ref_edge outside {0,1,2}");
    }
    Triangle t;
    t.v = in.v;
    t.ref_edge = in.ref_edge;
    const Point a{vertices[t.v[0]].x, vertices[t.v[0]].y};
    const Point b{vertices[t.v[1]].x, vertices[t.v[1]].y};
    const Point c{vertices[t.v[2]].x, vertices[t.v[2]].y};
    const double area = signed_area(a, b, c);
    if (std::abs(area) < 1e-14 * bbox_area || bbox_area <= 0.0) {
      throw Error(ErrorCode::kDegenerateTriangle,
                  "triangle area below tolerance");
    }
    if (area < 0.0) {
      std::swap(t.v[1], t.v[2]);
      if (t.ref_edge == 1) {
        t.ref_edge = 2;
      } else if (t.ref_edge == 2) {
        t.ref_edge = 1;
      }
    }
    tris.push_back(t);
  }

  std::vector<std::array<std::size_t, 2>> parents(vertices.size(),
                                                  {kNone, kNone});
  Triangulation m =
      build_snapshot(std::move(vertices), std::move(tris), std::move(parents), {}, {});
  if (has_hanging_vertex(m)) {
    throw Error(ErrorCode::kNonConforming, "hanging node on an edge");
  }

  std::vector<int> labels(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    labels[t] = m.triangles()[t].ref_edge;

  if (policy == LabelPolicy::kKeep) {
    if (labels_have_cycle(m, labels)) {
      throw Error(ErrorCode::kIncompatibleLabels,
                  "refinement-edge labels admit a completion cycle");
    }
  } else {
    const auto longest = longest_edge_labels(m);
    labels = longest;
    // One fix-up sweep: pair up refinement edges across interior edges when
    // the neighbour has an equally long alternative that is not yet paired.
    for (const auto& e : m.edges()) {
      if (e.on_boundary()) continue;
      const std::size_t t0 = *e.tri[0], t1 = *e.tri[1];
      const bool r0 = labels[t0] == e.local[0], r1 = labels[t1] == e.local[1];
      if (r0 == r1) continue;
      const std::size_t other = r0 ? t1 : t0;
      const int want = r0 ? e.local[1] : e.local[0];
      const auto cur_edge = m.edges()[m.edge_of(other, labels[other])];
      const bool cur_paired =
          !cur_edge.on_boundary() &&
          labels[*cur_edge.tri[0]] == cur_edge.local[0] &&
          labels[*cur_edge.tri[1]] == cur_edge.local[1];
      const auto& ov = m.triangles()[other].v;
      const auto a = local_edge(ov, want), b = local_edge(ov, labels[other]);
      const double la = dist(m.point(a[0]), m.point(a[1]));
      const double lb = dist(m.point(b[0]), m.point(b[1]));
      if (!cur_paired && std::abs(la - lb) <= 1e-12 * lb) labels[other] = want;
    }
    if (labels_have_cycle(m, labels)) labels = longest;
  }

  std::vector<Triangle> out = m.triangles();
  for (std::size_t t = 0; t < out.size(); ++t) out[t].ref_edge = labels[t];
  return build_snapshot(m.vertices(), std::move(out), m.vertex_parents(), {}, {});
}

MeshPtr make_initial(std::vector<Vertex> vertices,
                     std::span<const TriangleInput> triangles,
                     LabelPolicy policy) {
  return std::make_shared<const Triangulation>(
      build_initial(std::move(vertices), triangles, policy));
}

namespace {

class Refiner {
 public:
  explicit Refiner(const Triangulation& mesh)
      : verts_(mesh.vertices()), parents_(mesh.vertex_parents()) {
    tris_.reserve(mesh.num_triangles() * 3);
    edges_.reserve(mesh.num_triangles() * 4);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& in = mesh.triangles()[t];
      tris_.push_back({in.v, in.ref_edge, in.generation, t, true, false});
      add_edges(t);
    }
    alive_ = mesh.num_triangles();
  }

  void mark_lineage(std::size_t t) { tris_[t].lineage = true; }
  bool alive(std::size_t t) const { return tris_[t].alive; }

  std::vector<std::size_t> alive_lineage() const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < tris_.size(); ++t)
      if (tris_[t].alive && tris_[t].lineage) out.push_back(t);
    return out;
  }

  void refine_element(std::size_t start) {
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      const std::size_t s = stack.back();
      if (!tris_[s].alive) {
        stack.pop_back();
        continue;
      }
      const auto ev = local_edge(tris_[s].v, tris_[s].ref);
      const auto key = edge_key(ev[0], ev[1]);
      const std::size_t nb = other(key, s);
      if (nb == kNone) {
        const std::size_t m = midpoint(ev[0], ev[1], true);
        bisect(s, m);
        stack.pop_back();
      } else if (ref_key(nb) == key) {
        const std::size_t m = midpoint(ev[0], ev[1], false);
        bisect(s, m);
        bisect(nb, m);
        stack.pop_back();
      } else {
        stack.push_back(nb);
        if (stack.size() > 2 * alive_) {
          throw Error(ErrorCode::kCompletionOverflow,
                      "completion recursion exceeded depth bound");
        }
      }
    }
  }

  Triangulation finish(const Triangulation& input) {
    std::vector<Triangle> out;
    out.reserve(alive_);
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      Triangle tri;
      tri.v = t.v;
      tri.ref_edge = t.ref;
      tri.generation = t.gen;
      tri.parent = t.origin;
      out.push_back(tri);
    }
    auto ancestors = input.ancestors();
    ancestors.push_back(input.id());
    return build_snapshot(std::move(verts_), std::move(out), std::move(parents_),
                          std::move(log_), std::move(ancestors));
  }

 private:
  struct WorkTri {
    std::array<std::size_t, 3> v;
    int ref;
    int gen;
    std::size_t origin;
    bool alive;
    bool lineage;
  };

  std::uint64_t ref_key(std::size_t t) const {
    const auto ev = local_edge(tris_[t].v, tris_[t].ref);
    return edge_key(ev[0], ev[1]);
  }

  std::size_t other(std::uint64_t key, std::size_t t) const {
    const auto it = edges_.find(key);
    if (it == edges_.end()) return kNone;
    return it->second[0] == t ? it->second[1] : it->second[0];
  }

  void add_edges(std::size_t t) {
    for (int i = 0; i < 3; ++i) {
      const auto ev = local_edge(tris_[t].v, i);
      auto [it, inserted] =
          edges_.try_emplace(edge_key(ev[0], ev[1]), std::array{kNone, kNone});
      auto& slots = it->second;
      if (slots[0] == kNone) {
        slots[0] = t;
      } else if (slots[1] == kNone) {
        slots[1] = t;
      } else {
        throw Error(ErrorCode::kNonConforming,
                    "refinement produced an edge with three triangles");
      }
    }
  }

  void remove_edges(std::size_t t) {
    for (int i = 0; i < 3; ++i) {
      const auto ev = local_edge(tris_[t].v, i);
      const auto it = edges_.find(edge_key(ev[0], ev[1]));
      auto& slots = it->second;
      if (slots[0] == t) slots[0] = kNone;
      if (slots[1] == t) slots[1] = kNone;
      if (slots[0] == kNone && slots[1] == kNone) {
        edges_.erase(it);
      } else if (slots[0] == kNone) {
        std::swap(slots[0], slots[1]);
      }
    }
  }

  std::size_t midpoint(std::size_t a, std::size_t b, bool boundary) {
    const auto key = edge_key(a, b);
    if (const auto it = midpoints_.find(key); it != midpoints_.end()) {
      return it->second;
    }
    Vertex v;
    v.x = 0.5 * (verts_[a].x + verts_[b].x);
    v.y = 0.5 * (verts_[a].y + verts_[b].y);
    v.on_boundary = boundary;
    verts_.push_back(v);
    parents_.push_back({std::min(a, b), std::max(a, b)});
    midpoints_.emplace(key, verts_.size() - 1);
    return verts_.size() - 1;
  }

  void bisect(std::size_t t, std::size_t m) {
    remove_edges(t);
    const WorkTri p = tris_[t];
    tris_[t].alive = false;
    const auto r = static_cast<std::size_t>(p.ref);
    const std::size_t a = p.v[r], b = p.v[(r + 1) % 3], c = p.v[(r + 2) % 3];
    // Each child's refinement edge is the parent edge it inherits, i.e.
    // the edge opposite the new vertex m.
    tris_.push_back({{a, b, m}, 2, p.gen + 1, p.origin, true, p.lineage});
    add_edges(tris_.size() - 1);
    tris_.push_back({{a, m, c}, 1, p.gen + 1, p.origin, true, p.lineage});
    add_edges(tris_.size() - 1);
    ++alive_;
    log_.push_back({p.v, {{{a, b, m}, {a, m, c}}}});
  }

  std::vector<Vertex> verts_;
  std::vector<std::array<std::size_t, 2>> parents_;
  std::vector<WorkTri> tris_;
  std::unordered_map<std::uint64_t, std::array<std::size_t, 2>> edges_;
  std::unordered_map<std::uint64_t, std::size_t> midpoints_;
  std::vector<Bisection> log_;
  std::size_t alive_ = 0;
};

}  // namespace

Triangulation refine(const Triangulation& mesh,
                     std::span<const std::size_t> marked, int ell) {
  if (ell < 1) throw Error(ErrorCode::kInvalidArgument, "ell must be >= 1");
  for (auto t : marked) {
    if (t >= mesh.num_triangles()) {
      throw Error(ErrorCode::kInvalidArgument, "marked element out of range");
    }
  }
  Refiner r(mesh);
  for (auto t : marked) r.mark_lineage(t);
  for (int pass = 0; pass < ell; ++pass) {
    std::vector<std::size_t> targets;
    if (pass == 0) {
      targets.assign(marked.begin(), marked.end());
    } else {
      targets = r.alive_lineage();
    }
    for (auto t : targets)
      if (r.alive(t)) r.refine_element(t);
  }
  return r.finish(mesh);
}

MeshPtr refine(const MeshPtr& mesh, std::span<const std::size_t> marked,
               int ell) {
  return std::make_shared<const Triangulation>(refine(*mesh, marked, ell));
}

MeshPtr refine_uniform(const MeshPtr& mesh, int sweeps) {
  MeshPtr cur = mesh;
  for (int s = 0; s < sweeps; ++s) {
    std::vector<std::size_t> all(cur->num_triangles());
    for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
    cur = refine(cur, all, 1);
  }
  return cur;
}

std::vector<double> meshsize(const Triangulation& mesh) {
  std::vector<double> h(mesh.num_triangles());
  for (std::size_t t = 0; t < h.size(); ++t) h[t] = std::sqrt(mesh.area(t));
  return h;
}

std::vector<std::size_t> patch(const Triangulation& mesh, std::size_t tri) {
  std::vector<std::size_t> out;
  for (auto v : mesh.triangles()[tri].v) {
    const auto ts = mesh.vertex_triangles(v);
    out.insert(out.end(), ts.begin(), ts.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::array<double, 3> sorted_angles(const Triangulation& mesh,
                                    std::size_t tri) {
  const auto c = mesh.corners(tri);
  std::array<double, 3> ang{};
  for (int i = 0; i < 3; ++i) {
    const Point p = c[static_cast<std::size_t>(i)];
    const Point q = c[static_cast<std::size_t>((i + 1) % 3)];
    const Point r = c[static_cast<std::size_t>((i + 2) % 3)];
    const double ux = q.x - p.x, uy = q.y - p.y, vx = r.x - p.x, vy = r.y - p.y;
    ang[static_cast<std::size_t>(i)] =
        std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
  }
  std::sort(ang.begin(), ang.end());
  return ang;
}

MeshStats mesh_stats(const Triangulation& mesh) {
  MeshStats s;
  s.min_angle = std::numbers::pi;
  s.h_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    s.min_angle = std::min(s.min_angle, sorted_angles(mesh, t)[0]);
    const double h = std::sqrt(mesh.area(t));
    s.h_min = std::min(s.h_min, h);
    s.h_max = std::max(s.h_max, h);
  }
  std::vector<std::size_t> valence(mesh.num_vertices(), 0);
  for (const auto& e : mesh.edges()) {
    ++valence[e.v[0]];
    ++valence[e.v[1]];
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    s.max_vertex_valence = std::max(s.max_vertex_valence, valence[v]);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto t : mesh.vertex_triangles(v)) {
      lo = std::min(lo, mesh.area(t));
      hi = std::max(hi, mesh.area(t));
    }
    if (hi > 0.0) s.max_neighbor_area_ratio = std::max(s.max_neighbor_area_ratio, hi / lo);
  }
  return s;
}

std::optional<std::size_t> locate(const Triangulation& mesh, Point p) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double a = mesh.area(t);
    const double tol = -1e-12 * a;
    if (signed_area(p, c[1], c[2]) >= tol && signed_area(c[0], p, c[2]) >= tol &&
        signed_area(c[0], c[1], p) >= tol) {
      return t;
    }
  }
  return std::nullopt;
}

namespace meshes {

MeshPtr single_triangle(Point a, Point b, Point c) {
  std::vector<Vertex> v{{a.x, a.y, true}, {b.x, b.y, true}, {c.x, c.y, true}};
  const TriangleInput t{{0, 1, 2}, 0};
  return make_initial(std::move(v), std::span(&t, 1));
}

MeshPtr unit_square_two() { return unit_square_grid(1); }

MeshPtr unit_square_grid(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "grid size must be >= 1");
  const auto idx = [n](int i, int j) {
    return static_cast<std::size_t>(j * (n + 1) + i);
  };
  std::vector<Vertex> v;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, false});
  std::vector<TriangleInput> t;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      t.push_back({{idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)}, 1});
      t.push_back({{idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)}, 2});
    }
  }
  return make_initial(std::move(v), t);
}

MeshPtr lshape() {
  std::vector<Vertex> v{{-1, -1, false}, {0, -1, false}, {-1, 0, false},
                        {0, 0, false},   {1, 0, false},  {-1, 1, false},
                        {0, 1, false},   {1, 1, false}};
  std::vector<TriangleInput> t;
  const auto square = [&](std::size_t a, std::size_t b, std::size_t c,
                          std::size_t d) {
    // a,b,c,d counter-clockwise corners; fan around the centre.
    const Vertex centre{0.25 * (v[a].x + v[b].x + v[c].x + v[d].x),
                        0.25 * (v[a].y + v[b].y + v[c].y + v[d].y), false};
    v.push_back(centre);
    const std::size_t m = v.size() - 1;
    t.push_back({{m, a, b}, 0});
    t.push_back({{m, b, c}, 0});
    t.push_back({{m, c, d}, 0});
    t.push_back({{m, d, a}, 0});
  };
  square(0, 1, 3, 2);
  square(2, 3, 6, 5);
  square(3, 4, 7, 6);
  return make_initial(std::move(v), t);
}

}  // namespace meshes

void write_mesh(std::ostream& os, const Triangulation& mesh) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu %zu\n", mesh.num_vertices(),
                mesh.num_triangles());
  os << buf;
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", v.x, v.y,
                  v.on_boundary ? 1 : 0);
    os << buf;
  }
  for (const auto& t : mesh.triangles()) {
    std::snprintf(buf, sizeof buf, "%zu %zu %zu %d\n", t.v[0], t.v[1], t.v[2],
                  t.ref_edge);
    os << buf;
  }
}

MeshPtr read_mesh(std::istream& is, LabelPolicy policy) {
  std::size_t nv = 0, nt = 0;
  if (!(is >> nv >> nt)) {
    throw Error(ErrorCode::kParseError, "expected header 'NV NT'");
  }
  std::vector<Vertex> verts(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    int flag = 0;
    if (!(is >> verts[i].x >> verts[i].y >> flag)) {
      throw Error(ErrorCode::kParseError,
                  "bad vertex line " + std::to_string(i + 2));
    }
    verts[i].on_boundary = flag != 0;
  }
  std::vector<TriangleInput> tris(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!(is >> tris[i].v[0] >> tris[i].v[1] >> tris[i].v[2] >> tris[i].ref_edge)) {
      throw Error(ErrorCode::kParseError,
                  "bad triangle line " + std::to_string(nv + i + 2));
    }
  }
  return make_initial(std::move(verts), tris, policy);
}

MeshPtr read_mesh_file(const std::string& path, LabelPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return read_mesh(in, policy);
}

void write_mesh_file(const std::string& path, const Triangulation& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write_mesh(out, mesh);
}

void write_vtk(std::ostream& os, const Triangulation& mesh,
               std::span<const double> cell_data,
               const std::string& cell_data_name) {
  char buf[160];
  os << "# vtk DataFile Version 3.0\nafemlab mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.x, v.y);
    os << buf;
  }
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles())
    os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
  if (!cell_data.empty()) {
    os << "CELL_DATA " << mesh.num_triangles() << "\nSCALARS " << cell_data_name
       << " double 1\nLOOKUP_TABLE default\n";
    for (double d : cell_data) {
      std::snprintf(buf, sizeof buf, "%.17g\n", d);
      os << buf;
    }
  }
}

}  // namespace afem
