#include "cmcfol/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>

namespace cmcfol {

namespace {

// Mesh construction runs on exact integer lattice coordinates: a point (a, b)
// of the lattice-coordinate square [0,1)^2 is stored as integers a*DEN, b*DEN
// with DEN = base_resolution * 2^40. Grid points and edge midpoints stay exact,
// so periodic identification and conforming bisection never suffer from
// floating-point drift. Marked points are snapped to multiples of 2^24 to keep
// headroom for repeated halving.
constexpr int kGridBits = 40;
constexpr int kMarkBits = 24;

struct IVec {
  long long x = 0, y = 0;
  IVec operator+(const IVec& o) const { return {x + o.x, y + o.y}; }
  IVec operator-(const IVec& o) const { return {x - o.x, y - o.y}; }
  bool operator==(const IVec& o) const { return x == o.x && y == o.y; }
};

using EdgeKey = std::tuple<int, int, long long, long long>;

struct BFace {
  std::array<int, 3> v;
  std::array<IVec, 3> p;  // unwrapped integer coordinates
  bool alive = true;
};

__int128 cross(const IVec& o, const IVec& a, const IVec& b) {
  return static_cast<__int128>(a.x - o.x) * (b.y - o.y) -
         static_cast<__int128>(a.y - o.y) * (b.x - o.x);
}

class TorusBuilder {
public:
  TorusBuilder(std::complex<double> tau, int n, const GradingSpec& grading)
      : tau_(tau), n_(n), grading_(grading), den_(static_cast<long long>(n) << kGridBits) {}

  MarkedSurface build(const std::vector<MarkedPoint>& marked);

private:
  std::complex<double> tau_;
  int n_;
  GradingSpec grading_;
  long long den_;

  std::vector<IVec> vpos_;
  std::map<std::pair<long long, long long>, int> vmap_;
  std::vector<BFace> faces_;
  std::map<EdgeKey, std::pair<int, int>> edges_;  // up to two incident faces
  std::vector<IVec> marked_pos_;

  long long wrap1(long long v) const {
    long long m = v % den_;
    return m < 0 ? m + den_ : m;
  }
  IVec wrap(const IVec& p) const { return {wrap1(p.x), wrap1(p.y)}; }

  Vec2 lattice_of(const IVec& p) const {
    return Vec2(static_cast<double>(p.x) / static_cast<double>(den_),
                static_cast<double>(p.y) / static_cast<double>(den_));
  }
  Vec2 flat_of(const IVec& p) const {
    Vec2 ab = lattice_of(p);
    return Vec2(ab.x() + ab.y() * tau_.real(), ab.y() * tau_.imag());
  }

  int vertex_at(const IVec& p) {
    IVec c = wrap(p);
    auto key = std::make_pair(c.x, c.y);
    auto it = vmap_.find(key);
    if (it != vmap_.end()) return it->second;
    int id = static_cast<int>(vpos_.size());
    vpos_.push_back(c);
    vmap_.emplace(key, id);
    return id;
  }

  EdgeKey edge_key(const BFace& f, int e) const {
    int a = e, b = (e + 1) % 3;
    int va = f.v[a], vb = f.v[b];
    IVec d = (va <= vb) ? f.p[b] - f.p[a] : f.p[a] - f.p[b];
    return {std::min(va, vb), std::max(va, vb), d.x, d.y};
  }

  void edges_add(int fi) {
    for (int e = 0; e < 3; ++e) {
      auto k = edge_key(faces_[fi], e);
      auto [it, fresh] = edges_.try_emplace(k, std::make_pair(fi, -1));
      if (!fresh) {
        if (it->second.second != -1) fail(ErrorCode::ValidationError, "edge shared by three faces");
        it->second.second = fi;
      }
    }
  }
  void edges_remove(int fi) {
    for (int e = 0; e < 3; ++e) {
      auto k = edge_key(faces_[fi], e);
      auto it = edges_.find(k);
      if (it == edges_.end()) continue;
      if (it->second.first == fi) std::swap(it->second.first, it->second.second);
      if (it->second.second == fi) it->second.second = -1;
      if (it->second.first == -1) edges_.erase(it);
    }
  }
  int face_across(const EdgeKey& k, int fi) const {
    auto it = edges_.find(k);
    if (it == edges_.end()) return -1;
    if (it->second.first == fi) return it->second.second;
    if (it->second.second == fi) return it->second.first;
    return -1;
  }

  int add_face(int v0, int v1, int v2, const IVec& p0, const IVec& p1, const IVec& p2) {
    if (cross(p0, p1, p2) <= 0) fail(ErrorCode::NonPositiveFaceArea, "face inverted during construction");
    int id = static_cast<int>(faces_.size());
    faces_.push_back(BFace{{v0, v1, v2}, {p0, p1, p2}, true});
    edges_add(id);
    return id;
  }
  void kill_face(int fi) {
    edges_remove(fi);
    faces_[fi].alive = false;
  }

  double edge_len2(const BFace& f, int e) const {
    Vec2 d = flat_of(f.p[(e + 1) % 3]) - flat_of(f.p[e]);
    return d.squaredNorm();
  }
  int longest_edge(const BFace& f) const {
    int best = 0;
    double l = edge_len2(f, 0);
    for (int e = 1; e < 3; ++e) {
      double le = edge_len2(f, e);
      if (le > l * (1.0 + 1e-14)) { l = le; best = e; }
    }
    return best;
  }

  IVec midpoint(const IVec& a, const IVec& b) const {
    IVec s = a + b;
    if ((s.x & 1) || (s.y & 1))
      fail(ErrorCode::ValidationError, "bisection depth exhausted integer headroom");
    return {s.x / 2, s.y / 2};
  }

  // Splits one face along edge e at point q (on that edge), ccw preserved.
  void split_face_at(int fi, int e, const IVec& q, int vq) {
    BFace f = faces_[fi];
    int a = e, b = (e + 1) % 3, c = (e + 2) % 3;
    kill_face(fi);
    add_face(f.v[a], vq, f.v[c], f.p[a], q, f.p[c]);
    add_face(vq, f.v[b], f.v[c], q, f.p[b], f.p[c]);
  }

  // Splits the shared edge of fi (and its neighbor, if any) at its midpoint.
  void split_edge(int fi, int e) {
    auto k = edge_key(faces_[fi], e);
    int gi = face_across(k, fi);
    IVec m = midpoint(faces_[fi].p[e], faces_[fi].p[(e + 1) % 3]);
    int vm = vertex_at(m);
    split_face_at(fi, e, m, vm);
    if (gi >= 0) {
      int eg = -1;
      for (int j = 0; j < 3; ++j)
        if (edge_key(faces_[gi], j) == k) { eg = j; break; }
      if (eg < 0) fail(ErrorCode::ValidationError, "edge map out of sync");
      IVec mg = midpoint(faces_[gi].p[eg], faces_[gi].p[(eg + 1) % 3]);
      split_face_at(gi, eg, mg, vm);
    }
  }

  // Conforming longest-edge bisection (longest-edge propagation path).
  void conforming_bisect(int f0) {
    std::vector<int> stack{f0};
    long guard = 0;
    while (!stack.empty()) {
      if (++guard > 4'000'000) fail(ErrorCode::ValidationError, "bisection did not terminate");
      int fi = stack.back();
      if (!faces_[fi].alive) { stack.pop_back(); continue; }
      int e = longest_edge(faces_[fi]);
      auto k = edge_key(faces_[fi], e);
      int gi = face_across(k, fi);
      if (gi >= 0 && edge_key(faces_[gi], longest_edge(faces_[gi])) != k) {
        stack.push_back(gi);
        continue;
      }
      split_edge(fi, e);
      stack.pop_back();
    }
  }

  double periodic_dist(const IVec& pa, const IVec& pb) const {
    double best = std::numeric_limits<double>::infinity();
    for (int sx = -1; sx <= 1; ++sx)
      for (int sy = -1; sy <= 1; ++sy) {
        IVec q{pb.x + sx * den_, pb.y + sy * den_};
        best = std::min(best, (flat_of(q) - flat_of(pa)).norm());
      }
    return best;
  }

  void insert_marked(const IVec& p) {
    if (vmap_.count({p.x, p.y})) return;  // already a mesh vertex
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      if (!faces_[fi].alive) continue;
      const BFace& f = faces_[fi];
      for (int sx = -1; sx <= 1; ++sx)
        for (int sy = -1; sy <= 1; ++sy) {
          IVec q{p.x + sx * den_, p.y + sy * den_};
          __int128 c0 = cross(f.p[0], f.p[1], q);
          __int128 c1 = cross(f.p[1], f.p[2], q);
          __int128 c2 = cross(f.p[2], f.p[0], q);
          if (c0 < 0 || c1 < 0 || c2 < 0) continue;
          int vq = vertex_at(q);
          BFace fc = faces_[fi];  // copy: face storage may reallocate below
          int zero = (c0 == 0) + (c1 == 0) + (c2 == 0);
          if (zero >= 2) return;  // coincides with a corner, vertex_at resolved it
          if (zero == 1) {
            int e = (c0 == 0) ? 0 : (c1 == 0) ? 1 : 2;
            auto k = edge_key(fc, e);
            int gi = face_across(k, static_cast<int>(fi));
            split_face_at(static_cast<int>(fi), e, q, vq);
            if (gi >= 0) {
              BFace gc = faces_[gi];
              int eg = -1;
              for (int j = 0; j < 3; ++j)
                if (edge_key(gc, j) == k) { eg = j; break; }
              if (eg < 0) fail(ErrorCode::ValidationError, "edge map out of sync");
              // express q in the neighbor's unwrapped frame via a shared endpoint
              IVec shift = (gc.v[eg] == fc.v[e]) ? gc.p[eg] - fc.p[e]
                                                 : gc.p[(eg + 1) % 3] - fc.p[e];
              split_face_at(gi, eg, q + shift, vq);
            }
          } else {
            kill_face(static_cast<int>(fi));
            add_face(fc.v[0], fc.v[1], vq, fc.p[0], fc.p[1], q);
            add_face(fc.v[1], fc.v[2], vq, fc.p[1], fc.p[2], q);
            add_face(fc.v[2], fc.v[0], vq, fc.p[2], fc.p[0], q);
          }
          return;
        }
    }
    fail(ErrorCode::ValidationError, "marked point not located in any face");
  }
};

MarkedSurface TorusBuilder::build(const std::vector<MarkedPoint>& marked) {
  // base grid, two ccw triangles per cell
  long long step = 1LL << kGridBits;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      vertex_at({i * step, j * step});
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      IVec a{i * step, j * step}, b{(i + 1) * step, j * step};
      IVec c{(i + 1) * step, (j + 1) * step}, d{i * step, (j + 1) * step};
      add_face(vertex_at(a), vertex_at(b), vertex_at(c), a, b, c);
      add_face(vertex_at(a), vertex_at(c), vertex_at(d), a, c, d);
    }

  // snap marked points to the exact sub-lattice and insert them as vertices
  double im = tau_.imag(), re = tau_.real();
  for (const MarkedPoint& mp : marked) {
    double bb = mp.pos.y() / im;
    double aa = mp.pos.x() - bb * re;
    double scale = static_cast<double>(den_ >> kMarkBits);
    IVec p{llround(aa * scale) << kMarkBits, llround(bb * scale) << kMarkBits};
    marked_pos_.push_back(wrap(p));
  }
  for (std::size_t i = 0; i < marked_pos_.size(); ++i)
    for (std::size_t j = i + 1; j < marked_pos_.size(); ++j)
      if (periodic_dist(marked_pos_[i], marked_pos_[j]) < 2.0 * grading_.min_radius)
        fail(ErrorCode::MarkedPointsCollide, "marked points closer than 2*min_radius");
  for (const IVec& p : marked_pos_) insert_marked(p);

  // graded refinement: shrinking disks around each marked vertex, two
  // bisection passes per level, floored at min_radius
  double hbase = std::sqrt(tau_.imag()) / n_;
  for (int level = 1; level <= grading_.levels; ++level) {
    double radius = 8.0 * hbase / static_cast<double>(1 << (level - 1));
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<int> targets;
      for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
        if (!faces_[fi].alive) continue;
        const BFace& f = faces_[fi];
        double diam = 0.0, dist = std::numeric_limits<double>::infinity();
        for (int e = 0; e < 3; ++e) diam = std::max(diam, std::sqrt(edge_len2(f, e)));
        if (diam <= 2.0 * grading_.min_radius) continue;
        for (const IVec& mp : marked_pos_)
          for (int c = 0; c < 3; ++c) dist = std::min(dist, periodic_dist(f.p[c], mp));
        if (dist < radius) targets.push_back(static_cast<int>(fi));
      }
      for (int fi : targets)
        if (faces_[fi].alive) conforming_bisect(fi);
    }
  }

  MarkedSurface s;
  s.tau = tau_;
  s.base_resolution = n_;
  s.grading = grading_;
  s.vertex.reserve(vpos_.size());
  for (const IVec& p : vpos_) s.vertex.push_back(flat_of(p));
  for (const BFace& f : faces_) {
    if (!f.alive) continue;
    s.face.push_back(f.v);
    s.corner.push_back({flat_of(f.p[0]), flat_of(f.p[1]), flat_of(f.p[2])});
  }
  s.marked = marked;
  s.marked_of_vertex.assign(s.vertex.size(), -1);
  for (std::size_t i = 0; i < marked_pos_.size(); ++i) {
    auto it = vmap_.find({marked_pos_[i].x, marked_pos_[i].y});
    if (it == vmap_.end()) fail(ErrorCode::ValidationError, "marked vertex lost");
    s.marked[i].vertex = it->second;
    s.marked[i].pos = flat_of(marked_pos_[i]);
    s.marked_of_vertex[it->second] = static_cast<int>(i);
  }
  s.check_valid();
  return s;
}

} // namespace

MarkedSurface build_torus_mesh(std::complex<double> tau,
                               const std::vector<MarkedPoint>& marked,
                               const GradingSpec& grading,
                               int base_resolution) {
  if (!(tau.imag() > 0.0)) fail(ErrorCode::DegenerateLattice, "Im tau must be positive");
  for (const MarkedPoint& mp : marked)
    if (!(mp.theta > 0.0 && mp.theta < kPi))
      fail(ErrorCode::AngleOutOfRange, "cone angle must lie in (0, pi)");
  if (base_resolution < 4) fail(ErrorCode::ValidationError, "base_resolution must be >= 4");
  if (!(grading.min_radius > 0.0)) fail(ErrorCode::ValidationError, "min_radius must be positive");
  TorusBuilder builder(tau, base_resolution, grading);
  return builder.build(marked);
}

int MarkedSurface::face_marked_corner(int f) const {
  for (int c = 0; c < 3; ++c)
    if (is_marked_vertex(face[f][c])) return c;
  return -1;
}

double MarkedSurface::face_flat_area(int f) const {
  Vec2 e1 = corner[f][1] - corner[f][0];
  Vec2 e2 = corner[f][2] - corner[f][0];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double MarkedSurface::face_flat_diameter(int f) const {
  double d = 0.0;
  for (int e = 0; e < 3; ++e)
    d = std::max(d, (corner[f][(e + 1) % 3] - corner[f][e]).norm());
  return d;
}

double MarkedSurface::chi_theta() const {
  double chi = 0.0;
  for (const MarkedPoint& mp : marked) chi += mp.beta();
  return chi;
}

Vec2 MarkedSurface::to_lattice(const Vec2& xy) const {
  double b = xy.y() / tau.imag();
  return Vec2(xy.x() - b * tau.real(), b);
}

Vec2 MarkedSurface::to_flat(const Vec2& ab) const {
  return Vec2(ab.x() + ab.y() * tau.real(), ab.y() * tau.imag());
}

double MarkedSurface::periodic_distance(const Vec2& a, const Vec2& b) const {
  Vec2 one = to_flat(Vec2(1, 0)), two = to_flat(Vec2(0, 1));
  double best = std::numeric_limits<double>::infinity();
  for (int sx = -1; sx <= 1; ++sx)
    for (int sy = -1; sy <= 1; ++sy)
      best = std::min(best, (b + sx * one + sy * two - a).norm());
  return best;
}

double MarkedSurface::distance_to_marked(const Vec2& p, int* which) const {
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (std::size_t i = 0; i < marked.size(); ++i) {
    double d = periodic_distance(p, marked[i].pos);
    if (d < best) { best = d; arg = static_cast<int>(i); }
  }
  if (which) *which = arg;
  return best;
}

std::vector<std::pair<double, int>> MarkedSurface::vertices_by_distance(int mi) const {
  std::vector<std::pair<double, int>> out;
  for (int v = 0; v < n_vertices(); ++v) {
    if (marked_of_vertex[v] == mi) continue;
    out.emplace_back(periodic_distance(vertex[v], marked[mi].pos), v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void MarkedSurface::check_valid() const {
  for (int f = 0; f < n_faces(); ++f)
    if (!(face_flat_area(f) > 0.0)) fail(ErrorCode::NonPositiveFaceArea, "face " + std::to_string(f));
  for (const MarkedPoint& mp : marked)
    if (mp.vertex < 0 || mp.vertex >= n_vertices())
      fail(ErrorCode::ValidationError, "marked point is not a mesh vertex");
  // closed surface: E = 3F/2 and chi(torus) = 0
  if ((3 * n_faces()) % 2 != 0 || n_vertices() - 3 * n_faces() / 2 + n_faces() != 0)
    fail(ErrorCode::ValidationError, "triangulation is not a closed torus");
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DegenerateLattice: return "DegenerateLattice";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::MarkedPointsCollide: return "MarkedPointsCollide";
    case ErrorCode::TruncationTooLow: return "TruncationTooLow";
    case ErrorCode::NonPositiveFaceArea: return "NonPositiveFaceArea";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::ChartDomain: return "ChartDomain";
    case ErrorCode::PositiveChi: return "PositiveChi";
    case ErrorCode::InadmissibleH: return "InadmissibleH";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::FlowSingular: return "FlowSingular";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::CurvatureNotConstant: return "CurvatureNotConstant";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::BoundsViolated: return "BoundsViolated";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::NotConstantCurvature: return "NotConstantCurvature";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::DegenerateComposite: return "DegenerateComposite";
    case ErrorCode::ZeroHopf: return "ZeroHopf";
    case ErrorCode::SingularB: return "SingularB";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

} // namespace cmcfol
