#include "cmcfol/landslide.hpp"

#include <cmath>
#include <map>

namespace cmcfol {

namespace {

// Gram matrix of I B0 in flat coordinates. Equals Re(q) identically for the
// CMC pipeline; assembled from the fields, with the continuous extension
// (B0 -> 0, I B0 -> Re q) at the marked vertices where e^{2w} diverges.
Mat2 gram_ib0(const EmbeddingData& d, int v) {
  if (d.surface().is_marked_vertex(v)) return requad_matrix(d.q.at_vertex(v));
  return d.base.exp_kw(v, 2.0) * d.B0.m[v];
}

std::vector<std::array<int, 3>> face_neighbors(const MarkedSurface& s) {
  std::map<std::pair<int, int>, std::pair<int, int>> edges;
  for (int f = 0; f < s.n_faces(); ++f)
    for (int e = 0; e < 3; ++e) {
      int a = s.face[f][e], b = s.face[f][(e + 1) % 3];
      auto key = std::minmax(a, b);
      auto [it, fresh] = edges.try_emplace(key, std::make_pair(f, -1));
      if (!fresh) it->second.second = f;
    }
  std::vector<std::array<int, 3>> nb(s.n_faces(), {-1, -1, -1});
  for (int f = 0; f < s.n_faces(); ++f)
    for (int e = 0; e < 3; ++e) {
      int a = s.face[f][e], b = s.face[f][(e + 1) % 3];
      auto& pair = edges[std::minmax(a, b)];
      nb[f][e] = (pair.first == f) ? pair.second : pair.first;
    }
  return nb;
}

Vec2 face_centroid_in_frame(const MarkedSurface& s, int g, int f, int e) {
  // centroid of face g expressed in face f's unwrapped frame, aligned through
  // the shared edge e of f
  int va = s.face[f][e];
  Vec2 pa_f = s.corner[f][e];
  Vec2 pa_g;
  for (int c = 0; c < 3; ++c)
    if (s.face[g][c] == va) pa_g = s.corner[g][c];
  Vec2 centroid_g = (s.corner[g][0] + s.corner[g][1] + s.corner[g][2]) / 3.0;
  return centroid_g + (pa_f - pa_g);
}

} // namespace

HopfDatum hopf_from_embedding(const EmbeddingData& data, HopfSource which) {
  if (which != HopfSource::Gauss && which != HopfSource::Projection)
    fail(ErrorCode::ValidationError, "use landslide_check for the left/right data");
  if (!data.H) fail(ErrorCode::ValidationError, "Hopf extraction needs CMC data");
  const MarkedSurface& s = data.surface();
  double H = *data.H;
  double sign = (which == HopfSource::Gauss) ? 1.0 : -1.0;

  HopfDatum out;
  out.source = which;
  std::vector<Complex> vert(s.n_vertices());
  out.energy_density.resize(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    Mat2 t = sign * H * gram_ib0(data, v);
    vert[v] = quad_coeff(t);
    out.energy_density[v] = H * H - data.B0.det(v);  // 1/2 tr(B^2) for tr B = 2H
  }
  out.face_coeff.resize(s.n_faces());
  for (int f = 0; f < s.n_faces(); ++f)
    out.face_coeff[f] = (vert[s.face[f][0]] + vert[s.face[f][1]] + vert[s.face[f][2]]) / 3.0;
  out.holo_residual = holomorphicity_residual_field(out.face_coeff, s);
  return out;
}

double holomorphicity_residual_field(const std::vector<Complex>& field, const MarkedSurface& s) {
  if (static_cast<int>(field.size()) != s.n_faces())
    fail(ErrorCode::ValidationError, "face field size mismatch");
  auto nb = face_neighbors(s);
  double acc = 0.0;
  for (int f = 0; f < s.n_faces(); ++f) {
    if (s.face_touches_marked(f)) continue;
    Vec2 c_f = (s.corner[f][0] + s.corner[f][1] + s.corner[f][2]) / 3.0;
    // least-squares complex gradient from the edge-neighbor differences
    Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
    Eigen::Vector2cd atb = Eigen::Vector2cd::Zero();
    int used = 0;
    for (int e = 0; e < 3; ++e) {
      int g = nb[f][e];
      if (g < 0) continue;
      Vec2 d = face_centroid_in_frame(s, g, f, e) - c_f;
      Complex df = field[g] - field[f];
      ata += d * d.transpose();
      atb += d.cast<Complex>() * df;
      ++used;
    }
    if (used < 2) continue;
    Eigen::Vector2cd grad = ata.cast<Complex>().ldlt().solve(atb);
    Complex dbar = 0.5 * (grad[0] + Complex(0, 1) * grad[1]);
    acc += s.face_flat_area(f) * std::norm(dbar);
  }
  return std::sqrt(acc);
}

double holomorphicity_residual(const HopfDatum& datum, const MarkedSurface& surface) {
  return holomorphicity_residual_field(datum.face_coeff, surface);
}

namespace {

MetricData composite_metric(const EmbeddingData& data, double j_sign) {
  MetricData md;
  md.base = data.base;
  int nv = data.surface().n_vertices();
  md.comp.m.resize(nv);
  Mat2 J = rot_j();
  for (int v = 0; v < nv; ++v) md.comp.m[v] = Mat2::Identity() + j_sign * J * data.B.m[v];
  return md;
}

} // namespace

LandslidePair left_right_metrics(const EmbeddingData& data) {
  if (data.geometry.tag != Geometry::AntiDeSitter)
    fail(ErrorCode::ValidationError, "left/right metrics are AdS data");
  LandslidePair pair;
  pair.h_left = composite_metric(data, +1.0);
  pair.h_right = composite_metric(data, -1.0);
  pair.min_composite_det = std::numeric_limits<double>::infinity();
  for (int v = 0; v < data.surface().n_vertices(); ++v) {
    double dl = pair.h_left.comp.det(v), dr = pair.h_right.comp.det(v);
    pair.min_composite_det = std::min({pair.min_composite_det, dl, dr});
  }
  if (pair.min_composite_det < kFlowEps)
    fail(ErrorCode::DegenerateComposite, "E +- J B singular at a vertex");
  if (data.H) pair.alpha = -std::atan(*data.H) + kPi / 2.0;
  return pair;
}

LandslidePair landslide_check(const EmbeddingData& data) {
  LandslidePair pair = left_right_metrics(data);
  if (!data.H) fail(ErrorCode::ValidationError, "landslide ratio needs CMC data");
  double H = *data.H;
  pair.ratio_expected = Complex(H, 1.0) / Complex(H, -1.0);

  const MarkedSurface& s = data.surface();
  Mat2 J = rot_j();
  // Hopf(pi_r) = 1/2 { I(HE -+ J)B0 + i J I(HE -+ J)B0 }; the sign pairing is
  // pinned by the ratio Hopf(pi_l)/Hopf(pi_r) = (H+i)/(H-i)
  std::vector<Complex> phi_l(s.n_vertices()), phi_r(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    Mat2 m = gram_ib0(data, v);
    Mat2 tl = 0.5 * (H * m - J * m);
    Mat2 tr = 0.5 * (H * m + J * m);
    phi_l[v] = quad_coeff(tl);
    phi_r[v] = quad_coeff(tr);
  }

  double wsum = 0.0;
  Complex mean = 0.0;
  std::vector<std::pair<int, Complex>> ratios;
  for (int f = 0; f < s.n_faces(); ++f) {
    if (s.face_touches_marked(f)) continue;
    Complex num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c) {
      num += phi_l[s.face[f][c]] / 3.0;
      den += phi_r[s.face[f][c]] / 3.0;
    }
    if (std::abs(den) < 1e-300) fail(ErrorCode::ZeroHopf, "Hopf differential vanishes (q = 0?)");
    Complex ratio = num / den;
    double w = s.face_flat_area(f);
    mean += w * ratio;
    wsum += w;
    ratios.emplace_back(f, ratio);
  }
  if (ratios.empty()) fail(ErrorCode::ZeroHopf, "no usable faces");
  pair.ratio_mean = mean / wsum;
  for (const auto& [f, r] : ratios)
    pair.ratio_max_dev = std::max(pair.ratio_max_dev, std::abs(r - pair.ratio_mean));
  return pair;
}

MinimalLagrangianCertificate minimal_lagrangian_certificate(const EmbeddingData& data) {
  if (data.geometry.tag != Geometry::Minkowski || !data.H)
    fail(ErrorCode::ValidationError, "certificate applies to Minkowski CMC data");
  const MarkedSurface& s = data.surface();
  double H = *data.H;
  int nv = s.n_vertices();

  MinimalLagrangianCertificate cert;
  cert.b.m.resize(nv);
  cert.positive = true;
  for (int v = 0; v < nv; ++v) {
    double det = data.B.det(v);
    if (std::abs(det) < 1e-12)
      fail(ErrorCode::SingularB, "shape operator not invertible at vertex " + std::to_string(v));
    Mat2 b = (2.0 * H * Mat2::Identity() - data.B.m[v]) * data.B.m[v].inverse();
    cert.det_residual = std::max(cert.det_residual, std::abs(b.determinant() - 1.0));
    b /= std::sqrt(b.determinant());
    cert.b.m[v] = 0.5 * (b + b.transpose());
    auto [lo, hi] = sym_eigenvalues(cert.b.m[v]);
    if (!(lo > 0.0)) cert.positive = false;
    (void)hi;
  }

  // source metric of the morphism: the third fundamental form
  MetricData third = third_form(data);
  GramMetric gm = third.view();
  cert.codazzi_res = codazzi_residual_gram(gm, cert.b);

  // eigenvalue deviation from 1 on geometric rings around each cone point
  for (std::size_t mi = 0; mi < s.marked.size(); ++mi) {
    std::map<int, double> by_ring;
    auto ordered = s.vertices_by_distance(static_cast<int>(mi));
    if (ordered.empty()) continue;
    double r0 = ordered.front().first;
    for (const auto& [r, v] : ordered) {
      int ring = static_cast<int>(std::floor(std::log2(r / r0)));
      auto [lo, hi] = sym_eigenvalues(cert.b.m[v]);
      double dev = std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
      auto [it, fresh] = by_ring.try_emplace(ring, dev);
      if (!fresh) it->second = std::max(it->second, dev);
      if (ring == 0) cert.cone_limit_residual = std::max(cert.cone_limit_residual, dev);
    }
    for (const auto& [ring, dev] : by_ring)
      cert.ring_deviation.emplace_back(r0 * std::pow(2.0, ring), dev);
  }
  return cert;
}

} // namespace cmcfol
