#include "cmcfol/metric.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace cmcfol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 8-point Gauss-Legendre on [0,1]
constexpr int kGL = 8;
constexpr double kGLx[kGL] = {0.01985507175123188, 0.10166676129318664, 0.2372337950418355,
                              0.40828267875217505, 0.5917173212478249,  0.7627662049581645,
                              0.8983332387068134,  0.9801449282487681};
constexpr double kGLw[kGL] = {0.05061426814518813, 0.11119051722668723, 0.15685332293894364,
                              0.18134189168918097, 0.18134189168918097, 0.15685332293894364,
                              0.11119051722668723, 0.05061426814518813};

// 4-point Gauss-Legendre on [0,1]
constexpr int kGL4 = 4;
constexpr double kGL4x[kGL4] = {0.06943184420297371, 0.33000947820757187, 0.6699905217924281, 0.9305681557970263};
constexpr double kGL4w[kGL4] = {0.17392742256872692, 0.32607257743127305, 0.32607257743127305, 0.17392742256872692};

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace

ConeBackground::ConeBackground(std::shared_ptr<const MarkedSurface> surface, int truncation)
    : surface_(std::move(surface)), greens_(surface_->tau, truncation) {
  const MarkedSurface& s = *surface_;
  int nv = s.n_vertices();

  // flat cotangent stiffness; conformal invariance of the Dirichlet energy in
  // dimension two makes these weights exact for every metric in play
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(s.n_faces()) * 12);
  for (int f = 0; f < s.n_faces(); ++f) {
    const auto& c = s.corner[f];
    for (int k = 0; k < 3; ++k) {
      int i = (k + 1) % 3, j = (k + 2) % 3;
      Vec2 u = c[i] - c[k], v = c[j] - c[k];
      double w = 0.5 * u.dot(v) / cross2(u, v);  // half cotangent at corner k
      int vi = s.face[f][i], vj = s.face[f][j];
      trip.emplace_back(vi, vj, -w);
      trip.emplace_back(vj, vi, -w);
      trip.emplace_back(vi, vi, w);
      trip.emplace_back(vj, vj, w);
    }
  }
  stiffness_.resize(nv, nv);
  stiffness_.setFromTriplets(trip.begin(), trip.end());

  flat_mass_.setZero(nv);
  for (int f = 0; f < s.n_faces(); ++f) {
    double a3 = s.face_flat_area(f) / 3.0;
    for (int c = 0; c < 3; ++c) flat_mass_[s.face[f][c]] += a3;
  }

  double chi = s.chi_theta();
  flat_density_ = 2.0 * kPi * chi / s.domain_area();

  phi0_.setZero(nv);
  phi0_reg_.setZero(static_cast<int>(s.marked.size()));
  for (int v = 0; v < nv; ++v) {
    int mi = s.marked_of_vertex[v];
    phi0_[v] = (mi >= 0) ? kInf : phi0_at(s.vertex[v]);
  }
  for (std::size_t mi = 0; mi < s.marked.size(); ++mi)
    phi0_reg_[mi] = phi0_at_excluding(s.marked[mi].pos, static_cast<int>(mi));

  // lumped masses of e^{2 phi0} dx dy
  mass0_.setZero(nv);
  for (int f = 0; f < s.n_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int corner_c = c;
      double mc = face_weighted_integral(
          f, [&](const Vec2&, const std::array<double, 3>& hat) { return hat[corner_c]; });
      mass0_[s.face[f][c]] += mc;
    }
  }

  build_stars();
}

double ConeBackground::phi0_at(const Vec2& x) const {
  const MarkedSurface& s = *surface_;
  double sum = 0.0;
  for (const MarkedPoint& mp : s.marked) sum += mp.beta() * greens_.value(x, mp.pos);
  return sum;
}

double ConeBackground::phi0_at_excluding(const Vec2& x, int mi) const {
  const MarkedSurface& s = *surface_;
  double sum = 0.0;
  for (std::size_t j = 0; j < s.marked.size(); ++j) {
    if (static_cast<int>(j) == mi)
      sum += s.marked[j].beta() * greens_.regular_part(x, s.marked[j].pos);
    else
      sum += s.marked[j].beta() * greens_.value(x, s.marked[j].pos);
  }
  return sum;
}

double ConeBackground::face_weighted_integral(
    int f, const std::function<double(const Vec2&, const std::array<double, 3>&)>& g) const {
  const MarkedSurface& s = *surface_;
  const auto& c = s.corner[f];
  int mc = s.face_marked_corner(f);
  if (mc < 0) {
    // midpoint rule, exact for quadratic integrands
    double area = s.face_flat_area(f);
    double sum = 0.0;
    for (int e = 0; e < 3; ++e) {
      Vec2 x = 0.5 * (c[e] + c[(e + 1) % 3]);
      std::array<double, 3> hat{0, 0, 0};
      hat[e] = 0.5;
      hat[(e + 1) % 3] = 0.5;
      sum += std::exp(2.0 * phi0_at(x)) * g(x, hat);
    }
    return area / 3.0 * sum;
  }

  // polar quadrature around the marked corner with the exact r^{2 beta} weight
  int mi = s.marked_of_vertex[s.face[f][mc]];
  double beta = s.marked[mi].beta();
  double pow_r = 2.0 * beta + 2.0;  // in (0,1)
  Vec2 p = c[mc], p1 = c[(mc + 1) % 3], p2 = c[(mc + 2) % 3];
  Vec2 d12 = p2 - p1;
  double total = 0.0;
  for (int a = 0; a < kGL; ++a) {
    double sigma = kGLx[a];
    Vec2 q = p1 + sigma * d12;
    Vec2 ray = q - p;
    double rho = ray.norm();
    double dphi = cross2(ray, d12) / ray.squaredNorm();
    double inner = 0.0;
    for (int b = 0; b < kGL; ++b) {
      double u = kGLx[b];
      double frac = std::pow(u, 1.0 / pow_r);  // r / rho
      Vec2 x = p + frac * ray;
      std::array<double, 3> hat{0, 0, 0};
      hat[mc] = 1.0 - frac;
      hat[(mc + 1) % 3] = frac * (1.0 - sigma);
      hat[(mc + 2) % 3] = frac * sigma;
      double reg = phi0_at_excluding(x, mi);
      double val = std::exp(2.0 * reg) * g(x, hat);
      if (!std::isfinite(val)) fail(ErrorCode::QuadratureFailure, "non-finite density near cone vertex");
      inner += kGLw[b] * val;
    }
    total += kGLw[a] * dphi * std::pow(rho, pow_r) / pow_r * inner;
  }
  return total;
}

void ConeBackground::build_stars() {
  const MarkedSurface& s = *surface_;
  int nv = s.n_vertices();
  std::vector<std::vector<std::pair<int, Vec2>>> ring1(nv);
  auto add = [&](std::vector<std::pair<int, Vec2>>& lst, int v, const Vec2& rel) {
    for (const auto& e : lst)
      if (e.first == v) return;
    lst.emplace_back(v, rel);
  };
  for (int f = 0; f < s.n_faces(); ++f)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        add(ring1[s.face[f][i]], s.face[f][j], s.corner[f][j] - s.corner[f][i]);
      }
  star2_.assign(nv, {});
  for (int v = 0; v < nv; ++v) {
    auto& out = star2_[v];
    std::map<int, Vec2> seen;
    seen.emplace(v, Vec2::Zero());
    for (const auto& [w, rel] : ring1[v]) seen.emplace(w, rel);
    for (const auto& [w, rel] : ring1[v])
      for (const auto& [x, rel2] : ring1[w]) seen.emplace(x, rel + rel2);
    out.reserve(seen.size());
    for (const auto& [id, rel] : seen)
      if (id != v) out.emplace_back(id, rel);
  }
}

ConeMetric::ConeMetric(std::shared_ptr<const ConeBackground> bg, Eigen::VectorXd smooth, Eigen::VectorXd kappa)
    : bg_(std::move(bg)), smooth_(std::move(smooth)), kappa_(std::move(kappa)) {
  mass_ = bg_->mass0().cwiseProduct((2.0 * smooth_).array().exp().matrix());
}

ConeMetric ConeMetric::background(std::shared_ptr<const ConeBackground> bg) {
  int nv = bg->surface().n_vertices();
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd kappa = bg->flat_curvature_density() * bg->flat_mass();
  return ConeMetric(bg, zero, kappa);
}

ConeMetric ConeMetric::scaled(const Eigen::VectorXd& extra) const {
  return ConeMetric(bg_, smooth_ + extra, kappa_ + bg_->stiffness() * extra);
}

double ConeMetric::exp_kw(int v, double k) const {
  double w = exponent(v);
  if (std::isinf(w)) return (k < 0.0) ? 0.0 : (k == 0.0 ? 1.0 : kInf);
  return std::exp(k * w);
}

double ConeMetric::hyperbolic_residual() const {
  double r = 0.0;
  for (int v = 0; v < surface().n_vertices(); ++v) {
    if (surface().is_marked_vertex(v)) continue;
    r = std::max(r, std::abs(kappa_[v] / mass_[v] + 1.0));
  }
  return r;
}

ConeMetric background_factor(std::shared_ptr<const MarkedSurface> surface, int truncation) {
  auto bg = std::make_shared<ConeBackground>(std::move(surface), truncation);
  return ConeMetric::background(bg);
}

DiscreteOperators laplacian_and_mass(const MarkedSurface& surface, const ConeMetric& metric) {
  if (&metric.surface() != &surface)
    fail(ErrorCode::ValidationError, "metric does not live on the given surface");
  return DiscreteOperators{metric.bg().stiffness(), metric.mass()};
}

Eigen::VectorXd discrete_curvature(const ConeMetric& metric, const Eigen::VectorXd& extra) {
  Eigen::VectorXd kappa = metric.curvature_load() + metric.bg().stiffness() * extra;
  Eigen::VectorXd m = metric.mass().cwiseProduct((2.0 * extra).array().exp().matrix());
  return kappa.cwiseQuotient(m);
}

namespace {

// integral of e^{phi0 + s(t)} * |A(t) dir| along one face side, r^beta weight
// at marked endpoints handled by the substitution u = (r/L)^{beta+1}
double side_length(const GramMetric& g, int f, int e) {
  const ConeMetric& base = *g.base;
  const MarkedSurface& s = base.surface();
  const ConeBackground& bg = base.bg();
  int ca = e, cb = (e + 1) % 3;
  int va = s.face[f][ca], vb = s.face[f][cb];
  Vec2 pa = s.corner[f][ca], pb = s.corner[f][cb];
  double sa = base.smooth()[va], sb = base.smooth()[vb];
  Mat2 Aa = g.op_at(va), Ab = g.op_at(vb);
  Vec2 dir = pb - pa;
  double len = dir.norm();
  Vec2 hat = dir / len;

  auto smooth_factor = [&](double t) {
    Mat2 A = (1.0 - t) * Aa + t * Ab;
    return std::exp((1.0 - t) * sa + t * sb) * (A * hat).norm();
  };

  int ma = s.marked_of_vertex[va], mb = s.marked_of_vertex[vb];
  if (ma < 0 && mb < 0) {
    double sum = 0.0;
    for (int i = 0; i < kGL4; ++i) {
      double t = kGL4x[i];
      Vec2 x = pa + t * dir;
      sum += kGL4w[i] * std::exp(bg.phi0_at(x)) * smooth_factor(t);
    }
    return len * sum;
  }
  auto singular_from = [&](const Vec2& porig, int mi, double beta, bool from_a, double tlo, double thi) {
    // integrate over t in [tlo, thi] where r = |x - p| = t*len measured from p
    double L = (thi - tlo) * len;
    double sum = 0.0;
    for (int i = 0; i < kGL; ++i) {
      double u = kGLx[i];
      double r = L * std::pow(u, 1.0 / (beta + 1.0));
      double t = tlo + r / len;
      double tt = from_a ? t : 1.0 - t;
      Vec2 x = porig + (from_a ? 1.0 : -1.0) * r * hat;
      sum += kGLw[i] * std::exp(bg.phi0_at_excluding(x, mi)) * smooth_factor(tt);
    }
    return std::pow(L, beta + 1.0) / (beta + 1.0) * sum;
  };
  if (ma >= 0 && mb >= 0) {
    double betaa = s.marked[ma].beta(), betab = s.marked[mb].beta();
    return singular_from(pa, ma, betaa, true, 0.0, 0.5) + singular_from(pb, mb, betab, false, 0.0, 0.5);
  }
  if (ma >= 0) return singular_from(pa, ma, s.marked[ma].beta(), true, 0.0, 1.0);
  return singular_from(pb, mb, s.marked[mb].beta(), false, 0.0, 1.0);
}

} // namespace

Eigen::VectorXd metric_edge_lengths(const GramMetric& g) {
  const MarkedSurface& s = g.base->surface();
  Eigen::VectorXd out(3 * s.n_faces());
  for (int f = 0; f < s.n_faces(); ++f)
    for (int e = 0; e < 3; ++e) out[3 * f + e] = side_length(g, f, e);
  return out;
}

Eigen::VectorXd angle_defect_curvature(const GramMetric& g) {
  const MarkedSurface& s = g.base->surface();
  Eigen::VectorXd len = metric_edge_lengths(g);
  Eigen::VectorXd angle_sum = Eigen::VectorXd::Zero(s.n_vertices());
  Eigen::VectorXd area_sum = Eigen::VectorXd::Zero(s.n_vertices());
  for (int f = 0; f < s.n_faces(); ++f) {
    double l0 = len[3 * f], l1 = len[3 * f + 1], l2 = len[3 * f + 2];
    double sp = 0.5 * (l0 + l1 + l2);
    double ar2 = sp * (sp - l0) * (sp - l1) * (sp - l2);
    double area = ar2 > 0.0 ? std::sqrt(ar2) : 0.0;
    for (int c = 0; c < 3; ++c) {
      // corner c lies between sides c and c+2; side c+1 is opposite
      double a = len[3 * f + c], b = len[3 * f + (c + 2) % 3], o = len[3 * f + (c + 1) % 3];
      double cosang = std::clamp((a * a + b * b - o * o) / (2.0 * a * b), -1.0, 1.0);
      int v = s.face[f][c];
      angle_sum[v] += std::acos(cosang);
      area_sum[v] += area / 3.0;
    }
  }
  Eigen::VectorXd k(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    int mi = s.marked_of_vertex[v];
    double target = (mi >= 0) ? s.marked[mi].theta : 2.0 * kPi;
    k[v] = (target - angle_sum[v]) / area_sum[v];
  }
  return k;
}

Eigen::VectorXd quadratic_fit_curvature(const ConeMetric& metric) {
  const MarkedSurface& s = metric.surface();
  const ConeBackground& bg = metric.bg();
  double cflat = bg.flat_curvature_density();
  Eigen::VectorXd k(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) {
    if (s.is_marked_vertex(v)) {
      k[v] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto& star = bg.star2(v);
    int n = static_cast<int>(star.size()) + 1;
    Eigen::MatrixXd A(n, 6);
    Eigen::VectorXd y(n);
    A.row(0) << 1, 0, 0, 0, 0, 0;
    y[0] = metric.smooth()[v];
    for (int i = 0; i < n - 1; ++i) {
      const Vec2& d = star[i].second;
      A.row(i + 1) << 1, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
      y[i + 1] = metric.smooth()[star[i].first];
    }
    Eigen::VectorXd p = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    double lap_s = p[3] + p[5];
    k[v] = metric.exp_kw(v, -2.0) * (cflat - lap_s);
  }
  return k;
}

double area_quadrature(const GramMetric& g) {
  const ConeMetric& base = *g.base;
  const MarkedSurface& s = base.surface();
  double total = 0.0;
  for (int f = 0; f < s.n_faces(); ++f) {
    const auto& vs = s.face[f];
    total += base.bg().face_weighted_integral(f, [&](const Vec2&, const std::array<double, 3>& hat) {
      double sm = 0.0;
      Mat2 A = Mat2::Zero();
      for (int c = 0; c < 3; ++c) {
        sm += hat[c] * base.smooth()[vs[c]];
        A += hat[c] * g.op_at(vs[c]);
      }
      return std::exp(2.0 * sm) * std::abs(A.determinant());
    });
  }
  return total;
}

QuadraticDifferentialField quad_diff_field(const MarkedSurface&, Complex c) {
  return QuadraticDifferentialField{c};
}

OperatorField operator_from_quaddiff(const ConeMetric& metric, const QuadraticDifferentialField& q) {
  int nv = metric.surface().n_vertices();
  OperatorField f;
  f.m.resize(nv);
  for (int v = 0; v < nv; ++v) f.m[v] = metric.exp_kw(v, -2.0) * requad_matrix(q.at_vertex(v));
  return f;
}

namespace {

double codazzi_l2(const MarkedSurface& s,
                  const std::function<bool(int f)>& skip,
                  const std::function<Mat2(int f)>& gram_of_face,
                  const std::function<void(int f, Mat2 dgram[2])>& gram_grad,
                  const OperatorField& op) {
  double acc = 0.0;
  for (int f = 0; f < s.n_faces(); ++f) {
    if (skip(f)) continue;
    const auto& c = s.corner[f];
    double area = s.face_flat_area(f);
    // P1 gradients of the operator components
    Vec2 gradhat[3];
    for (int i = 0; i < 3; ++i) {
      Vec2 e = c[(i + 2) % 3] - c[(i + 1) % 3];
      gradhat[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    Mat2 db_dx = Mat2::Zero(), db_dy = Mat2::Zero();
    for (int i = 0; i < 3; ++i) {
      const Mat2& b = op.m[s.face[f][i]];
      db_dx += gradhat[i].x() * b;
      db_dy += gradhat[i].y() * b;
    }
    Mat2 bbar = (op.m[s.face[f][0]] + op.m[s.face[f][1]] + op.m[s.face[f][2]]) / 3.0;

    Mat2 dg[2];
    gram_grad(f, dg);
    Mat2 G = gram_of_face(f);
    Mat2 Ginv = G.inverse();
    // Christoffels: Gamma[k](i,j) = 1/2 G^{kl} (dg_i(l,j) + dg_j(l,i) - dg_l(i,j))
    double Gamma[2][2][2];
    for (int kk = 0; kk < 2; ++kk)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double v = 0.0;
          for (int l = 0; l < 2; ++l)
            v += Ginv(kk, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
          Gamma[kk][i][j] = 0.5 * v;
        }
    // V^k = dx b^k_y - dy b^k_x + Gamma^k_{x m} b^m_y - Gamma^k_{y m} b^m_x
    Vec2 V;
    for (int kk = 0; kk < 2; ++kk) {
      double v = db_dx(kk, 1) - db_dy(kk, 0);
      for (int m = 0; m < 2; ++m) v += Gamma[kk][0][m] * bbar(m, 1) - Gamma[kk][1][m] * bbar(m, 0);
      V[kk] = v;
    }
    double detG = G.determinant();
    acc += area * (V.dot(G * V)) / std::sqrt(detG);
  }
  return std::sqrt(acc);
}

} // namespace

double codazzi_residual(const ConeMetric& metric, const OperatorField& op) {
  const MarkedSurface& s = metric.surface();
  // conformal metric: Gram = e^{2w} Id; the conformal weights cancel in the
  // L2 density, so work with the flat Gram and Christoffels from grad(w)
  std::vector<double> wv(s.n_vertices());
  for (int v = 0; v < s.n_vertices(); ++v) wv[v] = s.is_marked_vertex(v) ? 0.0 : metric.exponent(v);
  return codazzi_l2(
      s, [&](int f) { return s.face_touches_marked(f); },
      [&](int) { return Mat2::Identity(); },
      [&](int f, Mat2 dg[2]) {
        const auto& c = s.corner[f];
        double area = s.face_flat_area(f);
        Vec2 gw = Vec2::Zero();
        for (int i = 0; i < 3; ++i) {
          Vec2 e = c[(i + 2) % 3] - c[(i + 1) % 3];
          gw += wv[s.face[f][i]] * Vec2(-e.y(), e.x()) / (2.0 * area);
        }
        // d(e^{2w} delta) expressed relative to e^{2w}: dg_i = 2 w_i delta
        dg[0] = 2.0 * gw.x() * Mat2::Identity();
        dg[1] = 2.0 * gw.y() * Mat2::Identity();
      },
      op);
}

double codazzi_residual_gram(const GramMetric& g, const OperatorField& op) {
  const MarkedSurface& s = g.base->surface();
  std::vector<Mat2> gram(s.n_vertices(), Mat2::Zero());
  for (int v = 0; v < s.n_vertices(); ++v) {
    if (s.is_marked_vertex(v)) continue;  // only read on excluded faces
    Mat2 A = g.op_at(v);
    gram[v] = g.base->exp_kw(v, 2.0) * (A.transpose() * A);
  }
  return codazzi_l2(
      s, [&](int f) { return s.face_touches_marked(f); },
      [&](int f) {
        return ((gram[s.face[f][0]] + gram[s.face[f][1]] + gram[s.face[f][2]]) / 3.0).eval();
      },
      [&](int f, Mat2 dg[2]) {
        const auto& c = s.corner[f];
        double area = s.face_flat_area(f);
        dg[0] = Mat2::Zero();
        dg[1] = Mat2::Zero();
        for (int i = 0; i < 3; ++i) {
          Vec2 e = c[(i + 2) % 3] - c[(i + 1) % 3];
          Vec2 gh = Vec2(-e.y(), e.x()) / (2.0 * area);
          dg[0] += gh.x() * gram[s.face[f][i]];
          dg[1] += gh.y() * gram[s.face[f][i]];
        }
      },
      op);
}

} // namespace cmcfol
