#include "cmcfol/flow.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace cmcfol {

namespace {

double flow_one(double k, double t, Geometry g) {
  switch (g) {
    case Geometry::Minkowski: {
      double den = 1.0 - k * t;
      if (std::abs(den) < kFlowEps) fail(ErrorCode::FlowSingular, "1 - k t vanishes");
      return k / den;
    }
    case Geometry::AntiDeSitter: {
      if (std::abs(std::cos(t)) < kFlowEps) fail(ErrorCode::FlowSingular, "t at a tan pole");
      double tn = std::tan(t);
      double den = 1.0 - k * tn;
      if (std::abs(den) < kFlowEps) fail(ErrorCode::FlowSingular, "1 - k tan t vanishes");
      return (k + tn) / den;
    }
    case Geometry::DeSitter: {
      double th = std::tanh(t);
      double den = 1.0 - k * th;
      if (std::abs(den) < kFlowEps) fail(ErrorCode::FlowSingular, "1 - k tanh t vanishes");
      return (k - th) / den;
    }
  }
  fail(ErrorCode::ValidationError, "unknown geometry");
}

} // namespace

std::pair<double, double> flow_point(double lambda, double mu, double t, ModelGeometry geometry) {
  return {flow_one(lambda, t, geometry.tag), flow_one(mu, t, geometry.tag)};
}

Eigen::VectorXd FlowResult::gauss_curvature() const {
  Eigen::VectorXd k(B_t.size());
  double sec = geometry.sec();
  for (int v = 0; v < B_t.size(); ++v) k[v] = sec - B_t.det(v);
  return k;
}

FlowResult flow_embedding(const EmbeddingData& data, double t) {
  const int nv = data.surface().n_vertices();
  FlowResult r;
  r.t = t;
  r.geometry = data.geometry;
  r.base = data.base;
  r.valid.assign(nv, true);
  if (t == 0.0) {
    r.A = data.frame ? *data.frame : OperatorField::identity(nv);
    r.B_t = data.B;
    r.lambda_t = data.lambda;
    r.mu_t = data.mu;
    return r;
  }

  r.A.m.resize(nv);
  r.B_t.m.resize(nv);
  r.lambda_t.resize(nv);
  r.mu_t.resize(nv);
  Geometry g = data.geometry.tag;
  for (int v = 0; v < nv; ++v) {
    // eigenvalue law first: it carries the singularity guards
    r.lambda_t[v] = flow_one(data.lambda[v], t, g);
    r.mu_t[v] = flow_one(data.mu[v], t, g);

    const Mat2& B = data.B.m[v];
    Mat2 Av, Bt;
    switch (g) {
      case Geometry::Minkowski:
        Av = Mat2::Identity() - t * B;
        Bt = Av.inverse() * B;
        break;
      case Geometry::DeSitter:
        Av = std::cosh(t) * Mat2::Identity() - std::sinh(t) * B;
        Bt = Av.inverse() * (std::cosh(t) * B - std::sinh(t) * Mat2::Identity());
        break;
      case Geometry::AntiDeSitter: {
        // per-vertex eigenframe of B; the cos/sin matrix formula is checked
        // against this in the tests
        Eigen::SelfAdjointEigenSolver<Mat2> eig(B);
        Mat2 R = eig.eigenvectors();
        double l0 = eig.eigenvalues()[0], l1 = eig.eigenvalues()[1];
        Mat2 Ad = Mat2::Zero(), Bd = Mat2::Zero();
        Ad(0, 0) = std::cos(t) - std::sin(t) * l0;
        Ad(1, 1) = std::cos(t) - std::sin(t) * l1;
        Bd(0, 0) = flow_one(l0, t, g);
        Bd(1, 1) = flow_one(l1, t, g);
        Av = R * Ad * R.transpose();
        Bt = R * Bd * R.transpose();
        break;
      }
    }
    // equidistant data over a framed metric I = base(F., F.) flows as F * Av
    if (data.frame) Av = data.frame->m[v] * Av;
    r.A.m[v] = Av;
    r.B_t.m[v] = 0.5 * (Bt + Bt.transpose());
  }
  return r;
}

EmbeddingData embedding_from_flow(const FlowResult& flow, const QuadraticDifferentialField& q) {
  EmbeddingData d;
  d.geometry = flow.geometry;
  d.base = flow.base;
  d.frame = flow.A;
  d.B = flow.B_t;
  d.q = q;
  d.u = flow.base.smooth();
  int nv = flow.B_t.size();
  d.B0.m.resize(nv);
  d.lambda = flow.lambda_t;
  d.mu = flow.mu_t;
  double tr0 = flow.B_t.trace(0);
  bool constant_trace = true;
  for (int v = 0; v < nv; ++v) {
    d.B0.m[v] = flow.B_t.m[v] - 0.5 * flow.B_t.trace(v) * Mat2::Identity();
    if (std::abs(flow.B_t.trace(v) - tr0) > 1e-12) constant_trace = false;
  }
  if (constant_trace) d.H = 0.5 * tr0;
  return d;
}

std::pair<double, double> admissible_interval(const EmbeddingData& data) {
  Geometry g = data.geometry.tag;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  if (g == Geometry::AntiDeSitter) {
    lo = -kPi / 2;
    hi = kPi / 2;
  }
  auto visit = [&](double k) {
    switch (g) {
      case Geometry::Minkowski:
        if (k < 0.0) lo = std::max(lo, 1.0 / k);
        if (k > 0.0) hi = std::min(hi, 1.0 / k);
        break;
      case Geometry::AntiDeSitter:
        if (k > 0.0) hi = std::min(hi, std::atan(1.0 / k));
        if (k < 0.0) lo = std::max(lo, std::atan(1.0 / k));
        break;
      case Geometry::DeSitter:
        if (k > 1.0) hi = std::min(hi, std::atanh(1.0 / k));
        if (k < -1.0) lo = std::max(lo, std::atanh(1.0 / k));
        break;
    }
  };
  for (int v = 0; v < data.lambda.size(); ++v) {
    visit(data.lambda[v]);
    visit(data.mu[v]);
  }
  if (std::isfinite(lo)) lo += kFlowEps;
  if (std::isfinite(hi)) hi -= kFlowEps;
  return {lo, hi};
}

bool DualityMap::in_domain(double x) const {
  switch (geometry) {
    case Geometry::Minkowski: return x < 0.0;
    case Geometry::AntiDeSitter: return x < -1.0;
    case Geometry::DeSitter: return x < 0.0;
  }
  return false;
}

std::string DualityMap::domain() const {
  switch (geometry) {
    case Geometry::Minkowski: return "H < 0";
    case Geometry::AntiDeSitter: return "K < -1";
    case Geometry::DeSitter: return "K < 0";
  }
  return "";
}

std::pair<double, double> duality_eval(const DualityMap& map, double x) {
  if (!map.in_domain(x))
    fail(ErrorCode::DomainError, "duality input outside " + map.domain());
  switch (map.geometry) {
    case Geometry::Minkowski:
      return {1.0 / (2.0 * x), -4.0 * x * x};
    case Geometry::AntiDeSitter: {
      double s = std::sqrt(-1.0 - x);
      return {std::atan(1.0 / s), (-2.0 - x) / (2.0 * s)};
    }
    case Geometry::DeSitter: {
      double s = std::sqrt(1.0 - x);
      return {std::atanh(1.0 / s), (x - 2.0) / (2.0 * s)};
    }
  }
  fail(ErrorCode::ValidationError, "unknown geometry");
}

double duality_inverse_k(Geometry g, double H) {
  switch (g) {
    case Geometry::Minkowski:
      if (!(H < 0.0)) fail(ErrorCode::DomainError, "need H < 0");
      return -4.0 * H * H;
    case Geometry::AntiDeSitter: {
      if (!std::isfinite(H)) fail(ErrorCode::DomainError, "need finite H");
      double s = 1.0 / (std::sqrt(H * H + 1.0) - H);  // H + sqrt(H^2+1), stably
      return -1.0 - s * s;
    }
    case Geometry::DeSitter: {
      if (!(H < -1.0)) fail(ErrorCode::DomainError, "need H < -1");
      double s = -H + std::sqrt(H * H - 1.0);
      return 1.0 - s * s;
    }
  }
  fail(ErrorCode::ValidationError, "unknown geometry");
}

KLeafResult k_leaf_from_cmc(const EmbeddingData& data, double tol) {
  if (!data.H) fail(ErrorCode::ValidationError, "data does not carry a constant mean curvature");
  double H = *data.H;
  Geometry g = data.geometry.tag;
  double K = duality_inverse_k(g, H);
  double t = 0.0;
  switch (g) {
    case Geometry::Minkowski:
      t = 1.0 / (2.0 * H);
      break;
    case Geometry::AntiDeSitter:
      t = duality_eval(DualityMap{g}, K).first;  // K-leaf lies in the future of S_H
      break;
    case Geometry::DeSitter:
      t = -duality_eval(DualityMap{g}, K).first;  // K-leaf lies in the past of S_H
      break;
  }

  KLeafResult res;
  res.flow = flow_embedding(data, t);
  res.K = K;
  res.flow_time = t;
  Eigen::VectorXd kv = res.flow.gauss_curvature();
  for (int v = 0; v < kv.size(); ++v)
    res.max_gauss_deviation = std::max(res.max_gauss_deviation, std::abs(kv[v] - K));
  if (res.max_gauss_deviation > tol)
    fail(ErrorCode::CurvatureNotConstant,
         "leaf curvature deviates by " + std::to_string(res.max_gauss_deviation));

  // convexity convention: AdS K-leaves past-convex, Minkowski/dS future-convex
  bool want_positive = (g == Geometry::AntiDeSitter);
  for (int v = 0; v < kv.size(); ++v) {
    bool ok = want_positive ? (res.flow.lambda_t[v] > 0.0 && res.flow.mu_t[v] > 0.0)
                            : (res.flow.lambda_t[v] < 0.0 && res.flow.mu_t[v] < 0.0);
    if (!ok) fail(ErrorCode::BoundsViolated, "K-leaf violates the convexity convention");
  }
  return res;
}

double dual_embedding_l_bound(const ConeMetric& h_tilde, const QuadraticDifferentialField& q_tilde,
                              double C) {
  if (!(C > 0.0)) fail(ErrorCode::DomainError, "curvature bound C must be positive");
  OperatorField b0 = operator_from_quaddiff(h_tilde, q_tilde);
  double inf_det = 0.0;
  for (int v = 0; v < b0.size(); ++v) inf_det = std::min(inf_det, b0.det(v));
  return -std::sqrt(1.0 / C - inf_det);
}

EmbeddingData dual_embedding(const ConeMetric& h_tilde, const QuadraticDifferentialField& q_tilde,
                             double L) {
  if (!(L < 0.0)) fail(ErrorCode::BoundViolation, "L must be negative");
  if (h_tilde.hyperbolic_residual() > 1e-6)
    fail(ErrorCode::ValidationError, "dual data requires a uniformized hyperbolic metric");
  int nv = h_tilde.surface().n_vertices();

  EmbeddingData d;
  d.geometry = ModelGeometry{Geometry::Minkowski};
  d.base = h_tilde;
  d.q = q_tilde;
  d.u = Eigen::VectorXd::Zero(nv);
  OperatorField btilde = operator_from_quaddiff(h_tilde, q_tilde);
  for (int v = 0; v < nv; ++v) btilde.m[v] += L * Mat2::Identity();
  d.frame = btilde;
  d.B.m.resize(nv);
  d.B0.m.resize(nv);
  d.lambda.resize(nv);
  d.mu.resize(nv);
  for (int v = 0; v < nv; ++v) {
    double det = btilde.det(v);
    if (!(det > kFlowEps))
      fail(ErrorCode::BoundViolation, "det(b~) not positive: |L| too small for this q~");
    d.B.m[v] = btilde.m[v].inverse();
    d.B0.m[v] = d.B.m[v] - 0.5 * d.B.trace(v) * Mat2::Identity();
    auto [lo, hi] = d.B.eigenvalues(v);
    d.lambda[v] = lo;
    d.mu[v] = hi;
    if (!(hi < 0.0)) fail(ErrorCode::BoundViolation, "B is not negative definite");
  }
  return d;
}

MetricData third_form(const EmbeddingData& data) {
  MetricData md;
  md.base = data.base;
  int nv = data.base.surface().n_vertices();
  md.comp.m.resize(nv);
  for (int v = 0; v < nv; ++v) {
    Mat2 A = data.frame ? data.frame->m[v] : Mat2::Identity();
    md.comp.m[v] = A * data.B.m[v];
  }
  return md;
}

double gram_max_rel_diff(const GramMetric& a, const GramMetric& b) {
  const MarkedSurface& s = a.base->surface();
  if (&s != &b.base->surface()) fail(ErrorCode::ValidationError, "metrics on different surfaces");
  double worst = 0.0;
  for (int v = 0; v < s.n_vertices(); ++v) {
    if (s.is_marked_vertex(v)) continue;
    Mat2 Aa = a.op_at(v), Ab = b.op_at(v);
    Mat2 Ga = std::exp(2.0 * a.base->smooth()[v]) * (Aa.transpose() * Aa);
    Mat2 Gb = std::exp(2.0 * b.base->smooth()[v]) * (Ab.transpose() * Ab);
    double scale = Ga.norm() + Gb.norm();
    if (scale == 0.0) continue;
    worst = std::max(worst, (Ga - Gb).norm() / scale);
  }
  return worst;
}

} // namespace cmcfol
