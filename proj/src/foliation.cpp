#include "cmcfol/foliation.hpp"

#include <cmath>

namespace cmcfol {

namespace {

FoliationLeaf solve_leaf(const ConeMetric& h, const QuadraticDifferentialField& q,
                         ModelGeometry geometry, double H, const SolverOptions& opts) {
  FoliationLeaf leaf;
  leaf.parameter = H;
  try {
    CmcProblem p = assemble_problem(h, q, H, geometry);
    ConformalSolution sol = minimize(p, opts);
    EmbeddingData data = build_embedding(p, sol);
    leaf.trace_residual = data.trace_residual();
    leaf.gauss_sup = gauss_residual(data).sup;
    leaf.min_eig = data.lambda.minCoeff();
    leaf.max_eig = data.mu.maxCoeff();
    leaf.interval = admissible_interval(data);
    GramMetric gm{&data.base, nullptr};
    leaf.area = area_quadrature(gm);
    leaf.data = std::move(data);
  } catch (const Error& e) {
    leaf.error = e.what();
  }
  return leaf;
}

} // namespace

std::vector<FoliationLeaf> sweep(const ConeMetric& h, const QuadraticDifferentialField& q,
                                 ModelGeometry geometry, const std::vector<double>& h_grid,
                                 const SolverOptions& opts) {
  std::vector<FoliationLeaf> leaves;
  leaves.reserve(h_grid.size());
  for (double H : h_grid) leaves.push_back(solve_leaf(h, q, geometry, H, opts));
  return leaves;
}

std::vector<FoliationLeaf> sweep_k(const ConeMetric& h, const QuadraticDifferentialField& q,
                                   ModelGeometry geometry, const std::vector<double>& k_grid,
                                   const SolverOptions& opts) {
  std::vector<FoliationLeaf> leaves;
  leaves.reserve(k_grid.size());
  for (double K : k_grid) {
    FoliationLeaf leaf;
    leaf.parameter = K;
    leaf.is_k_leaf = true;
    try {
      if (!gauss_curvature_admissible(geometry.tag, K))
        fail(ErrorCode::DomainError, "K = " + std::to_string(K) + " outside the leaf range");
      double H = duality_eval(geometry, K).second;
      FoliationLeaf cmc = solve_leaf(h, q, geometry, H, opts);
      if (!cmc.ok()) {
        leaf.error = cmc.error;
        leaves.push_back(std::move(leaf));
        continue;
      }
      KLeafResult kl = k_leaf_from_cmc(*cmc.data);
      GramMetric gm = kl.flow.metric();
      leaf.area = area_quadrature(gm);
      leaf.min_eig = kl.flow.lambda_t.minCoeff();
      leaf.max_eig = kl.flow.mu_t.maxCoeff();
      leaf.trace_residual = cmc.trace_residual;
      leaf.gauss_sup = cmc.gauss_sup;
      leaf.data = std::move(cmc.data);
      leaf.k_leaf = std::move(kl);
    } catch (const Error& e) {
      leaf.error = e.what();
    }
    leaves.push_back(std::move(leaf));
  }
  return leaves;
}

Eigen::Matrix3d SpacetimeChart::metric_at(int slice, int v) const {
  const FlowResult& fr = slices.at(slice);
  Mat2 A = fr.A.m[v];
  double w2 = fr.base.exp_kw(v, 2.0);
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  g(0, 0) = -1.0;
  g.block<2, 2>(1, 1) = w2 * (A.transpose() * A);
  return g;
}

SpacetimeChart spacetime_chart(const FoliationLeaf& leaf, const std::vector<double>& t_grid) {
  if (!leaf.ok() || !leaf.data) fail(ErrorCode::ValidationError, "leaf carries no embedding data");
  const EmbeddingData& data = *leaf.data;
  auto [lo, hi] = admissible_interval(data);
  SpacetimeChart chart;
  chart.leaf = &data;
  chart.t_grid = t_grid;
  chart.delta = std::min(-lo, hi);
  if (!(chart.delta > 0.0)) fail(ErrorCode::EmptyInterval, "no symmetric nondegeneracy interval");
  for (double t : t_grid) {
    if (t <= lo || t >= hi)
      fail(ErrorCode::ValidationError, "t_grid leaves the admissible interval");
    chart.slices.push_back(flow_embedding(data, t));
  }
  // signature check on the sampled slices
  const MarkedSurface& s = data.surface();
  for (std::size_t k = 0; k < chart.slices.size(); ++k)
    for (int v = 0; v < s.n_vertices(); ++v) {
      if (s.is_marked_vertex(v)) continue;
      Mat2 A = chart.slices[k].A.m[v];
      Mat2 g = A.transpose() * A;
      if (!(g.determinant() > 0.0 && g.trace() > 0.0))
        fail(ErrorCode::EmptyInterval, "spatial block loses positivity inside the grid");
    }
  return chart;
}

GaussBonnetRecord gauss_bonnet_report(const FoliationLeaf& leaf) {
  if (!leaf.ok()) fail(ErrorCode::ValidationError, "failed leaf");
  if (!leaf.is_k_leaf || !leaf.k_leaf)
    fail(ErrorCode::NotConstantCurvature, "leaf is not a constant-curvature leaf");
  GaussBonnetRecord rec;
  rec.K = leaf.k_leaf->K;
  rec.area = leaf.area;
  double chi = leaf.data->surface().chi_theta();
  rec.predicted = 2.0 * kPi * chi / rec.K;
  rec.rel_error = std::abs(rec.area - rec.predicted) / std::abs(rec.predicted);
  return rec;
}

double umbilic_separation(Geometry g, double h_i, double h_j) {
  switch (g) {
    case Geometry::Minkowski:
      return 1.0 / h_i - 1.0 / h_j;
    case Geometry::AntiDeSitter:
      // tangent addition law; pole-free form of atan((h_j-h_i)/(1+h_i h_j))
      return std::atan(h_j) - std::atan(h_i);
    case Geometry::DeSitter:
      return std::atanh((h_i - h_j) / (1.0 - h_i * h_j));
  }
  fail(ErrorCode::ValidationError, "unknown geometry");
}

OrderingRecord ordering_report(const std::vector<FoliationLeaf>& leaves) {
  if (leaves.size() < 2) fail(ErrorCode::ValidationError, "need at least two leaves");
  OrderingRecord rec;
  for (const FoliationLeaf& l : leaves) {
    if (!l.ok() || !l.data) fail(ErrorCode::ValidationError, "sweep contains a failed leaf");
    rec.areas.push_back(l.area);
  }
  const EmbeddingData& first = *leaves.front().data;
  double sec = first.geometry.sec();
  bool umbilic = first.q.is_zero();

  rec.areas_monotone = true;
  for (std::size_t i = 0; i + 1 < leaves.size(); ++i) {
    double hi2 = leaves[i].parameter * leaves[i].parameter - sec;
    double hj2 = leaves[i + 1].parameter * leaves[i + 1].parameter - sec;
    // larger H^2 - Sec means smaller leaf area
    bool ok = (hi2 > hj2) ? (rec.areas[i] < rec.areas[i + 1])
                          : (hi2 < hj2) ? (rec.areas[i] > rec.areas[i + 1])
                                        : true;
    if (!ok) rec.areas_monotone = false;
  }
  if (!rec.areas_monotone)
    fail(ErrorCode::OrderingViolated, "leaf areas are not strictly monotone in H^2 - Sec");

  rec.one_sided = true;
  for (std::size_t i = 0; i + 1 < leaves.size(); ++i) {
    const EmbeddingData& a = *leaves[i].data;
    const EmbeddingData& b = *leaves[i + 1].data;
    double t = umbilic_separation(first.geometry.tag, leaves[i].parameter, leaves[i + 1].parameter);
    rec.separation_times.push_back(t);
    FlowResult moved = flow_embedding(a, t);
    // transported mean curvature must sit on one side of the later leaf's H
    // (Jensen: the flow is convex in the principal curvature)
    double margin = std::numeric_limits<double>::infinity();
    for (int v = 0; v < moved.lambda_t.size(); ++v)
      margin = std::min(margin, 0.5 * (moved.lambda_t[v] + moved.mu_t[v]) - leaves[i + 1].parameter);
    rec.transported_margin.push_back(margin);
    if (margin < -1e-9) rec.one_sided = false;

    if (umbilic) {
      GramMetric ga = moved.metric();
      GramMetric gb{&b.base, b.frame ? &*b.frame : nullptr};
      rec.separation_match.push_back(gram_max_rel_diff(ga, gb));
    }
  }
  if (!rec.one_sided)
    fail(ErrorCode::OrderingViolated, "transported leaf crosses the later leaf");
  if (umbilic)
    for (double m : rec.separation_match)
      if (m > 1e-6) fail(ErrorCode::OrderingViolated, "umbilic leaf separation mismatch");
  return rec;
}

} // namespace cmcfol
