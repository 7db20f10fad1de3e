#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cmcfol/acceptance.hpp"
#include "cmcfol/foliation.hpp"
#include "cmcfol/io.hpp"
#include "cmcfol/landslide.hpp"

namespace fs = std::filesystem;
using namespace cmcfol;

namespace {

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::DegenerateLattice:
    case ErrorCode::AngleOutOfRange:
    case ErrorCode::MarkedPointsCollide:
    case ErrorCode::ChartDomain:
    case ErrorCode::DomainError:
    case ErrorCode::InadmissibleH:
    case ErrorCode::PositiveChi:
    case ErrorCode::TruncationTooLow:
    case ErrorCode::IoError:
      return 2;
    case ErrorCode::NonConvergence:
    case ErrorCode::LinearSolveFailure:
    case ErrorCode::Overflow:
      return 3;
    default:
      return 4;  // a mathematical check failed
  }
}

struct Paths {
  fs::path out;
  fs::path file(const std::string& name) const { return out / name; }
};

Paths prepare_out(const RunConfig& cfg, const std::string& override_dir) {
  Paths p{override_dir.empty() ? fs::path(cfg.output_dir) : fs::path(override_dir)};
  fs::create_directories(p.out);
  return p;
}

struct Solved {
  std::shared_ptr<MarkedSurface> surf;
  ConeMetric h;
  ConformalSolution unif_sol;
  CmcProblem problem;
  ConformalSolution sol;
  EmbeddingData data;
};

Solved run_solve(const RunConfig& cfg, double H) {
  Solved s;
  s.surf = std::make_shared<MarkedSurface>(cfg.build_surface());
  ConeMetric g0 = background_factor(s.surf, cfg.truncation);
  s.h = uniformize(*s.surf, g0, cfg.solver, &s.unif_sol);
  s.problem = assemble_problem(s.h, quad_diff_field(*s.surf, cfg.q), H, ModelGeometry{cfg.geometry});
  s.sol = minimize(s.problem, cfg.solver);
  s.data = build_embedding(s.problem, s.sol);
  return s;
}

double single_h(const RunConfig& cfg) {
  if (cfg.h_grid.size() != 1)
    fail(ErrorCode::ValidationError, "this command needs h_grid with exactly one value");
  return cfg.h_grid[0];
}

int cmd_uniformize(const RunConfig& cfg, const Paths& paths) {
  auto surf = std::make_shared<MarkedSurface>(cfg.build_surface());
  ConeMetric g0 = background_factor(surf, cfg.truncation);
  ConformalSolution sol;
  ConeMetric h = uniformize(*surf, g0, cfg.solver, &sol);
  write_text_file(paths.file("uniformize_log.csv").string(), solver_log_csv(sol));
  GramMetric gm{&h, nullptr};
  std::ostringstream sum;
  sum << "area,hyperbolic_residual,iterations\n"
      << fmt17(area_quadrature(gm)) << "," << fmt17(h.hyperbolic_residual()) << ","
      << sol.iterations << "\n";
  write_text_file(paths.file("uniformize_summary.csv").string(), sum.str());
  write_text_file(paths.file("uniformized.mesh").string(),
                  mesh_dump(*surf, {{"v", h.smooth()}, {"curvature", h.curvature_field()}}));
  return 0;
}

int cmd_solve(const RunConfig& cfg, const Paths& paths) {
  Solved s = run_solve(cfg, single_h(cfg));
  write_text_file(paths.file("solve_log.csv").string(), solver_log_csv(s.sol));
  write_text_file(paths.file("embedding.mesh").string(),
                  dump_embedding(s.data, s.h.smooth()));
  GaussResidual gr = gauss_residual(s.data);
  GramMetric gm = s.data.metric();
  std::ostringstream sum;
  sum << "H,area,gauss_sup,trace_residual,min_lambda,max_mu\n"
      << fmt17(*s.data.H) << "," << fmt17(area_quadrature(gm)) << "," << fmt17(gr.sup) << ","
      << fmt17(s.data.trace_residual()) << "," << fmt17(s.data.lambda.minCoeff()) << ","
      << fmt17(s.data.mu.maxCoeff()) << "\n";
  write_text_file(paths.file("solve_summary.csv").string(), sum.str());
  return 0;
}

int cmd_flow(const RunConfig& cfg, const Paths& paths) {
  Solved s = run_solve(cfg, single_h(cfg));
  FlowResult fr = flow_embedding(s.data, cfg.flow_time);
  std::ostringstream out;
  out << "vertex,lambda,mu,lambda_t,mu_t\n";
  for (int v = 0; v < s.surf->n_vertices(); ++v)
    out << v << "," << fmt17(s.data.lambda[v]) << "," << fmt17(s.data.mu[v]) << ","
        << fmt17(fr.lambda_t[v]) << "," << fmt17(fr.mu_t[v]) << "\n";
  write_text_file(paths.file("flow.csv").string(), out.str());
  return 0;
}

int cmd_foliate(const RunConfig& cfg, const Paths& paths) {
  if (cfg.h_grid.empty() == cfg.k_grid.empty())
    fail(ErrorCode::ValidationError, "foliate needs exactly one of h_grid/k_grid");
  auto surf = std::make_shared<MarkedSurface>(cfg.build_surface());
  ConeMetric g0 = background_factor(surf, cfg.truncation);
  ConeMetric h = uniformize(*surf, g0, cfg.solver);
  QuadraticDifferentialField q = quad_diff_field(*surf, cfg.q);
  ModelGeometry geom{cfg.geometry};
  std::vector<FoliationLeaf> leaves = cfg.h_grid.empty()
                                          ? sweep_k(h, q, geom, cfg.k_grid, cfg.solver)
                                          : sweep(h, q, geom, cfg.h_grid, cfg.solver);
  std::ostringstream out;
  out << "parameter,area,min_eig,max_eig,gauss_sup,interval_lo,interval_hi,error\n";
  for (const FoliationLeaf& l : leaves)
    out << fmt17(l.parameter) << "," << fmt17(l.area) << "," << fmt17(l.min_eig) << ","
        << fmt17(l.max_eig) << "," << fmt17(l.gauss_sup) << "," << fmt17(l.interval.first) << ","
        << fmt17(l.interval.second) << "," << l.error << "\n";
  write_text_file(paths.file("sweep.csv").string(), out.str());
  if (cfg.dump_leaves) {
    int idx = 0;
    for (const FoliationLeaf& l : leaves) {
      if (l.ok() && l.data)
        write_text_file(paths.file("leaf_" + std::to_string(idx) + ".mesh").string(),
                        dump_embedding(*l.data, h.smooth()));
      ++idx;
    }
  }
  for (const FoliationLeaf& l : leaves)
    if (!l.ok()) fail(ErrorCode::NonConvergence, "leaf " + fmt17(l.parameter) + ": " + l.error);
  return 0;
}

int cmd_duality_table(const RunConfig& cfg, const Paths& paths) {
  const std::vector<double>& grid =
      (cfg.geometry == Geometry::Minkowski) ? cfg.h_grid : cfg.k_grid;
  if (grid.empty())
    fail(ErrorCode::ValidationError,
         cfg.geometry == Geometry::Minkowski ? "duality-table needs h_grid" : "duality-table needs k_grid");
  std::ostringstream out;
  out << "x,distance,value\n";
  for (double x : grid) {
    auto [d, f] = duality_eval(ModelGeometry{cfg.geometry}, x);
    out << fmt17(x) << "," << fmt17(d) << "," << fmt17(f) << "\n";
  }
  write_text_file(paths.file("duality.csv").string(), out.str());
  return 0;
}

int cmd_landslide(const RunConfig& cfg, const Paths& paths, const std::string& embedding_path) {
  EmbeddingData data = [&] {
    if (!embedding_path.empty())
      return embedding_from_dump(read_mesh_dump(read_text_file(embedding_path)), cfg.truncation);
    if (cfg.geometry != Geometry::AntiDeSitter)
      fail(ErrorCode::ValidationError, "landslide needs AdS data");
    return run_solve(cfg, single_h(cfg)).data;
  }();
  LandslidePair pair = landslide_check(data);
  const MarkedSurface& s = data.surface();
  Mat2 J = rot_j();
  std::ostringstream out;
  out << "face,ratio_re,ratio_im\n";
  for (int f = 0; f < s.n_faces(); ++f) {
    if (s.face_touches_marked(f)) continue;
    // reproduce the per-face ratio for the table
    Complex num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c) {
      int v = s.face[f][c];
      Mat2 m = data.base.exp_kw(v, 2.0) * data.B0.m[v];
      if (s.is_marked_vertex(v)) m = requad_matrix(data.q.at_vertex(v));
      num += quad_coeff((0.5 * (*data.H * m - J * m)).eval()) / 3.0;
      den += quad_coeff((0.5 * (*data.H * m + J * m)).eval()) / 3.0;
    }
    Complex r = num / den;
    out << f << "," << fmt17(r.real()) << "," << fmt17(r.imag()) << "\n";
  }
  write_text_file(paths.file("landslide.csv").string(), out.str());
  std::ostringstream sum;
  sum << "alpha,ratio_re,ratio_im,expected_re,expected_im,max_dev\n"
      << fmt17(pair.alpha) << "," << fmt17(pair.ratio_mean.real()) << ","
      << fmt17(pair.ratio_mean.imag()) << "," << fmt17(pair.ratio_expected.real()) << ","
      << fmt17(pair.ratio_expected.imag()) << "," << fmt17(pair.ratio_max_dev) << "\n";
  write_text_file(paths.file("landslide_summary.csv").string(), sum.str());
  return 0;
}

int cmd_verify(const std::string& config_bytes, const Paths& paths) {
  auto t0 = std::chrono::steady_clock::now();
  AcceptanceReport rep = run_acceptance(true);
  auto t1 = std::chrono::steady_clock::now();
  std::ostringstream out;
  out << "command,verify\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(config_bytes)));
  out << "inputs_hash," << hash << "\n";
  out << rep.to_csv();
  write_text_file(paths.file("verify_summary.csv").string(), out.str());
  std::cout << rep.to_text();
  // timings stay out of the deterministic artifacts
  std::cerr << "verify wall time: "
            << std::chrono::duration_cast<std::chrono::seconds>(t1 - t0).count() << " s\n";
  return rep.all_pass() ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMC and constant-curvature foliations of cone spacetimes over marked tori"};
  app.require_subcommand(1);

  std::string config_path, out_dir, embedding_path;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides config)");

  auto* c_unif = app.add_subcommand("uniformize", "hyperbolic cone metric in the conformal class");
  auto* c_solve = app.add_subcommand("solve", "CMC embedding data for a single H");
  auto* c_flow = app.add_subcommand("flow", "equidistant data at the configured flow_time");
  auto* c_fol = app.add_subcommand("foliate", "sweep CMC leaves over h_grid (or K-leaves over k_grid)");
  auto* c_dual = app.add_subcommand("duality-table", "closed-form duality table over the grid");
  auto* c_land = app.add_subcommand("landslide", "landslide identities of an AdS CMC surface");
  c_land->add_option("--embedding", embedding_path, "use a solved embedding mesh dump");
  auto* c_verify = app.add_subcommand("verify", "run the full acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string config_bytes;
    RunConfig cfg;
    if (!config_path.empty()) {
      config_bytes = read_text_file(config_path);
      cfg = parse_config_text(config_bytes);
    } else if (!c_verify->parsed() && !c_dual->parsed()) {
      fail(ErrorCode::ValidationError, "--config is required for this command");
    }
    Paths paths = prepare_out(cfg, out_dir);

    if (c_unif->parsed()) return cmd_uniformize(cfg, paths);
    if (c_solve->parsed()) return cmd_solve(cfg, paths);
    if (c_flow->parsed()) return cmd_flow(cfg, paths);
    if (c_fol->parsed()) return cmd_foliate(cfg, paths);
    if (c_dual->parsed()) return cmd_duality_table(cfg, paths);
    if (c_land->parsed()) return cmd_landslide(cfg, paths, embedding_path);
    if (c_verify->parsed()) return cmd_verify(config_bytes, paths);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
