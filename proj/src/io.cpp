#include "cmcfol/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cmcfol {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << content;
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::vector<double> sorted_grid(const json& j, const std::string& name) {
  std::vector<double> g = j.get<std::vector<double>>();
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i - 1] < g[i]))
      fail(ErrorCode::ValidationError, name + " must be strictly increasing");
  return g;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("surface")) {
      const json& s = j["surface"];
      if (s.contains("tau")) cfg.tau = {s["tau"][0].get<double>(), s["tau"][1].get<double>()};
      if (s.contains("resolution")) cfg.resolution = s["resolution"].get<int>();
      if (s.contains("grading")) {
        cfg.grading.levels = s["grading"].value("levels", cfg.grading.levels);
        cfg.grading.min_radius = s["grading"].value("min_radius", cfg.grading.min_radius);
      }
      if (s.contains("marked"))
        for (const json& m : s["marked"])
          cfg.marked.push_back(MarkedPoint{
              Vec2(m["x"].get<double>(), m["y"].get<double>()), m["theta"].get<double>(), -1});
      if (s.contains("truncation")) cfg.truncation = s["truncation"].get<int>();
    }
    if (j.contains("geometry")) cfg.geometry = geometry_from_name(j["geometry"].get<std::string>());
    if (j.contains("q")) cfg.q = {j["q"][0].get<double>(), j["q"][1].get<double>()};
    if (j.contains("h_grid")) cfg.h_grid = sorted_grid(j["h_grid"], "h_grid");
    if (j.contains("k_grid")) cfg.k_grid = sorted_grid(j["k_grid"], "k_grid");
    if (j.contains("flow_time")) cfg.flow_time = j["flow_time"].get<double>();
    if (j.contains("t_grid")) cfg.t_grid = j["t_grid"].get<std::vector<double>>();
    if (j.contains("dump_leaves")) cfg.dump_leaves = j["dump_leaves"].get<bool>();
    if (j.contains("output")) cfg.output_dir = j["output"].get<std::string>();
    if (j.contains("solver")) {
      const json& s = j["solver"];
      cfg.solver.grad_tol = s.value("grad_tol", cfg.solver.grad_tol);
      cfg.solver.max_newton = s.value("max_newton", cfg.solver.max_newton);
      cfg.solver.armijo_c1 = s.value("armijo_c1", cfg.solver.armijo_c1);
      cfg.solver.armijo_backtrack = s.value("armijo_backtrack", cfg.solver.armijo_backtrack);
      cfg.solver.linear_tol = s.value("linear_tol", cfg.solver.linear_tol);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }

  // domain validation
  if (!(cfg.tau.imag() > 0.0)) fail(ErrorCode::ValidationError, "surface.tau: Im tau must be positive");
  for (const MarkedPoint& m : cfg.marked)
    if (!(m.theta > 0.0 && m.theta < kPi))
      fail(ErrorCode::ValidationError, "surface.marked.theta: cone angle must lie in (0, pi)");
  if (cfg.resolution < 4) fail(ErrorCode::ValidationError, "surface.resolution must be >= 4");
  if (!(cfg.grading.min_radius > 0.0))
    fail(ErrorCode::ValidationError, "surface.grading.min_radius must be positive");
  if (!cfg.h_grid.empty() && !cfg.k_grid.empty())
    fail(ErrorCode::ValidationError, "exactly one of h_grid/k_grid may be given");
  for (double h : cfg.h_grid)
    if (!mean_curvature_admissible(cfg.geometry, h))
      fail(ErrorCode::ValidationError,
           "h_grid: H = " + fmt17(h) + " outside " + mean_curvature_range(cfg.geometry));
  for (double k : cfg.k_grid)
    if (!gauss_curvature_admissible(cfg.geometry, k))
      fail(ErrorCode::ValidationError, "k_grid: K = " + fmt17(k) + " outside the leaf range");
  if (cfg.solver.grad_tol < 0 || cfg.solver.max_newton <= 0)
    fail(ErrorCode::ValidationError, "solver options out of range");
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config_text(read_text_file(path)); }

std::string mesh_dump(const MarkedSurface& s,
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& fields,
                      const std::map<std::string, std::string>& keys) {
  std::ostringstream out;
  out << "CMCFOL-MESH 1\n";
  out << "TAU " << fmt17(s.tau.real()) << " " << fmt17(s.tau.imag()) << "\n";
  out << "RESOLUTION " << s.base_resolution << "\n";
  out << "GRADING " << s.grading.levels << " " << fmt17(s.grading.min_radius) << "\n";
  out << "MARKED " << s.marked.size() << "\n";
  for (const MarkedPoint& m : s.marked)
    out << fmt17(m.pos.x()) << " " << fmt17(m.pos.y()) << " " << fmt17(m.theta) << "\n";
  for (const auto& [k, v] : keys) out << "KEY " << k << " " << v << "\n";
  out << "VERTICES " << s.n_vertices() << "\n";
  for (int v = 0; v < s.n_vertices(); ++v)
    out << v << " " << fmt17(s.vertex[v].x()) << " " << fmt17(s.vertex[v].y()) << "\n";
  out << "FACES " << s.n_faces() << "\n";
  for (int f = 0; f < s.n_faces(); ++f)
    out << s.face[f][0] << " " << s.face[f][1] << " " << s.face[f][2] << "\n";
  for (const auto& [name, values] : fields) {
    out << "FIELD " << name << "\n";
    for (int v = 0; v < values.size(); ++v) out << v << " " << fmt17(values[v]) << "\n";
  }
  return out.str();
}

const Eigen::VectorXd& MeshDumpData::field(const std::string& name) const {
  for (const auto& [n, v] : fields)
    if (n == name) return v;
  fail(ErrorCode::IoError, "dump has no field '" + name + "'");
}

MeshDumpData read_mesh_dump(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) fail(ErrorCode::ParseError, std::string("dump truncated at ") + what);
    return line;
  };
  next_line("header");
  if (line.rfind("CMCFOL-MESH", 0) != 0) fail(ErrorCode::ParseError, "not a mesh dump");

  MeshDumpData d;
  MarkedSurface& s = d.surface;
  int n_marked = 0;
  std::string tok;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tok;
    if (tok == "TAU") {
      double re, im;
      ls >> re >> im;
      s.tau = {re, im};
    } else if (tok == "RESOLUTION") {
      ls >> s.base_resolution;
    } else if (tok == "GRADING") {
      ls >> s.grading.levels >> s.grading.min_radius;
    } else if (tok == "MARKED") {
      ls >> n_marked;
      for (int i = 0; i < n_marked; ++i) {
        std::istringstream ms(next_line("marked"));
        double x, y, th;
        ms >> x >> y >> th;
        s.marked.push_back(MarkedPoint{Vec2(x, y), th, -1});
      }
    } else if (tok == "KEY") {
      std::string k, v;
      ls >> k >> v;
      d.keys[k] = v;
    } else if (tok == "VERTICES") {
      int n;
      ls >> n;
      s.vertex.resize(n);
      for (int i = 0; i < n; ++i) {
        std::istringstream vs(next_line("vertex"));
        int id;
        double x, y;
        vs >> id >> x >> y;
        s.vertex[id] = Vec2(x, y);
      }
    } else if (tok == "FACES") {
      int n;
      ls >> n;
      s.face.resize(n);
      for (int i = 0; i < n; ++i) {
        std::istringstream fs(next_line("face"));
        fs >> s.face[i][0] >> s.face[i][1] >> s.face[i][2];
      }
    } else if (tok == "FIELD") {
      std::string name;
      ls >> name;
      Eigen::VectorXd vals(s.n_vertices());
      for (int i = 0; i < s.n_vertices(); ++i) {
        std::istringstream fs(next_line("field value"));
        int id;
        double v;
        fs >> id >> v;
        vals[id] = v;
      }
      d.fields.emplace_back(name, vals);
    }
  }

  // unwrap faces by the minimal periodic image, marked vertices by position
  Vec2 e1 = s.to_flat(Vec2(1, 0)), e2 = s.to_flat(Vec2(0, 1));
  auto nearest_image = [&](const Vec2& anchor, const Vec2& p) {
    Vec2 best = p;
    double bd = std::numeric_limits<double>::infinity();
    for (int sx = -1; sx <= 1; ++sx)
      for (int sy = -1; sy <= 1; ++sy) {
        Vec2 q = p + sx * e1 + sy * e2;
        double dd = (q - anchor).norm();
        if (dd < bd) {
          bd = dd;
          best = q;
        }
      }
    return best;
  };
  s.corner.resize(s.face.size());
  for (std::size_t f = 0; f < s.face.size(); ++f) {
    Vec2 a = s.vertex[s.face[f][0]];
    Vec2 b = nearest_image(a, s.vertex[s.face[f][1]]);
    Vec2 c = nearest_image(0.5 * (a + b), s.vertex[s.face[f][2]]);
    s.corner[f] = {a, b, c};
  }
  s.marked_of_vertex.assign(s.vertex.size(), -1);
  for (std::size_t mi = 0; mi < s.marked.size(); ++mi) {
    int hit = -1;
    for (int v = 0; v < s.n_vertices(); ++v)
      if ((s.vertex[v] - s.marked[mi].pos).norm() < 1e-12) hit = v;
    if (hit < 0) fail(ErrorCode::ParseError, "marked point is not a dumped vertex");
    s.marked[mi].vertex = hit;
    s.marked_of_vertex[hit] = static_cast<int>(mi);
  }
  s.check_valid();
  return d;
}

std::string dump_embedding(const EmbeddingData& data, const Eigen::VectorXd& uniformizing) {
  std::map<std::string, std::string> keys;
  keys["GEOMETRY"] = geometry_name(data.geometry.tag);
  keys["H"] = fmt17(data.H ? *data.H : std::numeric_limits<double>::quiet_NaN());
  keys["QRE"] = fmt17(data.q.c.real());
  keys["QIM"] = fmt17(data.q.c.imag());
  return mesh_dump(data.surface(), {{"v", uniformizing}, {"u", data.u}}, keys);
}

EmbeddingData embedding_from_dump(const MeshDumpData& dump, int truncation) {
  auto surf = std::make_shared<MarkedSurface>(dump.surface);
  ConeMetric g0 = background_factor(surf, truncation);
  ConeMetric h = g0.scaled(dump.field("v"));
  ModelGeometry geom{geometry_from_name(dump.keys.at("GEOMETRY"))};
  double H = std::stod(dump.keys.at("H"));
  QuadraticDifferentialField q{
      Complex(std::stod(dump.keys.at("QRE")), std::stod(dump.keys.at("QIM")))};
  CmcProblem p = assemble_problem(h, q, H, geom);
  ConformalSolution sol;
  sol.u = dump.field("u");
  return build_embedding(p, sol);
}

std::string solver_log_csv(const ConformalSolution& sol) {
  std::ostringstream out;
  out << "iteration,value,gradient_norm,step\n";
  for (const auto& row : sol.log)
    out << row.iteration << "," << fmt17(row.value) << "," << fmt17(row.gradient_norm) << ","
        << fmt17(row.step) << "\n";
  return out.str();
}

} // namespace cmcfol
