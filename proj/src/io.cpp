#include "bscreg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace bscreg {

namespace {

Vec2 vec(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::BadInput, "expected a point [x, y], got " + j.dump());
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::BadInput, "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t byte = std::min<size_t>(e.byte, text.size());
    long line = 1 + std::count(text.begin(), text.begin() + long(byte), '\n');
    throw Error(ErrorCode::BadInput, path + ":" + std::to_string(line) + ": " + e.what());
  }
}

ConvexBody parse_body(const json& j) {
  std::optional<Vec2> center;
  if (j.contains("center")) center = vec(j["center"]);
  if (j.contains("vertices")) {
    std::vector<Vec2> v;
    for (const auto& p : j["vertices"]) v.push_back(vec(p));
    return ConvexBody(v, center);
  }
  const std::string shape = j.value("shape", "");
  if (shape == "disc") {
    return regular_polygon(j.value("segments", 128), j.value("radius", 1.0), center.value_or(Vec2::Zero()));
  }
  if (shape == "square") {
    double s = j.value("half_side", 1.0);
    Vec2 c = center.value_or(Vec2::Zero());
    return box(c.x() - s, c.y() - s, c.x() + s, c.y() + s);
  }
  throw Error(ErrorCode::BadInput, "domain needs \"vertices\" or a shape of disc/square");
}

DatumSpec parse_datum(const json& j) {
  DatumSpec d;
  if (j.contains("K")) d.K = j["K"].get<double>();
  if (j.contains("samples")) {
    d.type = "samples";
    for (const auto& s : j["samples"]) {
      if (!s.is_array() || s.size() != 3) throw Error(ErrorCode::BadInput, "datum samples are [x, y, value]");
      d.points.emplace_back(s[0].get<double>(), s[1].get<double>());
      d.values.push_back(s[2].get<double>());
    }
    return d;
  }
  d.type = j.value("type", "zero");
  if (d.type == "affine") {
    d.a = vec(j.at("a"));
    d.b = j.value("b", 0.0);
  } else if (d.type != "zero") {
    throw Error(ErrorCode::BadInput, "unknown datum type " + d.type);
  }
  return d;
}

Lagrangian parse_lagrangian(const json& j, std::string* family, FamilyParams* params) {
  const std::string name = j.at("family").get<std::string>();
  FamilyParams p;
  if (j.contains("params")) {
    const auto& q = j["params"];
    p.mu = q.value("mu", p.mu);
    p.delta = q.value("delta", p.delta);
    p.p = q.value("p", p.p);
    p.scale = q.value("scale", p.scale);
    if (q.contains("p_i")) p.p_i = q["p_i"].get<std::vector<double>>();
  }
  if (family) *family = name;
  if (params) *params = p;
  Lagrangian F = builtin(name, p);
  if (j.contains("mu_declared")) {
    double m = j["mu_declared"].get<double>();
    F.mu = m;
    F.Phi = [m](double) { return m; };
  }
  return F;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  try {
    c.body = parse_body(j.at("domain"));
    if (j.contains("datum")) c.datum = parse_datum(j["datum"]);
    c.F = parse_lagrangian(j.at("lagrangian"), &c.family, &c.params);
    c.f = j.value("f", 0.0);
    c.h = j.value("h", c.h);
    if (j.contains("k_schedule")) c.k_schedule = j["k_schedule"].get<std::vector<int>>();
    c.domain_approximation = j.value("domain_approximation", true);
    c.samples = j.value("samples", c.samples);
    c.propagation = j.value("propagation", false);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      c.opts.tol_grad = s.value("tol_grad", c.opts.tol_grad);
      c.opts.tol_step = s.value("tol_step", c.opts.tol_step);
      c.opts.max_iters = s.value("max_iters", c.opts.max_iters);
    }
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      c.tol.sandwich = t.value("sandwich", c.tol.sandwich);
      c.tol.affine = t.value("affine", c.tol.affine);
      c.tol.oracle = t.value("oracle", c.tol.oracle);
      c.tol.boundary_gradient = t.value("boundary_gradient", c.tol.boundary_gradient);
      c.tol.propagation = t.value("propagation", c.tol.propagation);
      c.tol.energy_monotone = t.value("energy_monotone", c.tol.energy_monotone);
    }
    if (j.contains("oracle")) c.oracle = OracleSpec{j["oracle"].at("lambda").get<double>(), j["oracle"].value("n", 4096)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("config: ") + e.what());
  }
  c.canonical = j.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

Problem ExperimentConfig::problem(InitMode init) const {
  Problem p{*body, datum_function(datum, *body)};
  p.K = datum.K;
  p.samples = samples;
  p.F = *F;
  p.f = f;
  p.h = h;
  p.k_schedule = k_schedule;
  p.domain_approximation = domain_approximation;
  p.init = init;
  p.opts = opts;
  return p;
}

ScalarFn datum_function(const DatumSpec& d, const ConvexBody& body) {
  if (d.type == "zero") return [](const Vec2&) { return 0.0; };
  if (d.type == "affine") {
    Vec2 a = d.a;
    double b = d.b;
    return [a, b](const Vec2& x) { return a.dot(x) + b; };
  }
  struct Node {
    double th, v;
  };
  std::vector<Node> nodes;
  const Vec2 c = body.center();
  for (size_t i = 0; i < d.points.size(); ++i) {
    Vec2 r = d.points[i] - c;
    nodes.push_back({std::atan2(r.y(), r.x()), d.values[i]});
  }
  if (nodes.size() < 3) throw Error(ErrorCode::BadInput, "need at least 3 datum samples");
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.th < b.th; });
  return [nodes, c](const Vec2& x) {
    Vec2 r = x - c;
    double th = std::atan2(r.y(), r.x());
    auto it = std::upper_bound(nodes.begin(), nodes.end(), th, [](double t, const Node& n) { return t < n.th; });
    const Node& hi = it == nodes.end() ? nodes.front() : *it;
    const Node& lo = it == nodes.begin() ? nodes.back() : *(it - 1);
    double span = hi.th - lo.th;
    double off = th - lo.th;
    if (span <= 0) span += 2 * std::numbers::pi;
    if (off < 0) off += 2 * std::numbers::pi;
    double t = span > 0 ? off / span : 0.0;
    return lo.v + t * (hi.v - lo.v);
  };
}

json body_to_json(const ConvexBody& body) {
  json v = json::array();
  for (const auto& p : body.vertices()) v.push_back({p.x(), p.y()});
  return {{"vertices", v}, {"center", {body.center().x(), body.center().y()}}};
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorCode::BadInput, "cannot write " + tmp);
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string field_csv(const ScalarField& field, const ScalarFn& lower, const ScalarFn& upper) {
  const Mesh& M = *field.mesh;
  std::ostringstream os;
  os << "node_id,x,y,u,boundary";
  if (lower) os << ",lower,upper";
  os << '\n';
  for (size_t i = 0; i < M.nodes.size(); ++i) {
    os << i << ',' << num(M.nodes[i].x()) << ',' << num(M.nodes[i].y()) << ',' << num(field.values[long(i)]) << ','
       << int(M.boundary[i]);
    if (lower) os << ',' << num(lower(M.nodes[i])) << ',' << num(upper(M.nodes[i]));
    os << '\n';
  }
  return os.str();
}

std::string gradients_csv(const ScalarField& field) {
  const Mesh& M = *field.mesh;
  std::ostringstream os;
  os << "tri_id,n0,n1,n2,gx,gy,norm,boundary_adjacent\n";
  for (size_t t = 0; t < M.tris.size(); ++t) {
    const auto& T = M.tris[t];
    Vec2 g = M.tri_gradient(t, field.values);
    int adj = M.boundary[T[0]] || M.boundary[T[1]] || M.boundary[T[2]];
    os << t << ',' << T[0] << ',' << T[1] << ',' << T[2] << ',' << num(g.x()) << ',' << num(g.y()) << ','
       << num(g.norm()) << ',' << adj << '\n';
  }
  return os.str();
}

std::string trace_csv(const std::vector<StageRecord>& stages) {
  std::ostringstream os;
  os << "stage,k,iteration,energy\n";
  for (size_t s = 0; s < stages.size(); ++s)
    for (size_t i = 0; i < stages[s].trace.size(); ++i)
      os << s << ',' << stages[s].k << ',' << i << ',' << num(stages[s].trace[i]) << '\n';
  return os.str();
}

}  // namespace bscreg
