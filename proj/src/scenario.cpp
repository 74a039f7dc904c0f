#include "fibershell/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fshell {

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double to_num(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw FshellError("scenario: bad numeric value '" + s + "' for key '" + key + "'");
  }
}

std::vector<double> to_nums(const std::vector<std::string>& ts, size_t from,
                            const std::string& key) {
  std::vector<double> out;
  for (size_t i = from; i < ts.size(); ++i) out.push_back(to_num(ts[i], key));
  return out;
}

std::vector<int> target_nodes(const NurbsPatch& p, const std::string& target) {
  auto uniq = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  if (target == "umin") return edge_nodes(p, EdgeId::UMin);
  if (target == "umax") return edge_nodes(p, EdgeId::UMax);
  if (target == "vmin") return edge_nodes(p, EdgeId::VMin);
  if (target == "vmax") return edge_nodes(p, EdgeId::VMax);
  // second control-point rows from the boundary (rotation-free clamps)
  if (target == "umin2" || target == "umax2") {
    const int i = (target == "umin2") ? 1 : p.nu() - 2;
    std::vector<int> v;
    for (int j = 0; j < p.nv(); ++j) v.push_back(p.node(i, j));
    return v;
  }
  if (target == "vmin2" || target == "vmax2") {
    const int j = (target == "vmin2") ? 1 : p.nv() - 2;
    std::vector<int> v;
    for (int i = 0; i < p.nu(); ++i) v.push_back(p.node(i, j));
    return v;
  }
  if (target == "arcs") {
    auto a = edge_nodes(p, EdgeId::VMin), b = edge_nodes(p, EdgeId::VMax);
    a.insert(a.end(), b.begin(), b.end());
    return uniq(a);
  }
  if (target == "boundary") {
    std::vector<int> all;
    for (EdgeId e : {EdgeId::UMin, EdgeId::UMax, EdgeId::VMin, EdgeId::VMax}) {
      auto v = edge_nodes(p, e);
      all.insert(all.end(), v.begin(), v.end());
    }
    return uniq(all);
  }
  if (target == "all") {
    std::vector<int> v(p.num_ctrl());
    for (int n = 0; n < p.num_ctrl(); ++n) v[n] = n;
    return v;
  }
  if (target.size() == 3 && target[0] == 'c') {
    const int iu = target[1] - '0', iv = target[2] - '0';
    return {p.node(iu ? p.nu() - 1 : 0, iv ? p.nv() - 1 : 0)};
  }
  throw FshellError("scenario: unknown constraint target '" + target + "'");
}

std::array<bool, 3> comp_mask(const std::string& comps) {
  std::array<bool, 3> m{false, false, false};
  for (char c : comps) {
    if (c == 'x') m[0] = true;
    else if (c == 'y') m[1] = true;
    else if (c == 'z') m[2] = true;
    else throw FshellError("scenario: bad component spec '" + comps + "'");
  }
  return m;
}

EdgeId edge_of(const std::string& t) {
  if (t == "umin") return EdgeId::UMin;
  if (t == "umax") return EdgeId::UMax;
  if (t == "vmin") return EdgeId::VMin;
  if (t == "vmax") return EdgeId::VMax;
  throw FshellError("scenario: unknown edge '" + t + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  s.fibers.clear();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto ts = tokens(line);
    if (ts.empty()) continue;
    if (ts[0].front() == '[') {
      section = ts[0].substr(1, ts[0].size() - 2);
      continue;
    }
    if (ts.size() < 3 || ts[1] != "=")
      throw FshellError("scenario line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = ts[0];
    ts.erase(ts.begin(), ts.begin() + 2);  // -> value tokens

    auto one = [&]() -> const std::string& {
      if (ts.size() != 1) throw FshellError("scenario: key '" + key + "' expects one value");
      return ts[0];
    };

    if (section == "geometry") {
      if (key == "name") s.name = one();
      else if (key == "units") s.units = one();
      else if (key == "type") s.geometry = one();
      else if (key == "lx") s.lx = to_num(one(), key);
      else if (key == "ly") s.ly = to_num(one(), key);
      else if (key == "ri") s.ri = to_num(one(), key);
      else if (key == "ro") s.ro = to_num(one(), key);
      else if (key == "degree") { s.degree_u = (int)to_num(ts.at(0), key); s.degree_v = (int)to_num(ts.at(1), key); }
      else if (key == "nel") { s.nel_u = (int)to_num(ts.at(0), key); s.nel_v = (int)to_num(ts.at(1), key); }
      else if (key == "rotate_deg") s.rotate_deg = to_num(one(), key);
      else throw FshellError("scenario: unknown geometry key '" + key + "'");
    } else if (section == "fibers") {
      if (key != "family") throw FshellError("scenario: unknown fibers key '" + key + "'");
      Scenario::FiberSpec fs;
      fs.kind = ts.at(0);
      if (fs.kind == "constant") fs.dir = Vec3(to_num(ts.at(1), key), to_num(ts.at(2), key), to_num(ts.at(3), key));
      else if (fs.kind != "circumferential") throw FshellError("scenario: unknown fiber kind '" + fs.kind + "'");
      s.fibers.push_back(fs);
    } else if (section == "material") {
      if (key == "model") s.material = one();
      else if (key == "mu") s.mu = to_num(one(), key);
      else if (key == "eps_L") s.eps_L = to_nums(ts, 0, key);
      else if (key == "beta_n") s.beta_n = to_nums(ts, 0, key);
      else if (key == "beta_g") s.beta_g = to_nums(ts, 0, key);
      else if (key == "beta_tau") s.beta_tau = to_nums(ts, 0, key);
      else if (key == "eps_a") s.eps_a = to_nums(ts, 0, key);
      else if (key == "dilatation") {
        s.dilatation = ts.at(0);
        if (s.dilatation == "graded_log") s.dilatation_scale = to_num(ts.at(1), key);
        else if (s.dilatation != "none") throw FshellError("scenario: unknown dilatation '" + s.dilatation + "'");
      }
      else if (key == "woven_eps_L") s.woven_eps_L = to_num(one(), key);
      else if (key == "woven_beta_g") { s.woven_beta_g1 = to_num(ts.at(0), key); s.woven_beta_g2 = to_num(ts.at(1), key); }
      else if (key == "woven_mu") s.woven_mu = to_num(one(), key);
      else if (key == "woven_alpha1") s.woven_alpha1 = to_num(one(), key);
      else if (key == "woven_eta") s.woven_eta = to_num(one(), key);
      else if (key == "woven_alpha2") s.woven_alpha2 = to_num(one(), key);
      else if (key == "tension_only") s.tension_only = to_num(one(), key) != 0.0;
      else if (key == "stab_e") s.stab_e = to_num(one(), key);
      else if (key == "stab_v") s.stab_v = to_num(one(), key);
      else throw FshellError("scenario: unknown material key '" + key + "'");
    } else if (section == "constraints") {
      if (key == "fix") s.fixes.push_back({ts.at(0), ts.at(1)});
      else if (key == "drive") {
        Scenario::DriveSpec d;
        d.target = ts.at(0);
        d.comps = ts.at(1);
        d.kind = ts.at(2);
        d.args = to_nums(ts, 3, key);
        s.drives.push_back(std::move(d));
      } else if (key == "load") {
        Scenario::LoadLine l;
        l.kind = ts.at(0);
        size_t k = 1;
        if (l.kind == "traction" || l.kind == "moment_out" || l.kind == "moment_in" || l.kind == "corner")
          l.target = ts.at(k++);
        for (; k < ts.size(); ++k) {
          if (ts[k] == "live") l.live = true;
          else if (ts[k] == "fixed") l.live = false;
          else if (ts[k] == "family") l.family = (int)to_num(ts.at(++k), key);
          else l.args.push_back(to_num(ts[k], key));
        }
        s.loads.push_back(std::move(l));
      } else throw FshellError("scenario: unknown constraints key '" + key + "'");
    } else if (section == "schedule") {
      if (key == "steps") s.steps = (int)to_num(one(), key);
      else if (key == "viscosity") s.viscosity = to_num(one(), key);
      else if (key == "imperfection_sigma") s.imperfection_sigma = to_num(one(), key);
      else if (key == "seed") s.seed = (unsigned long long)to_num(one(), key);
      else if (key == "planar") s.planar = to_num(one(), key) != 0.0;
      else if (key == "gauss") { s.gauss_u = (int)to_num(ts.at(0), key); s.gauss_v = (int)to_num(ts.at(1), key); }
      else if (key == "newton_tol") s.newton_tol = to_num(one(), key);
      else if (key == "newton_abs_tol") s.newton_abs_tol = to_num(one(), key);
      else if (key == "predictor_map") s.predictor_map = to_num(one(), key) != 0.0;
      else throw FshellError("scenario: unknown schedule key '" + key + "'");
    } else if (section == "output") {
      if (key == "reactions") s.reaction_groups = ts;
      else if (key == "resultants") s.resultant_edges = ts;
      else if (key == "fields_every") s.fields_every = (int)to_num(one(), key);
      else throw FshellError("scenario: unknown output key '" + key + "'");
    } else {
      throw FshellError("scenario line " + std::to_string(lineno) + ": key outside a section");
    }
  }
  if (s.fibers.empty()) throw FshellError("scenario: at least one fiber family required");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FshellError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "[geometry]\n";
  o << "name = " << s.name << "\n";
  o << "units = " << s.units << "\n";
  o << "type = " << s.geometry << "\n";
  if (s.geometry == "rect") o << "lx = " << s.lx << "\nly = " << s.ly << "\n";
  else o << "ri = " << s.ri << "\nro = " << s.ro << "\n";
  o << "degree = " << s.degree_u << " " << s.degree_v << "\n";
  o << "nel = " << s.nel_u << " " << s.nel_v << "\n";
  if (s.rotate_deg != 0.0) o << "rotate_deg = " << s.rotate_deg << "\n";

  o << "\n[fibers]\n";
  for (const auto& f : s.fibers) {
    o << "family = " << f.kind;
    if (f.kind == "constant") o << " " << f.dir[0] << " " << f.dir[1] << " " << f.dir[2];
    o << "\n";
  }

  o << "\n[material]\n";
  o << "model = " << s.material << "\n";
  auto list = [&](const std::string& key, const std::vector<double>& v) {
    if (v.empty()) return;
    o << key << " =";
    for (double x : v) o << " " << x;
    o << "\n";
  };
  if (s.material == "simple") {
    o << "mu = " << s.mu << "\n";
    list("eps_L", s.eps_L);
    list("beta_n", s.beta_n);
    list("beta_g", s.beta_g);
    list("beta_tau", s.beta_tau);
    list("eps_a", s.eps_a);
    if (s.dilatation != "none")
      o << "dilatation = " << s.dilatation << " " << s.dilatation_scale << "\n";
  } else {
    o << "woven_eps_L = " << s.woven_eps_L << "\n";
    o << "woven_beta_g = " << s.woven_beta_g1 << " " << s.woven_beta_g2 << "\n";
    o << "woven_mu = " << s.woven_mu << "\n";
    o << "woven_alpha1 = " << s.woven_alpha1 << "\n";
    o << "woven_eta = " << s.woven_eta << "\n";
    o << "woven_alpha2 = " << s.woven_alpha2 << "\n";
  }
  if (s.tension_only) o << "tension_only = 1\n";
  if (s.stab_e != 0.0) o << "stab_e = " << s.stab_e << "\n";
  if (s.stab_v != 0.0) o << "stab_v = " << s.stab_v << "\n";

  o << "\n[constraints]\n";
  for (const auto& f : s.fixes) o << "fix = " << f.target << " " << f.comps << "\n";
  for (const auto& d : s.drives) {
    o << "drive = " << d.target << " " << d.comps << " " << d.kind;
    for (double a : d.args) o << " " << a;
    o << "\n";
  }
  for (const auto& l : s.loads) {
    o << "load = " << l.kind;
    if (!l.target.empty()) o << " " << l.target;
    for (double a : l.args) o << " " << a;
    if (l.kind == "moment_in") o << " family " << l.family;
    o << (l.live ? " live" : " fixed") << "\n";
  }

  o << "\n[schedule]\n";
  o << "steps = " << s.steps << "\n";
  if (s.viscosity != 0.0) o << "viscosity = " << s.viscosity << "\n";
  if (s.imperfection_sigma != 0.0) o << "imperfection_sigma = " << s.imperfection_sigma << "\n";
  if (s.seed != 0) o << "seed = " << s.seed << "\n";
  o << "planar = " << (s.planar ? 1 : 0) << "\n";
  o << "gauss = " << s.gauss_u << " " << s.gauss_v << "\n";
  o << "newton_tol = " << s.newton_tol << "\n";
  o << "newton_abs_tol = " << s.newton_abs_tol << "\n";
  if (s.predictor_map) o << "predictor_map = 1\n";

  o << "\n[output]\n";
  auto slist = [&](const std::string& key, const std::vector<std::string>& v) {
    if (v.empty()) return;
    o << key << " =";
    for (const std::string& x : v) o << " " << x;
    o << "\n";
  };
  slist("reactions", s.reaction_groups);
  slist("resultants", s.resultant_edges);
  if (s.fields_every > 0) o << "fields_every = " << s.fields_every << "\n";
  return o.str();
}

Model Scenario::to_model() const {
  Model m;
  if (geometry == "rect")
    m.patch = build_rect_patch(lx, ly, degree_u, degree_v, nel_u, nel_v);
  else if (geometry == "quarter_annulus")
    m.patch = build_quarter_annulus(ri, ro, nel_u, nel_v);
  else
    throw FshellError("scenario: unknown geometry '" + geometry + "'");

  if (rotate_deg != 0.0) {
    const double a = rotate_deg * M_PI / 180.0;
    Mat3 R;
    R << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    for (Vec3& c : m.patch.ctrl) c = R * c;
  }

  const double rot = rotate_deg * M_PI / 180.0;
  for (const FiberSpec& f : fibers) {
    if (f.kind == "constant") {
      Vec3 d = f.dir;
      if (rotate_deg != 0.0) {
        Mat3 R;
        R << std::cos(rot), -std::sin(rot), 0, std::sin(rot), std::cos(rot), 0, 0, 0, 1;
        d = R * d;
      }
      m.fiber_fields.push_back(constant_fiber_field(d));
    } else {
      m.fiber_fields.push_back(circumferential_fiber_field());
    }
  }
  const int nf = static_cast<int>(fibers.size());

  if (material == "simple") {
    m.material = MaterialModel::Simple;
    auto fill = [&](std::vector<double> v) {
      v.resize(nf, v.empty() ? 0.0 : v.back());
      return v;
    };
    m.simple.mu = mu;
    m.simple.eps_L = fill(eps_L);
    m.simple.beta_n = fill(beta_n);
    m.simple.beta_g = fill(beta_g);
    m.simple.beta_tau = fill(beta_tau);
    m.simple.eps_a = MatX::Zero(nf, nf);
    size_t k = 0;
    for (int i = 0; i < nf; ++i)
      for (int j = i + 1; j < nf; ++j)
        if (k < eps_a.size()) m.simple.eps_a(i, j) = eps_a[k++];
    m.simple.tension_only = tension_only;
    if (dilatation == "graded_log") {
      const double scale = dilatation_scale;
      m.simple.dilatation.active = true;
      m.simple.dilatation.modulus = [scale](const Vec3& X) {
        return scale * std::log(std::hypot(X[0], X[1]));
      };
    }
  } else if (material == "woven") {
    m.material = MaterialModel::Woven;
    m.woven.eps_L = woven_eps_L;
    m.woven.beta_g1 = woven_beta_g1;
    m.woven.beta_g2 = woven_beta_g2;
    m.woven.mu = woven_mu;
    m.woven.alpha1 = woven_alpha1;
    m.woven.eta = woven_eta;
    m.woven.alpha2 = woven_alpha2;
    m.woven.tension_only = tension_only;
  } else {
    throw FshellError("scenario: unknown material '" + material + "'");
  }
  if (stab_e > 0.0 || stab_v > 0.0) {
    m.use_stabilization = true;
    m.stab.eps_e = stab_e;
    m.stab.eps_v = stab_v;
  }

  for (const FixSpec& f : fixes) {
    Constraint c = fix_nodes(f.target, target_nodes(m.patch, f.target), comp_mask(f.comps));
    m.constraints.push_back(std::move(c));
  }
  for (const DriveSpec& d : drives) {
    Constraint c;
    c.name = d.target;
    c.nodes = target_nodes(m.patch, d.target);
    c.comp = comp_mask(d.comps);
    const std::vector<double>& a = d.args;
    if (d.kind == "translate") {
      const Vec3 delta(a.at(0), a.size() > 1 ? a[1] : 0.0, a.size() > 2 ? a[2] : 0.0);
      c.target = [delta](const Vec3& X, double t) { return Vec3(X + t * delta); };
    } else if (d.kind == "stretch_xy") {
      const double sf = a.at(0);
      c.target = [sf](const Vec3& X, double t) {
        const double st = 1.0 + t * (sf - 1.0);
        return Vec3(st * X[0], X[1] / st, X[2]);
      };
    } else if (d.kind == "frame_phi") {
      const double phi1 = a.at(0) * M_PI / 180.0;
      c.target = [phi1](const Vec3& X, double t) {
        const double phi = M_PI / 4.0 + t * (phi1 - M_PI / 4.0);
        const double r2 = std::sqrt(2.0);
        return Vec3(r2 * std::cos(phi) * X[0], r2 * std::sin(phi) * X[1], X[2]);
      };
    } else if (d.kind == "radial_scale") {
      const double sf = a.at(0);
      c.target = [sf](const Vec3& X, double t) {
        const double st = 1.0 + t * (sf - 1.0);
        return Vec3(st * X[0], st * X[1], X[2]);
      };
    } else if (d.kind == "rotate_x") {
      const double cy = a.at(0), cz = a.at(1), ang = a.at(2) * M_PI / 180.0;
      m.moment_center = Vec3(0.0, cy, cz);
      c.target = [cy, cz, ang](const Vec3& X, double t) {
        const double ph = t * ang;
        const double y = X[1] - cy, z = X[2] - cz;
        return Vec3(X[0], cy + std::cos(ph) * y - std::sin(ph) * z,
                    cz + std::sin(ph) * y + std::cos(ph) * z);
      };
    } else {
      throw FshellError("scenario: unknown drive kind '" + d.kind + "'");
    }
    m.constraints.push_back(std::move(c));
  }
  for (const LoadLine& l : loads) {
    if (l.kind == "pressure") m.loads.pressure = l.args.at(0);
    else if (l.kind == "body") m.loads.body_force = Vec3(l.args.at(0), l.args.at(1), l.args.at(2));
    else if (l.kind == "traction") {
      BoundaryLoad b;
      b.edge = edge_of(l.target);
      b.type = BoundaryLoad::Type::Traction;
      b.traction = Vec3(l.args.at(0), l.args.at(1), l.args.at(2));
      b.live_measure = l.live;
      m.loads.boundary.push_back(b);
    } else if (l.kind == "moment_out" || l.kind == "moment_in") {
      BoundaryLoad b;
      b.edge = edge_of(l.target);
      b.type = l.kind == "moment_out" ? BoundaryLoad::Type::MomentOut
                                      : BoundaryLoad::Type::MomentIn;
      b.magnitude = l.args.at(0);
      b.family = l.family;
      b.live_measure = l.live;
      m.loads.boundary.push_back(b);
    } else if (l.kind == "corner") {
      CornerLoad cl;
      cl.iu = l.target[0] == 'u' ? 0 : 0;  // target encodes corner as "c<iu><iv>"
      if (l.target.size() == 3 && l.target[0] == 'c') {
        cl.iu = l.target[1] - '0';
        cl.iv = l.target[2] - '0';
      } else {
        throw FshellError("scenario: corner load target must be c<iu><iv>");
      }
      cl.m_nu = l.args.at(0);
      m.loads.corners.push_back(cl);
    } else {
      throw FshellError("scenario: unknown load kind '" + l.kind + "'");
    }
  }

  if (predictor_map && !drives.empty()) {
    // reuse the first drive's map as the initial guess for free nodes
    const Constraint& c = m.constraints[fixes.size()];
    m.predictor = c.target;
  }

  m.planar = planar;
  m.gauss_u = gauss_u;
  m.gauss_v = gauss_v;
  m.viscosity = viscosity;
  return m;
}

NewtonSettings Scenario::to_settings() const {
  NewtonSettings cfg;
  cfg.rel_tol = newton_tol;
  cfg.abs_tol = newton_abs_tol;
  cfg.n_steps = steps;
  cfg.sigma_imperfection = imperfection_sigma;
  cfg.seed = seed;
  return cfg;
}

}  // namespace fshell
