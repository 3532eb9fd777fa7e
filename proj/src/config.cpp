#include "bicscat/config.hpp"

#include <set>

namespace bicscat {

namespace {

// Strict accessor for one JSON object: every key that is read gets marked,
// and done() rejects whatever remains.  All schema errors carry the JSON
// path of the offending node.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      fail(ErrorCode::config_invalid, path_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end())
      fail(ErrorCode::config_invalid, path_ + " is missing required key '" + key + "'");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number())
      fail(ErrorCode::config_invalid, path_ + "." + key + " must be a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  int integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer())
      fail(ErrorCode::config_invalid, path_ + "." + key + " must be an integer");
    return v.get<int>();
  }

  int integer_or(const std::string& key, int fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::string str(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string())
      fail(ErrorCode::config_invalid, path_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> number_array(const std::string& key) {
    const json& v = get(key);
    std::vector<double> out;
    if (v.is_number()) {  // scalar shorthand for a one-entry vector
      out.push_back(v.get<double>());
      return out;
    }
    if (!v.is_array())
      fail(ErrorCode::config_invalid, path_ + "." + key + " must be an array of numbers");
    for (const auto& e : v) {
      if (!e.is_number())
        fail(ErrorCode::config_invalid, path_ + "." + key + " must contain only numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const std::string& path() const { return path_; }

  void done() {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorCode::config_invalid, "unknown key '" + it.key() + "' in " + path_);
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Family parse_family(const std::string& name, const std::string& path) {
  if (name == "circle_array") return Family::circle_array;
  if (name == "perturbed_circle") return Family::perturbed_circle;
  if (name == "scaled_circle") return Family::scaled_circle;
  if (name == "shifted_circle") return Family::shifted_circle;
  fail(ErrorCode::config_invalid, path + ": unknown family '" + name + "'");
}

const char* family_name(Family f) {
  switch (f) {
    case Family::circle_array: return "circle_array";
    case Family::perturbed_circle: return "perturbed_circle";
    case Family::scaled_circle: return "scaled_circle";
    case Family::shifted_circle: return "shifted_circle";
  }
  return "?";
}

ProbeCase parse_case(const std::string& name, const std::string& path) {
  if (name == "II") return ProbeCase::II;
  if (name == "III") return ProbeCase::III;
  if (name == "IV") return ProbeCase::IV;
  fail(ErrorCode::config_invalid, path + ": case must be one of \"II\", \"III\", \"IV\"");
}

const char* case_name(ProbeCase c) {
  switch (c) {
    case ProbeCase::II: return "II";
    case ProbeCase::III: return "III";
    case ProbeCase::IV: return "IV";
  }
  return "?";
}

StructureSpec parse_structure(const json& j) {
  Section s(j, "structure");
  StructureSpec spec;
  spec.family = parse_family(s.str("family"), "structure.family");
  spec.eps1 = s.number_or("eps1", 10.0);
  spec.eps0 = s.number_or("eps0", 1.0);
  spec.radius = s.number_or("radius", 0.6 * pi);
  spec.d0 = s.number_or("d0", pi);
  if (s.has("delta"))
    spec.delta = s.number_array("delta");
  else
    spec.delta.assign(static_cast<size_t>(spec.n_params()), 0.0);
  s.done();
  try {
    validate(spec);
  } catch (const Error& e) {
    fail(ErrorCode::config_invalid, std::string("structure: ") + e.what());
  }
  return spec;
}

Grid parse_grid(const json& j) {
  Section s(j, "grid");
  Grid g;
  g.n1 = s.integer_or("n1", g.n1);
  g.n2 = s.integer_or("n2", g.n2);
  s.done();
  if (g.n1 < 4 || g.n2 < 4)
    fail(ErrorCode::config_invalid, "grid: n1 and n2 must be at least 4");
  return g;
}

PointRequest parse_point(const json& j, const std::string& path, const StructureSpec& spec) {
  Section s(j, path);
  PointRequest p;
  p.beta = s.number("beta");
  if (s.has("delta"))
    p.delta = s.number_array("delta");
  else
    p.delta.assign(static_cast<size_t>(spec.n_params()), 0.0);
  p.k = s.number("k");
  s.done();
  if (static_cast<int>(p.delta.size()) != spec.n_params())
    fail(ErrorCode::config_invalid,
         path + ".delta has " + std::to_string(p.delta.size()) + " entries, structure expects " +
             std::to_string(spec.n_params()));
  if (!(p.k > 0.0)) fail(ErrorCode::config_invalid, path + ".k must be positive");
  return p;
}

RingMap parse_map(const json& j) {
  Section s(j, "probe.map");
  RingMap m;
  m.axx = s.number_or("axx", 1.0);
  m.axy = s.number_or("axy", 0.0);
  m.ayx = s.number_or("ayx", 0.0);
  m.ayy = s.number_or("ayy", 1.0);
  m.shift_beta = s.number_or("shift_beta", 0.0);
  m.shift_delta = s.number_or("shift_delta", 0.0);
  s.done();
  return m;
}

ProbeRequest parse_probe(const json& j, const StructureSpec& spec) {
  Section s(j, "probe");
  ProbeRequest p;
  p.which = parse_case(s.str("case"), "probe.case");
  p.cfg.beta_c = s.number("beta");
  p.cfg.delta_c = s.number_or("delta", 0.0);
  p.cfg.k_seed = s.number("k_seed");
  p.cfg.r = s.number("r");
  p.cfg.n_samples = s.integer_or("n_samples", p.which == ProbeCase::IV ? 2 : 24);
  p.cfg.theta = s.number_or("theta", pi);
  p.cfg.C = s.integer_or("C", 1);
  if (s.has("map")) p.cfg.map = parse_map(s.get("map"));
  s.done();
  if (!(p.cfg.k_seed > 0.0)) fail(ErrorCode::config_invalid, "probe.k_seed must be positive");
  if (!(p.cfg.r > 0.0)) fail(ErrorCode::config_invalid, "probe.r must be positive");
  if (p.which != ProbeCase::IV && spec.n_params() == 0)
    fail(ErrorCode::config_invalid,
         "probe: cases II and III need a structure family with a shape parameter");
  // Symmetry preconditions are easy to get wrong in a hand-written config;
  // reject them at parse time rather than from deep inside the run.
  if (p.which == ProbeCase::II && !spec.symmetric_x1())
    fail(ErrorCode::config_invalid, "probe: case II requires an x1-mirror-symmetric structure");
  if ((p.which == ProbeCase::III || p.which == ProbeCase::IV) && !spec.symmetric_x2())
    fail(ErrorCode::config_invalid,
         std::string("probe: case ") + case_name(p.which) +
             " requires an x2-mirror-symmetric structure");
  if (p.which == ProbeCase::IV && !spec.symmetric_x1())
    fail(ErrorCode::config_invalid, "probe: case IV requires an x1-mirror-symmetric structure");
  return p;
}

DerivsRequest parse_derivs(const json& j, const StructureSpec& spec) {
  Section s(j, "derivs");
  DerivsRequest d;
  d.point.beta = s.number("beta");
  if (s.has("delta"))
    d.point.delta = s.number_array("delta");
  else
    d.point.delta.assign(static_cast<size_t>(spec.n_params()), 0.0);
  d.point.k = s.number("k");
  d.mu_case = s.integer("mu_case");
  d.m_phase = s.number_or("m_phase", 0.5 * pi);
  s.done();
  if (static_cast<int>(d.point.delta.size()) != spec.n_params())
    fail(ErrorCode::config_invalid, "derivs.delta size does not match the structure family");
  if (!(d.point.k > 0.0)) fail(ErrorCode::config_invalid, "derivs.k must be positive");
  if (d.mu_case < 1 || d.mu_case > 4)
    fail(ErrorCode::config_invalid, "derivs.mu_case must be 1, 2, 3, or 4");
  return d;
}

}  // namespace

RunConfig parse_config(const json& j) {
  Section top(j, "config");
  RunConfig c;
  c.structure = parse_structure(top.get("structure"));
  if (top.has("grid")) c.grid = parse_grid(top.get("grid"));
  if (top.has("smatrix")) c.smatrix = parse_point(top.get("smatrix"), "smatrix", c.structure);
  if (top.has("probe")) c.probe = parse_probe(top.get("probe"), c.structure);
  if (top.has("derivs")) c.derivs = parse_derivs(top.get("derivs"), c.structure);
  if (top.has("localize")) {
    Section s(top.get("localize"), "localize");
    c.localize_depth = s.integer_or("depth", 6);
    s.done();
    c.has_localize = true;
    if (c.localize_depth < 1 || c.localize_depth > 30)
      fail(ErrorCode::config_invalid, "localize.depth must be between 1 and 30");
  }
  top.done();
  return c;
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::config_invalid, std::string("JSON parse error in ") + path + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const RunConfig& c) {
  json j;
  {
    json s;
    s["family"] = family_name(c.structure.family);
    s["eps1"] = c.structure.eps1;
    s["eps0"] = c.structure.eps0;
    s["radius"] = c.structure.radius;
    s["d0"] = c.structure.d0;
    s["delta"] = c.structure.delta;
    j["structure"] = std::move(s);
  }
  j["grid"] = {{"n1", c.grid.n1}, {"n2", c.grid.n2}};
  if (c.smatrix) {
    j["smatrix"] = {{"beta", c.smatrix->beta}, {"delta", c.smatrix->delta}, {"k", c.smatrix->k}};
  }
  if (c.probe) {
    json p;
    p["case"] = case_name(c.probe->which);
    p["beta"] = c.probe->cfg.beta_c;
    p["delta"] = c.probe->cfg.delta_c;
    p["k_seed"] = c.probe->cfg.k_seed;
    p["r"] = c.probe->cfg.r;
    p["n_samples"] = c.probe->cfg.n_samples;
    p["theta"] = c.probe->cfg.theta;
    p["C"] = c.probe->cfg.C;
    const RingMap& m = c.probe->cfg.map;
    p["map"] = {{"axx", m.axx},
                {"axy", m.axy},
                {"ayx", m.ayx},
                {"ayy", m.ayy},
                {"shift_beta", m.shift_beta},
                {"shift_delta", m.shift_delta}};
    j["probe"] = std::move(p);
  }
  if (c.derivs) {
    j["derivs"] = {{"beta", c.derivs->point.beta},
                   {"delta", c.derivs->point.delta},
                   {"k", c.derivs->point.k},
                   {"mu_case", c.derivs->mu_case},
                   {"m_phase", c.derivs->m_phase}};
  }
  if (c.has_localize) j["localize"] = {{"depth", c.localize_depth}};
  return j;
}

}  // namespace bicscat
