#include "pnm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pnm/csv.hpp"
#include "pnm/error.hpp"

namespace pnm {

namespace pt = boost::property_tree;

std::string case_name(const CaseParams& c) {
  switch (c.index()) {
    case 0: return "line";
    case 1: return "bifurcating";
    default: return "lattice";
  }
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Configuration, path + ": " + what);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

// One INI section. Remembers which keys were consumed so leftovers can be reported.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::string path(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string required(const std::string& key) {
    auto v = raw(key);
    if (!v || v->empty()) fail(path(key), "missing required key");
    return *v;
  }

  double number(const std::string& key, std::optional<std::string> text) {
    try {
      const double v = parse_double(*text);
      if (!std::isfinite(v)) fail(path(key), "must be finite");
      return v;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Configuration) throw;
      fail(path(key), "expected a number, got '" + *text + "'");
    }
  }

  void get(const std::string& key, double& out) {
    if (auto v = raw(key)) out = number(key, v);
  }
  void get_required(const std::string& key, double& out) { out = number(key, required(key)); }

  template <class Int>
  void get_count(const std::string& key, Int& out) {
    auto v = raw(key);
    if (!v) return;
    Int parsed{};
    const auto res = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
      fail(path(key), "expected a non-negative integer, got '" + *v + "'");
    out = parsed;
  }

  void get(const std::string& key, unsigned long& out) { get_count(key, out); }
  void get(const std::string& key, unsigned long long& out) { get_count(key, out); }
  void get(const std::string& key, int& out) {
    std::size_t v = static_cast<std::size_t>(std::max(out, 0));
    get_count(key, v);
    if (v > 1000000) fail(path(key), "too large");
    out = static_cast<int>(v);
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) fail(path(key), "nested keys are not supported");
      if (!used_.count(key)) fail(path(key), "unknown key");
    }
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

const std::vector<std::string> kSections = {"case", "fluids", "scheme", "newton", "timeloop", "output", "study", "reference"};

void read_case(Section& s, RunConfig& run) {
  const std::string kind = s.required("kind");
  s.get("seed", run.seed);
  if (kind == "line") {
    LineCase c;
    s.get("pores", c.pores);
    s.get("pore_radius", c.pore_radius);
    s.get("throat_radius", c.throat_radius);
    s.get("spacing", c.spacing);
    s.get("injection_rate", c.injection_rate);
    s.get("outlet_pressure", c.outlet_pressure);
    run.geometry = c;
  } else if (kind == "bifurcating") {
    BifurcatingCase c;
    s.get("depth", c.depth);
    s.get("segment_throats", c.segment_throats);
    s.get("pore_radius", c.pore_radius);
    s.get("spacing", c.spacing);
    s.get("radius_min", c.radius_min);
    s.get("radius_max", c.radius_max);
    s.get("injection_rate", c.injection_rate);
    s.get("outlet_pressure", c.outlet_pressure);
    run.geometry = c;
  } else if (kind == "lattice") {
    LatticeCase c;
    s.get("rows", c.rows);
    s.get("cols", c.cols);
    s.get("pore_radius", c.pore_radius);
    s.get("spacing", c.spacing);
    s.get("radius_mean", c.radius_mean);
    s.get("radius_std", c.radius_std);
    s.get("radius_clip_min", c.radius_clip_min);
    s.get("radius_clip_max", c.radius_clip_max);
    s.get("inlet_entry_pressure", c.inlet_entry_pressure);
    s.get("inlet_pressure", c.inlet_pressure);
    s.get("outlet_pressure", c.outlet_pressure);
    run.geometry = c;
  } else {
    fail(s.path("kind"), "expected line, bifurcating or lattice, got '" + kind + "'");
  }
}

SchemeKind scheme_from(Section& s) {
  const std::string kind = s.required("kind");
  const auto delta = s.raw("delta");
  if (kind == "fi-r") {
    FiR r;
    if (delta) r.delta = s.number("delta", delta);
    return r;
  }
  if (delta) fail(s.path("delta"), "only valid for scheme fi-r");
  if (kind == "fi-n") return FiN{};
  if (kind == "fi-theta") return FiTheta{};
  fail(s.path("kind"), "expected fi-n, fi-r or fi-theta, got '" + kind + "'");
}

void read_newton(Section& s, NewtonConfig& n) {
  s.get("max_iterations", n.max_iterations);
  s.get("tol_residual_rel", n.tol_residual_rel);
  s.get("tol_abs_mass", n.tol_abs_mass);
  s.get("tol_abs_theta", n.tol_abs_theta);
  if (auto ls = s.raw("line_search")) {
    if (*ls == "on") n.line_search = true;
    else if (*ls == "off") n.line_search = false;
    else if (*ls == "auto") n.line_search.reset();
    else fail(s.path("line_search"), "expected auto, on or off, got '" + *ls + "'");
  }
  s.get("max_update_pw", n.max_update_pw);
  s.get("max_update_sn", n.max_update_sn);
  s.get("max_update_theta", n.max_update_theta);
  s.get("pc_growth_limit", n.pc_growth_limit);
}

void read_timeloop(Section& s, TimeLoopConfig& t) {
  s.get_required("t_end", t.t_end);
  s.get_required("dt_target", t.dt_target);
  s.get("dt_min", t.dt_min);
  s.get("retry_factor", t.retry_factor);
  s.get("growth_factor", t.growth_factor);
  s.get("dt_initial", t.dt_initial);
}

StudyConfig read_study(Section& s) {
  StudyConfig st;
  for (const std::string& item : split_list(s.required("schemes"))) {
    try {
      st.schemes.push_back(parse_scheme(item));
    } catch (const Error&) {
      fail(s.path("schemes"), "unknown scheme '" + item + "'");
    }
  }
  for (const std::string& item : split_list(s.required("dt"))) st.dt_levels.push_back(s.number("dt", item));
  s.get("seed_first", st.seed_first);
  s.get("seed_count", st.seed_count);
  return st;
}

void check_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive");
}
void check_non_negative(double v, const std::string& path) {
  if (!(v >= 0.0) || !std::isfinite(v)) fail(path, "must be non-negative");
}

void validate_case(const CaseParams& geometry) {
  if (const auto* c = std::get_if<LineCase>(&geometry)) {
    if (c->pores < 2) fail("case.pores", "at least 2 pores are needed");
    check_positive(c->pore_radius, "case.pore_radius");
    check_positive(c->throat_radius, "case.throat_radius");
    if (!(c->throat_radius < c->pore_radius)) fail("case.throat_radius", "must be smaller than case.pore_radius");
    check_non_negative(c->spacing, "case.spacing");
    check_positive(c->injection_rate, "case.injection_rate");
    check_positive(c->outlet_pressure, "case.outlet_pressure");
  } else if (const auto* c = std::get_if<BifurcatingCase>(&geometry)) {
    if (c->depth < 1 || c->depth > 16) fail("case.depth", "must lie in [1, 16]");
    if (c->segment_throats < 1) fail("case.segment_throats", "must be at least 1");
    check_positive(c->pore_radius, "case.pore_radius");
    check_non_negative(c->spacing, "case.spacing");
    check_positive(c->radius_min, "case.radius_min");
    if (!(c->radius_max > c->radius_min)) fail("case.radius_max", "must exceed case.radius_min");
    if (!(c->radius_max < c->pore_radius)) fail("case.radius_max", "must be smaller than case.pore_radius");
    check_positive(c->injection_rate, "case.injection_rate");
    check_positive(c->outlet_pressure, "case.outlet_pressure");
  } else if (const auto* c = std::get_if<LatticeCase>(&geometry)) {
    if (c->rows < 1) fail("case.rows", "must be at least 1");
    if (c->cols < 2) fail("case.cols", "must be at least 2");
    check_positive(c->pore_radius, "case.pore_radius");
    check_non_negative(c->spacing, "case.spacing");
    check_positive(c->radius_mean, "case.radius_mean");
    check_non_negative(c->radius_std, "case.radius_std");
    check_positive(c->radius_clip_min, "case.radius_clip_min");
    if (!(c->radius_clip_max > c->radius_clip_min)) fail("case.radius_clip_max", "must exceed case.radius_clip_min");
    if (!(c->radius_clip_max < c->pore_radius)) fail("case.radius_clip_max", "must be smaller than case.pore_radius");
    check_positive(c->inlet_entry_pressure, "case.inlet_entry_pressure");
    check_positive(c->inlet_pressure, "case.inlet_pressure");
    check_positive(c->outlet_pressure, "case.outlet_pressure");
  }
}

std::string scheme_token(const SchemeKind& s) {
  if (const auto* r = std::get_if<FiR>(&s)) return "fi-r:" + format_double(r->delta);
  return scheme_name(s);
}

}  // namespace

void validate(const Config& cfg) {
  const RunConfig& r = cfg.run;
  validate_case(r.geometry);
  check_positive(r.fluids.rho_w, "fluids.rho_w");
  check_positive(r.fluids.rho_n, "fluids.rho_n");
  check_positive(r.fluids.mu_w, "fluids.mu_w");
  check_positive(r.fluids.mu_n, "fluids.mu_n");
  check_positive(r.fluids.gamma, "fluids.gamma");
  if (const auto* fr = std::get_if<FiR>(&r.scheme)) check_positive(fr->delta, "scheme.delta");
  if (r.newton.max_iterations < 1) fail("newton.max_iterations", "must be at least 1");
  check_positive(r.newton.tol_residual_rel, "newton.tol_residual_rel");
  check_positive(r.newton.tol_abs_mass, "newton.tol_abs_mass");
  check_positive(r.newton.tol_abs_theta, "newton.tol_abs_theta");
  check_positive(r.newton.max_update_pw, "newton.max_update_pw");
  check_positive(r.newton.max_update_sn, "newton.max_update_sn");
  check_positive(r.newton.max_update_theta, "newton.max_update_theta");
  check_non_negative(r.newton.pc_growth_limit, "newton.pc_growth_limit");
  if (r.newton.pc_growth_limit > 0.0 && !(r.newton.pc_growth_limit > 1.0))
    fail("newton.pc_growth_limit", "must be 0 (off) or greater than 1");
  const TimeLoopConfig& t = r.timeloop;
  check_positive(t.t_end, "timeloop.t_end");
  check_positive(t.dt_target, "timeloop.dt_target");
  check_positive(t.dt_min, "timeloop.dt_min");
  if (!(t.dt_min <= t.dt_target)) fail("timeloop.dt_min", "must not exceed timeloop.dt_target");
  if (!(t.retry_factor > 0.0 && t.retry_factor < 1.0)) fail("timeloop.retry_factor", "must lie in (0, 1)");
  if (!(t.growth_factor >= 1.0) || !std::isfinite(t.growth_factor)) fail("timeloop.growth_factor", "must be at least 1");
  check_non_negative(t.dt_initial, "timeloop.dt_initial");
  if (r.output.empty()) fail("output.directory", "must not be empty");
  if (cfg.study) {
    const StudyConfig& s = *cfg.study;
    if (s.schemes.empty()) fail("study.schemes", "needs at least one scheme");
    for (const SchemeKind& k : s.schemes)
      if (const auto* fr = std::get_if<FiR>(&k); fr && !(fr->delta > 0.0 && std::isfinite(fr->delta)))
        fail("study.schemes", "FI-R delta must be positive");
    if (s.dt_levels.empty()) fail("study.dt", "needs at least one level");
    for (std::size_t i = 0; i < s.dt_levels.size(); ++i) {
      check_positive(s.dt_levels[i], "study.dt");
      if (i > 0 && !(s.dt_levels[i] < s.dt_levels[i - 1])) fail("study.dt", "levels must be strictly decreasing");
      if (s.dt_levels[i] < t.dt_min) fail("study.dt", "levels must not be below timeloop.dt_min");
    }
    if (s.seed_count < 1) fail("study.seed_count", "must be at least 1");
    check_non_negative(s.reference.dt_target, "reference.dt_target");
    check_positive(s.reference.tol_t, "reference.tol_t");
  }
}

Config parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Configuration, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, child] : tree) {
    if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
      if (child.empty()) fail(name, "keys must belong to a section");
      fail(name, "unknown section");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  Config cfg;
  Section c = section("case");
  read_case(c, cfg.run);
  c.finish();

  Section f = section("fluids");
  f.get("rho_w", cfg.run.fluids.rho_w);
  f.get("rho_n", cfg.run.fluids.rho_n);
  f.get("mu_w", cfg.run.fluids.mu_w);
  f.get("mu_n", cfg.run.fluids.mu_n);
  f.get("gamma", cfg.run.fluids.gamma);
  f.finish();

  Section s = section("scheme");
  cfg.run.scheme = scheme_from(s);
  s.finish();

  Section n = section("newton");
  read_newton(n, cfg.run.newton);
  n.finish();

  Section t = section("timeloop");
  read_timeloop(t, cfg.run.timeloop);
  t.finish();

  Section o = section("output");
  if (auto dir = o.raw("directory")) cfg.run.output = *dir;
  o.finish();

  const bool has_study = tree.find("study") != tree.not_found();
  const bool has_reference = tree.find("reference") != tree.not_found();
  if (has_reference && !has_study) fail("reference", "only valid together with a [study] section");
  if (has_study) {
    Section st = section("study");
    StudyConfig study = read_study(st);
    st.finish();
    Section rf = section("reference");
    rf.get("dt_target", study.reference.dt_target);
    rf.get("tol_t", study.reference.tol_t);
    rf.finish();
    cfg.study = std::move(study);
  }
  validate(cfg);
  return cfg;
}

Config parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string echo_config(const Config& cfg) {
  std::ostringstream o;
  const RunConfig& r = cfg.run;
  auto num = [&](const char* key, double v) { o << key << " = " << format_double(v) << '\n'; };
  auto cnt = [&](const char* key, auto v) { o << key << " = " << v << '\n'; };

  o << "[case]\n";
  cnt("kind", case_name(r.geometry));
  cnt("seed", r.seed);
  if (const auto* c = std::get_if<LineCase>(&r.geometry)) {
    cnt("pores", c->pores);
    num("pore_radius", c->pore_radius);
    num("throat_radius", c->throat_radius);
    num("spacing", c->spacing);
    num("injection_rate", c->injection_rate);
    num("outlet_pressure", c->outlet_pressure);
  } else if (const auto* c = std::get_if<BifurcatingCase>(&r.geometry)) {
    cnt("depth", c->depth);
    cnt("segment_throats", c->segment_throats);
    num("pore_radius", c->pore_radius);
    num("spacing", c->spacing);
    num("radius_min", c->radius_min);
    num("radius_max", c->radius_max);
    num("injection_rate", c->injection_rate);
    num("outlet_pressure", c->outlet_pressure);
  } else if (const auto* c = std::get_if<LatticeCase>(&r.geometry)) {
    cnt("rows", c->rows);
    cnt("cols", c->cols);
    num("pore_radius", c->pore_radius);
    num("spacing", c->spacing);
    num("radius_mean", c->radius_mean);
    num("radius_std", c->radius_std);
    num("radius_clip_min", c->radius_clip_min);
    num("radius_clip_max", c->radius_clip_max);
    num("inlet_entry_pressure", c->inlet_entry_pressure);
    num("inlet_pressure", c->inlet_pressure);
    num("outlet_pressure", c->outlet_pressure);
  }

  o << "\n[fluids]\n";
  num("rho_w", r.fluids.rho_w);
  num("rho_n", r.fluids.rho_n);
  num("mu_w", r.fluids.mu_w);
  num("mu_n", r.fluids.mu_n);
  num("gamma", r.fluids.gamma);

  o << "\n[scheme]\n";
  cnt("kind", scheme_name(r.scheme));
  if (const auto* fr = std::get_if<FiR>(&r.scheme)) num("delta", fr->delta);

  o << "\n[newton]\n";
  cnt("max_iterations", r.newton.max_iterations);
  num("tol_residual_rel", r.newton.tol_residual_rel);
  num("tol_abs_mass", r.newton.tol_abs_mass);
  num("tol_abs_theta", r.newton.tol_abs_theta);
  cnt("line_search", !r.newton.line_search ? "auto" : (*r.newton.line_search ? "on" : "off"));
  num("max_update_pw", r.newton.max_update_pw);
  num("max_update_sn", r.newton.max_update_sn);
  num("max_update_theta", r.newton.max_update_theta);
  num("pc_growth_limit", r.newton.pc_growth_limit);

  o << "\n[timeloop]\n";
  num("t_end", r.timeloop.t_end);
  num("dt_target", r.timeloop.dt_target);
  num("dt_min", r.timeloop.dt_min);
  num("retry_factor", r.timeloop.retry_factor);
  num("growth_factor", r.timeloop.growth_factor);
  num("dt_initial", r.timeloop.dt_initial);

  o << "\n[output]\n";
  cnt("directory", r.output);

  if (cfg.study) {
    const StudyConfig& s = *cfg.study;
    o << "\n[study]\nschemes = ";
    for (std::size_t i = 0; i < s.schemes.size(); ++i) o << (i ? ", " : "") << scheme_token(s.schemes[i]);
    o << "\ndt = ";
    for (std::size_t i = 0; i < s.dt_levels.size(); ++i) o << (i ? ", " : "") << format_double(s.dt_levels[i]);
    o << '\n';
    cnt("seed_first", s.seed_first);
    cnt("seed_count", s.seed_count);
    o << "\n[reference]\n";
    num("dt_target", s.reference.dt_target);
    num("tol_t", s.reference.tol_t);
  }
  return o.str();
}

}  // namespace pnm
