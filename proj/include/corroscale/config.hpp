#ifndef CORROSCALE_CONFIG_HPP
#define CORROSCALE_CONFIG_HPP

#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corroscale/cell_problem.hpp"
#include "corroscale/geometry.hpp"
#include "corroscale/kinetics.hpp"

namespace corroscale {

enum class BcKind { Neumann, DirichletU3 };

// Face order used everywhere a per-face quantity appears: left, right,
// bottom, top.
struct GeometryConfig {
  int dim = 2;
  double r_solid = 0.2;
  double r_water = 0.35;
  CellVariant variant = CellVariant::Annulus;
  double bridge_width = 0.0;
  double h = 0.02;
  bool operator==(const GeometryConfig&) const = default;
};

struct DiffusionConfig {
  std::array<DiffusionSpec, 4> d{};  // species u1..u4
  bool operator==(const DiffusionConfig&) const = default;
};

struct KineticsConfig {
  RateLaw law;
  double k1 = 1.0, k2 = 1.0, k3 = 1.0;
  HenryLaw henry;
  BoundsA4 bounds;
  bool operator==(const KineticsConfig&) const = default;
};

struct MacroConfig {
  double box_min = 0.0, box_max = 1.0;
  int n_cells = 16;
  int n_quad_sw = 16;
  double dt = 1e-3;
  double t_end = 0.1;
  std::vector<double> output_times;
  std::array<BcKind, 4> bc{BcKind::Neumann, BcKind::Neumann, BcKind::Neumann, BcKind::Neumann};
  double u3_dirichlet = 0.0;
  std::vector<double> u3_dirichlet_times, u3_dirichlet_values;
  double u_init[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
  bool strict_a4 = false;
  bool operator==(const MacroConfig& o) const {
    for (int i = 0; i < 5; ++i)
      if (u_init[i] != o.u_init[i]) return false;
    return box_min == o.box_min && box_max == o.box_max && n_cells == o.n_cells &&
           n_quad_sw == o.n_quad_sw && dt == o.dt && t_end == o.t_end &&
           output_times == o.output_times && bc == o.bc && u3_dirichlet == o.u3_dirichlet &&
           u3_dirichlet_times == o.u3_dirichlet_times &&
           u3_dirichlet_values == o.u3_dirichlet_values && strict_a4 == o.strict_a4;
  }
};

struct MicroConfig {
  std::vector<int> eps_list{4, 8, 16};  // denominators q of eps = 1/q, increasing
  int fine_per_period = 16;
  double dt = 0.0;     // 0: derived from the explicit stability bound
  double t_end = 0.0;  // 0: macro t_end
  bool operator==(const MicroConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool snapshots = false;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  DiffusionConfig diffusion;
  KineticsConfig kinetics;
  MacroConfig macro;
  MicroConfig micro;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

namespace config_detail {

struct RawValue {
  std::string text;
  int line = 0, col = 0;
};
using Section = std::map<std::string, RawValue>;
using Raw = std::map<std::string, Section>;

inline const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"geometry", {"dim", "r_solid", "r_water", "variant", "bridge_width", "h"}},
      {"diffusion",
       {"d1", "d2", "d3", "d4", "d1_times", "d2_times", "d3_times", "d4_times", "d1_factors",
        "d2_factors", "d3_factors", "d4_factors"}},
      {"kinetics",
       {"rate_law", "c_R", "K_half", "beta_max", "k1", "k2", "k3", "a", "b", "M1", "M2", "M3",
        "M4", "M5"}},
      {"macro",
       {"box_min", "box_max", "n_cells", "n_quad_sw", "dt", "t_end", "output_times", "bc_left",
        "bc_right", "bc_bottom", "bc_top", "u3_dirichlet", "u3_dirichlet_times",
        "u3_dirichlet_values", "u1_init", "u2_init", "u3_init", "u4_init", "u5_init",
        "strict_a4"}},
      {"micro", {"eps_list", "fine_per_period", "dt", "t_end"}},
      {"output", {"dir", "snapshots"}},
  };
  return s;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

[[noreturn]] inline void parse_fail(int line, int col, const std::string& msg) {
  fail(ErrorCode::ParseError,
       "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
}

inline Raw parse_raw(std::istream& in) {
  Raw raw;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const int col0 = 1 + (int)(line.find_first_not_of(" \t"));
    if (body.front() == '[') {
      if (body.back() != ']') parse_fail(line_no, col0, "unterminated section header");
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (!schema().count(name))
        fail(ErrorCode::UnknownKey, "unknown section '" + name + "' at line " + std::to_string(line_no));
      section = name;
      raw[name];  // a section may legitimately be empty
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) parse_fail(line_no, col0, "expected 'key = value'");
    if (section.empty()) parse_fail(line_no, col0, "key outside of any [section]");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) parse_fail(line_no, col0, "empty key");
    const auto& allowed = schema().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorCode::UnknownKey,
           "unknown key '" + key + "' in section [" + section + "] at line " + std::to_string(line_no));
    auto [it, inserted] = raw[section].emplace(key, RawValue{value, line_no, col0});
    if (!inserted)
      parse_fail(line_no, col0, "duplicate key '" + key + "' in section [" + section + "]");
  }
  return raw;
}

class Reader {
 public:
  Reader(const Raw& raw, const std::string& section) : raw_(raw), section_(section) {}

  bool has(const std::string& key) const {
    auto s = raw_.find(section_);
    return s != raw_.end() && s->second.count(key) > 0;
  }
  const RawValue& get(const std::string& key) const { return raw_.at(section_).at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    return to_number(rv.text, rv.line, rv.col);
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    const double v = to_number(rv.text, rv.line, rv.col);
    if (v != (double)(long long)v)
      parse_fail(rv.line, rv.col, "key '" + key + "' expects an integer");
    return (int)v;
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const RawValue& rv = get(key);
    if (rv.text == "true" || rv.text == "1" || rv.text == "yes") return true;
    if (rv.text == "false" || rv.text == "0" || rv.text == "no") return false;
    parse_fail(rv.line, rv.col, "key '" + key + "' expects a boolean");
  }
  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key).text : fallback;
  }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const RawValue& rv = get(key);
    std::string item;
    std::istringstream ss(rv.text);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) parse_fail(rv.line, rv.col, "empty entry in list '" + key + "'");
      out.push_back(to_number(item, rv.line, rv.col));
    }
    return out;
  }

  static double to_number(const std::string& text, int line, int col) {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) parse_fail(line, col, "trailing characters after number '" + text + "'");
      return v;
    } catch (const Error&) {
      throw;
    } catch (...) {
      parse_fail(line, col, "cannot parse '" + text + "' as a number");
    }
  }

 private:
  const Raw& raw_;
  std::string section_;
};

// Tensors are written as one value (isotropic) or four (row major).
inline Mat2 to_tensor(const RawValue& rv) {
  std::istringstream ss(rv.text);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) vals.push_back(Reader::to_number(tok, rv.line, rv.col));
  if (vals.size() == 1) return Mat2::iso(vals[0]);
  if (vals.size() == 4) return Mat2{vals[0], vals[1], vals[2], vals[3]};
  parse_fail(rv.line, rv.col, "tensor expects 1 or 4 numbers");
}

}  // namespace config_detail

inline RunConfig parse_config(std::istream& in) {
  using namespace config_detail;
  const Raw raw = parse_raw(in);
  for (const char* required : {"geometry", "diffusion", "kinetics", "macro"})
    if (!raw.count(required))
      fail(ErrorCode::MissingSection, std::string("config is missing required section [") +
                                          required + "]");

  RunConfig c;
  {
    Reader r(raw, "geometry");
    c.geometry.dim = r.integer("dim", c.geometry.dim);
    c.geometry.r_solid = r.number("r_solid", c.geometry.r_solid);
    c.geometry.r_water = r.number("r_water", c.geometry.r_water);
    const std::string v = r.word("variant", "annulus");
    if (v == "annulus")
      c.geometry.variant = CellVariant::Annulus;
    else if (v == "bridged")
      c.geometry.variant = CellVariant::BridgedWater;
    else {
      const RawValue& rv = r.get("variant");
      parse_fail(rv.line, rv.col, "variant must be 'annulus' or 'bridged'");
    }
    c.geometry.bridge_width = r.number("bridge_width", c.geometry.bridge_width);
    c.geometry.h = r.number("h", c.geometry.h);
  }
  {
    Reader r(raw, "diffusion");
    const char* keys[4] = {"d1", "d2", "d3", "d4"};
    for (int i = 0; i < 4; ++i) {
      DiffusionSpec& d = c.diffusion.d[i];
      if (r.has(keys[i])) d.tensor = to_tensor(r.get(keys[i]));
      d.times = r.numbers(std::string(keys[i]) + "_times");
      d.factors = r.numbers(std::string(keys[i]) + "_factors");
      d.kind = d.times.empty() ? DiffusionSpec::Kind::ConstantTensor
                               : DiffusionSpec::Kind::TimeSeparable;
    }
  }
  {
    Reader r(raw, "kinetics");
    const std::string rl = r.word("rate_law", "truncated_linear");
    if (rl == "truncated_linear")
      c.kinetics.law.r_kind = RateLaw::RKind::TruncatedLinear;
    else if (rl == "saturating")
      c.kinetics.law.r_kind = RateLaw::RKind::Saturating;
    else {
      const RawValue& rv = r.get("rate_law");
      parse_fail(rv.line, rv.col, "rate_law must be 'truncated_linear' or 'saturating'");
    }
    c.kinetics.law.c_R = r.number("c_R", c.kinetics.law.c_R);
    c.kinetics.law.K_half = r.number("K_half", c.kinetics.law.K_half);
    c.kinetics.law.beta_max = r.number("beta_max", c.kinetics.law.beta_max);
    c.kinetics.k1 = r.number("k1", c.kinetics.k1);
    c.kinetics.k2 = r.number("k2", c.kinetics.k2);
    c.kinetics.k3 = r.number("k3", c.kinetics.k3);
    c.kinetics.henry.a = r.number("a", c.kinetics.henry.a);
    c.kinetics.henry.b = r.number("b", c.kinetics.henry.b);
    c.kinetics.bounds.M1 = r.number("M1", c.kinetics.bounds.M1);
    c.kinetics.bounds.M2 = r.number("M2", c.kinetics.bounds.M2);
    c.kinetics.bounds.M3 = r.number("M3", c.kinetics.bounds.M3);
    c.kinetics.bounds.M4 = r.number("M4", c.kinetics.bounds.M4);
    c.kinetics.bounds.M5 = r.number("M5", c.kinetics.bounds.M5);
  }
  {
    Reader r(raw, "macro");
    c.macro.box_min = r.number("box_min", c.macro.box_min);
    c.macro.box_max = r.number("box_max", c.macro.box_max);
    c.macro.n_cells = r.integer("n_cells", c.macro.n_cells);
    c.macro.n_quad_sw = r.integer("n_quad_sw", c.macro.n_quad_sw);
    c.macro.dt = r.number("dt", c.macro.dt);
    c.macro.t_end = r.number("t_end", c.macro.t_end);
    c.macro.output_times = r.numbers("output_times");
    const char* bc_keys[4] = {"bc_left", "bc_right", "bc_bottom", "bc_top"};
    for (int f = 0; f < 4; ++f) {
      const std::string v = r.word(bc_keys[f], "neumann");
      if (v == "neumann")
        c.macro.bc[f] = BcKind::Neumann;
      else if (v == "dirichlet_u3")
        c.macro.bc[f] = BcKind::DirichletU3;
      else {
        const RawValue& rv = r.get(bc_keys[f]);
        parse_fail(rv.line, rv.col, "boundary tag must be 'neumann' or 'dirichlet_u3'");
      }
    }
    c.macro.u3_dirichlet = r.number("u3_dirichlet", c.macro.u3_dirichlet);
    c.macro.u3_dirichlet_times = r.numbers("u3_dirichlet_times");
    c.macro.u3_dirichlet_values = r.numbers("u3_dirichlet_values");
    const char* init_keys[5] = {"u1_init", "u2_init", "u3_init", "u4_init", "u5_init"};
    for (int i = 0; i < 5; ++i) c.macro.u_init[i] = r.number(init_keys[i], c.macro.u_init[i]);
    c.macro.strict_a4 = r.boolean("strict_a4", c.macro.strict_a4);
  }
  if (raw.count("micro")) {
    Reader r(raw, "micro");
    if (r.has("eps_list")) {
      c.micro.eps_list.clear();
      for (double v : r.numbers("eps_list")) {
        if (v != (double)(int)v || v <= 0) {
          const RawValue& rv = r.get("eps_list");
          config_detail::parse_fail(rv.line, rv.col,
                                    "eps_list expects positive integer denominators");
        }
        c.micro.eps_list.push_back((int)v);
      }
    }
    c.micro.fine_per_period = r.integer("fine_per_period", c.micro.fine_per_period);
    c.micro.dt = r.number("dt", c.micro.dt);
    c.micro.t_end = r.number("t_end", c.micro.t_end);
  }
  if (raw.count("output")) {
    Reader r(raw, "output");
    c.output.dir = r.word("dir", c.output.dir);
    c.output.snapshots = r.boolean("snapshots", c.output.snapshots);
  }
  return c;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config file '" + path + "'");
  return parse_config(in);
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

namespace config_detail {
inline std::string tensor_text(const Mat2& m) {
  if (m.a12 == 0 && m.a21 == 0 && m.a11 == m.a22) return format_g17(m.a11);
  return format_g17(m.a11) + " " + format_g17(m.a12) + " " + format_g17(m.a21) + " " +
         format_g17(m.a22);
}
inline std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g17(v[i]);
  return s;
}
}  // namespace config_detail

/// Canonical text form; parse(render(c)) == c.
inline std::string render_config(const RunConfig& c) {
  using config_detail::list_text;
  using config_detail::tensor_text;
  std::string s;
  s += "[geometry]\n";
  s += "dim = " + std::to_string(c.geometry.dim) + "\n";
  s += "r_solid = " + format_g17(c.geometry.r_solid) + "\n";
  s += "r_water = " + format_g17(c.geometry.r_water) + "\n";
  s += std::string("variant = ") +
       (c.geometry.variant == CellVariant::Annulus ? "annulus" : "bridged") + "\n";
  s += "bridge_width = " + format_g17(c.geometry.bridge_width) + "\n";
  s += "h = " + format_g17(c.geometry.h) + "\n";
  s += "\n[diffusion]\n";
  for (int i = 0; i < 4; ++i) {
    const std::string name = "d" + std::to_string(i + 1);
    s += name + " = " + tensor_text(c.diffusion.d[i].tensor) + "\n";
    if (!c.diffusion.d[i].times.empty()) {
      s += name + "_times = " + list_text(c.diffusion.d[i].times) + "\n";
      s += name + "_factors = " + list_text(c.diffusion.d[i].factors) + "\n";
    }
  }
  s += "\n[kinetics]\n";
  s += std::string("rate_law = ") +
       (c.kinetics.law.r_kind == RateLaw::RKind::TruncatedLinear ? "truncated_linear"
                                                                 : "saturating") +
       "\n";
  s += "c_R = " + format_g17(c.kinetics.law.c_R) + "\n";
  s += "K_half = " + format_g17(c.kinetics.law.K_half) + "\n";
  s += "beta_max = " + format_g17(c.kinetics.law.beta_max) + "\n";
  s += "k1 = " + format_g17(c.kinetics.k1) + "\n";
  s += "k2 = " + format_g17(c.kinetics.k2) + "\n";
  s += "k3 = " + format_g17(c.kinetics.k3) + "\n";
  s += "a = " + format_g17(c.kinetics.henry.a) + "\n";
  s += "b = " + format_g17(c.kinetics.henry.b) + "\n";
  s += "M1 = " + format_g17(c.kinetics.bounds.M1) + "\n";
  s += "M2 = " + format_g17(c.kinetics.bounds.M2) + "\n";
  s += "M3 = " + format_g17(c.kinetics.bounds.M3) + "\n";
  s += "M4 = " + format_g17(c.kinetics.bounds.M4) + "\n";
  s += "M5 = " + format_g17(c.kinetics.bounds.M5) + "\n";
  s += "\n[macro]\n";
  s += "box_min = " + format_g17(c.macro.box_min) + "\n";
  s += "box_max = " + format_g17(c.macro.box_max) + "\n";
  s += "n_cells = " + std::to_string(c.macro.n_cells) + "\n";
  s += "n_quad_sw = " + std::to_string(c.macro.n_quad_sw) + "\n";
  s += "dt = " + format_g17(c.macro.dt) + "\n";
  s += "t_end = " + format_g17(c.macro.t_end) + "\n";
  if (!c.macro.output_times.empty()) s += "output_times = " + list_text(c.macro.output_times) + "\n";
  const char* bc_keys[4] = {"bc_left", "bc_right", "bc_bottom", "bc_top"};
  for (int f = 0; f < 4; ++f)
    s += std::string(bc_keys[f]) + " = " +
         (c.macro.bc[f] == BcKind::Neumann ? "neumann" : "dirichlet_u3") + "\n";
  s += "u3_dirichlet = " + format_g17(c.macro.u3_dirichlet) + "\n";
  if (!c.macro.u3_dirichlet_times.empty()) {
    s += "u3_dirichlet_times = " + list_text(c.macro.u3_dirichlet_times) + "\n";
    s += "u3_dirichlet_values = " + list_text(c.macro.u3_dirichlet_values) + "\n";
  }
  for (int i = 0; i < 5; ++i)
    s += "u" + std::to_string(i + 1) + "_init = " + format_g17(c.macro.u_init[i]) + "\n";
  s += std::string("strict_a4 = ") + (c.macro.strict_a4 ? "true" : "false") + "\n";
  s += "\n[micro]\n";
  std::string eps;
  for (std::size_t i = 0; i < c.micro.eps_list.size(); ++i)
    eps += (i ? "," : "") + std::to_string(c.micro.eps_list[i]);
  s += "eps_list = " + eps + "\n";
  s += "fine_per_period = " + std::to_string(c.micro.fine_per_period) + "\n";
  s += "dt = " + format_g17(c.micro.dt) + "\n";
  s += "t_end = " + format_g17(c.micro.t_end) + "\n";
  s += "\n[output]\n";
  s += "dir = " + c.output.dir + "\n";
  s += std::string("snapshots = ") + (c.output.snapshots ? "true" : "false") + "\n";
  return s;
}

/// Structural validation shared by every subcommand. Throws on the first
/// violated invariant; geometry problems surface with the geometry error
/// codes so messages name the violated invariant.
inline void validate_config(const RunConfig& c) {
  build_geometry(c.geometry.dim, c.geometry.r_solid, c.geometry.r_water, c.geometry.variant,
                 c.geometry.bridge_width);
  if (!(c.geometry.h > 0 && c.geometry.h < 0.25))
    fail(ErrorCode::InvalidConfig, "geometry.h must lie in (0, 0.25)");
  for (int i = 0; i < 4; ++i) {
    const DiffusionSpec& d = c.diffusion.d[i];
    if (!is_spd(d.tensor))
      fail(ErrorCode::InvalidConfig,
           "diffusion.d" + std::to_string(i + 1) + " must be symmetric positive definite");
    if (d.kind == DiffusionSpec::Kind::TimeSeparable) {
      if (d.times.size() != d.factors.size() || d.times.size() < 2)
        fail(ErrorCode::InvalidConfig,
             "diffusion.d" + std::to_string(i + 1) + " time table needs matching times/factors");
      for (std::size_t k = 1; k < d.times.size(); ++k)
        if (!(d.times[k] > d.times[k - 1]))
          fail(ErrorCode::InvalidConfig, "diffusion time samples must increase strictly");
      for (double f : d.factors)
        if (!(f > 0)) fail(ErrorCode::InvalidConfig, "diffusion time factors must be positive");
    }
  }
  validate_rate_law(c.kinetics.law);
  if (c.kinetics.k1 < 0 || c.kinetics.k2 < 0 || c.kinetics.k3 < 0 || c.kinetics.henry.a < 0 ||
      c.kinetics.henry.b < 0)
    fail(ErrorCode::NegativeRate, "rate constants k1, k2, k3, a, b must be nonnegative");
  const BoundsA4& m = c.kinetics.bounds;
  if (!(m.M1 > 0 && m.M2 > 0 && m.M3 > 0 && m.M4 > 0 && m.M5 > 0))
    fail(ErrorCode::InvalidConfig, "ceilings M1..M5 must be positive");
  if (!(c.macro.box_max > c.macro.box_min))
    fail(ErrorCode::InvalidConfig, "macro box needs box_max > box_min");
  if (c.macro.n_cells < 2) fail(ErrorCode::InvalidConfig, "macro.n_cells must be at least 2");
  if (c.macro.n_quad_sw < 4)
    fail(ErrorCode::InvalidConfig, "macro.n_quad_sw must be at least 4");
  if (!(c.macro.dt > 0)) fail(ErrorCode::InvalidConfig, "macro.dt must be positive");
  if (!(c.macro.t_end >= c.macro.dt))
    fail(ErrorCode::InvalidConfig, "macro.t_end must be at least one step");
  for (int i = 0; i < 5; ++i)
    if (c.macro.u_init[i] < 0)
      fail(ErrorCode::NegativeInitialData,
           "initial value u" + std::to_string(i + 1) + "_init is negative");
  if (c.macro.u3_dirichlet < 0)
    fail(ErrorCode::NegativeInitialData, "u3_dirichlet must be nonnegative");
  if (!c.macro.u3_dirichlet_times.empty()) {
    if (c.macro.u3_dirichlet_times.size() != c.macro.u3_dirichlet_values.size())
      fail(ErrorCode::InvalidConfig, "u3_dirichlet time table needs matching times/values");
    for (std::size_t k = 1; k < c.macro.u3_dirichlet_times.size(); ++k)
      if (!(c.macro.u3_dirichlet_times[k] > c.macro.u3_dirichlet_times[k - 1]))
        fail(ErrorCode::InvalidConfig, "u3_dirichlet time samples must increase strictly");
    for (double v : c.macro.u3_dirichlet_values)
      if (v < 0) fail(ErrorCode::NegativeInitialData, "u3_dirichlet values must be nonnegative");
  }
  for (double t : c.macro.output_times)
    if (t < 0 || t > c.macro.t_end + 1e-12)
      fail(ErrorCode::InvalidConfig, "output_times must lie within [0, t_end]");
  if (c.micro.eps_list.empty())
    fail(ErrorCode::MismatchedConfigs, "micro.eps_list must not be empty");
  for (std::size_t i = 1; i < c.micro.eps_list.size(); ++i)
    if (c.micro.eps_list[i] <= c.micro.eps_list[i - 1])
      fail(ErrorCode::MismatchedConfigs,
           "micro.eps_list must make eps strictly decreasing (increasing denominators)");
  if (c.micro.fine_per_period < 16)
    fail(ErrorCode::ResolutionTooCoarse,
         "micro.fine_per_period must be at least 16 cells per period");
  if (c.micro.dt < 0 || c.micro.t_end < 0)
    fail(ErrorCode::InvalidConfig, "micro.dt and micro.t_end must be nonnegative");
  if (c.macro.strict_a4) {
    const BalanceCheck bal =
        check_balance(m, c.kinetics.k1, c.kinetics.k2, c.kinetics.henry.a, c.kinetics.henry.b);
    if (!bal.ok(1e-9))
      fail(ErrorCode::InvalidConfig,
           "strict invariant-region mode: balance equalities a*M3 = b*M2, k1*M1 = M4, "
           "k1*M1 = k2*M2 must hold to 1e-9");
    if (!(m.M5 + 1e-12 >= c.kinetics.law.beta_max))
      fail(ErrorCode::InvalidConfig, "strict invariant-region mode needs M5 >= beta_max");
    const double init_ceils[5] = {m.M1, m.M2, m.M3, m.M4, std::min(m.M5, c.kinetics.law.beta_max)};
    for (int i = 0; i < 5; ++i)
      if (c.macro.u_init[i] > init_ceils[i] + 1e-12)
        fail(ErrorCode::InvalidConfig, "strict invariant-region mode: u" + std::to_string(i + 1) +
                                           "_init exceeds its ceiling");
    if (c.macro.u3_dirichlet > m.M3 + 1e-12)
      fail(ErrorCode::InvalidConfig,
           "strict invariant-region mode: u3_dirichlet exceeds M3");
    for (double v : c.macro.u3_dirichlet_values)
      if (v > m.M3 + 1e-12)
        fail(ErrorCode::InvalidConfig,
             "strict invariant-region mode: u3_dirichlet values exceed M3");
  }
}

}  // namespace corroscale

#endif
