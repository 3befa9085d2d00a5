// Geometry/bundle config files: a small TOML subset.
//
//   [geometry]          name, orientation
//   [grid]              resolution = [..], periodic = [..], chart, volume_factor
//   [cycles]            <label> = [axes]            (other axes pinned at node 0)
//   [boundary]          normal_axis, side, collar_width, orientation
//   [fibration]         base_dim, vertical_tangent, base_tangent
//   [fibration.frame]   vertical, horizontal, bracket = [m^3 numbers]
//   [connection.<name>] kind = flat | monopole | disk, rank, holonomy, charge,
//                       flux, collar
//
// Values are numbers, booleans, "strings" or one-level arrays; arrays may
// continue over several lines. Unknown sections and keys are errors.

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cwcs/geometry.hpp"

namespace cwcs {

namespace {

struct Value {
  enum class Kind { Number, Bool, String, Array } kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Value> items;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, Value>> entries;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(const std::string& raw, int line) {
  const std::string s = trim(raw);
  Value v;
  v.line = line;
  if (s.empty()) throw ConfigError(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError(line, "unterminated string");
    v.kind = Value::Kind::String;
    v.text = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::Bool;
    v.boolean = s == "true";
    return v;
  }
  char* end = nullptr;
  v.number = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ConfigError(line, "cannot parse value '" + s + "'");
  return v;
}

Value parse_value(const std::string& raw, int line) {
  const std::string s = trim(raw);
  if (s.empty() || s.front() != '[') return parse_scalar(s, line);
  if (s.back() != ']') throw ConfigError(line, "unterminated array");
  Value v;
  v.kind = Value::Kind::Array;
  v.line = line;
  const std::string body = trim(s.substr(1, s.size() - 2));
  if (body.empty()) return v;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;  // trailing comma
    if (trim(item).front() == '[') throw ConfigError(line, "nested arrays are not supported");
    v.items.push_back(parse_scalar(item, line));
  }
  return v;
}

std::vector<Section> parse(std::string_view text) {
  std::vector<Section> sections;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[' && s.find('=') == std::string::npos) {
      if (s.back() != ']') throw ConfigError(lineno, "malformed section header");
      std::string name = trim(s.substr(1, s.size() - 2));
      if (name.empty()) throw ConfigError(lineno, "empty section name");
      if (!seen.insert(name).second) throw ConfigError(lineno, "duplicate section [" + name + "]");
      sections.push_back({name, lineno, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected key = value");
    if (sections.empty()) throw ConfigError(lineno, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    const int start = lineno;
    // Multi-line arrays.
    if (!value.empty() && value.front() == '[') {
      while (value.find(']') == std::string::npos) {
        if (!std::getline(in, line)) throw ConfigError(start, "unterminated array");
        ++lineno;
        value += " " + trim(strip_comment(line));
      }
    }
    if (key.empty()) throw ConfigError(start, "empty key");
    auto& entries = sections.back().entries;
    for (const auto& [k, _] : entries) {
      if (k == key) throw ConfigError(start, "duplicate key '" + key + "'");
    }
    entries.emplace_back(key, parse_value(value, start));
  }
  return sections;
}

// Typed access with unknown-key detection.
class Reader {
 public:
  explicit Reader(const Section& s) : s_(s) {}

  const Value* find(const std::string& key) {
    used_.insert(key);
    for (const auto& [k, v] : s_.entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    const Value* v = find(key);
    if (!v) {
      if (def) return *def;
      throw ConfigError(s_.line, "[" + s_.name + "] missing required key '" + key + "'");
    }
    if (v->kind != Value::Kind::Number) throw ConfigError(v->line, "'" + key + "' must be a number");
    return v->number;
  }

  int integer(const std::string& key, std::optional<int> def = std::nullopt) {
    const Value* v = find(key);
    if (!v && def) return *def;
    const double x = number(key);
    if (x != std::round(x)) throw ConfigError(v->line, "'" + key + "' must be an integer");
    return static_cast<int>(x);
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    const Value* v = find(key);
    if (!v) {
      if (def) return *def;
      throw ConfigError(s_.line, "[" + s_.name + "] missing required key '" + key + "'");
    }
    if (v->kind != Value::Kind::String) throw ConfigError(v->line, "'" + key + "' must be a string");
    return v->text;
  }

  std::vector<double> numbers(const std::string& key, bool required = true) {
    const Value* v = find(key);
    if (!v) {
      if (required) throw ConfigError(s_.line, "[" + s_.name + "] missing required key '" + key + "'");
      return {};
    }
    if (v->kind != Value::Kind::Array) throw ConfigError(v->line, "'" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& it : v->items) {
      if (it.kind != Value::Kind::Number) {
        throw ConfigError(v->line, "'" + key + "' must contain numbers");
      }
      out.push_back(it.number);
    }
    return out;
  }

  std::vector<bool> booleans(const std::string& key) {
    const Value* v = find(key);
    if (!v) throw ConfigError(s_.line, "[" + s_.name + "] missing required key '" + key + "'");
    if (v->kind != Value::Kind::Array) throw ConfigError(v->line, "'" + key + "' must be an array");
    std::vector<bool> out;
    for (const auto& it : v->items) {
      if (it.kind != Value::Kind::Bool) {
        throw ConfigError(v->line, "'" + key + "' must contain true/false");
      }
      out.push_back(it.boolean);
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : s_.entries) {
      if (!used_.count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [" + s_.name + "]");
    }
  }

 private:
  const Section& s_;
  std::set<std::string> used_;
};

std::vector<int> to_ints(const std::vector<double>& xs, int line, const char* what) {
  std::vector<int> out;
  for (double x : xs) {
    if (x != std::round(x)) throw ConfigError(line, std::string(what) + " must be integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

ChartKind parse_chart(const std::string& s, int line) {
  if (s == "flat") return ChartKind::Flat;
  if (s == "sphere") return ChartKind::Sphere;
  if (s == "polar") return ChartKind::Polar;
  throw ConfigError(line, "unknown chart '" + s + "' (flat, sphere, polar)");
}

Connection build_connection(const std::string& name, Reader& r, const GeometrySpec& g,
                            int line) {
  constexpr double pi = std::numbers::pi;
  const Complex i{0.0, 1.0};
  const std::string kind = r.string("kind");
  const int rank = r.integer("rank", 1);
  if (rank < 1) throw ConfigError(line, "connection rank must be >= 1");
  if (kind == "flat") {
    auto hol = r.numbers("holonomy", false);
    if (static_cast<int>(hol.size()) > g.dim()) {
      throw ConfigError(line, "holonomy has more entries than the chart has axes");
    }
    MatrixForm a(g.grid, 1, rank);
    for (std::size_t ax = 0; ax < hol.size(); ++ax) {
      if (hol[ax] == 0.0) continue;
      const Complex v = -2.0 * pi * i * hol[ax];
      a.fill(IndexMask{1} << ax, [&](auto, auto m) {
        for (int d = 0; d < rank; ++d) m[d * rank + d] = v;
      });
    }
    return Connection::from_potential(name, std::move(a));
  }
  if (kind == "monopole") {
    if (g.chart != ChartKind::Sphere) throw ConfigError(line, "monopole needs chart = \"sphere\"");
    if (rank != 1) throw ConfigError(line, "monopole connections have rank 1");
    const double k = r.number("charge");
    if (k != std::round(k)) throw ConfigError(line, "monopole charge must be an integer");
    MatrixForm f(g.grid, 2, 1);
    f.fill(0b11, [&](auto x, auto m) { m[0] = -i * (pi * pi * k) * std::sin(pi * x[0]); });
    return Connection::from_curvature(name, std::move(f));
  }
  if (kind == "disk") {
    if (g.chart != ChartKind::Polar) throw ConfigError(line, "disk needs chart = \"polar\"");
    if (rank != 1) throw ConfigError(line, "disk connections have rank 1");
    const double flux = r.number("flux");
    DiskProfile prof;
    prof.collar = r.number("collar", 0.2);
    MatrixForm a(g.grid, 1, 1);
    a.fill(0b10, [&](auto x, auto m) { m[0] = -2.0 * pi * i * flux * prof(x[0]); });
    return Connection::from_potential(name, std::move(a));
  }
  throw ConfigError(line, "unknown connection kind '" + kind + "' (flat, monopole, disk)");
}

}  // namespace

GeometrySpec load_geometry(std::string_view text) {
  const auto sections = parse(text);
  auto find = [&](const std::string& n) -> const Section* {
    for (const auto& s : sections) {
      if (s.name == n) return &s;
    }
    return nullptr;
  };
  for (const auto& s : sections) {
    static const std::set<std::string> known = {"geometry", "grid", "cycles", "boundary",
                                                "fibration", "fibration.frame"};
    if (!known.count(s.name) && s.name.rfind("connection.", 0) != 0) {
      throw ConfigError(s.line, "unknown section [" + s.name + "]");
    }
  }

  GeometrySpec g;
  g.name = "config";
  if (const Section* s = find("geometry")) {
    Reader r(*s);
    g.name = r.string("name", "config");
    g.orientation = r.integer("orientation", 1);
    r.finish();
  }

  const Section* gs = find("grid");
  if (!gs) throw ConfigError(0, "missing [grid] section");
  {
    Reader r(*gs);
    const auto* rv = r.find("resolution");
    const int line = rv ? rv->line : gs->line;
    auto res = to_ints(r.numbers("resolution"), line, "resolution");
    auto per = r.booleans("periodic");
    if (res.size() != per.size()) {
      throw ConfigError(line, "resolution and periodic must have the same length");
    }
    g.chart = parse_chart(r.string("chart", "flat"), gs->line);
    const double factor = r.number("volume_factor", 1.0);
    r.finish();
    try {
      ChartGrid grid(res, per);
      g.grid = std::make_shared<const ChartGrid>(factor == 1.0 ? grid : grid.scaled(factor));
    } catch (const GridError& e) {
      throw ConfigError(line, e.what());
    }
    if ((g.chart == ChartKind::Sphere || g.chart == ChartKind::Polar) &&
        (g.dim() != 2 || per[0] || !per[1])) {
      throw ConfigError(gs->line, "sphere/polar charts need resolution [n, m] with periodic = "
                                  "[false, true]");
    }
  }

  if (const Section* s = find("cycles")) {
    for (const auto& [label, v] : s->entries) {
      if (v.kind != Value::Kind::Array || v.items.empty()) {
        throw ConfigError(v.line, "cycle '" + label + "' must be a non-empty array of axes");
      }
      IndexMask m = 0;
      for (const auto& it : v.items) {
        const double a = it.number;
        if (it.kind != Value::Kind::Number || a != std::round(a) || a < 0 || a >= g.dim()) {
          throw ConfigError(v.line, "cycle '" + label + "' has an invalid axis");
        }
        m |= IndexMask{1} << static_cast<int>(a);
      }
      g.cycles.cycles.push_back(coordinate_cycle(*g.grid, m, {}, label));
    }
  }

  for (const auto& s : sections) {
    if (s.name.rfind("connection.", 0) != 0) continue;
    const std::string name = s.name.substr(11);
    if (name.empty()) throw ConfigError(s.line, "connection section needs a name");
    Reader r(s);
    g.set_connection(build_connection(name, r, g, s.line));
    r.finish();
  }

  if (const Section* s = find("boundary")) {
    Reader r(*s);
    BoundaryComponent comp;
    comp.normal_axis = r.integer("normal_axis");
    comp.side = r.integer("side", 1);
    comp.orientation = r.integer("orientation", 1);
    const double collar = r.number("collar_width", 0.0);
    r.finish();
    if (comp.normal_axis < 0 || comp.normal_axis >= g.dim() || g.grid->periodic(comp.normal_axis)) {
      throw ConfigError(s->line, "normal_axis must name a non-periodic axis");
    }
    if (comp.side != 0 && comp.side != 1) throw ConfigError(s->line, "side must be 0 or 1");
    if (collar < 0.0) throw ConfigError(s->line, "collar_width must be >= 0");
    auto bg = std::make_shared<GeometrySpec>();
    bg->name = g.name + ".boundary";
    bg->grid = face_grid(*g.grid, comp.normal_axis);
    for (int k = 1; k <= bg->dim(); ++k) {
      for (IndexMask m = 0; m < (IndexMask{1} << bg->dim()); ++m) {
        bool periodic = true;
        for (int a = 0; a < bg->dim(); ++a) {
          if ((m >> a) & 1u) periodic = periodic && bg->grid->periodic(a);
        }
        if (mask_degree(m) == k && periodic) {
          bg->cycles.cycles.push_back(coordinate_cycle(*bg->grid, m, {}, "face"));
        }
      }
    }
    for (const auto& c : g.connections) {
      if (!c.has_potential()) continue;
      bg->set_connection(Connection::from_potential(
          c.name(), restrict_to_face(c.potential(), comp.normal_axis, comp.side, bg->grid)));
    }
    comp.geometry = bg;
    g.boundary = BoundaryInfo{{comp}, collar};
  }

  if (const Section* s = find("fibration")) {
    Reader r(*s);
    const int base_dim = r.integer("base_dim");
    Fibration f;
    f.vertical_tangent = r.string("vertical_tangent", "tangent@2");
    f.base_tangent = r.string("base_tangent", "tangent");
    r.finish();
    if (base_dim < 1 || base_dim >= g.dim()) {
      throw ConfigError(s->line, "base_dim must be between 1 and dim - 1");
    }
    std::vector<int> rb;
    std::vector<int> rf;
    std::vector<bool> pb;
    std::vector<bool> pf;
    for (int a = 0; a < g.dim(); ++a) {
      (a < base_dim ? rb : rf).push_back(g.grid->resolution(a));
      (a < base_dim ? pb : pf).push_back(g.grid->periodic(a));
    }
    f.base = std::make_shared<const ChartGrid>(rb, pb);
    f.fiber = std::make_shared<const ChartGrid>(rf, pf);
    g.fibration = std::move(f);
  }

  if (const Section* s = find("fibration.frame")) {
    Reader r(*s);
    BracketTable t;
    t.vertical = r.integer("vertical");
    t.horizontal = r.integer("horizontal");
    t.bracket = r.numbers("bracket");
    r.finish();
    const int m = t.size();
    if (t.vertical < 1 || t.horizontal < 1) {
      throw ConfigError(s->line, "frame needs at least one vertical and one horizontal field");
    }
    if (static_cast<int>(t.bracket.size()) != m * m * m) {
      throw ConfigError(s->line, "bracket needs " + std::to_string(m * m * m) + " entries, got " +
                                     std::to_string(t.bracket.size()));
    }
    g.frame = std::move(t);
  }

  validate(g);
  return g;
}

GeometrySpec load_geometry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_geometry(ss.str());
}

}  // namespace cwcs
