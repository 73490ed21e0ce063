#include "pharmap/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pharmap/errors.hpp"
#include "pharmap/io.hpp"

namespace pharmap {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct Entry {
  std::string value;
  int line;
  bool consumed = false;
};

struct RawConfig {
  std::map<std::string, std::map<std::string, Entry>> sections;

  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigInvalid("unterminated section header", t, line_no);
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigInvalid("empty section name", t, line_no);
      raw.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("expected `key = value`", t, line_no);
    }
    if (section.empty()) {
      throw ConfigInvalid("key before any [section] header", t, line_no);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigInvalid("empty key", t, line_no);
    if (raw.sections[section].count(key)) {
      throw ConfigInvalid("duplicate key " + section + "." + key, section + "." + key,
                          line_no);
    }
    raw.sections[section][key] = Entry{value, line_no};
    continue;
  }
  return raw;
}

class Reader {
public:
  explicit Reader(RawConfig raw) : raw_(std::move(raw)) {}

  bool has(const std::string& section, const std::string& key) {
    return raw_.find(section, key) != nullptr;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    const Entry* e = consume(section, key);
    return e ? e->value : fallback;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) {
    const Entry* e = consume(section, key);
    return e ? parse_double(*e, section, key) : fallback;
  }

  int get_int(const std::string& section, const std::string& key, int fallback) {
    const Entry* e = consume(section, key);
    if (!e) return fallback;
    try {
      size_t pos = 0;
      const int v = std::stoi(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid("expected an integer for " + section + "." + key,
                          section + "." + key, e->line);
    }
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) {
    const Entry* e = consume(section, key);
    if (!e) return fallback;
    try {
      size_t pos = 0;
      const unsigned long long v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid("expected an unsigned integer for " + section + "." + key,
                          section + "." + key, e->line);
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) {
    const Entry* e = consume(section, key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    throw ConfigInvalid("expected true or false for " + section + "." + key,
                        section + "." + key, e->line);
  }

  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) {
    const Entry* e = consume(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    std::istringstream in(e->value);
    std::string token;
    while (in >> token) out.push_back(parse_double_token(token, *e, section, key));
    if (out.empty()) {
      throw ConfigInvalid("expected numbers for " + section + "." + key,
                          section + "." + key, e->line);
    }
    return out;
  }

  std::vector<int> get_ints(const std::string& section, const std::string& key,
                            const std::vector<int>& fallback) {
    const Entry* e = consume(section, key);
    if (!e) return fallback;
    std::vector<int> out;
    for (double d : get_vector_as_doubles(*e, section, key)) {
      const int v = static_cast<int>(d);
      if (static_cast<double>(v) != d) {
        throw ConfigInvalid("expected integers for " + section + "." + key,
                            section + "." + key, e->line);
      }
      out.push_back(v);
    }
    return out;
  }

  const Entry* consume(const std::string& section, const std::string& key) {
    auto s = raw_.sections.find(section);
    if (s == raw_.sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.consumed = true;
    return &k->second;
  }

  void reject_unknown(const std::set<std::string>& known_sections) {
    for (const auto& [section, entries] : raw_.sections) {
      if (!known_sections.count(section)) {
        throw ConfigInvalid("unknown section [" + section + "]", section, 0);
      }
      for (const auto& [key, entry] : entries) {
        if (!entry.consumed) {
          throw ConfigInvalid("unknown key " + section + "." + key, section + "." + key,
                              entry.line);
        }
      }
    }
  }

private:
  double parse_double(const Entry& e, const std::string& section, const std::string& key) {
    return parse_double_token(e.value, e, section, key);
  }

  double parse_double_token(const std::string& token, const Entry& e,
                            const std::string& section, const std::string& key) {
    try {
      size_t pos = 0;
      const double v = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid("expected a number for " + section + "." + key,
                          section + "." + key, e.line);
    }
  }

  std::vector<double> get_vector_as_doubles(const Entry& e, const std::string& section,
                                            const std::string& key) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string token;
    while (in >> token) out.push_back(parse_double_token(token, e, section, key));
    return out;
  }

  RawConfig raw_;
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += " ";
    out += format17(v[i]);
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += " ";
    out += std::to_string(v[i]);
  }
  return out;
}

const std::set<std::string> kCommands = {"solve", "uniqueness", "nonuniqueness-demo",
                                         "oracles", "sweep"};

}  // namespace

RunConfig parse_config(const std::string& text) {
  Reader reader(tokenize(text));
  RunConfig c;

  c.command = reader.get_string("run", "command", c.command);
  if (!kCommands.count(c.command)) {
    throw ConfigInvalid("unknown command `" + c.command + "`", "run.command", 0);
  }
  c.outdir = reader.get_string("run", "outdir", c.outdir);
  c.strict = reader.get_bool("run", "strict", c.strict);
  c.threads = reader.get_int("run", "threads", c.threads);
  if (c.threads < 1) throw ConfigInvalid("run.threads must be >= 1", "run.threads", 0);

  auto& m = c.manifold;
  m.kind = reader.get_string("manifold", "kind", m.kind);
  m.radius = reader.get_double("manifold", "radius", m.radius);
  m.ambient_dim = reader.get_int("manifold", "ambient_dim", m.ambient_dim);
  m.semi_axes = reader.get_doubles("manifold", "semi_axes", m.semi_axes);
  m.radii = reader.get_doubles("manifold", "radii", m.radii);
  m.projection_tolerance =
      reader.get_double("manifold", "projection_tolerance", m.projection_tolerance);

  auto& mesh = c.mesh;
  mesh.builder = reader.get_string("mesh", "builder", mesh.builder);
  mesh.n_per_side = reader.get_int("mesh", "n_per_side", mesh.n_per_side);
  mesh.refinement = reader.get_int("mesh", "refinement", mesh.refinement);
  mesh.path = reader.get_string("mesh", "path", mesh.path);

  auto& b = c.boundary;
  b.generator = reader.get_string("boundary", "generator", b.generator);
  b.rho = reader.get_double("boundary", "rho", b.rho);
  b.center = reader.get_doubles("boundary", "center", b.center);
  b.path = reader.get_string("boundary", "path", b.path);

  auto& s = c.solver;
  if (reader.has("solver", "p")) {
    s.p = reader.get_double("solver", "p", 0.0);
    s.has_p = true;
  }
  const std::string ball = reader.get_string(
      "solver", "ball_radius", s.ball_auto ? "auto" : format17(s.ball_radius));
  if (ball == "auto") {
    s.ball_auto = true;
    s.ball_radius = 0.0;
  } else {
    s.ball_auto = false;
    try {
      size_t pos = 0;
      s.ball_radius = std::stod(ball, &pos);
      if (pos != ball.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigInvalid("solver.ball_radius must be a number or `auto`",
                          "solver.ball_radius", 0);
    }
  }
  s.ball_center = reader.get_doubles("solver", "ball_center", s.ball_center);
  s.eps_schedule = reader.get_doubles("solver", "eps_schedule", s.eps_schedule);
  s.grad_tolerance = reader.get_double("solver", "grad_tolerance", s.grad_tolerance);
  s.max_iterations = reader.get_int("solver", "max_iterations", s.max_iterations);
  s.armijo_step = reader.get_double("solver", "armijo_step", s.armijo_step);
  s.armijo_shrink = reader.get_double("solver", "armijo_shrink", s.armijo_shrink);
  s.armijo_slope = reader.get_double("solver", "armijo_slope", s.armijo_slope);
  s.seed = reader.get_u64("solver", "seed", s.seed);
  s.trials = reader.get_int("solver", "trials", s.trials);
  s.init = reader.get_string("solver", "init", s.init);
  s.constant_point = reader.get_doubles("solver", "constant_point", s.constant_point);

  auto& o = c.oracles;
  o.samples = reader.get_int("oracles", "samples", o.samples);
  o.seed_estimate = reader.get_u64("oracles", "seed_estimate", o.seed_estimate);
  o.seed_validate = reader.get_u64("oracles", "seed_validate", o.seed_validate);
  o.dims = reader.get_ints("oracles", "dims", o.dims);
  o.q_values = reader.get_doubles("oracles", "q_values", o.q_values);
  o.stability_fields = reader.get_int("oracles", "stability_fields", o.stability_fields);

  auto& w = c.sweep;
  w.p_values = reader.get_doubles("sweep", "p_values", w.p_values);
  w.rho_values = reader.get_doubles("sweep", "rho_values", w.rho_values);

  reader.reject_unknown({"run", "manifold", "mesh", "boundary", "solver", "oracles",
                         "sweep"});
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "command = " << c.command << "\n";
  out << "outdir = " << c.outdir << "\n";
  out << "strict = " << (c.strict ? "true" : "false") << "\n";
  out << "threads = " << c.threads << "\n";
  out << "\n[manifold]\n";
  out << "kind = " << c.manifold.kind << "\n";
  out << "radius = " << format17(c.manifold.radius) << "\n";
  out << "ambient_dim = " << c.manifold.ambient_dim << "\n";
  out << "semi_axes = " << join(c.manifold.semi_axes) << "\n";
  out << "radii = " << join(c.manifold.radii) << "\n";
  out << "projection_tolerance = " << format17(c.manifold.projection_tolerance) << "\n";
  out << "\n[mesh]\n";
  out << "builder = " << c.mesh.builder << "\n";
  out << "n_per_side = " << c.mesh.n_per_side << "\n";
  out << "refinement = " << c.mesh.refinement << "\n";
  if (!c.mesh.path.empty()) out << "path = " << c.mesh.path << "\n";
  out << "\n[boundary]\n";
  out << "generator = " << c.boundary.generator << "\n";
  out << "rho = " << format17(c.boundary.rho) << "\n";
  out << "center = " << join(c.boundary.center) << "\n";
  if (!c.boundary.path.empty()) out << "path = " << c.boundary.path << "\n";
  out << "\n[solver]\n";
  if (c.solver.has_p) out << "p = " << format17(c.solver.p) << "\n";
  out << "ball_radius = "
      << (c.solver.ball_auto ? std::string("auto") : format17(c.solver.ball_radius))
      << "\n";
  if (!c.solver.ball_center.empty()) {
    out << "ball_center = " << join(c.solver.ball_center) << "\n";
  }
  out << "eps_schedule = " << join(c.solver.eps_schedule) << "\n";
  out << "grad_tolerance = " << format17(c.solver.grad_tolerance) << "\n";
  out << "max_iterations = " << c.solver.max_iterations << "\n";
  out << "armijo_step = " << format17(c.solver.armijo_step) << "\n";
  out << "armijo_shrink = " << format17(c.solver.armijo_shrink) << "\n";
  out << "armijo_slope = " << format17(c.solver.armijo_slope) << "\n";
  out << "seed = " << c.solver.seed << "\n";
  out << "trials = " << c.solver.trials << "\n";
  out << "init = " << c.solver.init << "\n";
  if (!c.solver.constant_point.empty()) {
    out << "constant_point = " << join(c.solver.constant_point) << "\n";
  }
  out << "\n[oracles]\n";
  out << "samples = " << c.oracles.samples << "\n";
  out << "seed_estimate = " << c.oracles.seed_estimate << "\n";
  out << "seed_validate = " << c.oracles.seed_validate << "\n";
  out << "dims = " << join(c.oracles.dims) << "\n";
  out << "q_values = " << join(c.oracles.q_values) << "\n";
  out << "stability_fields = " << c.oracles.stability_fields << "\n";
  out << "\n[sweep]\n";
  out << "p_values = " << join(c.sweep.p_values) << "\n";
  out << "rho_values = " << join(c.sweep.rho_values) << "\n";
  return out.str();
}

}  // namespace pharmap
