#include "clonal/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "clonal/errors.hpp"

namespace clonal {

namespace pt = boost::property_tree;

const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::continuum: return "continuum";
    case ModelVariant::finite: return "finite";
    case ModelVariant::two_compartment: return "two-compartment";
  }
  return "unknown";
}

namespace {

const std::map<std::string, std::set<std::string>> kAllowedKeys = {
    {"model", {"variant", "p", "d", "K", "a", "K_healthy", "K_leukemic", "healthy", "clones"}},
    {"profile",
     {"kind", "value", "peak", "peaks", "floor", "center", "centers", "width", "widths", "nodes",
      "values"}},
    {"grid", {"x_lo", "x_hi", "n_nodes"}},
    {"initial", {"u1", "u2", "u1_atoms", "u2_atoms", "epsilon", "v1", "v2", "healthy", "clones"}},
    {"integrator", {"dt", "t_end", "snapshot_times", "record_stride"}},
    {"output", {"dir", "observers", "svg"}},
    {"run", {"name"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->get_child_optional(key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + what);
  }

  std::string text(const std::string& key) const {
    if (!has(key)) fail(key, "missing required field");
    return trim(tree_->get<std::string>(key));
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  double number(const std::string& key) const { return parse_number(key, text(key)); }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(text(key), ',')) out.push_back(parse_number(key, item));
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (!(v >= 1.0) || v != std::floor(v)) fail(key, "must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  // "x:w, x:w, ..."
  DiscreteMeasure atoms(const std::string& key) const {
    std::vector<Atom> out;
    for (const auto& item : split(text(key), ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail(key, "atom '" + item + "' is not position:weight");
      const double x = parse_number(key, item.substr(0, colon));
      const double w = parse_number(key, item.substr(colon + 1));
      if (!(w >= 0.0)) fail(key, "atom weight must be nonnegative");
      out.push_back({x, w});
    }
    return DiscreteMeasure(std::move(out));
  }

  // "a,b,c; a,b,c"
  std::vector<std::vector<double>> tuples(const std::string& key, std::size_t arity) const {
    std::vector<std::vector<double>> out;
    for (const auto& group : split(text(key), ';')) {
      std::vector<double> t;
      for (const auto& item : split(group, ',')) t.push_back(parse_number(key, item));
      if (t.size() != arity) {
        fail(key, "each entry needs " + std::to_string(arity) + " comma-separated numbers");
      }
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  double parse_number(const std::string& key, const std::string& raw) const {
    const std::string t = trim(raw);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
      fail(key, "not a finite number: '" + t + "'");
    }
    return v;
  }

  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

template <typename F>
auto field(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Profile parse_profile(const Section& s, const Grid& grid) {
  const std::string kind = s.text("kind");
  const Interval dom = grid.domain();
  return field("[profile]", [&]() -> Profile {
    if (kind == "constant") return Profile::constant(s.number("value"), dom);
    if (kind == "single-bump") {
      return Profile::single_bump(s.number("peak"), s.number("floor"), s.number("center"),
                                  s.number("width"), dom);
    }
    if (kind == "two-bump") {
      std::array<double, 2> peaks{};
      if (s.has("peaks")) {
        const auto v = s.numbers("peaks");
        if (v.size() != 2) s.fail("peaks", "need exactly two values");
        peaks = {v[0], v[1]};
      } else {
        peaks = {s.number("peak"), s.number("peak")};
      }
      const auto c = s.numbers("centers");
      if (c.size() != 2) s.fail("centers", "need exactly two values");
      std::array<double, 2> widths{};
      if (s.has("widths")) {
        const auto w = s.numbers("widths");
        if (w.size() != 2) s.fail("widths", "need exactly two values");
        widths = {w[0], w[1]};
      } else {
        widths = {s.number("width"), s.number("width")};
      }
      return Profile::two_bump(peaks, s.number("floor"), {c[0], c[1]}, widths, dom);
    }
    if (kind == "piecewise-linear") {
      Profile prof = Profile::piecewise_linear(s.numbers("nodes"), s.numbers("values"));
      if (!prof.domain().contains(dom.lo) || !prof.domain().contains(dom.hi)) {
        s.fail("nodes", "breakpoints must span the grid domain");
      }
      return prof;
    }
    if (kind == "tabulated") return Profile::tabulated(s.numbers("values"), dom);
    s.fail("kind", "unknown profile kind '" + kind + "'");
  });
}

CloneParams clone_params(const std::vector<double>& t) { return {t[0], t[1], t[2]}; }

}  // namespace

RunConfig parse_config(std::istream& is, const std::string& source) {
  pt::ptree root;
  try {
    pt::read_ini(is, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, child] : root) {
    const auto allowed = kAllowedKeys.find(name);
    if (allowed == kAllowedKeys.end()) {
      throw ConfigError(source + ": unknown section [" + name + "]");
    }
    for (const auto& kv : child) {
      if (!allowed->second.count(kv.first)) {
        throw ConfigError("[" + name + "] " + kv.first + ": unknown field");
      }
    }
  }

  RunConfig cfg;
  cfg.name = section(root, "run").text("name", "run");

  const Section model = section(root, "model");
  const std::string variant = model.text("variant", "continuum");
  if (variant == "continuum") {
    cfg.variant = ModelVariant::continuum;
  } else if (variant == "finite") {
    cfg.variant = ModelVariant::finite;
  } else if (variant == "two-compartment") {
    cfg.variant = ModelVariant::two_compartment;
  } else {
    model.fail("variant", "expected continuum, finite or two-compartment");
  }
  cfg.params.p = model.number("p", cfg.params.p);
  cfg.params.d = model.number("d", cfg.params.d);
  cfg.params.K = model.number("K", cfg.params.K);

  const Section grid = section(root, "grid");
  cfg.grid = field("[grid]", [&] {
    return Grid(grid.number("x_lo", 0.0), grid.number("x_hi", 1.0), grid.count("n_nodes", 201));
  });

  const Section init = section(root, "initial");
  switch (cfg.variant) {
    case ModelVariant::continuum: {
      cfg.profile = parse_profile(section(root, "profile"), cfg.grid);
      auto expr = [&](const std::string& key) {
        const std::string text = init.text(key);
        try {
          return Expression::parse(text);
        } catch (const ConfigError& e) {
          throw ConfigError("[initial] " + key + ": " + e.what());
        }
      };
      if (init.has("u1")) cfg.initial.u1 = expr("u1");
      if (init.has("u2")) cfg.initial.u2 = expr("u2");
      if (init.has("u1_atoms")) cfg.initial.u1_atoms = init.atoms("u1_atoms");
      if (init.has("u2_atoms")) cfg.initial.u2_atoms = init.atoms("u2_atoms");
      cfg.initial.epsilon = init.number("epsilon", 0.0);
      break;
    }
    case ModelVariant::two_compartment:
      cfg.constant_a = model.number("a");
      cfg.initial.v1 = init.number("v1");
      cfg.initial.v2 = init.number("v2");
      break;
    case ModelVariant::finite: {
      FiniteCloneState st;
      st.K_healthy = model.number("K_healthy", cfg.params.K);
      st.K_leukemic = model.number("K_leukemic", cfg.params.K);
      st.healthy_params = clone_params(model.tuples("healthy", 3).at(0));
      const auto hp = init.tuples("healthy", 2).at(0);
      st.healthy = {hp[0], hp[1]};
      if (model.has("clones")) {
        for (const auto& t : model.tuples("clones", 3)) st.clone_params.push_back(clone_params(t));
      }
      if (init.has("clones")) {
        for (const auto& t : init.tuples("clones", 2)) st.clones.push_back({t[0], t[1]});
      }
      if (st.clones.size() != st.clone_params.size()) {
        init.fail("clones", "number of initial clone states differs from [model] clones");
      }
      cfg.finite = std::move(st);
      break;
    }
  }

  const Section integ = section(root, "integrator");
  cfg.integrator.dt = integ.number("dt", 0.01);
  cfg.integrator.t_end = integ.number("t_end", 200.0);
  if (integ.has("snapshot_times")) cfg.integrator.snapshot_times = integ.numbers("snapshot_times");
  cfg.integrator.record_stride = integ.count("record_stride", 1);

  const Section out = section(root, "output");
  cfg.output.dir = out.text("dir", "out");
  if (out.has("observers")) cfg.output.observers = split(out.text("observers"), ',');
  cfg.output.svg = out.flag("svg", true);

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void RunConfig::validate() const {
  field("[model]", [&] { params.validate(); });
  field("[integrator]", [&] { integrator.validate(); });
  for (double t : integrator.snapshot_times) {
    if (t < 0.0 || t > integrator.t_end) {
      throw ConfigError("[integrator] snapshot_times: times must lie in [0, t_end]");
    }
  }
  const std::set<std::string> known{"V", "flat_dist", "conc_frac", "f1"};
  for (const auto& o : output.observers) {
    if (!known.count(o)) throw ConfigError("[output] observers: unknown observer '" + o + "'");
    if (variant == ModelVariant::finite || (variant == ModelVariant::two_compartment && o != "V")) {
      throw ConfigError("[output] observers: '" + o + "' is not available for the " +
                        to_string(variant) + " variant");
    }
  }
  switch (variant) {
    case ModelVariant::continuum: {
      if (!profile) throw ConfigError("[profile]: missing section");
      const bool closed_form = initial.u1 || initial.u2;
      const bool atoms = initial.u1_atoms || initial.u2_atoms;
      if (closed_form == atoms) {
        throw ConfigError("[initial]: give either u1/u2 expressions or u1_atoms/u2_atoms");
      }
      if (closed_form && !(initial.u1 && initial.u2)) {
        throw ConfigError("[initial]: both u1 and u2 are required");
      }
      if (atoms) {
        if (!(initial.u1_atoms && initial.u2_atoms)) {
          throw ConfigError("[initial]: both u1_atoms and u2_atoms are required");
        }
        if (!(initial.epsilon > 0.0)) {
          throw ConfigError("[initial] epsilon: atom data need a positive mollifier width");
        }
      }
      field("[initial]", [&] { initial_state(*this); });
      break;
    }
    case ModelVariant::two_compartment:
      if (!(constant_a > 0.5 && constant_a < 1.0)) {
        throw ConfigError("[model] a: must lie in (1/2, 1)");
      }
      if (!(initial.v1 >= 0.0) || !(initial.v2 >= 0.0)) {
        throw ConfigError("[initial] v1/v2: masses must be nonnegative");
      }
      break;
    case ModelVariant::finite:
      if (!finite) throw ConfigError("[model] healthy: missing finite-clone description");
      field("[model]", [&] { finite->validate(); });
      break;
  }
}

PopulationState initial_state(const RunConfig& config) {
  const Grid& g = config.grid;
  PopulationState st;
  if (config.initial.u1 && config.initial.u2) {
    st.u1.resize(g.size());
    st.u2.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      st.u1[i] = (*config.initial.u1)(g.node(i));
      st.u2[i] = (*config.initial.u2)(g.node(i));
    }
  } else if (config.initial.u1_atoms && config.initial.u2_atoms) {
    st.u1 = mollify(*config.initial.u1_atoms, config.initial.epsilon, g);
    st.u2 = mollify(*config.initial.u2_atoms, config.initial.epsilon, g);
  } else {
    throw ConfigError("[initial]: no continuum initial data");
  }
  st.validate(g);
  return st;
}

}  // namespace clonal
