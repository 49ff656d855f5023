#include "breather/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "breather/error.hpp"
#include "breather/wegner.hpp"

namespace breather {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::spectrum, "spectrum"}, {ExperimentKind::ucp, "ucp"},       {ExperimentKind::lifting, "lifting"},
    {ExperimentKind::ssf, "ssf"},           {ExperimentKind::wegner, "wegner"}, {ExperimentKind::ids, "ids"}};

// Source positions of parsed keys, used to attribute validation errors.
using Locations = std::map<std::string, std::string>;

class Validator {
 public:
  explicit Validator(const Locations* where) : where_(where) {}

  void check(bool ok, const std::string& key, const std::string& message) const {
    if (ok) return;
    std::string prefix;
    if (where_) {
      // Fall back to the enclosing table when the key itself was defaulted.
      for (std::string k = key; !k.empty(); k = k.substr(0, std::min(k.rfind('.'), k.size()))) {
        if (auto it = where_->find(k); it != where_->end()) {
          prefix = it->second + ": ";
          break;
        }
        if (k.find('.') == std::string::npos) break;
      }
    }
    throw ConfigError(prefix + key + ": " + message);
  }

 private:
  const Locations* where_;
};

void validate_config(const ExperimentConfig& c, const Locations* where) {
  const Validator v(where);
  const auto& m = c.model;
  v.check(m.dim >= 1 && m.dim <= 3, "model.dim", "must be 1, 2 or 3");
  v.check(std::isfinite(m.measure.omega_minus) && m.measure.omega_minus >= 0.0, "model.omega_minus",
          "must satisfy ω₋ >= 0");
  v.check(std::isfinite(m.measure.omega_plus) && m.measure.omega_plus < 0.5, "model.omega_plus",
          "must satisfy ω₊ < 1/2");
  v.check(m.measure.omega_minus < m.measure.omega_plus, "model.omega_plus", "must satisfy ω₋ < ω₊");
  if (m.measure.density == DensityKind::truncated_linear) {
    const double w = m.measure.width();
    v.check(std::abs(m.measure.slope) <= 2.0 / (w * w), "model.slope",
            "density becomes negative: need |slope| <= 2 / (ω₊ - ω₋)^2");
  } else {
    v.check(m.measure.slope == 0.0, "model.slope", "only allowed with density = \"truncated_linear\"");
  }

  v.check(!c.grid.box_sides.empty(), "grid.L", "at least one box side is required");
  for (int side : c.grid.box_sides) v.check(side >= 1 && side % 2 == 1, "grid.L", "box sides must be odd and positive");
  v.check(c.grid.mesh_per_unit >= 1 && c.grid.mesh_per_unit <= 4096, "grid.mesh_per_unit", "must lie in [1, 4096]");

  v.check(std::isfinite(c.magnetic.strength), "magnetic.strength", "must be finite");
  v.check(c.magnetic.kind != MagneticKind::none || c.magnetic.strength == 0.0, "magnetic.strength",
          "requires kind = \"constant\"");

  const auto& e = c.experiment;
  v.check(e.n_samples >= 1, "experiment.n_samples", "must be at least 1");
  v.check(e.kappa.has_value() == e.M.has_value(), "experiment.kappa", "kappa and M must be given together");
  if (e.kappa) {
    v.check(*e.kappa > 0.0 && *e.kappa <= 1.0, "experiment.kappa", "must satisfy 0 < κ <= 1");
    v.check(*e.M >= 1.0 && std::isfinite(*e.M), "experiment.M", "must satisfy M >= 1");
  }
  for (double x : e.energies) v.check(std::isfinite(x), "experiment.E", "must be finite");
  for (double x : e.epsilons) v.check(std::isfinite(x) && x > 0.0, "experiment.eps", "must be positive");
  for (double x : e.deltas) {
    v.check(std::isfinite(x) && x > 0.0, "experiment.delta_list", "entries must be positive");
    v.check(m.measure.omega_plus + x <= 0.5, "experiment.delta_list", "needs ω₊ + δ <= 1/2");
  }
  if (e.b) v.check(std::isfinite(*e.b), "experiment.b", "must be finite");

  v.check(e.kind.has_value(), "experiment.kind", "no experiment selected");
  const bool needs_potential = *e.kind == ExperimentKind::ucp || *e.kind == ExperimentKind::lifting ||
                               *e.kind == ExperimentKind::ssf;
  if (needs_potential) v.check(m.shape.has_value(), "model.shape", "this experiment needs a potential shape");

  std::set<double> distinct(e.deltas.begin(), e.deltas.end());
  switch (*e.kind) {
    case ExperimentKind::spectrum:
      break;
    case ExperimentKind::ucp:
    case ExperimentKind::lifting:
      v.check(e.b.has_value(), "experiment.b", "required");
      v.check(!e.deltas.empty(), "experiment.delta_list", "required");
      if (*e.kind == ExperimentKind::ucp || !e.kappa)
        v.check(distinct.size() >= 3, "experiment.delta_list", "fitting needs at least 3 distinct values");
      break;
    case ExperimentKind::ssf:
      v.check(e.b.has_value(), "experiment.b", "required");
      v.check(e.energies.size() == 1, "experiment.E", "exactly one energy required");
      v.check(e.epsilons.size() == 1, "experiment.eps", "exactly one eps required");
      v.check(!e.deltas.empty(), "experiment.delta_list", "required");
      v.check(e.energies[0] + e.epsilons[0] <= *e.b, "experiment.E", "needs E + eps <= b");
      break;
    case ExperimentKind::wegner:
      v.check(e.b.has_value(), "experiment.b", "required");
      v.check(!e.energies.empty(), "experiment.E", "required");
      v.check(!e.epsilons.empty(), "experiment.eps", "required");
      for (double en : e.energies)
        for (double eps : e.epsilons) {
          v.check(en + eps <= *e.b - 1.0, "experiment.E", "needs [E - eps, E + eps] inside (-inf, b - 1]");
          if (auto k = e.constants())
            v.check(eps <= epsilon_max(*k, m.measure.omega_plus), "experiment.eps",
                    "exceeds epsilon_max = " + std::to_string(epsilon_max(*k, m.measure.omega_plus)) +
                        " for the supplied kappa and M");
        }
      break;
    case ExperimentKind::ids:
      v.check(!e.energies.empty(), "experiment.E", "required");
      if (e.b)
        for (double en : e.energies) v.check(en <= *e.b - 1.0, "experiment.E", "energies must not exceed b - 1");
      break;
  }

  v.check(!c.run.threads || (*c.run.threads >= 1 && *c.run.threads <= 1024), "run.threads", "must lie in [1, 1024]");
  v.check(!c.run.out_dir.empty(), "run.out_dir", "must not be empty");
  v.check(c.run.master_seed <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()),
          "run.master_seed", "must fit a signed 64-bit integer");
}

// ---------------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  std::string where(const toml::node& n) const {
    const auto& s = n.source();
    return source_ + ":" + std::to_string(s.begin.line) + ":" + std::to_string(s.begin.column);
  }

  [[noreturn]] void fail(const toml::node& n, const std::string& key, const std::string& message) const {
    throw ConfigError(where(n) + ": " + key + ": " + message);
  }

  void note(const toml::node& n, const std::string& key) { locations_[key] = where(n); }
  const Locations& locations() const { return locations_; }

  void allow_only(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> keys) {
    for (auto&& [k, node] : t) {
      const std::string name(k.str());
      if (std::find(keys.begin(), keys.end(), name) == keys.end())
        fail(node, prefix.empty() ? name : prefix + "." + name, "unknown key");
      note(node, prefix.empty() ? name : prefix + "." + name);
    }
  }

  const toml::table* table(const toml::table& root, std::string_view key) {
    const toml::node* n = root.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(*n, std::string(key), "expected a table");
    return n->as_table();
  }

  std::optional<double> number(const toml::table& t, const std::string& prefix, std::string_view key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (auto i = n->as_integer()) return static_cast<double>(i->get());
    if (auto f = n->as_floating_point()) return f->get();
    fail(*n, prefix + "." + std::string(key), "expected a number");
  }

  std::optional<std::int64_t> integer(const toml::table& t, const std::string& prefix, std::string_view key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (auto i = n->as_integer()) return i->get();
    fail(*n, prefix + "." + std::string(key), "expected an integer");
  }

  std::optional<std::string> string(const toml::table& t, const std::string& prefix, std::string_view key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (auto s = n->as_string()) return s->get();
    fail(*n, prefix + "." + std::string(key), "expected a string");
  }

  std::optional<std::vector<double>> numbers(const toml::table& t, const std::string& prefix, std::string_view key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    const std::string name = prefix + "." + std::string(key);
    const toml::array* a = n->as_array();
    if (!a) fail(*n, name, "expected an array of numbers");
    std::vector<double> out;
    for (const toml::node& item : *a) {
      if (auto i = item.as_integer()) out.push_back(static_cast<double>(i->get()));
      else if (auto f = item.as_floating_point()) out.push_back(f->get());
      else fail(item, name, "expected an array of numbers");
    }
    return out;
  }

  std::optional<std::vector<std::int64_t>> integers(const toml::table& t, const std::string& prefix,
                                                    std::string_view key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    const std::string name = prefix + "." + std::string(key);
    const toml::array* a = n->as_array();
    if (!a) fail(*n, name, "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const toml::node& item : *a) {
      if (auto i = item.as_integer()) out.push_back(i->get());
      else fail(item, name, "expected an array of integers");
    }
    return out;
  }

  template <class Enum, std::size_t N>
  std::optional<Enum> choice(const toml::table& t, const std::string& prefix, std::string_view key,
                             const std::pair<Enum, std::string_view> (&names)[N]) {
    const auto s = string(t, prefix, key);
    if (!s) return std::nullopt;
    for (const auto& [value, name] : names)
      if (*s == name) return value;
    std::string allowed;
    for (const auto& [value, name] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    fail(*t.get(key), prefix + "." + std::string(key), "must be one of " + allowed);
  }

 private:
  std::string source_;
  Locations locations_;
};

constexpr std::pair<std::optional<SingleSiteShape>, std::string_view> kShapeNames[] = {
    {SingleSiteShape::ball, "ball"}, {SingleSiteShape::cube, "cube"}, {std::nullopt, "none"}};
constexpr std::pair<DensityKind, std::string_view> kDensityNames[] = {{DensityKind::uniform, "uniform"},
                                                                      {DensityKind::truncated_linear, "truncated_linear"}};
constexpr std::pair<MagneticKind, std::string_view> kMagneticNames[] = {{MagneticKind::none, "none"},
                                                                        {MagneticKind::constant_field, "constant"}};

template <class Enum, std::size_t N>
std::string_view name_of(Enum value, const std::pair<Enum, std::string_view> (&names)[N]) {
  for (const auto& [v, name] : names)
    if (v == value) return name;
  return "?";
}

std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string format_list(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_double(xs[i]);
  return s + "]";
}

std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::string emit(const ExperimentConfig& c, bool include_run_locals) {
  std::ostringstream os;
  os << "[model]\n"
     << "dim = " << c.model.dim << "\n"
     << "shape = " << quoted(name_of(c.model.shape, kShapeNames)) << "\n"
     << "omega_minus = " << format_double(c.model.measure.omega_minus) << "\n"
     << "omega_plus = " << format_double(c.model.measure.omega_plus) << "\n"
     << "density = " << quoted(name_of(c.model.measure.density, kDensityNames)) << "\n";
  if (c.model.measure.density == DensityKind::truncated_linear)
    os << "slope = " << format_double(c.model.measure.slope) << "\n";

  os << "\n[grid]\n";
  if (c.grid.box_sides.size() == 1) {
    os << "L = " << c.grid.box_sides.front() << "\n";
  } else {
    os << "L_list = [";
    for (std::size_t i = 0; i < c.grid.box_sides.size(); ++i) os << (i ? ", " : "") << c.grid.box_sides[i];
    os << "]\n";
  }
  os << "mesh_per_unit = " << c.grid.mesh_per_unit << "\n";

  os << "\n[magnetic]\n"
     << "kind = " << quoted(name_of(c.magnetic.kind, kMagneticNames)) << "\n"
     << "strength = " << format_double(c.magnetic.strength) << "\n";

  const auto& e = c.experiment;
  os << "\n[experiment]\n";
  if (e.kind) os << "kind = " << quoted(to_string(*e.kind)) << "\n";
  if (e.energies.size() == 1) os << "E = " << format_double(e.energies[0]) << "\n";
  else if (!e.energies.empty()) os << "E_list = " << format_list(e.energies) << "\n";
  if (e.epsilons.size() == 1) os << "eps = " << format_double(e.epsilons[0]) << "\n";
  else if (!e.epsilons.empty()) os << "eps_list = " << format_list(e.epsilons) << "\n";
  if (e.b) os << "b = " << format_double(*e.b) << "\n";
  if (!e.deltas.empty()) os << "delta_list = " << format_list(e.deltas) << "\n";
  os << "n_samples = " << e.n_samples << "\n";
  if (e.kappa) os << "kappa = " << format_double(*e.kappa) << "\n";
  if (e.M) os << "M = " << format_double(*e.M) << "\n";

  os << "\n[run]\n"
     << "master_seed = " << c.run.master_seed << "\n";
  if (include_run_locals) {
    if (c.run.threads) os << "threads = " << *c.run.threads << "\n";
    os << "out_dir = " << quoted(c.run.out_dir) << "\n";
  }
  return os.str();
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return name_of(kind, kKindNames); }

std::optional<ExperimentKind> experiment_kind_from_string(std::string_view name) {
  for (const auto& [kind, n] : kKindNames)
    if (n == name) return kind;
  return std::nullopt;
}

std::optional<UcpConstants> ExperimentSection::constants() const {
  if (!kappa || !M) return std::nullopt;
  UcpConstants c;
  c.kappa = *kappa;
  c.M = *M;
  c.b = b.value_or(0.0);
  return c;
}

ExperimentKind ExperimentConfig::kind() const {
  if (!experiment.kind) throw ConfigError("experiment.kind: no experiment selected");
  return *experiment.kind;
}

void ExperimentConfig::validate() const { validate_config(*this, nullptr); }

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& err) {
    const auto& pos = err.source().begin;
    throw ConfigError(std::string(source) + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column) +
                      ": " + std::string(err.description()));
  }

  Reader r{std::string(source)};
  r.allow_only(root, "", {"model", "grid", "magnetic", "experiment", "run"});
  ExperimentConfig c;

  if (const auto* t = r.table(root, "model")) {
    r.allow_only(*t, "model", {"dim", "shape", "omega_minus", "omega_plus", "density", "slope"});
    if (auto v = r.integer(*t, "model", "dim")) c.model.dim = static_cast<int>(*v);
    if (t->get("shape")) c.model.shape = *r.choice(*t, "model", "shape", kShapeNames);
    if (auto v = r.number(*t, "model", "omega_minus")) c.model.measure.omega_minus = *v;
    if (auto v = r.number(*t, "model", "omega_plus")) c.model.measure.omega_plus = *v;
    if (auto v = r.choice(*t, "model", "density", kDensityNames)) c.model.measure.density = *v;
    if (auto v = r.number(*t, "model", "slope")) c.model.measure.slope = *v;
  }

  if (const auto* t = r.table(root, "grid")) {
    r.allow_only(*t, "grid", {"L", "L_list", "mesh_per_unit"});
    const auto single = r.integer(*t, "grid", "L");
    const auto list = r.integers(*t, "grid", "L_list");
    if (single && list) r.fail(*t->get("L_list"), "grid.L_list", "give either L or L_list, not both");
    if (single) c.grid.box_sides = {static_cast<int>(*single)};
    if (list) c.grid.box_sides.assign(list->begin(), list->end());
    if (auto v = r.integer(*t, "grid", "mesh_per_unit")) c.grid.mesh_per_unit = static_cast<int>(*v);
  }

  if (const auto* t = r.table(root, "magnetic")) {
    r.allow_only(*t, "magnetic", {"kind", "strength"});
    if (auto v = r.choice(*t, "magnetic", "kind", kMagneticNames)) c.magnetic.kind = *v;
    if (auto v = r.number(*t, "magnetic", "strength")) c.magnetic.strength = *v;
  }

  if (const auto* t = r.table(root, "experiment")) {
    r.allow_only(*t, "experiment",
                 {"kind", "E", "E_list", "eps", "eps_list", "b", "delta_list", "n_samples", "kappa", "M"});
    auto& e = c.experiment;
    if (auto v = r.choice(*t, "experiment", "kind", kKindNames)) e.kind = *v;
    auto scalar_or_list = [&](std::string_view one, std::string_view many, std::vector<double>& out) {
      const auto a = r.number(*t, "experiment", one);
      const auto b = r.numbers(*t, "experiment", many);
      if (a && b)
        r.fail(*t->get(many), "experiment." + std::string(many),
               "give either " + std::string(one) + " or " + std::string(many) + ", not both");
      if (a) out = {*a};
      if (b) out = *b;
    };
    scalar_or_list("E", "E_list", e.energies);
    scalar_or_list("eps", "eps_list", e.epsilons);
    e.b = r.number(*t, "experiment", "b");
    if (auto v = r.numbers(*t, "experiment", "delta_list")) e.deltas = *v;
    if (auto v = r.integer(*t, "experiment", "n_samples")) {
      if (*v < 1) r.fail(*t->get("n_samples"), "experiment.n_samples", "must be at least 1");
      e.n_samples = static_cast<std::size_t>(*v);
    }
    e.kappa = r.number(*t, "experiment", "kappa");
    e.M = r.number(*t, "experiment", "M");
  }

  if (const auto* t = r.table(root, "run")) {
    r.allow_only(*t, "run", {"master_seed", "threads", "out_dir"});
    if (auto v = r.integer(*t, "run", "master_seed")) {
      if (*v < 0) r.fail(*t->get("master_seed"), "run.master_seed", "must be nonnegative");
      c.run.master_seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = r.integer(*t, "run", "threads")) {
      if (*v < 1) r.fail(*t->get("threads"), "run.threads", "must be at least 1");
      c.run.threads = static_cast<std::size_t>(*v);
    }
    if (auto v = r.string(*t, "run", "out_dir")) c.run.out_dir = *v;
  }

  // The experiment kind may come from the command line instead.
  if (c.experiment.kind) validate_config(c, &r.locations());
  else {
    ExperimentConfig probe = c;
    probe.experiment.kind = ExperimentKind::spectrum;
    validate_config(probe, &r.locations());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string to_toml(const ExperimentConfig& config) { return emit(config, true); }

std::string canonical_result_config(const ExperimentConfig& config) { return emit(config, false); }

}  // namespace breather
