#include "kslab/config.hpp"

#include "kslab/error.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace kslab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg, field);
}

// Object view that remembers which keys were read and rejects the rest.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return join(path_, key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    return as_number(*v, field(key));
  }

  double required_number(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(field(key), "is required");
    return as_number(*v, field(key));
  }

  long integer(const std::string& key, long fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned()) fail(field(key), "expected an integer");
    return v->get<long>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(field(key), "expected a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(field(key), "is required");
    if (!v->is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_number((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto guarded(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(field, e.what());
  }
}

CoefficientSpec parse_coefficient(const json& j, const std::string& path) {
  if (j.is_number()) return CoefficientSpec::constant(Reader::as_number(j, path));
  Reader r(j, path);
  const std::string family = r.string("family", "constant");
  CoefficientSpec spec = guarded(r.field("family"), [&] {
    switch (coefficient_family_from_string(family)) {
      case CoefficientFamily::constant:
        return CoefficientSpec::constant(r.required_number("value"));
      case CoefficientFamily::exponential_decay:
        return CoefficientSpec::exponential_decay(r.number("amplitude", 1.0), r.number("rate", 1.0));
      case CoefficientFamily::saturating_increasing:
        return CoefficientSpec::saturating_increasing(r.number("offset", 0.0), r.number("scale", 1.0),
                                                      r.number("half_saturation", 1.0));
      case CoefficientFamily::tabulated_smooth:
        return CoefficientSpec::tabulated(r.numbers("knots"), r.numbers("values"));
    }
    fail(r.field("family"), "unknown family");
  });
  r.finish();
  return spec;
}

json coefficient_json(const CoefficientSpec& c) {
  const auto& p = c.parameters();
  switch (c.family()) {
    case CoefficientFamily::constant: return {{"family", "constant"}, {"value", p[0]}};
    case CoefficientFamily::exponential_decay:
      return {{"family", "exponential-decay"}, {"amplitude", p[0]}, {"rate", p[1]}};
    case CoefficientFamily::saturating_increasing:
      return {{"family", "saturating-increasing"}, {"offset", p[0]}, {"scale", p[1]}, {"half_saturation", p[2]}};
    case CoefficientFamily::tabulated_smooth:
      return {{"family", "tabulated-smooth"}, {"knots", c.knots()}, {"values", c.values()}};
  }
  return {};
}

void parse_model(Reader& root, RunConfig& c) {
  const json* jm = root.get("model");
  if (!jm) fail("model", "is required");
  Reader r(*jm, "model");
  if (const json* d = r.get("diffusion")) c.model.diffusion = parse_coefficient(*d, "model.diffusion");
  if (const json* s = r.get("sensitivity")) c.model.sensitivity = parse_coefficient(*s, "model.sensitivity");
  if (const json* s = r.get("source"); s && !s->is_null()) {
    Reader rs(*s, "model.source");
    const double rr = rs.number("r", 0.0);
    const double mu = rs.required_number("mu");
    const double p = rs.required_number("p");
    rs.finish();
    if (!(mu > 0.0)) fail("model.source.mu", "the logistic source requires mu > 0, got " + json(mu).dump());
    if (!(p > 0.0)) fail("model.source.p", "the logistic source requires p > 0, got " + json(p).dump());
    c.model.source = SourceSpec(rr, mu, p);
  }
  const std::string avg = r.string("face_averaging", "arithmetic");
  if (avg == "arithmetic") {
    c.model.face_averaging = FaceAveraging::arithmetic;
  } else if (avg == "harmonic") {
    c.model.face_averaging = FaceAveraging::harmonic;
  } else {
    fail("model.face_averaging", "expected 'arithmetic' or 'harmonic'");
  }
  if (const json* v = r.get("validation")) {
    Reader rv(*v, "model.validation");
    c.validation_v_max = rv.number("v_max", c.validation_v_max);
    c.validation_samples = static_cast<int>(rv.integer("samples", c.validation_samples));
    rv.finish();
    if (!(c.validation_v_max > 0.0)) fail("model.validation.v_max", "must be positive");
    if (c.validation_samples < 2) fail("model.validation.samples", "must be at least 2");
  }
  r.finish();
}

void parse_grid(Reader& root, RunConfig& c) {
  const json* jg = root.get("grid");
  if (!jg) fail("grid", "is required");
  Reader r(*jg, "grid");
  const std::string geo = r.string("geometry", "rectangle");
  c.grid.geometry = guarded("grid.geometry", [&] { return geometry_from_string(geo); });
  if (c.grid.geometry == Geometry::rectangle) {
    c.grid.lx = r.number("Lx", 1.0);
    c.grid.ly = r.number("Ly", 1.0);
    c.grid.nx = static_cast<int>(r.integer("nx", 64));
    c.grid.ny = static_cast<int>(r.integer("ny", c.grid.nx));
    if (!(c.grid.lx > 0.0)) fail("grid.Lx", "must be positive");
    if (!(c.grid.ly > 0.0)) fail("grid.Ly", "must be positive");
    if (c.grid.nx < 4) fail("grid.nx", "must be at least 4");
    if (c.grid.ny < 4) fail("grid.ny", "must be at least 4");
  } else {
    c.grid.radius = r.number("R", 1.0);
    c.grid.nr = static_cast<int>(r.integer("nr", 64));
    if (!(c.grid.radius > 0.0)) fail("grid.R", "must be positive");
    if (c.grid.nr < 4) fail("grid.nr", "must be at least 4");
  }
  r.finish();
}

void parse_initial(Reader& root, RunConfig& c) {
  const json* ji = root.get("initial");
  if (!ji) return;
  Reader r(*ji, "initial");
  InitialDataSpec& s = c.initial;
  const std::string kind = r.string("kind", "constant");
  if (const json* m = r.get("mass")) {
    s.mass = Reader::as_number(*m, "initial.mass");
    if (!(*s.mass > 0.0)) fail("initial.mass", "initial data must not be identically zero (mass > 0)");
  }
  if (kind == "constant" || kind == "perturbed-constant") {
    s.kind = kind == "constant" ? InitialKind::constant : InitialKind::perturbed_constant;
    s.value = r.number("value", s.value);
    if (!s.mass && !(s.value > 0.0)) {
      fail("initial.value", "initial data must not be identically zero (value > 0)");
    }
    if (s.kind == InitialKind::perturbed_constant) {
      s.amplitude = r.number("amplitude", 0.1);
      if (!(s.amplitude >= 0.0 && s.amplitude < 1.0)) fail("initial.amplitude", "must lie in [0, 1)");
      if (const json* jm = r.get("modes")) {
        if (!jm->is_array() || jm->empty()) fail("initial.modes", "expected a nonempty array of [m, n]");
        s.modes.clear();
        for (std::size_t i = 0; i < jm->size(); ++i) {
          const json& e = (*jm)[i];
          const std::string f = "initial.modes[" + std::to_string(i) + "]";
          if (!e.is_array() || e.empty() || e.size() > 2) fail(f, "expected [m] or [m, n]");
          for (const json& x : e) {
            if (!x.is_number_integer() || x.get<int>() < 0) fail(f, "mode numbers must be nonnegative integers");
          }
          s.modes.push_back({e[0].get<int>(), e.size() > 1 ? e[1].get<int>() : 0});
        }
      }
      s.random_coefficients = r.boolean("random_coefficients", false);
    }
  } else if (kind == "gaussian-bumps") {
    s.kind = InitialKind::gaussian_bumps;
    const json* jb = r.get("bumps");
    if (!jb || !jb->is_array() || jb->empty()) fail("initial.bumps", "expected a nonempty array");
    for (std::size_t i = 0; i < jb->size(); ++i) {
      Reader rb((*jb)[i], "initial.bumps[" + std::to_string(i) + "]");
      GaussianBump b;
      if (const json* cj = rb.get("center")) {
        if (!cj->is_array() || cj->size() != 2) fail(rb.field("center"), "expected [x, y]");
        b.cx = Reader::as_number((*cj)[0], rb.field("center"));
        b.cy = Reader::as_number((*cj)[1], rb.field("center"));
      } else if (c.grid.geometry == Geometry::rectangle) {
        b.cx = 0.5 * c.grid.lx;
        b.cy = 0.5 * c.grid.ly;
      } else {
        b.cx = 0.0;
        b.cy = 0.0;
      }
      b.sigma = rb.number("sigma", 0.05);
      b.weight = rb.number("weight", 1.0);
      rb.finish();
      if (!(b.sigma > 0.0)) fail(rb.field("sigma"), "must be positive");
      if (!(b.weight >= 0.0)) fail(rb.field("weight"), "must be nonnegative");
      if (c.grid.geometry == Geometry::radial_disk && (b.cx != 0.0 || b.cy != 0.0) && rb.has("center")) {
        fail(rb.field("center"), "radial-disk bumps must be centered at the origin");
      }
      s.bumps.push_back(b);
    }
    if (!s.mass) fail("initial.mass", "is required for gaussian-bumps");
  } else {
    fail("initial.kind", "expected 'constant', 'gaussian-bumps' or 'perturbed-constant'");
  }
  if (const json* v0 = r.get("v0")) {
    if (v0->is_string() && v0->get<std::string>() == "same") {
      s.v0_same = true;
    } else if (v0->is_object()) {
      Reader rv(*v0, "initial.v0");
      s.v0_same = false;
      s.v0_value = rv.required_number("constant");
      rv.finish();
      if (!(s.v0_value >= 0.0)) fail("initial.v0.constant", "must be nonnegative");
    } else {
      fail("initial.v0", "expected \"same\" or {\"constant\": value}");
    }
  }
  r.finish();
}

void parse_step(Reader& root, RunConfig& c) {
  const json* js = root.get("step");
  if (!js) return;
  Reader r(*js, "step");
  StepOptions& o = c.step;
  o.cfl_safety = r.number("cfl_safety", o.cfl_safety);
  o.dt_min = r.number("dt_min", o.dt_min);
  o.dt_max = r.number("dt_max", o.dt_max);
  o.linear_tol = r.number("linear_tol", o.linear_tol);
  o.max_linear_iters = static_cast<int>(r.integer("max_linear_iters", o.max_linear_iters));
  o.scheme = guarded("step.chemotaxis", [&] {
    return chemotaxis_scheme_from_string(r.string("chemotaxis", to_string(o.scheme)));
  });
  o.source = guarded("step.source_treatment", [&] {
    return source_treatment_from_string(r.string("source_treatment", to_string(o.source)));
  });
  c.max_retries = static_cast<int>(r.integer("max_retries", c.max_retries));
  c.max_steps = r.integer("max_steps", c.max_steps);
  r.finish();
  guarded("step", [&] { o.validate(); });
  if (c.max_retries < 0) fail("step.max_retries", "must be nonnegative");
  if (c.max_steps <= 0) fail("step.max_steps", "must be positive");
}

void parse_diagnostics(Reader& root, RunConfig& c) {
  DiagnosticsConfig& d = c.diagnostics;
  d.k = default_energy_exponent(c.model.regime);
  const json* jd = root.get("diagnostics");
  if (jd) {
    Reader r(*jd, "diagnostics");
    d.k = r.number("k", d.k);
    if (r.has("q_list")) d.q_list = r.numbers("q_list");
    d.tau = r.number("tau", d.tau);
    d.cadence = r.number("cadence", d.cadence);
    d.blowup_max_u = r.number("blowup_max_u", d.blowup_max_u);
    d.blowup_dt_floor = r.number("blowup_dt_floor", d.blowup_dt_floor);
    r.finish();
  }
  guarded("diagnostics", [&] { d.validate(); });
  if (d.tau == 0.0) d.tau = std::min(1.0, 0.5 * c.t_end);
  if (d.cadence == 0.0) d.cadence = c.t_end / 200.0;
  for (auto& w : d.admissibility_warnings(c.model.regime, c.source_p())) c.warnings.push_back(w);
}

void parse_output(Reader& root, RunConfig& c) {
  const json* jo = root.get("output");
  if (!jo) return;
  Reader r(*jo, "output");
  c.output.dir = r.string("dir", c.output.dir);
  c.output.snapshot_cadence = r.number("snapshot_cadence", 0.0);
  r.finish();
  if (c.output.dir.empty()) fail("output.dir", "must not be empty");
  if (!(c.output.snapshot_cadence >= 0.0)) fail("output.snapshot_cadence", "must be nonnegative");
}

void validate_model_or_fail(RunConfig& c) {
  const ValidationReport rep = validate_model(c.model, c.validation_v_max, c.validation_samples);
  for (const auto& e : rep.entries) {
    if (e.passed) continue;
    std::string msg = "model is inadmissible: " + e.condition + " fails";
    if (e.witness) msg += " at v = " + json(*e.witness).dump();
    if (!e.detail.empty()) msg += " (" + e.detail + ")";
    fail("model", msg);
  }
  c.model.regime = rep.regime;
  for (const auto& w : rep.warnings) c.warnings.push_back(w);
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::constant: return "constant";
    case InitialKind::gaussian_bumps: return "gaussian-bumps";
    case InitialKind::perturbed_constant: return "perturbed-constant";
  }
  return "unknown";
}

Grid GridSpec::build() const {
  return geometry == Geometry::rectangle ? Grid::rectangle(lx, ly, nx, ny) : Grid::radial_disk(radius, nr);
}

RunConfig parse_config(const json& j) {
  Reader root(j, "");
  RunConfig c;
  const std::string schema = root.string("schema", kRunSchema);
  if (schema != kRunSchema) fail("schema", "unsupported schema '" + schema + "', expected " + kRunSchema);

  parse_model(root, c);
  validate_model_or_fail(c);
  parse_grid(root, c);
  parse_initial(root, c);

  const json* te = root.get("T_end");
  if (!te) fail("T_end", "is required");
  c.t_end = Reader::as_number(*te, "T_end");
  if (!(c.t_end > 0.0)) fail("T_end", "must be positive");

  parse_step(root, c);
  parse_diagnostics(root, c);
  parse_output(root, c);
  if (const json* s = root.get("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = s->get<std::uint64_t>();
  }
  root.finish();
  return c;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

RunConfig parse_config_text(const std::string& text) { return parse_config(parse_json_text(text)); }

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

json to_json(const RunConfig& c) {
  json model = {{"diffusion", coefficient_json(c.model.diffusion)},
                {"sensitivity", coefficient_json(c.model.sensitivity)},
                {"face_averaging", c.model.face_averaging == FaceAveraging::harmonic ? "harmonic" : "arithmetic"},
                {"validation", {{"v_max", c.validation_v_max}, {"samples", c.validation_samples}}}};
  model["source"] = c.model.source ? json{{"r", c.model.source->r}, {"mu", c.model.source->mu}, {"p", c.model.source->p}}
                                   : json(nullptr);
  json grid = c.grid.geometry == Geometry::rectangle
                  ? json{{"geometry", "rectangle"}, {"Lx", c.grid.lx}, {"Ly", c.grid.ly}, {"nx", c.grid.nx}, {"ny", c.grid.ny}}
                  : json{{"geometry", "radial-disk"}, {"R", c.grid.radius}, {"nr", c.grid.nr}};
  const InitialDataSpec& s = c.initial;
  json init = {{"kind", to_string(s.kind)}};
  if (s.mass) init["mass"] = *s.mass;
  if (s.kind != InitialKind::gaussian_bumps) init["value"] = s.value;
  if (s.kind == InitialKind::perturbed_constant) {
    init["amplitude"] = s.amplitude;
    json modes = json::array();
    for (const auto& m : s.modes) modes.push_back({m.m, m.n});
    init["modes"] = modes;
    init["random_coefficients"] = s.random_coefficients;
  }
  if (s.kind == InitialKind::gaussian_bumps) {
    json bumps = json::array();
    for (const auto& b : s.bumps) {
      bumps.push_back({{"center", {b.cx, b.cy}}, {"sigma", b.sigma}, {"weight", b.weight}});
    }
    init["bumps"] = bumps;
  }
  init["v0"] = s.v0_same ? json("same") : json{{"constant", s.v0_value}};
  return {{"schema", kRunSchema},
          {"model", model},
          {"grid", grid},
          {"initial", init},
          {"T_end", c.t_end},
          {"step",
           {{"cfl_safety", c.step.cfl_safety},
            {"dt_min", c.step.dt_min},
            {"dt_max", c.step.dt_max},
            {"linear_tol", c.step.linear_tol},
            {"max_linear_iters", c.step.max_linear_iters},
            {"chemotaxis", to_string(c.step.scheme)},
            {"source_treatment", to_string(c.step.source)},
            {"max_retries", c.max_retries},
            {"max_steps", c.max_steps}}},
          {"diagnostics",
           {{"k", c.diagnostics.k},
            {"q_list", c.diagnostics.q_list},
            {"tau", c.diagnostics.tau},
            {"cadence", c.diagnostics.cadence},
            {"blowup_max_u", c.diagnostics.blowup_max_u},
            {"blowup_dt_floor", c.diagnostics.blowup_dt_floor}}},
          {"output", {{"dir", c.output.dir}, {"snapshot_cadence", c.output.snapshot_cadence}}},
          {"seed", c.seed}};
}

}  // namespace kslab
