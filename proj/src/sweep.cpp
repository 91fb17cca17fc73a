#include "kslab/sweep.hpp"

#include "kslab/config.hpp"
#include "kslab/error.hpp"
#include "kslab/output.hpp"
#include "kslab/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace kslab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string alias_path(const std::string& name) {
  if (name == "p") return "model.source.p";
  if (name == "mu") return "model.source.mu";
  if (name == "r") return "model.source.r";
  if (name == "mass") return "initial.mass";
  if (name == "k") return "diagnostics.k";
  if (name == "geometry") return "grid.geometry";
  return name;
}

json::json_pointer pointer(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("axis path '" + dotted + "' has an empty component", "axes");
    p += "/" + part;
  }
  return json::json_pointer(p);
}

void set_geometry(json& cfg, const json& value) {
  json& grid = cfg["grid"];
  if (!value.is_string()) throw ConfigError("geometry axis values must be strings", "axes.geometry");
  const std::string geo = value.get<std::string>();
  const int n = grid.value("nr", grid.value("nx", 64));
  grid["geometry"] = geo;
  if (geo == "radial-disk") {
    for (const char* k : {"Lx", "Ly", "nx", "ny"}) grid.erase(k);
    grid["nr"] = n;
    if (cfg.contains("initial") && cfg["initial"].contains("bumps")) {
      for (json& b : cfg["initial"]["bumps"]) b.erase("center");
    }
  } else {
    for (const char* k : {"R", "nr"}) grid.erase(k);
    grid["nx"] = n;
    grid["ny"] = n;
  }
}

void set_resolution(json& cfg, const json& value) {
  json& grid = cfg["grid"];
  if (grid.value("geometry", std::string("rectangle")) == "radial-disk") {
    grid["nr"] = value;
  } else {
    grid["nx"] = value;
    grid["ny"] = value;
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

}  // namespace

std::size_t SweepPlan::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

SweepPlan parse_sweep_plan(const json& j, const fs::path& origin) {
  if (!j.is_object()) throw ConfigError("sweep plan must be an object");
  static const std::vector<std::string> known = {"schema", "base", "base_config", "axes", "parallelism",
                                                 "max_runs", "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError(it.key() + ": unknown key", it.key());
    }
  }
  if (j.value("schema", std::string(kSweepSchema)) != kSweepSchema) {
    throw ConfigError(std::string("schema: expected ") + kSweepSchema, "schema");
  }
  SweepPlan plan;
  if (j.contains("base") && j.contains("base_config")) {
    throw ConfigError("base: give either base or base_config, not both", "base");
  }
  if (j.contains("base")) {
    plan.base = j["base"];
  } else if (j.contains("base_config")) {
    fs::path p = j["base_config"].get<std::string>();
    if (p.is_relative() && !origin.empty()) p = origin / p;
    plan.base = read_json_file(p);
  } else {
    throw ConfigError("base: a base configuration is required", "base");
  }
  if (!plan.base.is_object()) throw ConfigError("base: expected an object", "base");

  if (!j.contains("axes") || !j["axes"].is_object()) throw ConfigError("axes: expected an object", "axes");
  for (auto it = j["axes"].begin(); it != j["axes"].end(); ++it) {
    if (!it->is_array() || it->empty()) {
      throw ConfigError("axes." + it.key() + ": expected a nonempty array", "axes." + it.key());
    }
    plan.axes.push_back({it.key(), std::vector<json>(it->begin(), it->end())});
  }
  plan.parallelism = j.value("parallelism", 1);
  if (plan.parallelism < 1) throw ConfigError("parallelism: must be at least 1", "parallelism");
  plan.max_runs = j.value("max_runs", std::size_t{1000});
  plan.out_dir = j.value("out_dir", plan.out_dir);
  if (plan.size() > plan.max_runs) {
    throw ConfigError("axes: sweep has " + std::to_string(plan.size()) + " points, above max_runs " +
                          std::to_string(plan.max_runs),
                      "max_runs");
  }
  return plan;
}

SweepPlan load_sweep_plan(const fs::path& path) {
  return parse_sweep_plan(read_json_file(path), path.parent_path());
}

json apply_axes(const json& base, const std::vector<SweepAxis>& axes, const std::vector<std::size_t>& choice) {
  json cfg = base;
  const SweepAxis* resolution = nullptr;
  std::size_t resolution_choice = 0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const std::string& name = axes[a].name;
    const json& value = axes[a].values.at(choice.at(a));
    if (name == "n" || name == "grid_size") {
      resolution = &axes[a];
      resolution_choice = choice[a];
    } else if (name == "geometry") {
      set_geometry(cfg, value);
    } else {
      cfg[pointer(alias_path(name))] = value;
    }
  }
  if (resolution) set_resolution(cfg, resolution->values[resolution_choice]);
  return cfg;
}

std::string SweepTable::csv_header() const {
  std::string h = "index";
  for (const auto& a : axis_names) h += "," + a;
  h += ",outcome,reason,t_final,t_star,steps,sup_u,sup_v,sup_energy,dissipation_window,wall_seconds,directory,error";
  return h;
}

std::string SweepTable::csv_row(const SweepRow& r) const {
  std::string s = std::to_string(r.index);
  for (const auto& a : axis_names) s += "," + csv_cell(r.parameters.value(a, json(nullptr)));
  s += "," + r.outcome + "," + r.reason + "," + fmt(r.t_final) + "," + (r.t_star ? fmt(*r.t_star) : "") + "," +
       std::to_string(r.steps) + "," + fmt(r.sup_u) + "," + fmt(r.sup_v) + "," + fmt(r.sup_energy) + "," +
       (r.dissipation_window ? fmt(*r.dissipation_window) : "") + "," + fmt(r.wall_seconds) + "," +
       csv_cell(r.directory) + "," + csv_cell(r.error);
  return s;
}

std::string SweepTable::to_csv() const {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) out += csv_row(r) + "\n";
  return out;
}

json SweepTable::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"index", r.index},
                      {"parameters", r.parameters},
                      {"outcome", r.outcome},
                      {"reason", r.reason},
                      {"t_final", r.t_final},
                      {"t_star", r.t_star ? json(*r.t_star) : json(nullptr)},
                      {"steps", r.steps},
                      {"sup_u", r.sup_u},
                      {"sup_v", r.sup_v},
                      {"sup_energy", r.sup_energy},
                      {"dissipation_window", r.dissipation_window ? json(*r.dissipation_window) : json(nullptr)},
                      {"wall_seconds", r.wall_seconds},
                      {"directory", r.directory},
                      {"error", r.error}});
  }
  return {{"schema", kSweepSchema}, {"axes", axis_names}, {"rows", rows_j}};
}

SweepTable run_sweep(const SweepPlan& plan, const fs::path& out) {
  fs::create_directories(out);
  SweepTable table;
  for (const auto& a : plan.axes) table.axis_names.push_back(a.name);
  const std::size_t total = plan.size();
  table.rows.resize(total);

  std::ofstream partial(out / "sweep_partial.csv");
  partial << table.csv_header() << '\n' << std::flush;
  std::mutex partial_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      std::vector<std::size_t> choice(plan.axes.size());
      std::size_t rest = i;
      for (std::size_t a = plan.axes.size(); a-- > 0;) {
        choice[a] = rest % plan.axes[a].values.size();
        rest /= plan.axes[a].values.size();
      }
      SweepRow row;
      row.index = i;
      for (std::size_t a = 0; a < plan.axes.size(); ++a) {
        row.parameters[plan.axes[a].name] = plan.axes[a].values[choice[a]];
      }
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu", i);
      row.directory = name;
      try {
        const RunConfig cfg = parse_config(apply_axes(plan.base, plan.axes, choice));
        const RunResult res = simulate_to_directory(cfg, out / name);
        row.outcome = to_string(res.outcome);
        if (res.outcome == Outcome::blowup) row.reason = to_string(res.blowup_reason);
        if (res.outcome == Outcome::stalled) row.reason = to_string(res.stall_reason);
        row.t_final = res.t_final;
        row.t_star = res.t_star;
        row.steps = res.steps;
        row.sup_u = res.sup.sup_u;
        row.sup_v = res.sup.sup_v;
        row.sup_energy = res.sup.energy_y;
        row.dissipation_window = res.dissipation_window;
        row.wall_seconds = res.wall_seconds;
      } catch (const std::exception& e) {
        row.outcome = "error";
        row.error = e.what();
      }
      std::lock_guard lock(partial_mutex);
      partial << table.csv_row(row) << '\n' << std::flush;
      table.rows[i] = std::move(row);
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(plan.parallelism), total));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ofstream(out / "sweep.csv") << table.to_csv();
  write_json(out / "sweep.json", table.to_json());
  return table;
}

}  // namespace kslab
