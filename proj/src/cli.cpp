#include "kslab/cli.hpp"

#include "kslab/config.hpp"
#include "kslab/convergence.hpp"
#include "kslab/error.hpp"
#include "kslab/inequalities.hpp"
#include "kslab/output.hpp"
#include "kslab/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <map>
#include <ostream>

namespace kslab {

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct VerifyOptions {
  std::string lemma{"all"};
  int trials{0};
  std::uint64_t seed{1};
  std::vector<int> resolutions{32, 64};
  std::string out;
};

const std::map<std::string, std::string>& lemma_aliases() {
  static const std::map<std::string, std::string> m = {
      {"gn", "gn"},           {"3.2", "gn"},       {"eta", "eta"},         {"3.3", "eta"},
      {"truncation", "truncation"}, {"3.4", "truncation"}, {"sequence", "sequence"}, {"3.6", "sequence"},
      {"log", "log"},         {"all", "all"}};
  return m;
}

std::vector<FieldEnsemble> ensembles(int n, int count, std::uint64_t seed) {
  std::vector<FieldEnsemble> out;
  const Grid g = Grid::rectangle(1.0, 1.0, n, n);
  for (EnsembleKind k : {EnsembleKind::band_limited_trig, EnsembleKind::gaussian_bumps, EnsembleKind::two_valued,
                         EnsembleKind::worst_case_spike}) {
    out.push_back({g, k, count, seed});
  }
  return out;
}

json verify(const VerifyOptions& o, bool& all_passed) {
  const std::string which = lemma_aliases().at(o.lemma);
  auto wants = [&](const char* name) { return which == "all" || which == name; };
  json reports = json::array();
  auto add = [&](json r, bool ok) {
    all_passed = all_passed && ok;
    reports.push_back(std::move(r));
  };
  const int count = o.trials > 0 ? o.trials : 100;

  for (int n : o.resolutions) {
    for (const FieldEnsemble& e : ensembles(n, count, o.seed)) {
      if (wants("gn")) {
        for (auto [p, q, r, s] : {std::tuple{4.0, 2.0, 2.0, 1.0}, std::tuple{3.0, 1.0, 2.0, 1.0},
                                  std::tuple{6.0, 2.0, 2.0, 1.0}}) {
          const InequalityReport rep = check_gn(e, p, q, r, s);
          add(rep.to_json(), rep.passed);
        }
      }
      if (wants("eta")) {
        const InequalityReport rep = check_eta_interpolation(e, {0.01, 0.1, 0.5, 0.9});
        add(rep.to_json(), rep.passed);
      }
      if (wants("truncation")) {
        for (Gauge gauge : {Gauge::log_shift, Gauge::square_root, Gauge::identity}) {
          const InequalityReport rep = check_truncation_ensemble(e, 2.0, {0.5, 1.0, 2.0, 4.0}, gauge);
          add(rep.to_json(), rep.passed);
        }
      }
    }
  }
  if (wants("sequence")) {
    const auto s = check_sequence_lemma_randomized(o.trials > 0 ? o.trials : 1000, o.seed);
    json j = s.to_json();
    j["lemma"] = "sequence";
    add(j, s.failures == 0);
  }
  if (wants("log")) {
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 600; ++i) grid.push_back(std::pow(10.0, -6.0 + 12.0 * i / 600.0));
    const std::vector<double> eps{1e-3, 1e-2, 0.1, 1.0, 10.0};
    for (auto [a1, b1, a2, b2] : {std::tuple{1.0, 1.0, 2.0, -0.5}, std::tuple{2.0, 1.5, 2.5, 0.0},
                                  std::tuple{1.0, 2.0, 1.5, -1.0}}) {
      const LogDominationReport rep = check_log_domination(a1, b1, a2, b2, grid, eps);
      json j = rep.to_json();
      j["lemma"] = "log-domination";
      add(j, rep.passed());
    }
  }
  return reports;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chemotaxis-logistic finite-volume simulator and inequality checker", "kslab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation and write its artifacts");
  simulate->add_option("--config", config_path, "Run configuration (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  std::string plan_path;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--plan", plan_path, "Sweep plan (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides out_dir)");

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "Check the functional inequalities on field ensembles");
  std::vector<std::string> names;
  for (const auto& [k, v] : lemma_aliases()) names.push_back(k);
  verify_cmd->add_option("--lemma", vo.lemma, "gn, eta, truncation, sequence, log or all")
      ->check(CLI::IsMember(names));
  verify_cmd->add_option("--trials", vo.trials, "Ensemble size, or sequence trials")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", vo.seed, "Ensemble seed");
  verify_cmd->add_option("--resolutions", vo.resolutions, "Grid sizes for the field ensembles")->delimiter(',');
  verify_cmd->add_option("--out", vo.out, "Also write the report to this file");

  int levels = 3;
  std::string kind = "space";
  auto* converge = app.add_subcommand("converge", "Grid or step refinement study");
  converge->add_option("--config", config_path, "Run configuration (JSON)")->required();
  converge->add_option("--levels", levels, "Number of refinement levels")->check(CLI::Range(2, 8));
  converge->add_option("--kind", kind, "space or time")->check(CLI::IsMember({"space", "time"}));

  auto* validate = app.add_subcommand("validate", "Validate a configuration and its model");
  validate->add_option("--config", config_path, "Run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "kslab: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*validate) {
      const RunConfig cfg = load_config(config_path);
      const ValidationReport rep = validate_model(cfg.model, cfg.validation_v_max, cfg.validation_samples);
      json entries = json::array();
      for (const auto& e : rep.entries) {
        entries.push_back({{"condition", e.condition},
                           {"passed", e.passed},
                           {"witness", e.witness ? json(*e.witness) : json(nullptr)},
                           {"detail", e.detail}});
      }
      out << json{{"valid", true}, {"regime", to_string(rep.regime)}, {"checks", entries}, {"warnings", cfg.warnings}}
                 .dump(2)
          << '\n';
      return kOk;
    }
    if (*simulate) {
      RunConfig cfg = load_config(config_path);
      const auto dir = resolve_output_dir(out_dir.empty() ? cfg.output.dir : out_dir);
      for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
      const RunResult res = simulate_to_directory(cfg, dir);
      json s = res.summary();
      s["directory"] = dir.string();
      out << s.dump(2) << '\n';
      return res.outcome == Outcome::stalled ? kFailure : kOk;
    }
    if (*sweep) {
      const SweepPlan plan = load_sweep_plan(plan_path);
      const auto dir = resolve_output_dir(out_dir.empty() ? plan.out_dir : out_dir);
      const SweepTable table = run_sweep(plan, dir);
      out << table.to_csv();
      return kOk;
    }
    if (*verify_cmd) {
      bool passed = true;
      const json reports = verify(vo, passed);
      const json doc = {{"passed", passed}, {"seed", vo.seed}, {"reports", reports}};
      if (!vo.out.empty()) write_json(vo.out, doc);
      out << doc.dump(2) << '\n';
      return passed ? kOk : kFailure;
    }
    if (*converge) {
      const RunConfig cfg = load_config(config_path);
      const ConvergenceReport rep = convergence_study(cfg, levels, convergence_kind_from_string(kind));
      out << rep.to_json().dump(2) << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "kslab: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "kslab: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "kslab: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace kslab
