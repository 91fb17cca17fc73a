#include "kslab/output.hpp"

#include "kslab/error.hpp"
#include "kslab/field_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace kslab {

namespace fs = std::filesystem;

namespace {

class DiskObserver : public RunObserver {
public:
  DiskObserver(const fs::path& dir, const std::vector<double>& q_list) : dir_(dir) {
    fs::create_directories(dir_ / "snapshots");
    csv_.open(dir_ / "series.csv");
    if (!csv_) throw Error("cannot write '" + (dir_ / "series.csv").string() + "'");
    csv_ << csv_header(q_list) << '\n';
  }

  void on_record(const DiagnosticsRecord& r) override {
    csv_ << csv_row(r) << '\n';
    csv_.flush();
  }

  void on_snapshot(const State& s) override {
    char name[32];
    std::snprintf(name, sizeof name, "%04d.ksf", index_++);
    const fs::path u = fs::path("snapshots") / ("u_" + std::string(name));
    const fs::path v = fs::path("snapshots") / ("v_" + std::string(name));
    write_snapshot(dir_ / u, s.u, s.grid, s.t);
    write_snapshot(dir_ / v, s.v, s.grid, s.t);
    artifacts.push_back(u.string());
    artifacts.push_back(v.string());
  }

  std::vector<std::string> artifacts;

private:
  fs::path dir_;
  std::ofstream csv_;
  int index_{0};
};

}  // namespace

fs::path resolve_output_dir(const fs::path& configured) {
  if (configured.is_absolute()) return configured;
  if (const char* root = std::getenv("KSLAB_OUT"); root && *root) return fs::path(root) / configured;
  return configured;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

RunResult simulate_to_directory(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(cfg));
  DiskObserver obs(dir, cfg.diagnostics.q_list);
  RunResult res = run(cfg, &obs);
  res.artifacts = {"config.json", "series.csv"};
  res.artifacts.insert(res.artifacts.end(), obs.artifacts.begin(), obs.artifacts.end());
  res.artifacts.push_back("summary.json");
  write_json(dir / "summary.json", res.summary());
  return res;
}

}  // namespace kslab
