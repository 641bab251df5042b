#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "qfc/qfc.h"

namespace {

int report(qfc_status s) {
  std::fprintf(stderr, "qfc: %s: %s\n", qfc_status_name(s), qfc_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-measurement feedback control experiments"};
  app.set_version_flag("--version", std::string(qfc_version()));

  std::string experiment;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("experiment", experiment, "fig1a | fig1b | eps_sweep | mub_audit | steady_curve")
      ->required()
      ->check(CLI::IsMember({"fig1a", "fig1b", "eps_sweep", "mub_audit", "steady_curve"}));
  app.add_option("--config", config_path, "key = value configuration file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output_path)");
  CLI11_PARSE(app, argc, argv);

  qfc_config* cfg = nullptr;
  if (qfc_status s = qfc_config_load(experiment.c_str(), config_path.c_str(), &cfg); s != QFC_OK) return report(s);
  if (seed_opt->count() > 0) qfc_config_set_seed(cfg, seed);
  if (out_opt->count() == 0) out_dir = qfc_config_output_path(cfg);

  qfc_run_info info{};
  const qfc_status s = qfc_run_experiment(cfg, out_dir.c_str(), &info);
  qfc_config_free(cfg);
  if (s != QFC_OK) return report(s);
  std::printf("%s: wrote %d files to %s in %.2f s\n", experiment.c_str(), info.n_files, out_dir.c_str(),
              info.wall_time_s);
  return 0;
}
