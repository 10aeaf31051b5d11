#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "loopgas/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"loopgas: loop-model experiments in batch"};
  std::string spec_path, out_dir;
  int workers = 0;
  uint64_t seed = 0;
  bool validate_only = false;
  app.add_option("--spec", spec_path, "experiment spec file (JSON)")->required();
  app.add_option("--workers", workers, "override worker count");
  app.add_option("--seed", seed, "override base seed");
  app.add_option("--out", out_dir, "override output directory");
  app.add_flag("--validate-only", validate_only, "check the spec and exit");
  CLI11_PARSE(app, argc, argv);

  loopgas::ExperimentSpec spec;
  try {
    std::ifstream f(spec_path);
    if (!f) {
      std::fprintf(stderr, "cannot open spec file: %s\n", spec_path.c_str());
      return 2;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    spec = loopgas::parse_spec(loopgas::json::parse(buf.str()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spec error: %s\n", e.what());
    return 2;
  }
  if (app.count("--workers")) spec.workers = workers;
  if (app.count("--seed")) spec.seed = seed;
  if (app.count("--out")) spec.out = out_dir;

  auto diags = loopgas::validate_spec(spec);
  if (validate_only) {
    if (diags.empty()) {
      std::printf("spec ok: %s\n", spec.command.c_str());
      return 0;
    }
    for (const auto& d : diags) std::fprintf(stderr, "spec error: %s\n", d.c_str());
    return 2;
  }

  int code = loopgas::run_experiment(spec);
  if (code == 0)
    std::printf("ok: wrote %s/manifest.json\n", spec.out.c_str());
  else if (code == 3)
    std::fprintf(stderr, "partial failure: see %s/manifest.json\n", spec.out.c_str());
  return code;
}
