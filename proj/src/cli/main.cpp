#include <CLI11.hpp>
#include <iostream>

#include "dlab/error.hpp"
#include "internal.hpp"

namespace dlab::cli {

int main(int argc, char** argv) {
  CLI::App app{"Enhanced-dissipation numerics: scaling sweeps, moments, ensembles, kernel analyses"};
  app.set_version_flag("--version", toolkit_version());
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  bool verbose = false;
  auto* opt_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* opt_out = app.add_option("--out", out, "Output directory (overrides the config)");
  auto* opt_seed = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* opt_threads = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", verbose, "Progress on stderr");

  auto* rep = app.add_subcommand("report", "Merge the manifests under a directory");
  std::string rep_dir, rep_out;
  rep->add_option("dir", rep_dir, "Directory holding run outputs")->required();
  rep->add_option("--out", rep_out, "Where to write summary.json (default DIR/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*rep) {
      const std::filesystem::path target = rep_out.empty() ? std::filesystem::path(rep_dir) / "report" : std::filesystem::path(rep_out);
      const json s = report(rep_dir, target);
      std::cout << s.dump(2) << "\n";
      return 0;
    }
    if (!*opt_config) {
      std::cerr << "error [cli/main]: --config is required\n" << app.help();
      return 2;
    }
    Overrides ov;
    if (*opt_out) ov.out = out;
    if (*opt_seed) ov.seed = seed;
    if (*opt_threads) ov.threads = threads;
    const RunConfig cfg = load_config(config_path, ov);
    const RunResult res = run(cfg, verbose);
    for (const auto& t : res.tasks)
      if (t.status != "ok") std::cerr << "error: " << t.error << "\n";
    std::cout << res.summary.dump(2) << "\n";
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dlab::cli
