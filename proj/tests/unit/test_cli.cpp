#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "dlab/cli.hpp"
#include "dlab/error.hpp"

using namespace dlab;
using cli::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("dlab_cli_" + name + "_" + std::to_string(rd()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_error(json doc) {
  doc["out"] = "unused";
  try {
    cli::parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

json read(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("validation errors name the offending field") {
  CHECK(config_error({{"kind", "nope"}}).find("kind") != std::string::npos);
  CHECK_THROWS_AS(cli::parse_config({{"kind", "profiles"}, {"params", {{"family", {"sin"}}}}}), ConfigError);
  const std::string unknown = config_error({{"kind", "profiles"}, {"params", {{"family", {"sin"}}, {"bogus", 1}}}});
  CHECK(unknown.find("params.bogus") != std::string::npos);
  const std::string lam = config_error({{"kind", "eig-scaling"}, {"params", {{"family", {"sin"}}, {"lambdas", {10}}}}});
  CHECK(lam.find("params.lambdas") != std::string::npos);
  const std::string nu = config_error({{"kind", "moments"}, {"params", {{"family", {"sin"}}, {"nu", -1}, {"kappa", 1}, {"ell", 1}}}});
  CHECK(nu.find("params.nu") != std::string::npos);
  CHECK(config_error({{"kind", "profiles"}, {"params", {{"family", {"sin"}}}}, {"surprise", true}}).find("surprise") !=
        std::string::npos);
}

TEST_CASE("defaults are filled in and the hash is stable") {
  const json doc = {{"kind", "moments"},
                    {"params", {{"family", {"sin"}}, {"nu", 0.1}, {"kappa", 0.1}, {"ell", 1}}},
                    {"out", "unused"}};
  const cli::RunConfig a = cli::parse_config(doc);
  CHECK(a.params.at("dt_factor").get<double>() == doctest::Approx(0.02));
  CHECK(a.params.at("efolds").get<double>() == doctest::Approx(8.0));
  // The output directory is not part of the hash.
  json again = cli::to_json(a);
  again["out"] = "elsewhere";
  const cli::RunConfig b = cli::parse_config(again);
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  cli::Overrides ov;
  ov.seed = 99;
  CHECK(cli::config_hash(cli::parse_config(doc, ov)) != cli::config_hash(a));
  ov = {};
  ov.threads = 4;
  CHECK(cli::parse_config(doc, ov).threads == 4);
}

TEST_CASE("profiles run writes a manifest and artifacts; report merges it") {
  const fs::path root = scratch("run");
  cli::RunConfig c = cli::parse_config({{"kind", "profiles"}, {"params", {{"family", {"sin", "cos"}}}}, {"out", (root / "a").string()}});
  c.out = root / "a";
  const cli::RunResult r = cli::run(c, false);
  CHECK(r.exit_code == 0);
  const json m = read(root / "a" / "manifest.json");
  CHECK(m.at("version") == cli::toolkit_version());
  CHECK(m.at("config_hash") == cli::config_hash(c));
  CHECK(read(root / "a" / "profiles.json").at("n0") == 0);

  const json s = cli::report(root, root / "report");
  CHECK(s.at("runs").size() == 1);
  CHECK(fs::exists(root / "report" / "summary.json"));
  // Reports written inside the tree are skipped on a second pass.
  CHECK(cli::report(root, root / "report").at("runs").size() == 1);

  json other = m;
  other["version"] = "0.0.0-other";
  fs::create_directories(root / "b");
  std::ofstream(root / "b" / "manifest.json") << other.dump();
  CHECK_THROWS_AS(cli::report(root, root / "report"), ConfigError);
  fs::remove_all(root);
}

TEST_CASE("report on a directory without manifests fails") {
  const fs::path root = scratch("empty");
  CHECK_THROWS_AS(cli::report(root, root / "report"), ConfigError);
  fs::remove_all(root);
}

TEST_CASE("a run and its rerun agree artifact by artifact") {
  const fs::path root = scratch("det");
  cli::RunConfig c = cli::parse_config(
      {{"kind", "moments"},
       {"params", {{"family", {"sin"}}, {"nu", 0.2}, {"kappa", 0.2}, {"ell", 1}, {"n", 16}, {"efolds", 6}}},
       {"out", (root / "x").string()}});
  for (const char* d : {"x", "y"}) {
    c.out = root / d;
    CHECK(cli::run(c, false).exit_code == 0);
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const char* f : {"trace.csv", "decay.json"}) CHECK(slurp(root / "x" / f) == slurp(root / "y" / f));
  fs::remove_all(root);
}
