#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dlab/error.hpp"
#include "internal.hpp"

namespace dlab::cli {

namespace fs = std::filesystem;

namespace detail {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::out | std::ios::trunc);
  if (!os) throw ConfigError("cli", "write", "cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << "\n";
  }
}

void write_series_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& [label, r] : rows) {
    for (double x : r) os << fmt(x) << ",";
    os << label << "\n";
  }
}

std::vector<std::vector<double>> read_csv(const fs::path& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "report", "missing artifact '" + path.string() + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (first) {
      first = false;
      if (header)
        while (std::getline(ss, cell, ',')) header->push_back(cell);
      continue;
    }
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) r.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "report", "missing artifact '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cli", "report", "unreadable JSON '" + path.string() + "': " + e.what());
  }
}

}  // namespace detail

namespace {

struct Run {
  std::string name;
  fs::path dir;
  json manifest;
  std::string kind() const { return manifest.at("config").at("kind"); }
  bool ok() const { return manifest.value("exit_code", 1) == 0; }
};

bool same_setup(const json& a, const json& b) {
  for (const char* k : {"nu", "kappa", "dt"}) {
    const double x = a.at(k).get<double>(), y = b.at(k).get<double>();
    if (std::abs(x - y) > 1e-12 * std::max(std::abs(x), std::abs(y))) return false;
  }
  return a.at("ell") == b.at("ell") && a.at("n") == b.at("n") && a.at("family") == b.at("family");
}

}  // namespace

json report(const fs::path& dir, const fs::path& out) {
  if (!fs::is_directory(dir)) throw ConfigError("cli", "report", "'" + dir.string() + "' is not a directory");
  std::vector<Run> runs;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() != "manifest.json") continue;
    Run r;
    r.dir = e.path().parent_path();
    r.manifest = detail::read_json(e.path());
    if (!r.manifest.contains("config") || !r.manifest.contains("version"))
      throw ConfigError("cli", "report", "'" + e.path().string() + "' is not a run manifest");
    if (r.kind() == "report") continue;
    r.name = fs::relative(r.dir, dir).generic_string();
    if (r.name.empty()) r.name = ".";
    runs.push_back(std::move(r));
  }
  if (runs.empty()) throw ConfigError("cli", "report", "no run manifests under '" + dir.string() + "'");
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.name < b.name; });
  std::set<std::string> versions;
  for (const auto& r : runs) versions.insert(r.manifest.at("version").get<std::string>());
  if (versions.size() > 1) {
    std::string all;
    for (const auto& v : versions) all += (all.empty() ? "" : ", ") + v;
    throw ConfigError("cli", "report", "manifests come from incompatible toolkit versions: " + all);
  }

  json summary = {{"version", *versions.begin()}};
  json listing = json::array(), failures = json::array();
  json scaling = json::array(), model = json::array(), decay = json::array(), mc = json::array(),
       kernel = json::array(), quasi = json::array(), profiles = json::array(), paired = json::array();
  std::vector<std::pair<std::string, std::vector<double>>> loglog, logtrace;
  std::vector<const Run*> moment_runs, mc_runs;

  auto collect = [&](const Run& r) {
    const std::string k = r.kind();
    if (k == "eig-scaling") {
      const json s = detail::read_json(r.dir / "scaling.json");
      scaling.push_back({{"run", r.name}, {"slope", s.at("slope")}, {"target", s.at("target")}, {"gap", s.at("gap")}});
      for (const auto& row : detail::read_csv(r.dir / "scaling.csv", nullptr))
        loglog.push_back({r.name, {std::log(row[0]), std::log(row[1])}});
    } else if (k == "model-problem") {
      const json s = detail::read_json(r.dir / "model_problem.json");
      for (const auto& f : s.at("fits")) {
        json e = f;
        e["run"] = r.name;
        model.push_back(e);
      }
      for (const auto& row : detail::read_csv(r.dir / "model_problem.csv", nullptr)) {
        const std::string series = r.name + ":(" + std::to_string(int(row[0])) + "," + std::to_string(int(row[1])) + ")";
        loglog.push_back({series, {std::log(row[2]), std::log(row[3])}});
      }
    } else if (k == "moments") {
      const json s = detail::read_json(r.dir / "decay.json");
      decay.push_back({{"run", r.name}, {"rate", s.at("rate")}, {"nu_mu", s.at("nu_mu")}, {"rel_gap", s.at("rel_gap")}});
      for (const auto& row : detail::read_csv(r.dir / "trace.csv", nullptr))
        if (row[1] > 0) logtrace.push_back({r.name, {row[0], std::log(row[1])}});
      moment_runs.push_back(&r);
    } else if (k == "mc") {
      if (fs::exists(r.dir / "mc.json")) {
        const json s = detail::read_json(r.dir / "mc.json");
        mc.push_back({{"run", r.name}, {"max_z", s.value("max_z", json(nullptr))},
                      {"n_paths", s.at("n_paths")}, {"effective_samples", s.at("effective_samples")}});
        for (const auto& row : detail::read_csv(r.dir / "ensemble.csv", nullptr))
          if (row[1] > 0) logtrace.push_back({r.name, {row[0], std::log(row[1])}});
        mc_runs.push_back(&r);
      } else {
        const json s = detail::read_json(r.dir / "lower_bound.json");
        mc.push_back({{"run", r.name}, {"max_z", s.at("max_z")}, {"bound_holds", s.at("bound_holds")}});
      }
    } else if (k == "kernel") {
      const json s = detail::read_json(r.dir / "kernel.json");
      kernel.push_back({{"run", r.name}, {"verdict", s.at("verdict")}, {"dim", s.at("dim")}});
    } else if (k == "quasimode") {
      const json s = detail::read_json(r.dir / "quasimode.json");
      quasi.push_back({{"run", r.name}, {"n0", s.at("n0")}, {"top_decade_variation", s.at("top_decade_variation")},
                       {"rayleigh_above_mu_min", s.at("rayleigh_above_mu_min")}});
    } else if (k == "profiles") {
      const json s = detail::read_json(r.dir / "profiles.json");
      profiles.push_back({{"run", r.name}, {"n0", s.at("n0")}});
    }
  };

  for (const auto& r : runs) {
    listing.push_back({{"run", r.name}, {"kind", r.kind()}, {"config_hash", r.manifest.at("config_hash")},
                       {"exit_code", r.manifest.at("exit_code")}});
    if (!r.ok())
      for (const auto& t : r.manifest.at("tasks"))
        if (t.at("status") != "ok") failures.push_back({{"run", r.name}, {"error", t.value("error", "")}});
    try {
      collect(r);
    } catch (const ConfigError&) {
      // A failed run may stop before writing everything.
      if (r.ok()) throw;
    }
  }

  // MC ensembles against deterministic traces with the same setup.
  for (const Run* m : mc_runs) {
    const json ms = detail::read_json(m->dir / "mc.json");
    const auto ens = detail::read_csv(m->dir / "ensemble.csv", nullptr);
    for (const Run* d : moment_runs) {
      const json ds = detail::read_json(d->dir / "decay.json");
      if (!same_setup(ms, ds)) continue;
      std::map<long, double> det;
      const double dt = ds.at("dt").get<double>();
      for (const auto& row : detail::read_csv(d->dir / "trace.csv", nullptr)) det[std::lround(row[0] / dt)] = row[1];
      double max_z = 0;
      long matched = 0;
      for (const auto& row : ens) {
        auto it = det.find(std::lround(row[0] / dt));
        if (it == det.end()) continue;
        const double se = std::max(row[2], 1e-12 * std::abs(it->second));
        max_z = std::max(max_z, std::abs(row[1] - it->second) / se);
        ++matched;
      }
      paired.push_back({{"mc_run", m->name}, {"moments_run", d->name}, {"max_z", max_z}, {"matched_times", matched}});
    }
  }

  summary["runs"] = listing;
  summary["failures"] = failures;
  summary["scaling"] = scaling;
  summary["model_problem"] = model;
  summary["decay"] = decay;
  summary["mc"] = mc;
  summary["mc_vs_moments"] = paired;
  summary["kernel"] = kernel;
  summary["quasimode"] = quasi;
  summary["profiles"] = profiles;

  fs::create_directories(out);
  detail::write_json(out / "summary.json", summary);
  detail::write_series_csv(out / "plot_loglog_mu.csv", {"x", "y", "series"}, loglog);
  detail::write_series_csv(out / "plot_log_trace.csv", {"x", "y", "series"}, logtrace);
  return summary;
}

}  // namespace dlab::cli
