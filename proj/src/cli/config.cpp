#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "dlab/error.hpp"
#include "internal.hpp"

namespace dlab::cli {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("cli", "config", "field '" + path + "': " + what);
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Walks one JSON object, records defaults and rejects unknown keys on close().
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string at(const std::string& key) const { return join(path_, key); }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) fail(at(key), "is required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (!def) fail(at(key), "is required");
      return out_[key] = *def;
    }
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "must be finite");
    return out_[key] = x;
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    const double x = number(key, def);
    if (!(x > 0)) fail(at(key), "must be > 0");
    return x;
  }

  long integer(const std::string& key, std::optional<long> def = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (!def) fail(at(key), "is required");
      return out_[key] = *def;
    }
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "must be an integer");
    return out_[key] = v.get<long>();
  }

  long integer_min(const std::string& key, long lo, std::optional<long> def = std::nullopt) {
    const long x = integer(key, def);
    if (x < lo) fail(at(key), "must be >= " + std::to_string(lo));
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    if (!has(key)) return out_[key] = def;
    if (!j_.at(key).is_boolean()) fail(at(key), "must be true or false");
    return out_[key] = j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (!def) fail(at(key), "is required");
      out_[key] = *def;
      return *def;
    }
    if (!j_.at(key).is_string()) fail(at(key), "must be a string");
    out_[key] = j_.at(key);
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt,
                              std::size_t min_len = 1) {
    seen_.insert(key);
    std::vector<double> x;
    if (!has(key)) {
      if (!def) fail(at(key), "is required");
      x = *def;
    } else {
      const json& v = j_.at(key);
      if (!v.is_array()) fail(at(key), "must be an array of numbers");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "must be a number");
        x.push_back(v[i].get<double>());
      }
    }
    if (x.size() < min_len) fail(at(key), "needs at least " + std::to_string(min_len) + " entries");
    out_[key] = x;
    return x;
  }

  std::vector<long> integers(const std::string& key, std::optional<std::vector<long>> def = std::nullopt,
                             std::size_t min_len = 1) {
    seen_.insert(key);
    std::vector<long> x;
    if (!has(key)) {
      if (!def) fail(at(key), "is required");
      x = *def;
    } else {
      const json& v = j_.at(key);
      if (!v.is_array()) fail(at(key), "must be an array of integers");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) fail(at(key) + "[" + std::to_string(i) + "]", "must be an integer");
        x.push_back(v[i].get<long>());
      }
    }
    if (x.size() < min_len) fail(at(key), "needs at least " + std::to_string(min_len) + " entries");
    out_[key] = x;
    return x;
  }

  /// Stores a value validated elsewhere.
  void keep(const std::string& key, json v) {
    seen_.insert(key);
    out_[key] = std::move(v);
  }
  void skip(const std::string& key) { seen_.insert(key); }

  json close() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(at(k), "unknown field");
    return out_;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
  json out_ = json::object();
};

void family(Reader& r, const std::string& key = "family") {
  const json& j = r.raw(key);
  detail::family_from_json(j, r.at(key));
  r.keep(key, j);
}

void increasing_positive(Reader& r, const std::string& key, const std::vector<double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0)) fail(r.at(key) + "[" + std::to_string(i) + "]", "must be > 0");
    if (i > 0 && !(x[i] > x[i - 1])) fail(r.at(key), "must be strictly increasing");
  }
}

json check_profiles(Reader& r) {
  family(r);
  return r.close();
}

json check_scaling(Reader& r) {
  family(r);
  increasing_positive(r, "lambdas", r.numbers("lambdas", std::nullopt, 2));
  r.boolean("richardson", true);
  r.positive("richardson_tol", 0.01);
  if (r.has("grid")) r.integer_min("grid", 16);
  if (r.has("tol_eig")) r.positive("tol_eig");
  return r.close();
}

json check_model(Reader& r) {
  json cases = json::array({{1, 1}, {1, 2}, {2, 1}});
  if (r.has("cases")) {
    cases = r.raw("cases");
    if (!cases.is_array() || cases.empty()) fail(r.at("cases"), "must be a non-empty array of [m, n] pairs");
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const json& c = cases[i];
      const std::string p = r.at("cases") + "[" + std::to_string(i) + "]";
      if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
        fail(p, "must be a pair of integers [m, n]");
      if (c[0].get<long>() < 1 || c[1].get<long>() < 1) fail(p, "exponents must be >= 1");
    }
  }
  r.keep("cases", cases);
  const long sign = r.integer("sign", -1);
  if (sign != 1 && sign != -1) fail(r.at("sign"), "must be +1 or -1");
  increasing_positive(r, "lambdas", r.numbers("lambdas", std::vector<double>{16, 32, 64, 128, 256, 512}, 2));
  r.positive("half_width", 2.0);
  r.integer_min("points", 8, 255);
  return r.close();
}

json check_kernel(Reader& r) {
  const std::string gen = r.string("generator");
  if (gen == "galerkin_2d") {
    const json& f = r.raw("fields");
    if (!f.is_array() || f.empty()) fail(r.at("fields"), "must be a non-empty array");
    for (std::size_t i = 0; i < f.size(); ++i) detail::field_from_json(f[i], r.at("fields") + "[" + std::to_string(i) + "]");
    r.keep("fields", f);
    r.boolean("mean_free", true);
  } else if (gen == "galerkin_shear") {
    family(r);
    const long ell = r.integer("ell", 1);
    if (ell == 0) fail(r.at("ell"), "must be nonzero");
  } else if (gen == "matrices") {
    const json& m = r.raw("hermitian");
    if (!m.is_array() || m.empty()) fail(r.at("hermitian"), "must be a non-empty array of matrices");
    long d = -1;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto a = detail::hermitian_from_json(m[i], r.at("hermitian") + "[" + std::to_string(i) + "]");
      if (d >= 0 && a.rows() != d) fail(r.at("hermitian"), "matrices differ in size");
      d = a.rows();
    }
    r.keep("hermitian", m);
  } else {
    fail(r.at("generator"), "must be one of galerkin_2d, galerkin_shear, matrices");
  }
  if (gen != "matrices") {
    const auto k = r.integers("cutoffs", std::nullopt, 3);
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] < 1) fail(r.at("cutoffs") + "[" + std::to_string(i) + "]", "must be >= 1");
      if (i > 0 && k[i] <= k[i - 1]) fail(r.at("cutoffs"), "must be strictly increasing");
    }
  }
  r.positive("tol_null", 1e-9);
  r.positive("min_gap", 10.0);
  return r.close();
}

void moment_common(Reader& r) {
  family(r);
  r.positive("nu");
  if (r.number("kappa") < 0) fail(r.at("kappa"), "must be >= 0");
  if (r.integer("ell") == 0) fail(r.at("ell"), "must be nonzero");
  r.positive("dt_factor", 0.02);
  if (r.has("dt")) r.positive("dt");
  if (r.has("t_final")) r.positive("t_final");
}

json check_moments(Reader& r) {
  moment_common(r);
  if (r.has("n")) r.integer_min("n", 16);
  r.positive("efolds", 8.0);
  r.integer_min("record_every", 1, 1);
  return r.close();
}

json check_mc(Reader& r) {
  moment_common(r);
  r.integer_min("n", 16, 128);
  r.integer_min("n_paths", 2);
  r.positive("efolds", std::log(10.0));
  r.boolean("antithetic", true);
  r.integer_min("checkpoints", 0, 4);
  r.boolean("compare_moments", true);
  if (r.has("lower_bound")) {
    Reader lb(r.raw("lower_bound"), r.at("lower_bound"));
    lb.number("y0");
    r.keep("lower_bound", lb.close());
  }
  return r.close();
}

json check_quasimode(Reader& r) {
  family(r);
  if (r.has("y0")) r.number("y0");
  increasing_positive(r, "lambdas", r.numbers("lambdas", std::vector<double>{16, 32, 64, 128, 256, 512}, 2));
  if (r.has("beta")) r.positive("beta");
  r.integer_min("grid_points", 64, 2048);
  r.boolean("with_eigenvalue", true);
  return r.close();
}

json check_report(Reader& r) {
  r.string("dir");
  return r.close();
}

const std::map<std::string, std::function<json(Reader&)>>& checkers() {
  static const std::map<std::string, std::function<json(Reader&)>> m = {
      {"profiles", check_profiles}, {"eig-scaling", check_scaling}, {"model-problem", check_model},
      {"kernel", check_kernel},     {"moments", check_moments},     {"mc", check_mc},
      {"quasimode", check_quasimode}, {"report", check_report}};
  return m;
}

std::vector<double> json_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of numbers");
  std::vector<double> x;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "must be a number");
    x.push_back(j[i].get<double>());
  }
  return x;
}

}  // namespace

namespace detail {

ShearProfile profile_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return ShearProfile::constant(j.get<double>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "sin") return ShearProfile::sine();
    if (s == "cos") return ShearProfile::cosine();
    if (s == "sin^3") return sin_cubed();
    static const std::regex wave(R"((sin|cos)\((\d+)y\))");
    std::smatch m;
    if (std::regex_match(s, m, wave)) {
      const int k = std::stoi(m[2]);
      if (k < 1) fail(path, "wavenumber must be >= 1");
      return m[1] == "sin" ? ShearProfile::sine(k) : ShearProfile::cosine(k);
    }
    fail(path, "unknown profile '" + s + "' (expected sin, cos, sin^3, sin(ky), cos(ky), a number or {a, b})");
  }
  if (j.is_object()) {
    Reader r(j, path);
    std::vector<double> a{0.0}, b;
    if (r.has("a")) a = json_numbers(r.raw("a"), r.at("a"));
    if (r.has("b")) b = json_numbers(r.raw("b"), r.at("b"));
    r.close();
    if (a.empty()) a = {0.0};
    try {
      return ShearProfile(a, b);
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  fail(path, "must be a profile name, a number or {\"a\": [...], \"b\": [...]}");
}

ProfileFamily family_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a non-empty array of profiles");
  std::vector<ShearProfile> p;
  for (std::size_t i = 0; i < j.size(); ++i) p.push_back(profile_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return ProfileFamily(std::move(p));
}

TrigField2D field_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) fail(path, "must be {\"shear_x\": profile} or {\"shear_y\": profile}");
  if (j.contains("shear_x")) return TrigField2D::shear_x(profile_from_json(j.at("shear_x"), path + ".shear_x"));
  if (j.contains("shear_y")) return TrigField2D::shear_y(profile_from_json(j.at("shear_y"), path + ".shear_y"));
  fail(path + "." + j.begin().key(), "unknown field");
}

Eigen::MatrixXcd hermitian_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  auto rows = [&](const std::string& key) {
    const json& m = r.raw(key);
    if (!m.is_array() || m.empty()) fail(r.at(key), "must be a non-empty array of rows");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
      out.push_back(json_numbers(m[i], r.at(key) + "[" + std::to_string(i) + "]"));
      if (out.back().size() != m.size()) fail(r.at(key), "must be square");
    }
    return out;
  };
  const auto re = rows("re");
  const int d = static_cast<int>(re.size());
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) a(i, k) = re[i][k];
  if (r.has("im")) {
    const auto im = rows("im");
    if (static_cast<int>(im.size()) != d) fail(r.at("im"), "size differs from re");
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) a(i, k) += cplx(0, im[i][k]);
  }
  r.close();
  if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm())) fail(path, "matrix is not Hermitian");
  return a;
}

}  // namespace detail

std::optional<int> threads_from_env() {
  const char* s = std::getenv("DISSIPATION_LAB_THREADS");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024)
    throw ConfigError("cli", "config", "DISSIPATION_LAB_THREADS must be a positive integer");
  return static_cast<int>(v);
}

RunConfig parse_config(const json& doc, const Overrides& ov) {
  Reader top(doc, "");
  RunConfig c;
  c.kind = top.string("kind");
  const auto& table = checkers();
  auto it = table.find(c.kind);
  if (it == table.end()) {
    std::string all;
    for (const auto& k : experiment_kinds()) all += (all.empty() ? "" : ", ") + k;
    fail("kind", "must be one of " + all);
  }
  json params = json::object();
  if (top.has("params")) params = top.raw("params");
  else top.skip("params");
  Reader pr(params, "params");
  c.params = it->second(pr);

  if (top.has("out")) c.out = top.string("out");
  else top.skip("out");
  if (ov.out) c.out = *ov.out;
  if (c.out.empty()) fail("out", "is required (in the config or via --out)");

  if (top.has("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      fail("seed", "must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (ov.seed) c.seed = *ov.seed;

  std::optional<int> threads;
  if (top.has("threads")) threads = static_cast<int>(top.integer_min("threads", 1));
  else top.skip("threads");
  if (ov.threads) threads = *ov.threads;
  if (!threads) threads = threads_from_env();
  c.threads = threads.value_or(1);
  if (c.threads < 1) fail("threads", "must be >= 1");
  top.close();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "config", "cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cli", "config", "invalid JSON in '" + path.string() + "': " + e.what());
  }
  return parse_config(doc, ov);
}

json to_json(const RunConfig& c) {
  return json{{"kind", c.kind}, {"params", c.params}, {"seed", c.seed}, {"threads", c.threads}};
}

std::string config_hash(const RunConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace dlab::cli
