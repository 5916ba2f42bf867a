#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "fracsphere/bubbles.hpp"
#include "fracsphere/conformal.hpp"
#include "fracsphere/degree.hpp"
#include "fracsphere/errors.hpp"
#include "fracsphere/harmonics.hpp"
#include "fracsphere/special.hpp"
#include "fracsphere/variational.hpp"

namespace fracsphere::cli {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "eig-check", "op-xcheck",  "conformal-check", "bubble-check", "interaction-scan",
      "solve",     "continue",   "kw-check",        "quotient-check", "aubin",
      "aubin-sobolev", "g-scan", "degree",          "index-count",  "omega-scan"};
  return names;
}

namespace {

template <class T>
T get_as(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void apply_config(RunOptions& opt, const Json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : config.items()) {
    if (key == "command") {
      const auto c = get_as<std::string>(v, key);
      if (!opt.command.empty() && c != opt.command) throw ConfigError("config is for '" + c + "', not '" + opt.command + "'");
      opt.command = c;
    } else if (key == "n") {
      opt.n = get_as<int>(v, key);
    } else if (key == "sigma") {
      opt.sigma = get_as<double>(v, key);
    } else if (key == "lmax") {
      opt.lmax = get_as<int>(v, key);
    } else if (key == "grid") {
      opt.grid = get_as<std::string>(v, key);
    } else if (key == "out") {
      opt.out = get_as<std::string>(v, key);
    } else if (key == "seed") {
      opt.seed = get_as<std::uint64_t>(v, key);
      opt.seed_set = true;
    } else if (key == "kmax") {
      opt.kmax = get_as<int>(v, key);
    } else if (key == "beta") {
      opt.beta = get_as<double>(v, key);
    } else if (key == "k_preset") {
      opt.k_preset = get_as<std::string>(v, key);
    } else if (key == "eps") {
      opt.eps = get_as<double>(v, key);
    } else if (key == "s") {
      opt.s = get_as<double>(v, key);
    } else if (key == "p") {
      opt.p = get_as<double>(v, key);
    } else if (key == "a") {
      opt.a = get_as<double>(v, key);
    } else if (key == "samples") {
      opt.samples = get_as<int>(v, key);
    } else if (key == "subdivision") {
      opt.subdivision = get_as<int>(v, key);
    } else if (key == "schedule") {
      opt.schedule = get_as<std::string>(v, key);
    } else if (key == "t_list") {
      opt.t_list = get_as<std::string>(v, key);
    } else if (key == "beta_list") {
      opt.beta_list = get_as<std::string>(v, key);
    } else if (key == "symmetry") {
      opt.symmetry = get_as<std::string>(v, key);
    } else if (key == "field") {
      opt.field = get_as<std::string>(v, key);
    } else if (key == "verify") {
      opt.verify = get_as<bool>(v, key);
    } else if (key == "models") {
      if (!v.is_array()) throw ConfigError("config key 'models' must be an array");
      opt.models = v;
    } else if (key == "background") {
      if (!v.is_object()) throw ConfigError("config key 'background' must be an object");
      opt.background = v;
    } else if (key == "k_coeffs") {
      opt.k_coeffs = v;
    } else if (key == "poles") {
      if (!v.is_array()) throw ConfigError("config key 'poles' must be an array");
      opt.poles = v;
    } else if (key == "c") {
      opt.quad_c = v;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

namespace {

std::string sci(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

struct Check {
  std::string status;  // PASS, FAIL, INCONCLUSIVE, INFO
  std::string tag;
  double value = 0.0;
  double tol = 0.0;
  std::string detail;
};

class Context {
 public:
  Context(const RunOptions& o, std::ostream& out) : opt(o), out_(out) {}

  const RunOptions& opt;
  FracOperatorSpec spec;
  Json results;

  void check(const std::string& tag, double value, double tol, bool pass, const std::string& detail = "") {
    add({pass ? "PASS" : "FAIL", tag, value, tol, detail});
  }
  void inconclusive(const std::string& tag, double value, double tol, const std::string& detail) {
    add({"INCONCLUSIVE", tag, value, tol, detail});
  }
  void info(const std::string& tag, double value, const std::string& detail = "") {
    add({"INFO", tag, value, 0.0, detail});
  }

  bool all_passed() const {
    for (const auto& c : checks_)
      if (c.status == "FAIL" || c.status == "INCONCLUSIVE") return false;
    return true;
  }

  Json checks_json() const {
    Json a = Json::array();
    for (const auto& c : checks_) {
      Json j;
      j["status"] = c.status;
      j["tag"] = c.tag;
      j["value"] = std::isfinite(c.value) ? Json(c.value) : Json(nullptr);
      if (c.status != "INFO") j["tolerance"] = c.tol;
      if (!c.detail.empty()) j["detail"] = c.detail;
      a.push_back(j);
    }
    return a;
  }

  void write(const std::string& name, const std::string& text) const {
    if (opt.out.empty()) return;
    write_text((std::filesystem::path(opt.out) / name).string(), text);
  }
  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  void add(Check c) {
    std::string line = c.status + " " + c.tag + " value=" + sci(c.value);
    if (c.status != "INFO") line += " tol=" + sci(c.tol);
    if (!c.detail.empty()) line += " (" + c.detail + ")";
    out_ << line << "\n";
    checks_.push_back(std::move(c));
  }
  std::ostream& out_;
  std::vector<Check> checks_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(item, &pos));
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (v.empty()) throw ConfigError(std::string(what) + " is empty");
  return v;
}

GridRef parse_grid(const std::string& text, int n, const std::string& fallback) {
  const std::string g = text.empty() ? fallback : text;
  std::vector<int> counts;
  std::stringstream ss(g);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    try {
      counts.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse grid '" + g + "'");
    }
  }
  if (static_cast<int>(counts.size()) != n) throw ConfigError("grid needs " + std::to_string(n) + " counts");
  return SphereGrid::build(n, counts);
}

int pick(int v, int fallback) { return v >= 0 ? v : fallback; }
double pick(double v, double fallback) { return v >= 0.0 ? v : fallback; }
std::uint64_t seed_of(const RunOptions& o, std::uint64_t fallback) { return o.seed_set ? o.seed : fallback; }

void require_n2(const Context& c) {
  if (c.spec.n != 2) throw ConfigError(c.opt.command + " supports n = 2 only");
}

Vec4 vec_from(const Json& j) {
  if (!j.is_array() || j.empty() || j.size() > 4) throw ConfigError("vectors are arrays of 1 to 4 numbers");
  Vec4 v{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = get_as<double>(j[i], "vector entry");
  return v;
}

std::vector<Vec4> poles_of(const Context& c, const Vec4& fallback) {
  if (c.opt.poles.is_null() || c.opt.poles.empty()) return {fallback};
  std::vector<Vec4> out;
  for (const Json& p : c.opt.poles) {
    const Vec4 v = vec_from(p);
    if (norm(v) == 0.0) throw ConfigError("pole must be nonzero");
    out.push_back(normalized(v));
  }
  return out;
}

struct KChoice {
  std::string preset;
  double eps = 0.0;
  SphereFunctionRef K;
  bool is_model = false;
  std::vector<CriticalPointModel> models;
};

SphereFunctionRef simple_preset(const std::string& name, int n, double eps) {
  if (name == "const") return constant_function(n, 1.0);
  if (name == "tilt") return tilt_function(n, eps);
  if (name == "even-band") return even_band_function(n, eps);
  throw ConfigError("unknown K preset '" + name + "'");
}

double preset_eps(const std::string& name, double eps) {
  if (eps >= 0.0) return eps;
  return name == "even-band" ? 0.2 : 0.1;
}

Vec4 quad_coefficients(const RunOptions& o) {
  if (o.quad_c.is_null()) return {0.1, 0.2, 0.4, 0.8};
  return vec_from(o.quad_c);
}

KChoice make_K(const RunOptions& o, int n, const std::string& fallback) {
  KChoice k;
  k.preset = o.k_preset.empty() ? fallback : o.k_preset;
  k.eps = preset_eps(k.preset, o.eps);
  if (k.preset == "const" || k.preset == "tilt" || k.preset == "even-band") {
    k.K = simple_preset(k.preset, n, k.eps);
  } else if (k.preset == "harmonic") {
    if (n != 2 || o.k_coeffs.is_null()) throw ConfigError("harmonic K needs n = 2 and k_coeffs");
    k.K = spectral_function(spectral_from_json(o.k_coeffs));
  } else if (k.preset == "tilt-model") {
    const ModelConfig m = tilt_model(n, k.eps, pick(o.beta, 1.5));
    k.K = m.K;
    k.models = m.models;
    k.is_model = true;
  } else if (k.preset == "quadratic-model") {
    const ModelConfig m = quadratic_model(n, 1.0, quad_coefficients(o), pick(o.beta, 1.5));
    k.K = m.K;
    k.models = m.models;
    k.is_model = true;
  } else if (k.preset == "model") {
    if (o.models.empty()) throw ConfigError("K preset 'model' needs a models list");
    for (const Json& m : o.models) k.models.push_back(model_from_json(m, n));
    SphereFunctionRef bg = constant_function(n, 1.0);
    if (!o.background.is_null()) {
      const std::string name = o.background.value("preset", std::string("const"));
      bg = simple_preset(name, n, preset_eps(name, o.background.value("eps", -1.0)));
    }
    k.K = glued_model(bg, k.models);
    k.is_model = true;
  } else {
    throw ConfigError("unknown K preset '" + k.preset + "'");
  }
  return k;
}

SpectralField random_field(std::mt19937_64& rng, int lmax, double c00) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField c(lmax);
  for (int k = 0; k <= lmax; ++k)
    for (int m = -k; m <= k; ++m) c.at(k, m) = normal(rng) / (1.0 + k);
  c.at(0, 0) += c00;
  return c;
}

double rel_l2(const GridField& a, const GridField& b) {
  double num = 0.0, den = 0.0;
  const auto& w = a.grid->weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += w[i] * (a[i] - b[i]) * (a[i] - b[i]);
    den += w[i] * b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double power_integral(const GridField& v, double q) {
  double s = 0.0;
  const auto& w = v.grid->weights();
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]), q);
  return s;
}

// ---------------------------------------------------------------------------

void cmd_eig_check(Context& c) {
  const int kmax = c.opt.kmax;
  if (kmax < 1 || kmax > 100000) throw ConfigError("kmax must lie in [1, 100000]");
  const FracOperatorSpec& s = c.spec;
  CsvTable csv({"k", "lambda", "multiplicity"});
  double rec = 0.0, closed = 0.0;
  bool monotone = true;
  for (int k = 0; k <= kmax; ++k) {
    const double l = s.lambda(k);
    csv.add_row(std::vector<double>{double(k), l, multiplicity(k, s.n)});
    if (k > 0) {
      const double prev = s.lambda(k - 1);
      monotone = monotone && l > prev;
      const double h = 0.5 * s.n;
      rec = std::max(rec, std::abs(l / prev - (k - 1 + h + s.sigma) / (k - 1 + h - s.sigma)));
    }
    if (s.n == 2 && s.sigma == 0.5) closed = std::max(closed, std::abs(l - (k + 0.5)));
  }
  c.check("gamma-recurrence", rec, 1e-12, rec < 1e-12);
  c.check("eigenvalue-monotone", monotone ? 0.0 : 1.0, 0.0, monotone);
  const double ratio = s.lambda(1) / s.lambda(0) - (s.n + 2 * s.sigma) / (s.n - 2 * s.sigma);
  c.check("first-eigenvalue-ratio", std::abs(ratio), 1e-12, std::abs(ratio) < 1e-12);
  if (s.n == 2 && s.sigma == 0.5) c.check("eigenvalue-closed-form", closed, 1e-12, closed < 1e-12);
  const double m1 = multiplicity(1, s.n) - (s.n + 1);
  c.check("multiplicity", std::abs(m1), 0.0, m1 == 0.0);
  c.write("eigenvalues.csv", csv.str());
}

void cmd_op_xcheck(Context& c) {
  require_n2(c);
  const GridRef g = parse_grid(c.opt.grid, 2, "128x256");
  const int samples = pick(c.opt.samples, 10);
  const int lmax = pick(c.opt.lmax, 8);
  HarmonicTransform tr(g, lmax);
  std::mt19937_64 rng(seed_of(c.opt, 1));
  CsvTable csv({"sample", "singular_rel_l2", "riesz_rel_l2"});
  double worst_s = 0.0, worst_r = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SpectralField v = random_field(rng, lmax, 0.0);
    const GridField vg = tr.inverse(v);
    const GridField ex = tr.inverse(apply_ps_spectral(v, c.spec));
    const double es = rel_l2(apply_ps_singular(vg, c.spec), ex);
    const double er = rel_l2(riesz_potential(ex, c.spec), vg);
    worst_s = std::max(worst_s, es);
    worst_r = std::max(worst_r, er);
    csv.add_row(std::vector<double>{double(i), es, er});
  }
  c.check("singular-integral-form", worst_s, 1e-3, worst_s < 1e-3, std::to_string(samples) + " fields");
  c.check("riesz-form", worst_r, 1e-3, worst_r < 1e-3);
  SpectralField v(std::max(lmax, 2));
  v.at(0, 0) = std::sqrt(c.spec.volume());
  v.at(2, 1) = 0.3;
  HarmonicTransform tr2(g, v.lmax);
  const GridField vg = tr2.inverse(v);
  const GridField back = riesz_potential(tr2.inverse(apply_ps_spectral(v, c.spec)), c.spec);
  double sup = 0.0;
  for (std::size_t i = 0; i < vg.size(); ++i) sup = std::max(sup, std::abs(back[i] - vg[i]));
  c.check("riesz-inversion", sup, 1e-3, sup < 1e-3, "1 + 0.3 Y_2^1");
  c.write("op_xcheck.csv", csv.str());
}

void cmd_conformal_check(Context& c) {
  require_n2(c);
  const int samples = pick(c.opt.samples, 20);
  const int lmax = pick(c.opt.lmax, 8);
  const int fine = 96;
  const GridRef g = default_grid(fine, 4.0);
  const GridRef g0 = default_grid(lmax, 4.0);
  HarmonicTransform tr(g, fine);
  std::mt19937_64 rng(seed_of(c.opt, 3));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(1.0, 4.0);
  const double q = c.spec.critical_exponent();
  CsvTable csv({"sample", "P1", "P2", "P3", "t", "energy_drift", "critical_norm_drift"});
  double worst_e = 0.0, worst_q = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SpectralField v = random_field(rng, lmax, 2.0);
    Vec4 P{normal(rng), normal(rng), normal(rng), 0.0};
    P = normalized(P);
    const double t = uni(rng);
    const GridField T = pushforward_T(v, ConformalParam(P, t), g, c.spec);
    const double e0 = hsigma_energy(v, c.spec), e1 = hsigma_energy(tr.forward(T), c.spec);
    const double q0 = power_integral(sht_inverse(v, g0), q), q1 = power_integral(T, q);
    const double de = std::abs(e1 - e0) / e0, dq = std::abs(q1 - q0) / q0;
    worst_e = std::max(worst_e, de);
    worst_q = std::max(worst_q, dq);
    csv.add_row(std::vector<double>{double(i), P[0], P[1], P[2], t, de, dq});
  }
  c.check("conformal-invariance-energy", worst_e, 1e-6, worst_e < 1e-6);
  c.check("conformal-invariance-critical-norm", worst_q, 1e-6, worst_q < 1e-6);
  // group law and Jacobian mass on random points
  double group = 0.0;
  const Vec4 P = normalized(Vec4{0.2, -0.7, 0.4, 0.0});
  for (int i = 0; i < 200; ++i) {
    const Vec4 x = normalized(Vec4{normal(rng), normal(rng), normal(rng), 0.0});
    const Vec4 a = phi_apply(P, 1.7, phi_apply(P, 2.3, x, 2).image, 2).image;
    const Vec4 b = phi_apply(P, 1.7 * 2.3, x, 2).image;
    group = std::max(group, norm(a - b));
  }
  c.check("dilation-group-law", group, 1e-12, group < 1e-12);
  double mass = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) mass += g->weights()[i] * phi_apply(P, 3.0, g->nodes()[i], 2).jacobian;
  const double dm = std::abs(mass - c.spec.volume());
  c.check("jacobian-mass", dm, 1e-8, dm < 1e-8);
  c.write("conformal_check.csv", csv.str());
}

void cmd_bubble_check(Context& c) {
  require_n2(c);
  const double beta = pick(c.opt.beta, 1.5);
  const int lmax = pick(c.opt.lmax, 64);
  const Bubble b(unit_vector(2), beta, c.spec);
  const double r = bubble_residual(b, lmax);
  c.check("bubble-equation", r, 1e-8, r < 1e-8);
  const GridRef g = parse_grid(c.opt.grid, 2, "128x256");
  const double m = std::abs(power_integral(bubble_field(b, g), c.spec.critical_exponent()) - c.spec.volume());
  c.check("bubble-critical-mass", m, 1e-8, m < 1e-8);
  Json j;
  j["beta"] = beta;
  j["lmax"] = lmax;
  j["residual"] = r;
  j["mass_error"] = m;
  c.results["bubble"] = j;
}

void cmd_interaction_scan(Context& c) {
  require_n2(c);
  const std::vector<double> d = parse_list(c.opt.beta_list.empty() ? "0.1,0.05,0.025" : c.opt.beta_list, "beta_list");
  const double A = interaction_constant(c.spec);
  const double expo = 0.5 * (c.spec.n - 2.0 * c.spec.sigma);
  CsvTable csv({"beta", "integral", "ratio", "A_reference"});
  std::vector<double> ratios;
  for (double x : d) {
    if (!(x > 0.0)) throw ConfigError("beta - 1 must be positive");
    const double I = interaction_integral(1.0 + x, c.spec);
    ratios.push_back(I / std::pow(x, expo));
    csv.add_row(std::vector<double>{1.0 + x, I, ratios.back(), A});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    monotone = monotone && std::abs(ratios[i] - A) < std::abs(ratios[i - 1] - A);
  c.check("interaction-monotone-approach", monotone ? 0.0 : 1.0, 0.0, monotone);
  const double rel = std::abs(ratios.back() - A) / A;
  c.check("interaction-constant", rel, 0.05, rel < 0.05, "A = " + sci(A));
  c.write("interaction_scan.csv", csv.str());
}

SolverConfig solver_config(const Context& c, const KChoice& k) {
  SolverConfig cfg;
  cfg.p = pick(c.opt.p, 2.5);
  cfg.lmax = pick(c.opt.lmax, 16);
  cfg.seed = seed_of(c.opt, 1);
  if (c.opt.symmetry == "antipodal" || (c.opt.symmetry == "auto" && k.preset == "even-band")) {
    cfg.symmetry = Symmetry::antipodal;
  } else if (c.opt.symmetry != "none" && c.opt.symmetry != "auto") {
    throw ConfigError("symmetry must be none, antipodal or auto");
  }
  return cfg;
}

void solution_checks(Context& c, const SolutionRecord& r, const KChoice& k) {
  c.check("subcritical-convergence", r.el_residual, 1e-6, r.converged && r.el_residual < 1e-6,
          std::to_string(r.iterations) + " iterations");
  double vmin = HUGE_VAL;
  for (double x : r.v_grid.values) vmin = std::min(vmin, x);
  c.check("positivity", vmin, 0.0, vmin > 0.0);
  const double dc = std::abs(r.constraint - 1.0);
  c.check("constraint", dc, 1e-8, dc < 1e-8);
  c.check("kazdan-warner", r.kw_residual, 1e-4, r.kw_residual < 1e-4);
  if (k.preset == "const") {
    const double bound = c.spec.p1() * std::pow(c.spec.volume(), (r.p - 1.0) / (r.p + 1.0));
    c.check("constant-competitor-bound", r.lambda - bound, 1e-6, r.lambda <= bound + 1e-6);
  }
}

void cmd_solve(Context& c) {
  require_n2(c);
  const KChoice k = make_K(c.opt, c.spec.n, "const");
  const SolverConfig cfg = solver_config(c, k);
  const SolutionRecord r = minimize_subcritical(*k.K, cfg, c.spec);
  solution_checks(c, r, k);
  c.info("lambda", r.lambda);
  const int starts = pick(c.opt.samples, 1);
  if (starts > 1) {
    double lo = r.energy, hi = r.energy;
    for (int i = 1; i < starts; ++i) {
      SolverConfig ci = cfg;
      ci.seed = cfg.seed + static_cast<std::uint64_t>(i);
      const SolutionRecord ri = minimize_subcritical(*k.K, ci, c.spec);
      lo = std::min(lo, ri.energy);
      hi = std::max(hi, ri.energy);
    }
    const double spread = (hi - lo) / std::abs(lo);
    c.check("multi-start-spread", spread, 1e-5, spread < 1e-5, std::to_string(starts) + " seeds");
  }
  c.write_json("solution.json", to_json(r, c.spec));
}

void cmd_continue(Context& c) {
  require_n2(c);
  const KChoice k = make_K(c.opt, c.spec.n, "const");
  const SolverConfig cfg = solver_config(c, k);
  const std::vector<double> sched = parse_list(c.opt.schedule.empty() ? "2.0,2.5,2.8,2.95" : c.opt.schedule, "schedule");
  const auto recs = continuation_to_critical(*k.K, sched, cfg, c.spec);
  CsvTable csv({"p", "lambda", "energy", "el_residual", "kw_residual", "sup_over_mean", "converged"});
  bool all = recs.size() == sched.size();
  double flat = 0.0, conc = 0.0;
  for (const auto& r : recs) {
    all = all && r.converged;
    flat = std::max(flat, r.sup_over_mean - 1.0);
    conc = std::max(conc, r.sup_over_mean);
    csv.add_row(std::vector<double>{r.p, r.lambda, r.energy, r.el_residual, r.kw_residual, r.sup_over_mean,
                                    r.converged ? 1.0 : 0.0});
  }
  c.check("continuation", double(recs.size()), double(sched.size()), all, "stages converged");
  if (k.preset == "const") c.check("constant-solution", flat, 1e-4, flat < 1e-4);
  c.info("concentration", conc, conc > cfg.concentration_threshold ? "above threshold" : "below threshold");
  c.write("continuation.csv", csv.str());
}

void cmd_kw_check(Context& c) {
  require_n2(c);
  const KChoice k = make_K(c.opt, c.spec.n, "tilt");
  const GridRef g = default_grid(pick(c.opt.lmax, 16), c.spec.critical_exponent() + 1.0);
  GridField v(g, 1.0);
  const bool from_file = !c.opt.field.empty();
  if (from_file) {
    const Json j = Json::parse(read_text(c.opt.field), nullptr, false);
    if (j.is_discarded()) throw ConfigError("field file is not valid JSON");
    const SpectralField f = spectral_from_json(j.contains("v") ? j.at("v") : j);
    v = sht_inverse(f, default_grid(f.lmax, c.spec.critical_exponent() + 1.0));
  }
  const KWResult r = kw_residual(v, *k.K, c.spec);
  if (k.preset == "const") {
    c.check("kazdan-warner", r.norm, 1e-12, r.norm < 1e-12);
  } else if (from_file) {
    c.check("kazdan-warner", r.scaled, 1e-4, r.scaled < 1e-4);
  } else if (k.preset == "tilt") {
    const int n = c.spec.n;
    const double expect = k.eps * n * c.spec.volume() / (n + 1);
    const double d = std::abs(r.norm - expect);
    c.check("kazdan-warner-obstruction", d, 1e-10, d < 1e-10, "residual " + sci(r.norm));
  } else {
    c.info("kazdan-warner", r.norm);
  }
  Json j;
  j["integrals"] = Json::array({r.integrals[0], r.integrals[1], r.integrals[2]});
  j["norm"] = r.norm;
  j["scaled"] = r.scaled;
  c.results["kw"] = j;
}

void cmd_quotient_check(Context& c) {
  require_n2(c);
  const KChoice k = make_K(c.opt, c.spec.n, "const");
  const double beta = pick(c.opt.beta, 1.05);
  const QuotientResult q = test_quotient(*k.K, beta, unit_vector(2), c.spec);
  c.check("test-function-criterion", q.margin, 0.0, q.margin > 0.0, "quotient " + sci(q.quotient));
  Json j;
  j["beta"] = beta;
  j["quotient"] = q.quotient;
  j["bound"] = q.bound;
  j["margin"] = q.margin;
  c.results["quotient"] = j;
}

AubinConfig aubin_config(const Context& c) {
  AubinConfig cfg;
  cfg.lmax = pick(c.opt.lmax, cfg.lmax);
  cfg.seed = seed_of(c.opt, cfg.seed);
  return cfg;
}

void cmd_aubin(Context& c) {
  require_n2(c);
  const double p = pick(c.opt.p, 3.0), eps = pick(c.opt.eps, 0.1);
  const AubinReport r = aubin_explore(p, eps, pick(c.opt.samples, 50), aubin_config(c), c.spec);
  c.check("aubin-inequality", r.worst_gap, -1e-9, !r.violation, "C = " + sci(r.empirical_constant));
  if (std::pow(2.0, 2.0 / p - 1.0) * (1.0 + eps) < 1.0)
    c.check("aubin-constant-needed", r.empirical_constant, 0.0, r.empirical_constant > 0.0);
  c.info("skipped-samples", r.skipped);
  c.write_json("aubin.json", to_json(r));
}

void cmd_aubin_sobolev(Context& c) {
  require_n2(c);
  const double p = pick(c.opt.p, 3.9), a = pick(c.opt.a, 0.9);
  const AubinReport r = aubin_sobolev_explore(p, a, pick(c.opt.samples, 50), aubin_config(c), c.spec);
  c.check("aubin-sobolev", r.worst_gap, -1e-9, !r.violation);
  c.info("skipped-samples", r.skipped);
  c.write_json("aubin_sobolev.json", to_json(r));
}

std::vector<double> t_values(const Context& c, const char* fallback) {
  const auto t = parse_list(c.opt.t_list.empty() ? fallback : c.opt.t_list, "t_list");
  for (double x : t)
    if (!(x >= 1.0)) throw ConfigError("t values must be >= 1");
  return t;
}

void cmd_g_scan(Context& c) {
  const int n = c.spec.n;
  const KChoice k = make_K(c.opt, c.spec.n, "tilt");
  const auto ts = t_values(c, "1,2,4,8");
  std::vector<std::string> header;
  for (int i = 1; i <= n + 1; ++i) header.push_back("P" + std::to_string(i));
  header.push_back("t");
  for (int i = 1; i <= n + 1; ++i) header.push_back("G" + std::to_string(i));
  header.push_back("|G|");
  CsvTable csv(header);
  double moment = 0.0, ibp = 0.0;
  bool have_moment = false;
  for (const Vec4& P : poles_of(c, unit_vector(n))) {
    for (double t : ts) {
      const Vec4 G = g_map(*k.K, P, t);
      const Vec4 A = a_map(*k.K, P, t, c.spec);
      ibp = std::max(ibp, norm(A - G));
      if (t == 1.0 && (k.preset == "const" || k.preset == "tilt")) {
        const Vec4 expect = k.preset == "tilt" ? (k.eps / (n + 1)) * unit_vector(n) : Vec4{0.0, 0.0, 0.0, 0.0};
        moment = std::max(moment, norm(G - expect));
        have_moment = true;
      }
      std::vector<double> row;
      for (int i = 0; i <= n; ++i) row.push_back(P[i]);
      row.push_back(t);
      for (int i = 0; i <= n; ++i) row.push_back(G[i]);
      row.push_back(norm(G));
      csv.add_row(row);
    }
  }
  if (have_moment) c.check("moment-identity", moment, 1e-12, moment < 1e-12);
  c.check("integration-by-parts", ibp, 1e-8, ibp < 1e-8, "a_map vs g_map, w = 1");
  c.write("g_scan.csv", csv.str());
}

DegreeOptions degree_options(const Context& c) {
  DegreeOptions d;
  if (c.spec.n == 3) {
    d.rule.directions = 16;
    d.subdivision = 6;
  }
  d.subdivision = pick(c.opt.subdivision, d.subdivision);
  return d;
}

void cmd_degree(Context& c) {
  const int n = c.spec.n;
  const KChoice k = make_K(c.opt, c.spec.n, "tilt");
  const DegreeOptions d = degree_options(c);
  const DegreeResult r = brouwer_degree(*k.K, c.opt.s, d);
  Json j = to_json(r, n);
  if (!r.conclusive) {
    c.inconclusive("zero-exclusion", r.min_norm, d.exclusion_factor * r.error_estimate, r.note);
  } else {
    c.check("zero-exclusion", r.min_norm, d.exclusion_factor * r.error_estimate, true);
    c.info("degree", r.degree, r.method);
    if (n == 2) {
      const DegreeResult o = degree_by_preimages(*k.K, c.opt.s, d);
      c.check("degree-oracle", std::abs(o.degree - r.degree), 0.0, o.conclusive && o.degree == r.degree,
              "preimage count " + std::to_string(o.degree));
      j["oracle"] = to_json(o, n);
    }
    if (k.is_model) {
      const IndexCount ic = index_count(k.models, n, c.spec);
      c.check("index-formula", std::abs(ic.predicted_degree - r.degree), 0.0, ic.predicted_degree == r.degree,
              "predicted " + std::to_string(ic.predicted_degree));
      j["index_count"] = to_json(ic);
    }
  }
  c.write_json("degree.json", j);
}

void cmd_index_count(Context& c) {
  const int n = c.spec.n;
  KChoice k;
  if (!c.opt.models.empty() && c.opt.k_preset.empty()) {
    k = make_K(c.opt, n, "model");
  } else {
    k = make_K(c.opt, n, "quadratic-model");
  }
  if (!k.is_model) throw ConfigError("index-count needs critical point models");
  const IndexCount ic = index_count(k.models, n, c.spec);
  c.info("index-sum", ic.sum, ic.criterion ? "criterion holds" : "criterion fails");
  c.info("predicted-degree", ic.predicted_degree);
  if (ic.euler_warning) c.info("euler-characteristic", ic.euler_sum, "differs from chi(S^n)");
  Json j = to_json(ic);
  if (c.opt.verify) {
    const DegreeOptions d = degree_options(c);
    const DegreeResult r = brouwer_degree(*k.K, c.opt.s, d);
    j["degree"] = to_json(r, n);
    if (!r.conclusive) {
      c.inconclusive("index-formula", r.min_norm, d.exclusion_factor * r.error_estimate, r.note);
    } else {
      c.check("index-formula", std::abs(ic.predicted_degree - r.degree), 0.0, ic.predicted_degree == r.degree,
              "numeric degree " + std::to_string(r.degree));
    }
  }
  c.write_json("index_count.json", j);
}

void cmd_omega_scan(Context& c) {
  const int n = c.spec.n;
  const KChoice k = make_K(c.opt, c.spec.n, "tilt");
  const auto ts = t_values(c, "4,8,16");
  const auto rows = omega_decay_scan(*k.K, poles_of(c, unit_vector(0)), ts);
  std::vector<std::string> header;
  for (int i = 1; i <= n + 1; ++i) header.push_back("P" + std::to_string(i));
  for (const char* h : {"t", "numerator", "denominator", "ratio"}) header.push_back(h);
  CsvTable csv(header);
  double worst = HUGE_VAL;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (int i = 0; i <= n; ++i) row.push_back(r.P[i]);
    for (double x : {r.t, r.numerator, r.denominator, r.ratio}) row.push_back(x);
    csv.add_row(row);
    worst = std::min(worst, std::isfinite(r.ratio) ? r.ratio : -1.0);
  }
  if (rows.empty()) {
    c.info("omega-scan-empty", 0.0, "denominator vanishes everywhere");
  } else {
    c.check("omega-ratio-nonnegative", worst, 0.0, worst >= 0.0);
  }
  c.write("omega_scan.csv", csv.str());
}

const std::map<std::string, std::function<void(Context&)>>& table() {
  static const std::map<std::string, std::function<void(Context&)>> t = {
      {"eig-check", cmd_eig_check},
      {"op-xcheck", cmd_op_xcheck},
      {"conformal-check", cmd_conformal_check},
      {"bubble-check", cmd_bubble_check},
      {"interaction-scan", cmd_interaction_scan},
      {"solve", cmd_solve},
      {"continue", cmd_continue},
      {"kw-check", cmd_kw_check},
      {"quotient-check", cmd_quotient_check},
      {"aubin", cmd_aubin},
      {"aubin-sobolev", cmd_aubin_sobolev},
      {"g-scan", cmd_g_scan},
      {"degree", cmd_degree},
      {"index-count", cmd_index_count},
      {"omega-scan", cmd_omega_scan}};
  return t;
}

void write_diagnostics(const RunOptions& opt, const Json& j) {
  const std::filesystem::path dir = opt.out.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out);
  try {
    write_text((dir / "diagnostics.json").string(), j.dump(2) + "\n");
  } catch (const std::exception&) {
  }
}

}  // namespace

int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const auto& t = table();
  const auto it = t.find(opt.command);
  if (it == t.end()) {
    err << "unknown subcommand '" << opt.command << "'\n";
    return 2;
  }
  Context c(opt, out);
  Json diag;
  diag["command"] = opt.command;
  try {
    c.spec = FracOperatorSpec(opt.n, opt.sigma);
    if (!opt.out.empty()) {
      std::filesystem::create_directories(opt.out);
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char stamp[64];
      std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      write_text((std::filesystem::path(opt.out) / "run.log").string(),
                 std::string(stamp) + " " + opt.command + "\n");
    }
    it->second(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    out << "FAIL convergence value=" << sci(e.last_residual()) << " tol=" << sci(0.0) << " (" << e.what() << ")\n";
    diag["error"] = e.what();
    diag["last_residual"] = e.last_residual();
    diag["iterations"] = e.iterations();
    write_diagnostics(opt, diag);
    return 1;
  } catch (const ResolutionError& e) {
    out << "FAIL resolution value=" << sci(1.0) << " tol=" << sci(0.0) << " (" << e.what() << ")\n";
    diag["error"] = e.what();
    write_diagnostics(opt, diag);
    return 1;
  }
  Json summary;
  summary["command"] = opt.command;
  summary["n"] = c.spec.n;
  summary["sigma"] = c.spec.sigma;
  summary["checks"] = c.checks_json();
  if (!c.results.is_null()) summary["results"] = c.results;
  c.write_json("summary.json", summary);
  if (!c.all_passed()) {
    diag["checks"] = c.checks_json();
    write_diagnostics(opt, diag);
    return 1;
  }
  return 0;
}

}  // namespace fracsphere::cli
