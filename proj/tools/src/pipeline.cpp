#include "hjhom_cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hjhom/errors.hpp"

namespace fs = std::filesystem;

namespace hjhom::cli {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = {"schema", "seed", "threads", "gates", "environment.macro_length",
                               "environment.validation_tol"};
    for (const char* f : {"family", "period", "floor", "slope", "center", "intensity", "level", "samples",
                          "grid_x0", "grid_dx", "kappa"})
      k.insert(std::string("diffusion.") + f);
    for (const char* f : {"family", "coefficient", "gamma", "linear", "flat_width", "alpha0", "alpha1", "eta"})
      k.insert(std::string("hamiltonian.") + f);
    for (const char* p : {"potential.", "drift."})
      for (const char* f : {"family", "amplitude", "level", "period", "phase", "width", "center", "intensity"})
        k.insert(std::string(p) + f);
    for (const char* f : {"lo", "hi"}) k.insert(std::string("window.") + f);
    for (const char* f : {"a_tol", "resolution", "c_gamma", "switch_a", "endpoint_tol", "rtol", "atol"})
      k.insert(std::string("cell.") + f);
    for (const char* f : {"tol_lambda", "first_offset", "levels_per_octave", "theta_max", "lambda_max", "lambda0"})
      k.insert(std::string("curve.") + f);
    for (const char* f : {"offsets", "dx"}) k.insert(std::string("corrector.") + f);
    for (const char* f : {"theta_lo", "theta_hi", "points"}) k.insert(std::string("hbar.") + f);
    for (const char* f : {"thetas", "flux", "dx", "horizon", "tail_fraction", "tol", "gap_tol", "periods"})
      k.insert(std::string("verify.") + f);
    for (const char* f : {"seeds", "offsets"}) k.insert(std::string("sweep.") + f);
    return k;
  }();
  return keys;
}

const std::set<std::string> kGates = {"validation", "audit", "verify"};
const std::vector<std::string> kCellStages = {"critical-value", "corrector", "curve", "verify"};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& what) : Error("stage " + stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class GateFailure : public Error {
 public:
  explicit GateFailure(const std::string& what) : Error(what) {}
};

struct Context {
  PipelineConfig cfg;
  fs::path out;
  bool fresh;
  std::ostream& log;

  std::optional<Environment> env;
  std::optional<ValidationReport> validation;
  std::optional<CellProblem> cell;
  std::optional<double> lambda0;
  std::optional<EffectiveCurve> curve;
  std::optional<AuditReport> audit;
  std::optional<ComparisonReport> comparison;
  std::optional<bool> verify_passed;

  fs::path checkpoint_path(const std::string& stage) const { return out / ".stage" / stage; }

  std::optional<std::map<std::string, std::string>> checkpoint(const std::string& stage) const {
    if (fresh) return std::nullopt;
    fs::path p = checkpoint_path(stage);
    if (!fs::exists(p)) return std::nullopt;
    std::istringstream is(read_file(p));
    std::string key, value;
    std::map<std::string, std::string> kv;
    while (is >> key >> value) kv[key] = value;
    if (kv["hash"] != hex64(cfg.hash())) return std::nullopt;
    return kv;
  }

  void mark(const std::string& stage, const std::map<std::string, std::string>& payload = {}) const {
    std::string text = "hash " + hex64(cfg.hash()) + "\n";
    for (const auto& [k, v] : payload) text += k + " " + v + "\n";
    write_file(checkpoint_path(stage), text);
  }
};

Interval default_window(const Environment& env) { return {0.0, env.period()}; }

const Environment& environment(Context& c) {
  if (!c.env) {
    try {
      c.env = sample_environment(c.cfg.env, c.cfg.seed);
    } catch (const HypothesisError& e) {
      throw StageFailure("validate", std::string("hypothesis ") + e.hypothesis() + " failed: " + e.what());
    }
    if (!c.cfg.window_set) c.cfg.window = default_window(*c.env);
  }
  return *c.env;
}

void require_cell_gamma(const Context& c) {
  const auto& H = c.env->hamiltonian();
  if (!(H.gamma > 2.0)) {
    std::ostringstream os;
    os << "cell pipeline requires gamma > 2 (got " << H.gamma << ")";
    throw ConfigError("hamiltonian.gamma", os.str());
  }
}

const CellProblem& cell(Context& c) {
  if (!c.cell) {
    environment(c);
    require_cell_gamma(c);
    c.cell.emplace(*c.env, c.cfg.window, c.cfg.cell);
  }
  return *c.cell;
}

void stage_validate(Context& c) {
  const Environment& env = environment(c);
  const auto& spec = c.cfg.env;
  ValidationGrid g;
  g.x_lo = 0.0;
  g.x_hi = env.kind() == EnvironmentKind::periodic ? env.period() : spec.macro_length;
  g.nx = std::max<std::size_t>(2001, static_cast<std::size_t>(400.0 * g.x_hi));
  c.validation = validate_environment(env, g, spec.validation_tol);
  if (c.checkpoint("validate")) return;
  std::ostringstream os;
  os << "kind = " << (env.kind() == EnvironmentKind::periodic ? "periodic" : "random-stationary") << "\n";
  os << "seed = " << c.cfg.seed << "\n";
  os << "form = " << to_string(env.hamiltonian().form) << "\n";
  os.precision(17);
  os << "alpha0 = " << env.hamiltonian().alpha0 << "\nalpha1 = " << env.hamiltonian().alpha1
     << "\ngamma = " << env.gamma() << "\neta = " << env.hamiltonian().eta << "\nkappa = " << env.kappa() << "\n";
  os << c.validation->to_text();
  write_file(c.out / "validation.txt", os.str());
  c.mark("validate");
  c.log << "validate: " << (c.validation->all_passed() ? "all hypotheses hold" : "some checks failed") << "\n";
}

double stage_critical_value(Context& c) {
  if (c.lambda0) return *c.lambda0;
  const CellProblem& cp = cell(c);
  if (auto kv = c.checkpoint("critical-value")) {
    c.lambda0 = std::stod(kv->at("lambda0"));
    c.log << "critical-value: resumed lambda0 = " << fmt17(*c.lambda0) << "\n";
    return *c.lambda0;
  }
  std::string text;
  if (c.cfg.curve.lambda0) {
    c.lambda0 = *c.cfg.curve.lambda0;
    text = "lambda0 = " + fmt17(*c.lambda0) + " (configured)\n";
  } else {
    CriticalValue cv;
    try {
      cv = critical_value(cp, c.cfg.curve.tol_lambda);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("critical-value", e.what());
    }
    c.lambda0 = cv.lambda0;
    text = cv.to_text();
  }
  write_file(c.out / "lambda0.txt", text);
  c.mark("critical-value", {{"lambda0", fmt17(*c.lambda0)}});
  c.log << "critical-value: lambda0 = " << fmt17(*c.lambda0) << "\n";
  return *c.lambda0;
}

void stage_corrector(Context& c) {
  double l0 = stage_critical_value(c);
  if (c.checkpoint("corrector")) {
    c.log << "corrector: up to date\n";
    return;
  }
  const CellProblem& cp = cell(c);
  std::vector<CorrectorProfile> profiles;
  std::ostringstream levels;
  levels << "index,lambda,theta_minus,theta_plus,residual_minus,residual_plus\n";
  try {
    for (std::size_t k = 0; k < c.cfg.corrector_offsets.size(); ++k) {
      double l = l0 + c.cfg.corrector_offsets[k];
      CorrectorProfile m = build_corrector(cp, l, Branch::minus, c.cfg.corrector_dx);
      CorrectorProfile p = build_corrector(cp, l, Branch::plus, c.cfg.corrector_dx);
      levels << k << "," << fmt17(l) << "," << fmt17(m.theta()) << "," << fmt17(p.theta()) << ","
             << fmt17(residual(cp.env(), m)) << "," << fmt17(residual(cp.env(), p)) << "\n";
      profiles.push_back(std::move(m));
      profiles.push_back(std::move(p));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure("corrector", e.what());
  }
  std::ostringstream os;
  os << "x";
  for (std::size_t k = 0; k < c.cfg.corrector_offsets.size(); ++k) os << ",f_minus_" << k << ",f_plus_" << k;
  os << "\n";
  if (!profiles.empty()) {
    for (std::size_t i = 0; i < profiles.front().x.size(); ++i) {
      os << fmt17(profiles.front().x[i]);
      for (const auto& p : profiles) os << "," << fmt17(p.f[i]);
      os << "\n";
    }
  }
  write_file(c.out / "corrector.csv", os.str());
  write_file(c.out / "corrector_levels.csv", levels.str());
  c.mark("corrector");
  c.log << "corrector: " << c.cfg.corrector_offsets.size() << " levels written\n";
}

const EffectiveCurve& stage_curve(Context& c) {
  if (c.curve) return *c.curve;
  double l0 = stage_critical_value(c);
  const CellProblem& cp = cell(c);
  const auto& H = cp.env().hamiltonian();
  if (c.checkpoint("curve") && fs::exists(c.out / "theta.csv")) {
    c.curve = load_curve_csv(c.out / "theta.csv");
    c.curve->window = cp.trimmed();
    c.curve->seed = cp.env().seed();
    c.audit = audit_curve(*c.curve, H.alpha0, H.alpha1, H.gamma, 401, c.cfg.curve.tol_lambda * 10);
    c.log << "curve: resumed from theta.csv\n";
    return *c.curve;
  }
  CurveOptions o = c.cfg.curve;
  o.lambda0 = l0;
  o.threads = c.cfg.threads;
  try {
    c.curve = build_effective_curve(cp, o);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure("curve", e.what());
  }
  c.audit = audit_curve(*c.curve, H.alpha0, H.alpha1, H.gamma, 401, c.cfg.curve.tol_lambda * 10);
  std::ostringstream t, h;
  c.curve->write_lambda_csv(t);
  c.curve->write_hbar_csv(h, c.cfg.hbar_theta_lo, c.cfg.hbar_theta_hi, c.cfg.hbar_points);
  write_file(c.out / "theta.csv", t.str());
  write_file(c.out / "hbar.csv", h.str());
  write_file(c.out / "audit.txt", c.audit->to_text());
  c.mark("curve");
  c.log << "curve: " << c.curve->lambdas.size() << " levels, flat part [" << fmt17(c.curve->theta_minus_0) << ", "
        << fmt17(c.curve->theta_plus_0) << "]\n";
  return *c.curve;
}

void stage_verify(Context& c) {
  if (c.cfg.verify_thetas.empty()) throw ConfigError("verify.thetas", "required for the verify stage");
  const EffectiveCurve& curve = stage_curve(c);
  const CellProblem& cp = cell(c);
  if (auto kv = c.checkpoint("verify"); kv && kv->count("passed")) {
    c.log << "verify: up to date\n";
    c.verify_passed = kv->at("passed") == "1";
    return;
  }
  Environment penv = cp.env();
  double lo = 0.0;
  if (penv.kind() != EnvironmentKind::periodic) {
    Interval w = cp.trimmed();
    penv = periodize(penv, w.lo, w.hi);
    lo = w.lo;
  }
  SchemeConfig sc = c.cfg.scheme;
  sc.boundary = BoundaryMode::periodic;
  sc.x_lo = lo;
  sc.x_hi = lo + penv.period() * static_cast<double>(c.cfg.scheme_periods);
  sc.x_ref = lo;
  sc.threads = c.cfg.threads;
  try {
    c.comparison = homogenization_test(penv, curve, c.cfg.verify_thetas, sc, c.cfg.verify_tol, c.cfg.verify_gap_tol);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure("verify", e.what());
  }
  std::ostringstream tr;
  tr << "theta,t,u,u_over_t\n";
  for (const auto& run : c.comparison->runs) {
    std::size_t stride = std::max<std::size_t>(1, run.t.size() / 1000);
    for (std::size_t k = 0; k < run.t.size(); ++k) {
      if (k % stride != 0 && k + 1 != run.t.size()) continue;
      tr << fmt17(run.theta) << "," << fmt17(run.t[k]) << "," << fmt17(run.u_ref[k]) << ","
         << fmt17(run.u_ref[k] / run.t[k]) << "\n";
    }
  }
  write_file(c.out / "trace.csv", tr.str());
  std::ostringstream rep;
  rep << "flux = " << to_string(sc.flux) << "\ndx = " << sc.dx << "\nhorizon = " << sc.horizon << "\n";
  rep << c.comparison->to_text();
  write_file(c.out / "comparison.txt", rep.str());
  c.verify_passed = c.comparison->all_passed();
  c.mark("verify", {{"passed", *c.verify_passed ? "1" : "0"}});
  c.log << "verify: " << (c.comparison->all_passed() ? "all theta within tolerance" : "some theta outside tolerance")
        << "\n";
}

void check_gates(const Context& c) {
  for (const auto& g : c.cfg.gates) {
    bool ok = true;
    if (g == "validation") ok = c.validation && c.validation->all_passed();
    if (g == "audit") ok = c.audit && c.audit->all_passed();
    if (g == "verify") ok = c.verify_passed.value_or(false);
    if (!ok) throw GateFailure("acceptance gate '" + g + "' failed");
  }
}

void run_stages(Context& c, const std::vector<std::string>& stages) {
  for (const auto& s : stages) {
    if (std::find(kCellStages.begin(), kCellStages.end(), s) != kCellStages.end()) {
      environment(c);
      require_cell_gamma(c);
    }
    if (s == "validate") stage_validate(c);
    else if (s == "critical-value") stage_critical_value(c);
    else if (s == "corrector") stage_corrector(c);
    else if (s == "curve") stage_curve(c);
    else if (s == "verify") stage_verify(c);
    else throw ConfigError("verb", "unknown stage '" + s + "'");
  }
}

// Gates only apply to stages that ran.
std::vector<std::string> applicable_gates(const std::vector<std::string>& gates, const std::vector<std::string>& stages) {
  std::vector<std::string> out;
  auto ran = [&](const char* s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  for (const auto& g : gates) {
    if (g == "validation" && ran("validate")) out.push_back(g);
    if (g == "audit" && ran("curve")) out.push_back(g);
    if (g == "verify" && ran("verify")) out.push_back(g);
  }
  return out;
}

int report_error(std::ostream& log, const std::exception& e, int code) {
  log << "error: " << e.what() << "\n";
  return code;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

int run_sweep(const PipelineConfig& cfg, const fs::path& out, bool fresh, std::ostream& log) {
  if (cfg.sweep_seeds.empty()) throw ConfigError("sweep.seeds", "required for the sweep verb");
  std::vector<std::string> cols = {"lambda0", "theta_minus_0", "theta_plus_0"};
  for (std::size_t k = 0; k < cfg.sweep_offsets.size(); ++k) {
    cols.push_back("theta_minus_at_" + std::to_string(k));
    cols.push_back("theta_plus_at_" + std::to_string(k));
  }
  std::vector<std::vector<double>> rows;
  std::ostringstream table;
  table << "seed";
  for (const auto& c : cols) table << "," << c;
  table << "\n";
  for (auto seed : cfg.sweep_seeds) {
    PipelineConfig sub = cfg;
    sub.seed = seed;
    sub.raw.set("seed", std::to_string(seed));
    fs::path dir = out / ("seed_" + std::to_string(seed));
    Context c{sub, dir, fresh, log, {}, {}, {}, {}, {}, {}, {}, {}};
    log << "sweep: seed " << seed << "\n";
    run_stages(c, {"validate", "critical-value", "curve"});
    std::vector<double> row = {*c.lambda0, c.curve->theta_minus_0, c.curve->theta_plus_0};
    for (double off : cfg.sweep_offsets) {
      ThetaPair t = theta_pair(*c.cell, *c.lambda0 + off);
      row.push_back(t.theta_minus);
      row.push_back(t.theta_plus);
    }
    table << seed;
    for (double v : row) table << "," << fmt17(v);
    table << "\n";
    rows.push_back(row);
  }
  write_file(out / "sweep.csv", table.str());
  std::ostringstream spread;
  spread << "quantity,mean,sd,min,max\n";
  double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double mean = 0, lo = rows[0][j], hi = rows[0][j];
    for (const auto& r : rows) {
      mean += r[j] / n;
      lo = std::min(lo, r[j]);
      hi = std::max(hi, r[j]);
    }
    double var = 0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    double sd = rows.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    spread << cols[j] << "," << fmt17(mean) << "," << fmt17(sd) << "," << fmt17(lo) << "," << fmt17(hi) << "\n";
  }
  write_file(out / "spread.csv", spread.str());
  log << "sweep: " << rows.size() << " seeds aggregated\n";
  return ok;
}

nlohmann::json inventory(const fs::path& out) {
  std::vector<fs::path> files;
  if (fs::exists(out))
    for (const auto& e : fs::recursive_directory_iterator(out))
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : files) {
    std::string body = read_file(p);
    list.push_back({{"path", fs::relative(p, out).generic_string()},
                    {"bytes", body.size()},
                    {"fnv1a64", hex64(fnv1a64(body))}});
  }
  return list;
}

}  // namespace

PipelineConfig load_pipeline_config(const KeyValueConfig& file, const Options& opts) {
  PipelineConfig p;
  p.raw = file;
  for (const auto& [k, v] : file.values())
    if (!known_keys().count(k)) throw ConfigError(k, "unknown key");
  if (opts.seed) p.raw.set("seed", std::to_string(*opts.seed));
  if (opts.tol_lambda) p.raw.set("curve.tol_lambda", fmt17(*opts.tol_lambda));
  if (opts.window) {
    if (!(*opts.window > 0)) throw ConfigError("window", "must be positive");
    double lo = p.raw.get_double("window.lo", 0.0);
    p.raw.set("window.lo", fmt17(lo));
    p.raw.set("window.hi", fmt17(lo + *opts.window));
  }
  const KeyValueConfig& r = p.raw;

  p.env = parse_environment_spec(r);
  p.seed = r.get_uint("seed", 0);
  p.env.seed = p.seed;
  p.threads = static_cast<int>(opts.threads ? *opts.threads : r.get_int("threads", 1));
  if (p.threads < 1) throw ConfigError("threads", "must be at least 1");
  if (r.has("window.lo") || r.has("window.hi")) {
    if (!r.has("window.lo") || !r.has("window.hi")) throw ConfigError("window.hi", "window.lo and window.hi go together");
    p.window = {r.get_double("window.lo", 0.0), r.get_double("window.hi", 0.0)};
    if (!(p.window.hi > p.window.lo)) throw ConfigError("window.hi", "must exceed window.lo");
    p.window_set = true;
  }

  p.cell.a_tol = r.get_double("cell.a_tol", p.cell.a_tol);
  p.cell.resolution = r.get_double("cell.resolution", p.cell.resolution);
  p.cell.c_gamma = r.get_double("cell.c_gamma", p.cell.c_gamma);
  p.cell.switch_a = r.get_double("cell.switch_a", p.cell.switch_a);
  p.cell.endpoint_tol = r.get_double("cell.endpoint_tol", p.cell.endpoint_tol);
  p.cell.ode.rtol = r.get_double("cell.rtol", p.cell.ode.rtol);
  p.cell.ode.atol = r.get_double("cell.atol", p.cell.ode.atol);
  if (!(p.cell.ode.rtol > 0)) throw ConfigError("cell.rtol", "must be positive");
  if (!(p.cell.ode.atol > 0)) throw ConfigError("cell.atol", "must be positive");

  p.curve.tol_lambda = r.get_double("curve.tol_lambda", p.curve.tol_lambda);
  p.curve.first_offset = r.get_double("curve.first_offset", p.curve.first_offset);
  p.curve.levels_per_octave = static_cast<int>(r.get_int("curve.levels_per_octave", p.curve.levels_per_octave));
  p.curve.theta_max = r.get_double("curve.theta_max", p.curve.theta_max);
  p.curve.lambda_max = r.get_double("curve.lambda_max", p.curve.lambda_max);
  if (auto l0 = r.get_optional_double("curve.lambda0")) p.curve.lambda0 = *l0;
  if (!(p.curve.tol_lambda > 0)) throw ConfigError("curve.tol_lambda", "must be positive");

  p.corrector_offsets = r.get_doubles("corrector.offsets", {0.5, 1.0});
  for (double o : p.corrector_offsets)
    if (!(o > 0)) throw ConfigError("corrector.offsets", "offsets above lambda0 must be positive");
  p.corrector_dx = r.get_double("corrector.dx", p.corrector_dx);
  if (!(p.corrector_dx > 0)) throw ConfigError("corrector.dx", "must be positive");

  p.hbar_theta_lo = r.get_double("hbar.theta_lo", -p.curve.theta_max);
  p.hbar_theta_hi = r.get_double("hbar.theta_hi", p.curve.theta_max);
  p.hbar_points = r.get_uint("hbar.points", p.hbar_points);
  if (p.hbar_points < 2) throw ConfigError("hbar.points", "need at least two points");

  p.verify_thetas = r.get_doubles("verify.thetas", {});
  std::string flux = r.get_string("verify.flux", "lax-friedrichs");
  if (flux == "lax-friedrichs") p.scheme.flux = NumericalHamiltonian::lax_friedrichs;
  else if (flux == "engquist-osher") p.scheme.flux = NumericalHamiltonian::engquist_osher;
  else throw ConfigError("verify.flux", "expected lax-friedrichs or engquist-osher");
  p.scheme.dx = r.get_double("verify.dx", p.scheme.dx);
  p.scheme.horizon = r.get_double("verify.horizon", p.scheme.horizon);
  p.scheme.tail_fraction = r.get_double("verify.tail_fraction", p.scheme.tail_fraction);
  p.scheme_periods = r.get_uint("verify.periods", 1);
  if (p.scheme_periods < 1) throw ConfigError("verify.periods", "must be at least 1");
  p.verify_tol = r.get_double("verify.tol", p.verify_tol);
  p.verify_gap_tol = r.get_double("verify.gap_tol", p.verify_gap_tol);

  p.sweep_seeds = r.get_uints("sweep.seeds", {});
  p.sweep_offsets = r.get_doubles("sweep.offsets", {0.5, 1.0});

  std::string gates = r.get_string("gates", "");
  std::istringstream gs(gates);
  std::string g;
  while (std::getline(gs, g, ',')) {
    g.erase(0, g.find_first_not_of(" \t"));
    g.erase(g.find_last_not_of(" \t") + 1);
    if (g.empty()) continue;
    if (!kGates.count(g)) throw ConfigError("gates", "unknown gate '" + g + "'");
    p.gates.push_back(g);
  }
  return p;
}

EffectiveCurve load_curve_csv(const fs::path& theta_csv) {
  std::istringstream is(read_file(theta_csv));
  std::string line;
  if (!std::getline(is, line) || line != "lambda,theta_minus,theta_plus")
    throw ConfigError(theta_csv.string(), "unexpected header");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3) throw ConfigError(theta_csv.string(), "malformed row '" + line + "'");
    rows.push_back({std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2])});
  }
  if (rows.size() < 4) throw ConfigError(theta_csv.string(), "too few rows");
  std::vector<double> l, m, p;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    l.push_back(rows[i][0]);
    m.push_back(rows[i][1]);
    p.push_back(rows[i][2]);
  }
  return assemble_curve(rows[0][0], l, m, p);
}

void write_manifest(const PipelineConfig& cfg, const fs::path& out, const std::string& verb,
                    const std::string& started) {
  nlohmann::json j;
  j["schema"] = "hjhom-manifest/1";
  j["config_schema"] = KeyValueConfig::kSchema;
  j["config_hash"] = hex64(cfg.hash());
  j["config"] = cfg.raw.values();
  j["verb"] = verb;
  j["seeds"] = cfg.sweep_seeds.empty() || verb != "sweep" ? std::vector<std::uint64_t>{cfg.seed} : cfg.sweep_seeds;
  if (cfg.window_set) j["window"] = {cfg.window.lo, cfg.window.hi};
  else j["window"] = "default";
  j["tolerances"] = {{"tol_lambda", cfg.curve.tol_lambda},
                     {"ode_rtol", cfg.cell.ode.rtol},
                     {"ode_atol", cfg.cell.ode.atol},
                     {"a_tol", cfg.cell.a_tol},
                     {"validation_tol", cfg.env.validation_tol},
                     {"verify_tol", cfg.verify_tol},
                     {"verify_gap_tol", cfg.verify_gap_tol}};
  j["versions"] = {{"hjhom", kVersion}, {"core", kVersion}, {"cli", kVersion}};
  j["threads"] = cfg.threads;
  j["started"] = started;
  j["finished"] = utc_now();
  j["files"] = inventory(out);
  write_file(out / "manifest.json", j.dump(2) + "\n");
}

int run_pipeline(const PipelineConfig& cfg, const fs::path& out, bool fresh, const std::vector<std::string>& stages,
                 std::ostream& log) {
  Context c{cfg, out, fresh, log, {}, {}, {}, {}, {}, {}, {}, {}};
  run_stages(c, stages);
  auto saved = c.cfg.gates;
  c.cfg.gates = applicable_gates(saved, stages);
  check_gates(c);
  return ok;
}

int emit_plots_data(const fs::path& out, std::ostream& log) {
  const std::vector<std::pair<std::string, std::string>> bundle = {
      {"hbar.csv", "theta,hbar"},
      {"theta.csv", "lambda,theta_minus,theta_plus"},
      {"corrector.csv", "x,f_minus_0,f_plus_0"},
      {"trace.csv", "theta,t,u,u_over_t"},
  };
  std::vector<std::string> missing;
  for (const auto& [name, header] : bundle)
    if (!fs::exists(out / name)) missing.push_back(name);
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    log << "error: missing artifacts: " << names << "\n";
    return pipeline_failure;
  }
  for (const auto& [name, header] : bundle) {
    std::string body = read_file(out / name);
    if (body.compare(0, header.size(), header) != 0) {
      log << "error: artifact " << name << " does not start with header '" << header << "'\n";
      return pipeline_failure;
    }
    write_file(out / "plots" / name, body);
  }
  fs::path mp = out / "manifest.json";
  nlohmann::json j = fs::exists(mp) ? nlohmann::json::parse(read_file(mp)) : nlohmann::json::object();
  j["emitted"] = utc_now();
  j["files"] = inventory(out);
  write_file(mp, j.dump(2) + "\n");
  log << "emit: " << bundle.size() << " files written to " << (out / "plots").string() << "\n";
  return ok;
}

int run_verb(const std::string& verb, const Options& opts, std::ostream& log) {
  const std::string started = utc_now();
  fs::path out(opts.out);
  try {
    if (verb == "emit") return emit_plots_data(out, log);
    if (opts.config_path.empty()) throw ConfigError("--config", "a config file is required");
    PipelineConfig cfg = load_pipeline_config(KeyValueConfig::load(opts.config_path), opts);
    fs::create_directories(out);
    int code = ok;
    try {
      if (verb == "validate") code = run_pipeline(cfg, out, opts.fresh, {"validate"}, log);
      else if (verb == "critical-value") code = run_pipeline(cfg, out, opts.fresh, {"validate", "critical-value"}, log);
      else if (verb == "corrector") code = run_pipeline(cfg, out, opts.fresh, {"validate", "corrector"}, log);
      else if (verb == "curve") code = run_pipeline(cfg, out, opts.fresh, {"validate", "curve"}, log);
      else if (verb == "verify") code = run_pipeline(cfg, out, opts.fresh, {"validate", "curve", "verify"}, log);
      else if (verb == "sweep") code = run_sweep(cfg, out, opts.fresh, log);
      else if (verb == "run") {
        std::vector<std::string> stages = {"validate", "critical-value", "corrector", "curve"};
        if (!cfg.verify_thetas.empty()) stages.push_back("verify");
        code = run_pipeline(cfg, out, opts.fresh, stages, log);
      } else {
        throw ConfigError("verb", "unknown verb '" + verb + "'");
      }
    } catch (const GateFailure& e) {
      write_manifest(cfg, out, verb, started);
      return report_error(log, e, gate_failure);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      write_manifest(cfg, out, verb, started);
      return report_error(log, e, pipeline_failure);
    }
    write_manifest(cfg, out, verb, started);
    return code;
  } catch (const ConfigError& e) {
    log << "error: schema violation: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    return report_error(log, e, pipeline_failure);
  }
}

}  // namespace hjhom::cli
