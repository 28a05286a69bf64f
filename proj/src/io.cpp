#include "pcinterp/io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pcinterp {

namespace {

cd complex_from(const Json& j, const char* what) {
  if (j.is_number() || j.is_string()) return cd(parse_number(j, what), 0.0);
  if (j.is_array() && j.size() == 2)
    return cd(parse_number(j[0], what), parse_number(j[1], what));
  throw SchemaError(std::string(what) + ": complex numbers are [re, im]");
}

Json complex_to(cd z) {
  return Json::array({format_number(z.real()), format_number(z.imag())});
}

Matrix matrix_from(const Json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw SchemaError(std::string(what) + ": matrix must be a nested array");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Matrix m;
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array())
      throw SchemaError(std::string(what) + ": matrix rows must be arrays");
    if (cols < 0) {
      cols = static_cast<int>(j[r].size());
      m.resize(rows, cols);
    }
    if (static_cast<int>(j[r].size()) != cols)
      throw SchemaError(std::string(what) + ": ragged matrix");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from(j[r][c], what);
  }
  return m;
}

Json matrix_to(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Vector vector_from(const Json& j, const char* what) {
  if (!j.is_array())
    throw SchemaError(std::string(what) + ": vector must be an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = complex_from(j[i], what);
  return v;
}

Json vector_to(const Vector& v) {
  Json out = Json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(complex_to(v(i)));
  return out;
}

long require_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw SchemaError(std::string("missing integer field '") + key + "'");
  return j[key].get<long>();
}

std::string timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

Json taps_to_json(const std::map<long, Vector>& taps) {
  Json out = Json::array();
  for (const auto& [lag, h] : taps)
    for (long c = 0; c < h.size(); ++c)
      out.push_back({{"lag", lag},
                     {"component", c + 1},
                     {"re", format_number(h(c).real())},
                     {"im", format_number(h(c).imag())}});
  return out;
}

Json coeffs_to_json(const VectorCoeffs& coeffs) {
  Json out = Json::array();
  for (const auto& [j, v] : coeffs) out.push_back({{"j", j}, {"v", vector_to(v)}});
  return out;
}

Json lag_matrices_to_json(const TrigMatrixPoly& p) {
  Json out = Json::array();
  for (const auto& [lag, m] : p.coeffs()) {
    if (lag < 0) continue;  // mirror lags are implied
    out.push_back({{"lag", lag}, {"m", matrix_to(m)}});
  }
  return out;
}

struct ResolvedProblem {
  MissingPattern pattern;
  VectorCoeffs a;
  bool pc = false;  // report taps in PC time too
  int period = 1;
};

ResolvedProblem resolve_functional(const FunctionalSpec& fs,
                                   const MissingPattern& raw, int dim,
                                   bool allow_lift) {
  switch (fs.mode) {
    case FunctionalMode::kVector: {
      return {raw, fs.vector, false, raw.period()};
    }
    case FunctionalMode::kPcLift: {
      if (!allow_lift)
        throw SchemaError("pc_lift functionals are not valid for this command");
      if (raw.period() != dim)
        throw SchemaError("pc_lift needs pattern period == density dimension");
      return {raw, lift_functional(fs.scalar, raw.period()), false,
              raw.period()};
    }
    case FunctionalMode::kPcBlock: {
      if (raw.period() != dim)
        throw SchemaError("pc_block needs pattern period == density dimension");
      MissingPattern blocked = block_pattern(raw);
      VectorCoeffs a = block_functional(fs.scalar, raw);
      return {blocked, a, true, raw.period()};
    }
  }
  throw SchemaError("unknown functional mode");
}

Json pc_taps_to_json(const std::map<long, Vector>& taps, int period) {
  Json out = Json::array();
  for (const auto& [lag, h] : taps)
    for (int nu = 1; nu <= period; ++nu) {
      cd z = h(nu - 1);
      out.push_back({{"index", pc_index(lag, nu, period)},
                     {"re", format_number(z.real())},
                     {"im", format_number(z.imag())}});
    }
  return out;
}

Json diagnostics_to_json(const SolutionDiagnostics& d) {
  Json orth = Json::array();
  for (const auto& [j, r] : d.orthogonality)
    orth.push_back({{"j", j}, {"residual", format_number(r)}});
  return {{"condition", format_number(d.condition)}, {"orthogonality", orth}};
}

Json hypothesis_to_json(const HypothesisReport& h) {
  return {{"positive_definite", h.positive_definite},
          {"min_eigenvalue", format_number(h.min_eigenvalue)},
          {"hermitian_defect", format_number(h.hermitian_defect)}};
}

Json factor_to_json(const CausalFactor& q) {
  Json out = Json::array();
  for (int g = 0; g < static_cast<int>(q.q.size()); ++g)
    out.push_back({{"lag", g}, {"m", matrix_to(q.q[g])}});
  return out;
}

Json run_interpolate(const Json& cfg, const Quadrature& quad) {
  DensitySpec f = density_from_json(cfg.at("f"));
  std::optional<DensitySpec> g;
  if (cfg.contains("g") && !cfg["g"].is_null())
    g = density_from_json(cfg["g"]);
  MissingPattern raw = pattern_from_json(cfg.at("pattern"));
  FunctionalSpec fs = functional_from_json(cfg.at("functional"));
  ResolvedProblem rp = resolve_functional(fs, raw, f.dim(), true);

  InterpSolution sol =
      interpolate(f, g ? &*g : nullptr, rp.pattern, rp.a, quad);

  Json rep;
  rep["delta"] = format_number(sol.delta);
  rep["c"] = coeffs_to_json(sol.c_coeffs);
  rep["taps"] = taps_to_json(sol.taps);
  if (rp.pc) rep["pc_taps"] = pc_taps_to_json(sol.taps, rp.period);
  rep["diagnostics"] = diagnostics_to_json(sol.diagnostics);
  return rep;
}

Json minimax_report(const MinimaxSolution& sol, const ResolvedProblem& rp) {
  Json rep;
  rep["delta0"] = format_number(sol.delta0);
  rep["R"] = lag_matrices_to_json(sol.inverse_density);
  rep["Q"] = factor_to_json(sol.factor);
  rep["taps"] = taps_to_json(sol.taps);
  if (rp.pc) rep["pc_taps"] = pc_taps_to_json(sol.taps, rp.period);
  rep["c0"] = coeffs_to_json(sol.c0_coeffs);
  rep["hypothesis"] = hypothesis_to_json(sol.hypothesis);
  return rep;
}

Json run_minimax_d0(const Json& cfg, const Quadrature& quad) {
  ClassD0Spec spec{matrix_from(cfg.at("P"), "P")};
  MissingPattern raw = pattern_from_json(cfg.at("pattern"));
  FunctionalSpec fs = functional_from_json(cfg.at("functional"));
  ResolvedProblem rp =
      resolve_functional(fs, raw, static_cast<int>(spec.p.rows()), false);
  std::optional<Vector> lead;
  if (cfg.contains("lead_inverse"))
    lead = vector_from(cfg["lead_inverse"], "lead_inverse");
  MinimaxSolution sol = least_favorable_d0(spec, rp.a, rp.pattern, quad,
                                           lead ? &*lead : nullptr);
  return minimax_report(sol, rp);
}

Json run_minimax_dg(const Json& cfg, const Quadrature& quad) {
  ClassDGSpec spec;
  spec.g_max = static_cast<int>(require_int(cfg, "G"));
  if (!cfg.contains("P") || !cfg["P"].is_array())
    throw SchemaError("minimax-dg needs an array P of matrices P(0..G)");
  for (const auto& m : cfg["P"]) spec.p.push_back(matrix_from(m, "P(g)"));
  MissingPattern raw = pattern_from_json(cfg.at("pattern"));
  FunctionalSpec fs = functional_from_json(cfg.at("functional"));
  ResolvedProblem rp = resolve_functional(
      fs, raw, spec.p.empty() ? 1 : static_cast<int>(spec.p[0].rows()), false);
  MinimaxSolution sol = least_favorable_dg(spec, rp.a, rp.pattern, quad);
  return minimax_report(sol, rp);
}

Json run_simulate(const Json& cfg, const Quadrature& quad) {
  GeneratorSpec gen = generator_from_json(cfg.at("generator"));
  std::optional<GeneratorSpec> noise;
  if (cfg.contains("noise_generator") && !cfg["noise_generator"].is_null())
    noise = generator_from_json(cfg["noise_generator"]);
  long trials = require_int(cfg, "trials");
  std::uint64_t seed = cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 1;

  MissingPattern raw = pattern_from_json(cfg.at("pattern"));
  FunctionalSpec fs = functional_from_json(cfg.at("functional"));
  ResolvedProblem rp = resolve_functional(fs, raw, generator_dim(gen), false);

  DensitySpec f = generator_density(gen);
  std::optional<DensitySpec> g;
  if (noise) g = generator_density(*noise);

  InterpSolution sol =
      interpolate(f, g ? &*g : nullptr, rp.pattern, rp.a, quad);
  std::vector<double> per_trial;
  const bool want_trials =
      cfg.contains("per_trial_csv") && cfg["per_trial_csv"].is_string();
  EmpiricalMseReport mc =
      empirical_mse(gen, noise ? &*noise : nullptr, rp.pattern, rp.a, sol.taps,
                    sol.delta, trials, seed,
                    want_trials ? &per_trial : nullptr);
  if (want_trials) {
    std::ofstream csv(cfg["per_trial_csv"].get<std::string>());
    if (!csv) throw SchemaError("cannot open the per-trial CSV path");
    csv << "trial,squared_error\n";
    for (size_t i = 0; i < per_trial.size(); ++i)
      csv << i << "," << format_number(per_trial[i]) << "\n";
  }

  Json rep;
  rep["trials"] = mc.trials;
  rep["empirical_mse"] = format_number(mc.mean);
  rep["standard_error"] = format_number(mc.standard_error);
  rep["analytic_delta"] = format_number(mc.analytic);
  rep["z"] = format_number(mc.z);
  rep["taps"] = taps_to_json(sol.taps);
  if (rp.pc) rep["pc_taps"] = pc_taps_to_json(sol.taps, rp.period);
  return rep;
}

double report_main_value(const Json& report, std::string* key_out) {
  const char* keys[] = {"delta", "delta0", "empirical_mse"};
  for (const char* k : keys) {
    if (report.contains(k)) {
      if (key_out) *key_out = k;
      return parse_number(report[k], k);
    }
  }
  throw SchemaError("report carries no recognized result field");
}

Json run_verify(const Json& cfg, const RunOptions& opts) {
  if (!cfg.contains("report") || !cfg["report"].is_string())
    throw SchemaError("verify needs the path of a report file");
  std::ifstream in(cfg["report"].get<std::string>());
  if (!in) throw SchemaError("cannot open report file");
  Json recorded;
  try {
    in >> recorded;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!recorded.contains("config"))
    throw SchemaError("report has no embedded config");
  Json inner = recorded["config"];
  if (inner.value("command", "") == "verify")
    throw SchemaError("cannot verify a verify report");

  RunOptions clean;  // the embedded config is already normalized
  Json recomputed = execute_command(inner, clean);

  std::string key;
  double before = report_main_value(recorded, &key);
  double after = parse_number(recomputed.at(key), key.c_str());
  double diff = std::abs(before - after);

  Json rep;
  rep["verified"] = diff <= 1e-12;
  rep["field"] = key;
  rep["recorded"] = format_number(before);
  rep["recomputed"] = format_number(after);
  rep["difference"] = format_number(diff);
  (void)opts;
  return rep;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_number(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return std::stod(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw SchemaError(std::string(what) + ": expected a number");
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DensitySpec density_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("density must be an object");
  int t = static_cast<int>(require_int(j, "T"));
  if (t < 1) throw SchemaError("density dimension must be positive");
  std::string form = j.value("form", "");
  if (form == "constant") {
    Matrix h = matrix_from(j.at("H"), "constant density");
    if (h.rows() != t) throw SchemaError("constant density shape != T");
    return DensitySpec::constant(h);
  }
  if (form == "scalar_rational") {
    std::string structure = j.value("structure", "diagonal");
    RationalStructure rs;
    if (structure == "diagonal") {
      rs = RationalStructure::kDiagonal;
    } else if (structure == "cumulative") {
      rs = RationalStructure::kCumulative;
    } else {
      throw SchemaError("structure must be 'diagonal' or 'cumulative'");
    }
    if (!j.contains("atoms") || !j["atoms"].is_array() ||
        static_cast<int>(j["atoms"].size()) != t)
      throw SchemaError("scalar_rational needs one atom per component");
    std::vector<RationalAtom> atoms;
    for (const auto& aj : j["atoms"]) {
      std::string type = aj.value("type", "");
      if (type == "ar1") {
        atoms.push_back(RationalAtom::ar1(complex_from(aj.at("u"), "atom u")));
      } else if (type == "mod2") {
        atoms.push_back(RationalAtom::modulus(complex_from(aj.at("v"), "atom v"),
                                              complex_from(aj.at("w"), "atom w")));
      } else {
        throw SchemaError("atom type must be 'ar1' or 'mod2'");
      }
    }
    return DensitySpec::scalar_rational(rs, std::move(atoms));
  }
  if (form == "ma") {
    if (!j.contains("theta") || !j["theta"].is_array() || j["theta"].empty())
      throw SchemaError("ma density needs theta matrices");
    std::vector<Matrix> theta;
    for (const auto& m : j["theta"]) theta.push_back(matrix_from(m, "theta"));
    if (theta[0].rows() != t) throw SchemaError("theta shape != T");
    return DensitySpec::moving_average(std::move(theta));
  }
  if (form == "inv_trig") {
    if (!j.contains("P") || !j["P"].is_array() || j["P"].empty())
      throw SchemaError("inv_trig density needs matrices P(0..G)");
    TrigMatrixPoly p(t);
    int g = 0;
    for (const auto& m : j["P"]) p.set_pair(g++, matrix_from(m, "P(g)"));
    return DensitySpec::inverse_trig(std::move(p));
  }
  if (form == "grid") {
    if (!j.contains("values") || !j["values"].is_array())
      throw SchemaError("grid density needs samples");
    std::vector<Matrix> values;
    for (const auto& m : j["values"]) values.push_back(matrix_from(m, "grid"));
    if (!values.empty() && values[0].rows() != t)
      throw SchemaError("grid sample shape != T");
    return DensitySpec::grid_samples(std::move(values));
  }
  throw SchemaError("unknown density form '" + form + "'");
}

Json density_to_json(const DensitySpec& d) {
  Json j;
  j["T"] = d.dim();
  if (const auto* c = std::get_if<ConstantForm>(&d.form())) {
    j["form"] = "constant";
    j["H"] = matrix_to(c->h);
  } else if (const auto* s = std::get_if<ScalarRationalForm>(&d.form())) {
    j["form"] = "scalar_rational";
    j["structure"] = s->structure == RationalStructure::kDiagonal
                         ? "diagonal"
                         : "cumulative";
    Json atoms = Json::array();
    for (const auto& a : s->atoms)
      atoms.push_back({{"type", "mod2"},
                       {"v", complex_to(a.alpha)},
                       {"w", complex_to(a.beta)}});
    j["atoms"] = atoms;
  } else if (const auto* m = std::get_if<MovingAverageForm>(&d.form())) {
    j["form"] = "ma";
    Json theta = Json::array();
    for (const auto& t : m->theta) theta.push_back(matrix_to(t));
    j["theta"] = theta;
  } else if (const auto* it = std::get_if<InverseTrigForm>(&d.form())) {
    j["form"] = "inv_trig";
    Json p = Json::array();
    for (int g = 0; g <= it->p.degree(); ++g) p.push_back(matrix_to(it->p.coeff(g)));
    j["P"] = p;
  } else {
    const auto& g = std::get<GridForm>(d.form());
    j["form"] = "grid";
    Json values = Json::array();
    for (const auto& v : g.values) values.push_back(matrix_to(v));
    j["values"] = values;
  }
  return j;
}

MissingPattern pattern_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("intervals") || !j["intervals"].is_array())
    throw SchemaError("pattern needs an 'intervals' array");
  int t = j.contains("T") ? static_cast<int>(require_int(j, "T")) : 1;
  std::vector<Interval> intervals;
  for (const auto& iv : j["intervals"])
    intervals.push_back({require_int(iv, "start"), require_int(iv, "len")});
  return MissingPattern(std::move(intervals), t);
}

Json pattern_to_json(const MissingPattern& p) {
  Json intervals = Json::array();
  for (const auto& iv : p.intervals())
    intervals.push_back({{"start", iv.start}, {"len", iv.len}});
  return {{"T", p.period()}, {"intervals", intervals}};
}

FunctionalSpec functional_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
    throw SchemaError("functional needs a 'coeffs' array");
  FunctionalSpec fs;
  std::string mode = j.value("mode", "vector");
  if (mode == "vector") {
    fs.mode = FunctionalMode::kVector;
  } else if (mode == "pc_lift") {
    fs.mode = FunctionalMode::kPcLift;
  } else if (mode == "pc_block") {
    fs.mode = FunctionalMode::kPcBlock;
  } else {
    throw SchemaError("functional mode must be vector, pc_lift, or pc_block");
  }
  for (const auto& cj : j["coeffs"]) {
    long idx = require_int(cj, "j");
    if (fs.mode == FunctionalMode::kVector) {
      if (!cj.contains("v"))
        throw SchemaError("vector functionals need 'v' entries");
      fs.vector[idx] = vector_from(cj["v"], "functional coefficient");
    } else {
      double re = cj.contains("re") ? parse_number(cj["re"], "re") : 0.0;
      double im = cj.contains("im") ? parse_number(cj["im"], "im") : 0.0;
      fs.scalar[idx] = cd(re, im);
    }
  }
  return fs;
}

GeneratorSpec generator_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("generator must be an object");
  GeneratorSpec spec;
  std::string kind = j.value("kind", "");
  if (kind == "var") {
    VarSpec var;
    for (const auto& m : j.at("q")) var.q.push_back(matrix_from(m, "Q(k)"));
    spec.model = std::move(var);
  } else if (kind == "ma") {
    MaSpec ma;
    for (const auto& m : j.at("theta"))
      ma.theta.push_back(matrix_from(m, "Theta(k)"));
    spec.model = std::move(ma);
  } else if (kind == "scalar_pc") {
    ScalarPcSpec pc;
    if (!j.contains("components") || !j["components"].is_array())
      throw SchemaError("scalar_pc generator needs per-component coefficients");
    for (const auto& comp : j["components"]) {
      std::vector<cd> coeffs;
      for (const auto& c : comp) coeffs.push_back(complex_from(c, "component"));
      pc.components.push_back(std::move(coeffs));
    }
    spec.model = std::move(pc);
  } else {
    throw SchemaError("generator kind must be var, ma, or scalar_pc");
  }
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("burn_in"))
    spec.burn_in = static_cast<int>(require_int(j, "burn_in"));
  spec.complex_noise = j.value("complex", true);
  validate_generator(spec);
  return spec;
}

Quadrature quad_from_json(const Json& j) {
  Quadrature quad;
  if (j.is_object() && j.contains("grid"))
    quad.grid_n = static_cast<int>(require_int(j, "grid"));
  if (j.is_object() && j.contains("tol"))
    quad.tol = parse_number(j["tol"], "tol");
  if (!quad.valid())
    throw SchemaError(
        "quadrature grid must be a power of two >= 8 with positive tolerance");
  return quad;
}

Json execute_command(const Json& config, const RunOptions& opts) {
  if (!config.is_object() || !config.contains("command") ||
      !config["command"].is_string())
    throw SchemaError("config needs a 'command' string");

  // Materialize overrides and environment defaults into the config so the
  // embedded copy reproduces the run exactly.
  Json cfg = config;
  std::string command = cfg["command"].get<std::string>();
  if (command != "verify") {
    if (!cfg.contains("quad")) cfg["quad"] = Json::object();
    if (opts.grid_override) {
      cfg["quad"]["grid"] = *opts.grid_override;
    } else if (!cfg["quad"].contains("grid")) {
      int n = 4096;
      if (const char* env = std::getenv("PCINTERP_GRID")) n = std::atoi(env);
      cfg["quad"]["grid"] = n;
    }
    if (opts.seed_override && command == "simulate")
      cfg["seed"] = *opts.seed_override;
  }

  Quadrature quad =
      command == "verify" ? Quadrature{} : quad_from_json(cfg["quad"]);

  Json rep;
  if (command == "interpolate") {
    rep = run_interpolate(cfg, quad);
  } else if (command == "minimax-d0") {
    rep = run_minimax_d0(cfg, quad);
  } else if (command == "minimax-dg") {
    rep = run_minimax_dg(cfg, quad);
  } else if (command == "simulate") {
    rep = run_simulate(cfg, quad);
  } else if (command == "verify") {
    rep = run_verify(cfg, opts);
  } else {
    throw SchemaError("unknown command '" + command + "'");
  }

  rep["tool"] = kToolName;
  rep["version"] = kToolVersion;
  rep["command"] = command;
  rep["generated_at"] = timestamp();
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  rep["config_hash"] = hash;
  rep["config"] = cfg;
  return rep;
}

int run_config(const Json& config, const RunOptions& opts, std::ostream& out,
               std::ostream& err) {
  Json rep;
  try {
    rep = execute_command(config, opts);
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const DimensionMismatch& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const Json::exception& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const MinimalityViolation& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const HypothesisViolated& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const NotFactorizable& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const UnsupportedPattern& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const CandidateOutOfClass& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const UnstableModel& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const ZeroVector& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const NotBlockable& e) {
    err << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }

  std::string text = rep.dump(2) + "\n";
  if (opts.out_path) {
    std::ofstream f(*opts.out_path);
    if (!f) {
      err << "cannot write report to " << *opts.out_path << "\n";
      return kExitOther;
    }
    f << text;
  } else {
    out << text;
  }

  if (opts.emit_filter_path && rep.contains("taps")) {
    std::ofstream csv(*opts.emit_filter_path);
    if (!csv) {
      err << "cannot write filter to " << *opts.emit_filter_path << "\n";
      return kExitOther;
    }
    csv << "lag,component,re,im\n";
    for (const auto& row : rep["taps"])
      csv << row["lag"].get<long>() << "," << row["component"].get<long>()
          << "," << row["re"].get<std::string>() << ","
          << row["im"].get<std::string>() << "\n";
  }

  if (rep.contains("verified") && !rep["verified"].get<bool>())
    return kExitVerifyMismatch;
  return kExitOk;
}

}  // namespace pcinterp
