#include "gyro/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gyro/errors.hpp"
#include "gyro/filters.hpp"
#include "json.hpp"

namespace gyro {

const char* to_string(MethodKind m) {
  switch (m) {
    case MethodKind::Boris: return "boris";
    case MethodKind::Variational: return "variational";
    case MethodKind::FilteredVariational: return "filtered";
  }
  return "?";
}

const char* to_string(StartPolicy p) {
  switch (p) {
    case StartPolicy::Raw: return "raw";
    case StartPolicy::Modified: return "modified";
    case StartPolicy::ModifiedVelocityOnly: return "modified_velocity_only";
  }
  return "?";
}

namespace {

using nlohmann::json;

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

double get_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  if (!j[key].is_number()) throw ConfigError(where + ": \"" + std::string(key) + "\" must be a number");
  return j[key].get<double>();
}

Vec3 get_vec3(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  const json& a = j[key];
  if (!a.is_array() || a.size() != 3) throw ConfigError(where + ": \"" + std::string(key) + "\" must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a[i].is_number()) throw ConfigError(where + ": \"" + std::string(key) + "\" must be numeric");
    v[i] = a[i].get<double>();
  }
  return v;
}

MethodKind parse_method(const std::string& s) {
  if (s == "boris") return MethodKind::Boris;
  if (s == "variational") return MethodKind::Variational;
  if (s == "filtered") return MethodKind::FilteredVariational;
  throw ConfigError("method: expected boris|variational|filtered, got \"" + s + "\"");
}

StartPolicy parse_policy(const std::string& s) {
  if (s == "raw") return StartPolicy::Raw;
  if (s == "modified") return StartPolicy::Modified;
  if (s == "modified_velocity_only") return StartPolicy::ModifiedVelocityOnly;
  throw ConfigError("start_policy: expected raw|modified|modified_velocity_only, got \"" + s + "\"");
}

Polynomial parse_polynomial(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + ": polynomial must be an array of terms");
  Polynomial p;
  for (const json& t : arr) {
    if (!t.is_object()) throw ConfigError(where + ": polynomial term must be an object");
    reject_unknown_keys(t, {"coef", "powers"}, where);
    Monomial m;
    m.coef = get_number(t, "coef", where);
    const json& pw = t.contains("powers") ? t["powers"] : json::array({0, 0, 0});
    if (!pw.is_array() || pw.size() != 3) throw ConfigError(where + ": \"powers\" must be 3 integers");
    int e[3];
    for (int i = 0; i < 3; ++i) {
      if (!pw[i].is_number_integer() || pw[i].get<int>() < 0)
        throw ConfigError(where + ": \"powers\" must be non-negative integers");
      e[i] = pw[i].get<int>();
    }
    m.px = e[0];
    m.py = e[1];
    m.pz = e[2];
    p.terms.push_back(m);
  }
  return p;
}

FieldSpec parse_field_spec(const json& j) {
  FieldSpec f;
  if (j.is_string()) {
    f.catalog = j.get<std::string>();
    if (f.catalog != "harmonic" && f.catalog != "quartic" && f.catalog != "uniform")
      throw ConfigError("field: unknown catalog name \"" + f.catalog + "\"");
    return f;
  }
  if (!j.is_object()) throw ConfigError("field: must be a catalog name or an object");
  reject_unknown_keys(j, {"b0", "B1_matrix", "E", "phi"}, "field");
  if (j.contains("b0")) f.b0_raw = get_vec3(j, "b0", "field");
  if (j.contains("B1_matrix")) {
    const json& m = j["B1_matrix"];
    if (!m.is_array() || m.size() != 3) throw ConfigError("field: \"B1_matrix\" must be 3 rows");
    for (int i = 0; i < 3; ++i) {
      if (!m[i].is_array() || m[i].size() != 3)
        throw ConfigError("field: \"B1_matrix\" rows must hold 3 numbers");
      for (int c = 0; c < 3; ++c) f.B1_matrix(i, c) = m[i][c].get<double>();
    }
  }
  if (j.contains("E")) {
    const json& e = j["E"];
    if (!e.is_array() || e.size() != 3)
      throw ConfigError("field: \"E\" must hold one polynomial per component");
    for (int c = 0; c < 3; ++c) f.E_poly[c] = parse_polynomial(e[c], "field.E");
    f.has_E = true;
  }
  if (j.contains("phi")) {
    f.phi_poly = parse_polynomial(j["phi"], "field.phi");
    f.has_phi = true;
  }
  return f;
}

ScenarioConfig parse_scenario_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": config must be a JSON object");
  reject_unknown_keys(j,
                      {"field", "eps", "h", "t_end", "method", "start_policy", "x0", "v0",
                       "sample_every", "seed", "output"},
                      where);
  ScenarioConfig c;
  if (!j.contains("field")) throw ConfigError(where + ": missing key \"field\"");
  c.field = parse_field_spec(j["field"]);
  c.eps = get_number(j, "eps", where);
  c.h = get_number(j, "h", where);
  c.t_end = get_number(j, "t_end", where);
  if (!j.contains("method") || !j["method"].is_string())
    throw ConfigError(where + ": \"method\" must be a string");
  c.method = parse_method(j["method"].get<std::string>());
  if (!j.contains("start_policy") || !j["start_policy"].is_string())
    throw ConfigError(where + ": \"start_policy\" must be a string");
  c.start_policy = parse_policy(j["start_policy"].get<std::string>());
  c.x0 = get_vec3(j, "x0", where);
  c.v0 = get_vec3(j, "v0", where);
  if (j.contains("sample_every")) {
    if (!j["sample_every"].is_number_integer() || j["sample_every"].get<long long>() < 1)
      throw ConfigError(where + ": \"sample_every\" must be a positive integer");
    c.sample_every = j["sample_every"].get<long long>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
      throw ConfigError(where + ": \"seed\" must be an integer");
    c.seed = j["seed"].get<unsigned long long>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError(where + ": \"output\" must be a string");
    c.output = j["output"].get<std::string>();
  }

  if (!(c.eps > 0.0) || !std::isfinite(c.eps)) throw ConfigError(where + ": eps must be positive");
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw ConfigError(where + ": h must be positive");
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) throw ConfigError(where + ": t_end must be positive");
  if (c.t_end / c.h > 1e10) throw ConfigError(where + ": t_end/h exceeds the 1e10 step guard");
  if (!finite(c.x0) || !finite(c.v0)) throw ConfigError(where + ": x0/v0 must be finite");
  return c;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: not valid JSON");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write \"" + path + "\"");
  out << content;
  if (!out) throw ConfigError("output: failed writing \"" + path + "\"");
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json summary_common(const ScenarioConfig& cfg, const Trajectory& t, long long n_steps) {
  json s;
  s["steps"] = n_steps;
  s["sample_every"] = t.sample_every;
  s["method"] = to_string(t.method);
  s["start_policy"] = to_string(cfg.start_policy);
  s["status"] = t.blew_up ? "blowup" : "ok";
  if (t.blew_up) s["blowup_step"] = t.blowup_step;
  if (t.size() > 0) {
    s["final_t"] = t.times.back();
    s["final_x"] = vec_json(t.xs.back());
    s["final_v"] = vec_json(t.vs.back());
  }
  if (t.has_energy) {
    s["H0"] = t.H0;
    s["I0"] = t.I0;
    s["max_H_err"] = t.max_H_err;
    s["max_I_err"] = t.max_I_err;
    s["I_min"] = t.I_min;
    s["I_max"] = t.I_max;
    s["energy_slope"] = t.energy_slope;
  }
  s["fp_iter_total"] = t.fp_iter_total;
  s["fp_iter_max"] = t.fp_iter_max;
  return s;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "t,x1,x2,x3,v1,v2,v3,H_err,I_err\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_double(t.times[i]);
    for (int c = 0; c < 3; ++c) out += "," + format_double(t.xs[i][c]);
    for (int c = 0; c < 3; ++c) out += "," + format_double(t.vs[i][c]);
    if (t.has_energy) {
      out += "," + format_double(t.h_errs[i]);
      out += "," + format_double(t.i_errs[i]);
    } else {
      out += ",,";
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScenarioConfig parse_scenario_config(const std::string& text) {
  return parse_scenario_json(parse_text(text), "config");
}
ScenarioConfig load_scenario_config(const std::string& path) {
  return parse_scenario_json(parse_text(slurp(path)), path);
}

SweepConfig parse_sweep_config(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw ConfigError("sweep config: must be a JSON object");
  reject_unknown_keys(j, {"base", "eps_list", "h_list", "methods", "policies", "t_eval", "h_ref"},
                      "sweep config");
  SweepConfig c;
  if (!j.contains("base")) throw ConfigError("sweep config: missing key \"base\"");
  c.base = parse_scenario_json(j["base"], "sweep config.base");
  auto num_list = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
      throw ConfigError(std::string("sweep config: \"") + key + "\" must be a non-empty array");
    std::vector<double> v;
    for (const json& e : j[key]) {
      if (!e.is_number() || !(e.get<double>() > 0.0))
        throw ConfigError(std::string("sweep config: \"") + key + "\" entries must be positive");
      v.push_back(e.get<double>());
    }
    return v;
  };
  c.eps_list = num_list("eps_list");
  c.h_list = num_list("h_list");
  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
    throw ConfigError("sweep config: \"methods\" must be a non-empty array");
  for (const json& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
  if (!j.contains("policies") || !j["policies"].is_array() || j["policies"].empty())
    throw ConfigError("sweep config: \"policies\" must be a non-empty array");
  for (const json& p : j["policies"]) c.policies.push_back(parse_policy(p.get<std::string>()));
  c.t_eval = get_number(j, "t_eval", "sweep config");
  if (!(c.t_eval > 0.0)) throw ConfigError("sweep config: t_eval must be positive");
  if (j.contains("h_ref")) {
    if (j["h_ref"].is_string()) {
      if (j["h_ref"].get<std::string>() != "auto")
        throw ConfigError("sweep config: \"h_ref\" must be \"auto\" or a number");
    } else {
      c.h_ref = get_number(j, "h_ref", "sweep config");
      if (!(c.h_ref > 0.0)) throw ConfigError("sweep config: h_ref must be positive");
    }
  }
  return c;
}
SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(slurp(path)); }

FieldModel build_field_model(const FieldSpec& spec, double eps) {
  if (spec.catalog == "harmonic") return make_harmonic_field(eps);
  if (spec.catalog == "quartic") return make_quartic_field(eps);
  if (spec.catalog == "uniform") return make_uniform_field(eps, spec.b0_raw);
  if (!spec.catalog.empty()) throw ConfigError("field: unknown catalog name \"" + spec.catalog + "\"");

  auto pot = potential_for_linear_B1(spec.B1_matrix);
  const Mat3 M = spec.B1_matrix;
  auto B1 = [M](const Vec3& x) { return M * x; };

  std::function<Vec3(const Vec3&)> E;
  std::function<double(const Vec3&)> phi;
  if (spec.has_E) {
    const auto pe = spec.E_poly;
    E = [pe](const Vec3& x) { return Vec3{pe[0].eval(x), pe[1].eval(x), pe[2].eval(x)}; };
  }
  if (spec.has_phi) {
    const Polynomial pp = spec.phi_poly;
    phi = [pp](const Vec3& x) { return pp.eval(x); };
    if (!spec.has_E)
      E = [pp](const Vec3& x) { return -pp.grad(x); };
  }
  if (!spec.has_E && !spec.has_phi) {
    E = [](const Vec3&) { return Vec3{}; };
    phi = [](const Vec3&) { return 0.0; };
  }
  FieldModel m = make_field_model(spec.b0_raw, eps, B1, pot.A1, pot.A1_jac, E, phi);

  // affine E enables the closed-form slow-drift flow
  if (spec.has_E) {
    bool affine = true;
    Vec3 E0{};
    Mat3 L{};
    for (int c = 0; c < 3 && affine; ++c)
      for (const Monomial& t : spec.E_poly[c].terms) {
        const int deg = t.px + t.py + t.pz;
        if (deg == 0) E0[c] += t.coef;
        else if (deg == 1) L(c, t.px == 1 ? 0 : (t.py == 1 ? 1 : 2)) += t.coef;
        else { affine = false; break; }
      }
    if (affine) {
      m.E_affine = true;
      m.E0 = E0;
      m.E_lin = L;
    }
  }
  return m;
}

long long scenario_steps(const ScenarioConfig& cfg) {
  return static_cast<long long>(std::ceil(cfg.t_end / cfg.h - 1e-9));
}

long long resolve_sample_every(const ScenarioConfig& cfg) {
  if (cfg.sample_every > 0) return cfg.sample_every;
  const long long n = scenario_steps(cfg);
  return std::max(1LL, (n + 999'999) / 1'000'000);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const FieldModel model = build_field_model(cfg.field, cfg.eps);
  const long long n_steps = scenario_steps(cfg);
  const long long se = resolve_sample_every(cfg);
  ScenarioResult r;
  r.traj = integrate(model, cfg.method, cfg.start_policy, cfg.x0, cfg.v0, cfg.h, n_steps, {}, se);
  r.wall_seconds = wall_since(t0);
  write_file(cfg.output, trajectory_csv(r.traj));
  json s = summary_common(cfg, r.traj, n_steps);
  s["timing"] = {{"wall_seconds", r.wall_seconds}};
  write_file(cfg.output + ".summary.json", s.dump(2) + "\n");
  return r;
}

namespace {

struct SweepPlan {
  double t_snap = 0.0;
  std::vector<FieldModel> models;  // one per eps
  std::vector<Trajectory> refs;    // one per eps
  std::vector<SweepRow> cells;
};

SweepPlan plan_sweep(const SweepConfig& cfg, bool parallel, int nthreads) {
  SweepPlan plan;
  const double h_max = *std::max_element(cfg.h_list.begin(), cfg.h_list.end());
  long long n = std::llround(cfg.t_eval / h_max);
  if (n < 1) n = 1;
  plan.t_snap = static_cast<double>(n) * h_max;
  for (double h : cfg.h_list) {
    const double k = plan.t_snap / h;
    if (std::abs(k - std::llround(k)) > 1e-9 * std::max(1.0, k))
      throw ConfigError("sweep config: h_list entries must divide the snapped t_eval");
  }

  plan.models.reserve(cfg.eps_list.size());
  for (double eps : cfg.eps_list) plan.models.push_back(build_field_model(cfg.base.field, eps));

  plan.refs.resize(cfg.eps_list.size());
  std::vector<std::string> ref_errors(cfg.eps_list.size());
  const auto make_ref = [&](std::size_t ie) {
    try {
      plan.refs[ie] = reference_trajectory(plan.models[ie], cfg.base.x0, cfg.base.v0, plan.t_snap,
                                           plan.t_snap, cfg.h_ref);
    } catch (const std::exception& e) {
      ref_errors[ie] = e.what();
    }
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
    for (std::ptrdiff_t ie = 0; ie < static_cast<std::ptrdiff_t>(cfg.eps_list.size()); ++ie)
      make_ref(static_cast<std::size_t>(ie));
  } else {
    for (std::size_t ie = 0; ie < cfg.eps_list.size(); ++ie) make_ref(ie);
  }
  for (std::size_t ie = 0; ie < cfg.eps_list.size(); ++ie)
    if (!ref_errors[ie].empty())
      throw ConfigError("sweep reference at eps=" + format_double(cfg.eps_list[ie]) + ": " +
                        ref_errors[ie]);

  for (MethodKind m : cfg.methods)
    for (StartPolicy p : cfg.policies)
      for (double eps : cfg.eps_list)
        for (double h : cfg.h_list) {
          SweepRow row;
          row.method = m;
          row.policy = p;
          row.eps = eps;
          row.h = h;
          plan.cells.push_back(row);
        }
  return plan;
}

void run_sweep_cell(const SweepConfig& cfg, const SweepPlan& plan, SweepRow& row) {
  const double nan = std::nan("");
  const std::size_t ie =
      std::find(cfg.eps_list.begin(), cfg.eps_list.end(), row.eps) - cfg.eps_list.begin();
  const FieldModel& model = plan.models[ie];
  const long long n_steps = std::llround(plan.t_snap / row.h);
  try {
    Trajectory traj = integrate(model, row.method, row.policy, cfg.base.x0, cfg.base.v0, row.h,
                                n_steps, {}, n_steps);
    if (traj.blew_up) {
      row.status = "blowup";
      row.err = {nan, nan, nan};
      return;
    }
    row.err = global_error(traj, plan.refs[ie], model.b0, plan.t_snap);
    row.status = "ok";
  } catch (const ResonanceError&) {
    row.status = "resonance";
    row.err = {nan, nan, nan};
  } catch (const ConvergenceError&) {
    row.status = "nonconvergence";
    row.err = {nan, nan, nan};
  } catch (const std::exception&) {
    row.status = "error";
    row.err = {nan, nan, nan};
  }
}

SweepResult finish_sweep(const SweepConfig& cfg, SweepPlan&& plan,
                         std::chrono::steady_clock::time_point t0) {
  SweepResult res;
  res.t_eval_snapped = plan.t_snap;
  res.rows = std::move(plan.cells);
  std::sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.method != b.method) return static_cast<int>(a.method) < static_cast<int>(b.method);
    if (a.policy != b.policy) return static_cast<int>(a.policy) < static_cast<int>(b.policy);
    if (a.eps != b.eps) return a.eps < b.eps;
    return a.h < b.h;
  });
  res.wall_seconds = wall_since(t0);

  std::string csv = "method,policy,eps,h,err_x,err_vpar,err_vperp,status\n";
  for (const SweepRow& r : res.rows) {
    csv += to_string(r.method);
    csv += ",";
    csv += to_string(r.policy);
    csv += "," + format_double(r.eps) + "," + format_double(r.h) + "," + format_double(r.err.err_x) +
           "," + format_double(r.err.err_vpar) + "," + format_double(r.err.err_vperp) + "," +
           r.status + "\n";
  }
  write_file(cfg.base.output, csv);
  json s;
  s["t_eval_snapped"] = res.t_eval_snapped;
  s["cells"] = res.rows.size();
  s["timing"] = {{"wall_seconds", res.wall_seconds}};
  write_file(cfg.base.output + ".summary.json", s.dump(2) + "\n");
  return res;
}

}  // namespace

SweepResult run_convergence_sweep_serial(const SweepConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepPlan plan = plan_sweep(cfg, false, 1);
  for (SweepRow& row : plan.cells) run_sweep_cell(cfg, plan, row);
  return finish_sweep(cfg, std::move(plan), t0);
}

SweepResult run_convergence_sweep(const SweepConfig& cfg, int jobs) {
  if (jobs == 1) return run_convergence_sweep_serial(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  int nthreads = jobs;
#ifdef _OPENMP
  if (nthreads <= 0) nthreads = omp_get_max_threads();
#else
  nthreads = 1;
#endif
  SweepPlan plan = plan_sweep(cfg, true, nthreads);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(plan.cells.size()); ++i)
    run_sweep_cell(cfg, plan, plan.cells[static_cast<std::size_t>(i)]);
  return finish_sweep(cfg, std::move(plan), t0);
}

DriftResult run_drift_experiment(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const FieldModel model = build_field_model(cfg.field, cfg.eps);
  const long long n_steps = scenario_steps(cfg);
  const long long se = resolve_sample_every(cfg);
  DriftResult r;
  r.traj = integrate(model, cfg.method, cfg.start_policy, cfg.x0, cfg.v0, cfg.h, n_steps, {}, se);

  const Mat3 pperp = projections(model.b0).perp;
  DriftFlow flow(model, r.traj.xs.front());
  std::string csv = "t,xp1,xp2,xp3,yp1,yp2,yp3,dev\n";
  for (std::size_t i = 0; i < r.traj.size(); ++i) {
    const Vec3 xp = pperp * r.traj.xs[i];
    const Vec3 yp = flow.at(r.traj.times[i]);
    const double dev = norm(xp - yp);
    r.sup_deviation = std::max(r.sup_deviation, dev);
    csv += format_double(r.traj.times[i]);
    for (int c = 0; c < 3; ++c) csv += "," + format_double(xp[c]);
    for (int c = 0; c < 3; ++c) csv += "," + format_double(yp[c]);
    csv += "," + format_double(dev) + "\n";
  }
  r.wall_seconds = wall_since(t0);
  write_file(cfg.output, csv);
  json s = summary_common(cfg, r.traj, n_steps);
  s["sup_drift_deviation"] = r.sup_deviation;
  s["timing"] = {{"wall_seconds", r.wall_seconds}};
  write_file(cfg.output + ".summary.json", s.dump(2) + "\n");
  return r;
}

EnergyResult run_longtime_energy(const ScenarioConfig& cfg, const EnergyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c = cfg;
  if (opts.full) c.t_end = 1e7;
  const FieldModel model = build_field_model(c.field, c.eps);
  const long long n_steps = scenario_steps(c);
  const long long se = resolve_sample_every(c);

  EnergyResult r;
  r.traj = integrate(model, c.method, c.start_policy, c.x0, c.v0, c.h, n_steps, {}, se);

  std::string csv = "t,H_err,I_err\n";
  for (std::size_t i = 0; i < r.traj.size(); ++i) {
    csv += format_double(r.traj.times[i]);
    if (r.traj.has_energy)
      csv += "," + format_double(r.traj.h_errs[i]) + "," + format_double(r.traj.i_errs[i]);
    else
      csv += ",,";
    csv += "\n";
  }
  write_file(c.output, csv);

  if (opts.trials > 0) {
    std::mt19937_64 rng(opts.seed_given ? opts.seed : c.seed);
    std::uniform_real_distribution<double> u(-opts.perturb, opts.perturb);
    std::vector<std::pair<Vec3, Vec3>> starts(static_cast<std::size_t>(opts.trials));
    for (auto& [px, pv] : starts) {
      px = c.x0;
      pv = c.v0;
      for (int i = 0; i < 3; ++i) px[i] += u(rng);
      for (int i = 0; i < 3; ++i) pv[i] += u(rng);
    }
    r.trials.resize(starts.size());
    int nthreads = opts.jobs;
#ifdef _OPENMP
    if (nthreads <= 0) nthreads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(starts.size()); ++i) {
      const auto& [px, pv] = starts[static_cast<std::size_t>(i)];
      EnergyTrial trial;
      try {
        const Trajectory t =
            integrate(model, c.method, c.start_policy, px, pv, c.h, n_steps, {}, n_steps);
        trial.max_H_err = t.max_H_err;
        trial.max_I_err = t.max_I_err;
        trial.blew_up = t.blew_up;
      } catch (const std::exception&) {
        trial.blew_up = true;
      }
      r.trials[static_cast<std::size_t>(i)] = trial;
    }
  }

  r.wall_seconds = wall_since(t0);
  json s = summary_common(c, r.traj, n_steps);
  if (opts.trials > 0) {
    s["perturb"] = opts.perturb;
    json arr = json::array();
    for (const EnergyTrial& t : r.trials)
      arr.push_back({{"max_H_err", t.max_H_err}, {"max_I_err", t.max_I_err}, {"blew_up", t.blew_up}});
    s["trials"] = arr;
  }
  s["timing"] = {{"wall_seconds", r.wall_seconds}};
  write_file(c.output + ".summary.json", s.dump(2) + "\n");
  return r;
}

ResonanceCheck check_resonance_cmd(double h, double eps, int N, double floor) {
  if (!(h > 0.0) || !(eps > 0.0)) throw ConfigError("check-resonance: h and eps must be positive");
  if (N < 1) throw ConfigError("check-resonance: N must be >= 1");
  const ResonanceMargin m = resonance_margin(h, eps, N, floor);
  return {m.margin, m.offending_k, m.margin < floor};
}

}  // namespace gyro
