#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "p5iso/formal/formal.hpp"
#include "p5iso/verify/checks.hpp"

namespace p5iso::cli {

using verify::Check;
using verify::Report;
using verify::Status;
using json = nlohmann::json;
using cplx = std::complex<double>;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string group, target;
  std::string theta0 = "1/3", theta1 = "1/5", thetainf = "1/7";
  bool theta_inf_given = false;
  double t0 = 1, t1 = 2, tol = 1e-10;
  std::string out, csv, json_in;
  bool exact = false, numeric = false;
};

inline const std::map<std::string, std::vector<std::string>>& commands() {
  static const std::map<std::string, std::vector<std::string>> c{
      {"verify", {"lax2", "lax4", "hamiltonian", "canonical", "charts", "lemma21"}},
      {"derive", {"p5", "riccati", "fsystem", "bsystem", "cubic4"}},
      {"integrate", {"p5", "riccati", "fsystem", "bsystem"}},
      {"monodromy", {"rank2", "rank4"}},
      {"classify", {"lattice", "eigenline", "fiber"}}};
  return c;
}

inline std::string usage_text() {
  std::string s = "usage: p5iso <command> <target> [options]\n";
  for (auto& [g, ts] : commands()) {
    s += "  " + g + " ";
    for (size_t k = 0; k < ts.size(); ++k) s += (k ? "|" : "") + ts[k];
    s += "\n";
  }
  s += "options: --theta0 --theta1 --thetainf (rational or float), --t0 --t1, --tol, --out FILE, --csv FILE,\n"
       "         --json JSON|@FILE (command input), --exact | --numeric\n";
  return s;
}

// ---------------------------------------------------------------------------
// Input helpers.

inline GaussianRational exact_value(const std::string& s, const char* what) {
  try {
    return GaussianRational::parse(s);
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": expected a rational, got '" + s + "'");
  }
}

inline cplx numeric_value(const std::string& s, const char* what) {
  try {
    return GaussianRational::parse(s).to_complex();
  } catch (const std::exception&) {
  }
  try {
    size_t used = 0;
    double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string(what) + ": expected a number, got '" + s + "'");
}

inline Theta exact_theta(const Options& o) {
  return {exact_value(o.theta0, "--theta0"), exact_value(o.theta1, "--theta1"), exact_value(o.thetainf, "--thetainf")};
}
inline ThetaNum numeric_theta(const Options& o) {
  return {numeric_value(o.theta0, "--theta0"), numeric_value(o.theta1, "--theta1"),
          numeric_value(o.thetainf, "--thetainf")};
}

inline json input_json(const Options& o) {
  if (o.json_in.empty()) return json::object();
  std::string text = o.json_in;
  if (text[0] == '@') {
    std::ifstream f(text.substr(1));
    if (!f) throw UsageError("cannot read " + text.substr(1));
    text.assign(std::istreambuf_iterator<char>(f), {});
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("--json: ") + e.what());
  }
}

inline cplx json_complex(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return numeric_value(j.get<std::string>(), "json value");
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw UsageError("expected a number, a numeric string or [re, im]");
}

inline GaussianRational json_exact(const json& j) {
  if (j.is_number_integer()) return GaussianRational(j.get<long>());
  if (j.is_string()) return exact_value(j.get<std::string>(), "json value");
  throw UsageError("expected an integer or a rational string");
}

inline cplx get_c(const json& j, const char* key, cplx dflt) { return j.contains(key) ? json_complex(j.at(key)) : dflt; }

inline std::array<cplx, 4> get_eps4(const json& j) {
  std::array<cplx, 4> e{0.1, 0.2, -0.05, -0.25};
  if (j.contains("eps")) {
    if (j.at("eps").size() != 4) throw UsageError("eps needs 4 entries");
    for (int k = 0; k < 4; ++k) e[k] = json_complex(j.at("eps")[k]);
  }
  return e;
}

inline std::array<int, 3> get_eps3(const json& j) {
  std::array<int, 3> e{1, 1, 1};
  if (j.contains("eps")) {
    if (j.at("eps").size() != 3) throw UsageError("eps needs 3 entries");
    for (int k = 0; k < 3; ++k) e[k] = j.at("eps")[k].get<int>();
  }
  return e;
}

inline json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

inline IntegratorConfig config(const Options& o) {
  IntegratorConfig c;
  c.rel_tol = o.tol;
  c.abs_tol = o.tol * 1e-2;
  return c;
}

inline void write_csv_artifact(const Options& o, Report& r, const Trajectory& tr) {
  if (o.csv.empty()) return;
  std::ofstream f(o.csv);
  if (!f) throw UsageError("cannot write " + o.csv);
  write_csv(f, tr);
  r.artifacts.push_back(o.csv);
}

inline json trajectory_summary(const Trajectory& tr, const std::vector<cplx>& poles) {
  json p = json::array();
  for (auto z : poles) p.push_back(cjson(z));
  json y0 = json::array(), y1 = json::array();
  for (auto v : tr.samples.front().y) y0.push_back(cjson(v));
  for (auto v : tr.samples.back().y) y1.push_back(cjson(v));
  return {{"names", tr.names}, {"samples", tr.samples.size()}, {"start", y0}, {"end", y1}, {"poles", p},
          {"steps", tr.steps}, {"rejected", tr.rejected}};
}

// ---------------------------------------------------------------------------
// Commands.

inline void run_verify(const Options& o, Report& r) {
  const auto& t = o.target;
  if (t == "lax2") r.add(verify::suite_lax2());
  if (t == "lax4") r.add(verify::suite_lax4());
  if (t == "hamiltonian") r.add(verify::suite_hamiltonian());
  if (t == "canonical") r.add(verify::suite_canonical());
  if (t == "charts") r.add(verify::suite_charts());
  if (t == "lemma21") r.add(verify::suite_lemma21());
}

inline void run_derive(const Options& o, Report& r) {
  const auto& t = o.target;
  if (t == "p5") {
    auto& q = verify::derived_q_equation();
    auto p = p5_standard_params(symbolic_theta());
    r.data = {{"q_equation", {{"unknown", q.unknown}, {"dsym", q.dsym}, {"rhs", q.rhs.str()}}},
              {"y_equation", scalar_in_y(q).str()},
              {"p5_params", {{"alpha", p.alpha.str()}, {"beta", p.beta.str()}, {"gamma", p.gamma.str()},
                             {"delta", p.delta.str()}}}};
    r.add({verify::exact_check("q_equation.standard_p5_after_moebius", "derived:p5_standard_rhs", scalar_in_y(q),
                               p5_standard_rhs_symbolic(p))});
  } else if (t == "riccati") {
    auto eps = get_eps3(input_json(o));
    std::optional<Theta> th;
    if (o.exact) th = exact_theta(o);
    auto ric = derive_riccati(eps, th);
    r.data = {{"eps", eps},
              {"du", ric.ode.rhs.str()},
              {"r0", ric.r0.str()},
              {"r1", ric.r1.str()},
              {"r2", ric.r2.str()}};
    bool ok = ric.ode.rhs == ric.r0 + ric.r1 * RationalFunction::var("u") + ric.r2 * RationalFunction::var("u").pow(2);
    r.add({{"riccati.quadratic_in_u", "derived:riccati", ok, ok ? "u' = r0 + r1 u + r2 u^2" : "not quadratic in u",
            ok ? 0.0 : 1.0}});
  } else if (t == "fsystem") {
    auto& fs = verify::f_system();
    json g = json::array();
    for (auto& x : fs.g) g.push_back(x.str());
    r.data = {{"df0", fs.df0.str()}, {"df1", fs.df1.str()}, {"g", g}};
    r.add(verify::f_system_checks());
  } else if (t == "bsystem") {
    auto& b = verify::b_system();
    r.data = {{"db1", b.db1.str()}, {"db3", b.db3.str()}, {"h1", b.h1.str()}, {"h2", b.h2.str()}, {"h3", b.h3.str()}};
    r.add(verify::b_display_checks());
  } else if (t == "cubic4") {
    r.data = {{"cubic", rank4_fiber_cubic_symbolic().str()}, {"variables", {"x3", "x4", "y"}},
              {"coefficients", {"p1", "p2", "p3"}}};
    r.add(verify::cubic_shape_checks());
  }
}

inline void run_integrate(const Options& o, Report& r) {
  auto in = input_json(o);
  auto cfg = config(o);
  const auto& t = o.target;
  if (t == "p5") {
    auto th = numeric_theta(o);
    auto tr = integrate_p5(th, get_c(in, "q0", cplx(0.3, 0.1)), get_c(in, "dq0", 0.2), o.t0, o.t1, cfg);
    CompiledRF derived(verify::derived_q_equation().rhs, {"q", "dq", "t", "theta0", "theta1", "theta"});
    double res = 0;
    for (auto& s : tr.traj.samples) {
      cplx want = derived({s.y[0], s.y[1], s.t, th.theta0, th.theta1, th.theta()});
      res = std::max(res, std::abs(s.dy[1] - want) / std::max(1.0, std::abs(want)));
    }
    write_csv_artifact(o, r, tr.traj);
    r.data = trajectory_summary(tr.traj, tr.poles);
    r.add({verify::numeric_check("p5.lax_q_equation_residual", "derived:p5_q_equation", res, 1e-6,
                                 "max residual of the Lax-derived q equation over " +
                                     std::to_string(tr.traj.samples.size()) + " samples")});
  } else if (t == "riccati") {
    auto eps = get_eps3(in);
    Theta th = exact_theta(o);
    if (!o.theta_inf_given) th = verify::riccati_compatible_theta(eps, th.theta0, th.theta1);
    auto rep = riccati_embed_check(eps, th, get_c(in, "u0", 0.5), o.t0, o.t1, cfg);
    write_csv_artifact(o, r, rep.q);
    r.data = trajectory_summary(rep.u.traj, rep.u.poles);
    r.data["theta_inf"] = th.theta_inf.str();
    r.add({{"riccati.p5_residual", "derived:p5_q_equation", rep.pass(1e-6),
            "P5 residual on " + std::to_string(rep.residual.used) + " samples", rep.residual.max},
           verify::numeric_check("riccati.mon0_eigenvalue_drift", "invariant:local_exponents", rep.eig_drift, 1e-6,
                                 "drift")});
  } else if (t == "fsystem") {
    auto eps = get_eps4(in);
    check_eps_sum(eps);
    auto f = f_from_b(get_c(in, "b1", 0.1), get_c(in, "b3", 0.05), cplx(o.t0));
    cvec start{get_c(in, "f0", f[0]), get_c(in, "f1", f[1])};
    auto tr = integrate_rerouted(Rank4Numeric::get().f_field(eps), start, o.t0, o.t1, cfg, {"f0", "f1"});
    write_csv_artifact(o, r, tr.traj);
    r.data = trajectory_summary(tr.traj, tr.poles);
    auto drift = isomonodromy_drift_rank4(eps, start, o.t0, o.t1, cfg);
    r.add({verify::numeric_check("fsystem.charpoly_drift", "invariant:local_monodromy_charpoly", drift.max_drift(),
                                 1e-6, "max drift")});
  } else if (t == "bsystem") {
    auto eps = get_eps4(in);
    check_eps_sum(eps);
    cplx b1 = get_c(in, "b1", 0.1), b3 = get_c(in, "b3", 0.05);
    auto tr = integrate_rerouted(Rank4Numeric::get().b_field(a_from_eps(eps)), {b1, b3}, o.t0, o.t1, cfg, {"b1", "b3"});
    write_csv_artifact(o, r, tr.traj);
    r.data = trajectory_summary(tr.traj, tr.poles);
    r.add(verify::fb_checks(eps, b1, b3, o.t0, o.t1, cfg));
  }
}

inline void run_monodromy(const Options& o, Report& r) {
  auto in = input_json(o);
  auto cfg = config(o);
  if (o.target == "rank2") {
    auto th = numeric_theta(o);
    const auto& R = Rank2Numeric::get();
    cplx a0 = get_c(in, "a0", cplx(0.3, 0.1)), b0 = get_c(in, "b0", cplx(0.7, -0.2));
    auto d = isomonodromy_drift(th, {a0, b0, R.solve_c1(a0, b0, o.t0, th)}, o.t0, o.t1, cfg);
    r.data = drift_to_json(d);
    auto s = theta_to_s(th);
    r.data["s"] = {cjson(s[0]), cjson(s[1]), cjson(s[2])};
    for (auto& e : d.entries)
      r.add({verify::numeric_check("drift." + e.invariant, "invariant:monodromy_trace", e.drift, 1e-6, "drift")});
  } else {
    auto eps = get_eps4(in);
    check_eps_sum(eps);
    auto f = f_from_b(get_c(in, "b1", 0.1), get_c(in, "b3", 0.05), cplx(o.t0));
    auto d = isomonodromy_drift_rank4(eps, {get_c(in, "f0", f[0]), get_c(in, "f1", f[1])}, o.t0, o.t1, cfg);
    r.data = drift_to_json(d);
    for (auto& e : d.entries)
      r.add({verify::numeric_check("drift." + e.invariant, "invariant:local_monodromy_charpoly", e.drift, 1e-6,
                                   "drift")});
  }
}

inline void run_classify(const Options& o, Report& r) {
  auto in = input_json(o);
  if (o.target == "lattice" || o.target == "eigenline") {
    if (in.empty()) throw UsageError("classify " + o.target + " needs --json with theta and coeffs");
    FormalConnection c;
    try {
      c = formal_from_json(in);
    } catch (const ParseError& e) {
      throw UsageError(std::string("--json: ") + e.what());
    }
    auto nf = normal_form(c);
    bool gauge_ok = true;
    for (auto& m : gauge_identity_residual(c, nf))
      for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 2; ++j) gauge_ok = gauge_ok && m(i, j).is_zero();
    r.add({{"normal_form.gauge_identity", "derived:normal_form", gauge_ok,
            gauge_ok ? "U A - z U' - N U = 0 through order " + std::to_string(nf.order) : "gauge identity fails",
            gauge_ok ? 0.0 : 1.0}});
    r.data["normal_form"] = normal_form_to_json(nf);
    if (o.target == "lattice") {
      auto lc = classify_lattices(nf);
      r.data["lattices"] = json{{"kind", lattice_kind_name(lc.kind)}};
      if (lc.parametrization) r.data["lattices"]["parametrization"] = *lc.parametrization;
    } else {
      if (!in.contains("eta")) throw UsageError("classify eigenline needs eta in --json");
      r.data["eigenlines"] = eigenline_to_json(eigenline_set(nf, json_exact(in.at("eta"))));
    }
  } else {
    for (const char* k : {"a1", "a2", "s1", "s2", "s3"})
      if (!in.contains(k)) throw UsageError(std::string("classify fiber needs ") + k + " in --json");
    FiberResult fr;
    if (o.numeric) {
      MonodromyParamsT<cplx> s{json_complex(in["s1"]), json_complex(in["s2"]), json_complex(in["s3"])};
      fr = pr_fiber_classify(json_complex(in["a1"]), json_complex(in["a2"]), s, std::max(o.tol, 1e-12));
    } else {
      MonodromyParams s{json_exact(in["s1"]), json_exact(in["s2"]), json_exact(in["s3"])};
      fr = pr_fiber_classify(json_exact(in["a1"]), json_exact(in["a2"]), s);
    }
    json strata = json::array();
    for (auto& st : fr.strata) strata.push_back({{"stratum", st.str()}, {"dim", st.dim}});
    r.data = {{"class", fiber_class_name(fr.cls)}, {"description", fr.description}, {"strata", strata}};
  }
}

struct Outcome {
  int code = 0;
  std::optional<Report> report;
};

// Parses argv, runs the command and writes the JSON report to stdout or --out.
inline Outcome dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Isomonodromy verification and experiments", "p5iso"};
  app.set_help_flag("-h,--help");
  app.add_option("command", o.group)->required();
  app.add_option("target", o.target);
  app.add_option("--theta0", o.theta0);
  app.add_option("--theta1", o.theta1);
  auto* ti = app.add_option("--thetainf", o.thetainf);
  app.add_option("--t0", o.t0);
  app.add_option("--t1", o.t1);
  app.add_option("--tol", o.tol)->check(CLI::PositiveNumber);
  app.add_option("--out", o.out);
  app.add_option("--csv", o.csv);
  app.add_option("--json", o.json_in);
  auto* ex = app.add_flag("--exact", o.exact);
  app.add_flag("--numeric", o.numeric)->excludes(ex);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << usage_text();
    return {0, std::nullopt};
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << usage_text();
    return {2, std::nullopt};
  }
  o.theta_inf_given = ti->count() > 0;
  auto it = commands().find(o.group);
  if (it == commands().end() || std::find(it->second.begin(), it->second.end(), o.target) == it->second.end()) {
    err << "unknown command: " << o.group << (o.target.empty() ? "" : " " + o.target) << "\n" << usage_text();
    return {2, std::nullopt};
  }
  Report r;
  r.command = o.group + " " + o.target;
  try {
    if (o.group == "verify") run_verify(o, r);
    if (o.group == "derive") run_derive(o, r);
    if (o.group == "integrate") run_integrate(o, r);
    if (o.group == "monodromy") run_monodromy(o, r);
    if (o.group == "classify") run_classify(o, r);
    r.finalize();
  } catch (const UsageError& e) {
    err << e.what() << "\n" << usage_text();
    return {2, std::nullopt};
  } catch (const Error& e) {
    r.status = Status::Error;
    r.data = {{"error", e.kind()}, {"message", e.what()}};
    r.finalize();
  }
  std::string text = r.to_json().dump(2);
  if (o.out.empty()) {
    out << text << "\n";
  } else {
    std::ofstream f(o.out);
    if (!f) {
      err << "cannot write " << o.out << "\n";
      return {2, std::nullopt};
    }
    f << text << "\n";
  }
  return {r.status == Status::Pass ? 0 : 1, r};
}

}  // namespace p5iso::cli
