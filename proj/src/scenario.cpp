#include "tcsim/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/crc.hpp>

#include "tcsim/chaos.hpp"
#include "tcsim/quantum.hpp"

namespace tcsim {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Config, field + ": " + why);
}

const std::vector<ScenarioInfo> kCatalog = {
    {Scenario::ResonantBifurcation, "ResonantBifurcation",
     "resonant inversion s_z(tau) along the adiabatic drift x(tau); bifurcation time and singularity detection "
     "(R0=20, alpha=5e-3, zeta/Omega0=2)"},
    {Scenario::NonresonantSwitching, "NonresonantSwitching",
     "non-resonant spin switching, closed form vs Weierstrass form vs integration (g/(R0 c)=1)"},
    {Scenario::ChaoticMotion, "ChaoticMotion",
     "full semiclassical trajectory, s_z autocorrelation, spectrum and chaos verdict (delta=-0.5, alpha=0.5, N=50)"},
    {Scenario::PurityAdiabatic, "PurityAdiabatic",
     "closed-form purity over the (t, x) plane in the adiabatic regime (Omega0=1, n_bar=1, zeta=1)"},
    {Scenario::PurityWeakRegular, "PurityWeakRegular",
     "weak-coupling purity with regular centre-of-mass motion (alpha=1e-2, n_bar=1, zeta=0.2, Omega0=0.1)"},
    {Scenario::PurityWeakChaotic, "PurityWeakChaotic",
     "weak-coupling purity with the Gaussian-averaged phase functional, plus Monte-Carlo check (alpha0=1)"},
    {Scenario::Custom, "Custom", "user-defined run of the hybrid, full or strong-coupling system"},
};

const std::set<std::string> kTopKeys = {"scenario", "params", "initial", "integrate",
                                        "quantum",  "analysis", "seed", "output_dir"};
const std::set<std::string> kParamKeys = {"alpha", "delta", "Delta",    "N",  "s",   "Omega0", "zeta",
                                          "n_bar", "g_detune", "R0", "delta_q", "k_f", "mass"};
const std::set<std::string> kInitialKeys = {"x", "p", "u", "v", "sz"};
const std::set<std::string> kIntegrateKeys = {"t_max", "dt_out", "rtol", "atol", "system"};
const std::set<std::string> kQuantumKeys = {"n_max", "alpha0", "realizations", "mc_t_max"};
const std::set<std::string> kAnalysisKeys = {"max_lag",    "kappa_form", "singularity_multiple", "switching_convention",
                                             "grid_t",     "grid_x",     "grid_t_max",           "final_window"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where, "must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) config_error(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(where + "." + key, "must be finite");
  return d;
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return get_number(obj, key, where);
}

int get_int(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key, "must be an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key, "must be a string");
  return v.get<std::string>();
}

bool keeps_detuning(Scenario s) {
  return s == Scenario::ResonantBifurcation || s == Scenario::NonresonantSwitching;
}

ModelParams resolve_params(const json& jp, const ModelParams& D, Scenario s) {
  const std::string w = "params";
  check_keys(jp, kParamKeys, w);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); };
  ModelParams P = D;
  if (auto v = opt_number(jp, "alpha", w)) P.alpha = *v;
  if (auto v = opt_number(jp, "s", w)) P.s = *v;
  if (auto v = opt_number(jp, "Omega0", w)) P.Omega0 = *v;
  if (!(P.Omega0 > 0)) config_error("params.Omega0", "must be positive");
  if (auto v = opt_number(jp, "n_bar", w)) P.n_bar = *v;
  if (auto v = opt_number(jp, "delta_q", w)) P.delta_q = *v;
  if (auto v = opt_number(jp, "k_f", w)) P.k_f = *v;
  if (auto v = opt_number(jp, "mass", w)) P.mass = *v;

  const auto zeta = opt_number(jp, "zeta", w), Delta = opt_number(jp, "Delta", w);
  if (zeta && Delta && !close(*Delta, *zeta / P.Omega0)) config_error("params.Delta", "inconsistent with zeta/Omega0");
  if (zeta)
    P.zeta = *zeta;
  else if (Delta)
    P.zeta = *Delta * P.Omega0;
  P.Delta = P.zeta / P.Omega0;

  const auto N = opt_number(jp, "N", w), R0 = opt_number(jp, "R0", w);
  if (N && R0 && !close(*R0, 4 * std::sqrt(*N))) config_error("params.R0", "inconsistent with 4 sqrt(N)");
  if (N)
    P.N = *N;
  else if (R0)
    P.N = *R0 * *R0 / 16;
  if (!(P.N > 0)) config_error("params.N", "must be positive");
  P.R0 = 4 * std::sqrt(P.N);
  if (R0 && !N) P.R0 = *R0;

  const auto delta = opt_number(jp, "delta", w), g = opt_number(jp, "g_detune", w);
  if (delta && g && !close(*g, *delta + P.Delta / 2)) config_error("params.g_detune", "inconsistent with delta + Delta/2");
  if (delta)
    P.delta = *delta;
  else if (g)
    P.delta = *g - P.Delta / 2;
  else if (keeps_detuning(s))
    P.delta = D.g_detune - P.Delta / 2;
  P.g_detune = P.delta + P.Delta / 2;

  if (P.k_f && P.mass) {
    const double a = *P.k_f * *P.k_f / (*P.mass * P.Omega0);
    if (jp.contains("alpha") && !close(P.alpha, a)) config_error("params.alpha", "inconsistent with k_f^2/(mass Omega0)");
    if (!jp.contains("alpha")) P.alpha = a;
  }
  P.validate();
  return P;
}

std::string crc32_hex(const std::string& data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class OutputSink {
 public:
  explicit OutputSink(const std::filesystem::path& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, "cannot write " + (dir_ / name).string());
    f << content;
    files_.push_back({{"file", name}, {"bytes", content.size()}, {"crc32", crc32_hex(content)}});
  }
  template <typename Fn>
  void write_with(const std::string& name, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write(name, os.str());
  }
  const json& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  json files_ = json::array();
};

struct InvariantLog {
  json doc = json::object();
  bool ok = true;
  void add(const std::string& name, double drift, double tolerance) {
    const bool pass = std::isfinite(drift) && drift <= tolerance;
    ok = ok && pass;
    doc[name] = {{"drift", drift}, {"tolerance", tolerance}, {"ok", pass}};
  }
};

std::vector<double> uniform_grid(double t_max, double dt) {
  const long n = static_cast<long>(std::floor(t_max / dt * (1 + 1e-12)));
  std::vector<double> t(n + 1);
  for (long i = 0; i <= n; ++i) t[i] = i * dt;
  return t;
}

json run_resonant(const RunConfig& cfg, OutputSink& out, InvariantLog&) {
  const ModelParams& P = cfg.params;
  const auto grid = uniform_grid(cfg.integrate.t_max, cfg.integrate.dt_out);
  out.write_with("inversion.csv", [&](std::ostream& os) {
    os << "tau,x,kappa,sz,period\n";
    for (double tau : grid) {
      const double x = x_adiabatic(tau, P);
      const auto rp = resonant_solution(P, x);
      const double T = rp.branch == Branch::Soliton ? std::numeric_limits<double>::infinity() : period_resonant(rp);
      os << fmt17(tau) << ',' << fmt17(x) << ',' << fmt17(rp.kappa) << ',' << fmt17(sz_resonant(tau, rp)) << ','
         << fmt17(T) << '\n';
    }
  });
  json res;
  double tau_b = std::numeric_limits<double>::quiet_NaN();
  try {
    tau_b = bifurcation_time(P);
  } catch (const Error& e) {
    res["bifurcation_time_error"] = e.what();
  }
  const auto scan = detect_singularity(P, cfg.integrate.t_max, cfg.integrate.dt_out, cfg.analysis.singularity_multiple,
                                       cfg.analysis.kappa_form);
  res["bifurcation_time"] = num_or_null(tau_b);
  res["singularity_time"] = scan.tau ? json(*scan.tau) : json(nullptr);
  res["kappa_one_time"] = scan.kappa_one_crossing ? json(*scan.kappa_one_crossing) : json(nullptr);
  res["initial_period"] = scan.initial_period;
  res["singularity_multiple"] = cfg.analysis.singularity_multiple;
  if (scan.tau && std::isfinite(tau_b)) res["singularity_relative_offset"] = (*scan.tau - tau_b) / tau_b;
  return res;
}

json run_switching(const RunConfig& cfg, OutputSink& out, InvariantLog& inv) {
  const ModelParams& P = cfg.params;
  const double x = cfg.initial.x();
  const auto sp = weierstrass_coeffs_nonresonant(P, x, cfg.analysis.switching);
  IntegrateOptions io;
  io.rtol = cfg.integrate.rtol;
  io.atol = cfg.integrate.atol;
  const auto tr = integrate(System::FastSubsystem, cfg.initial, cfg.integrate.t_max, cfg.integrate.dt_out, P, io);
  inv.add("fast_subsystem_R2_W", tr.conserved_drift, 10 * cfg.integrate.rtol);
  double numeric_min = 1;
  out.write_with("switching.csv", [&](std::ostream& os) {
    os << "tau,sz_closed,sz_weierstrass,sz_numeric\n";
    for (Eigen::Index i = 0; i < tr.size(); ++i) {
      const double tau = tr.times(i);
      numeric_min = std::min(numeric_min, tr.states(i, 4));
      os << fmt17(tau) << ',' << fmt17(sz_nonresonant(tau, sp)) << ',' << fmt17(sz_nonresonant_general(tau, sp))
         << ',' << fmt17(tr.states(i, 4)) << '\n';
    }
  });
  return {{"convention", sp.convention == SwitchingConvention::Consistent ? "consistent" : "as_printed"},
          {"e1", sp.e1},
          {"floor", sp.floor},
          {"period", sp.period},
          {"oscillation_period", sp.oscillation_period},
          {"g_over_R0c", sp.g_over_R0c},
          {"kappa", sp.kappa_nr},
          {"g2", sp.coeffs.g2},
          {"g3", sp.coeffs.g3},
          {"roots", {sp.coeffs.e1, sp.coeffs.e2, sp.coeffs.e3}},
          {"numeric_minimum_sz", numeric_min}};
}

json run_chaotic(const RunConfig& cfg, OutputSink& out, InvariantLog& inv) {
  IntegrateOptions io;
  io.rtol = cfg.integrate.rtol;
  io.atol = cfg.integrate.atol;
  const auto tr = integrate(System::Full, cfg.initial, cfg.integrate.t_max, cfg.integrate.dt_out, cfg.params, io);
  inv.add("full_system_invariant", tr.conserved_drift, 10 * cfg.integrate.rtol);
  out.write_with("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
  const Eigen::VectorXd sz = tr.states.col(4);
  auto est = autocorrelation(sz, cfg.integrate.dt_out, cfg.analysis.max_lag);
  compute_spectrum(est);
  const auto verdict = chaos_verdict(est, cfg.integrate.t_max);
  out.write_with("autocorrelation.csv", [&](std::ostream& os) { write_autocorrelation_csv(os, est); });
  out.write_with("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, est); });
  const json v = {{"tau_c", verdict.tau_c}, {"fit_residual", verdict.fit_residual}, {"chaotic", verdict.chaotic}};
  out.write("verdict.json", v.dump(2) + "\n");
  json res = v;
  res["x_range"] = {tr.states.col(0).minCoeff(), tr.states.col(0).maxCoeff()};
  res["steps"] = tr.stats.accepted;
  return res;
}

json run_purity_adiabatic(const RunConfig& cfg, OutputSink& out, InvariantLog& inv) {
  const ModelParams& P = cfg.params;
  const int nt = cfg.analysis.grid_t, nx = cfg.analysis.grid_x;
  const double T = cfg.analysis.grid_t_max;
  double identity_err = 0, mean = 0;
  out.write_with("purity_grid.csv", [&](std::ostream& os) {
    os << "t,x,purity\n";
    for (int i = 0; i < nt; ++i) {
      const double t = nt > 1 ? T * i / (nt - 1) : 0;
      for (int j = 0; j < nx; ++j) {
        const double x = nx > 1 ? std::numbers::pi * j / (nx - 1) : 0;
        const double pc = purity_closed_adiabatic(t, x, P);
        identity_err = std::max(identity_err, std::abs(purity(density_resonant_closed(t, x, P)) - pc));
        mean += pc;
        os << fmt17(t) << ',' << fmt17(x) << ',' << fmt17(pc) << '\n';
      }
    }
  });
  inv.add("closed_form_purity_identity", identity_err, 1e-10);

  const double x0 = cfg.initial.x();
  PurityCurve closed;
  closed.regime = PurityRegime::AdiabaticClosedForm;
  PurityCurve numeric;
  const int n_max = cfg.quantum.n_max.value_or(default_n_max(P.n_bar));
  const Eigen::VectorXd W = coherent_weights(P.n_bar, n_max);
  double min_p = 1;
  for (double t : uniform_grid(T, cfg.integrate.dt_out)) {
    const auto r = density_resonant_closed(t, x0, P);
    closed.times.push_back(t);
    closed.rho.push_back(r);
    closed.purity.push_back(purity_closed_adiabatic(t, x0, P));
    min_p = std::min(min_p, closed.purity.back());
    QuantumAmplitudes a;
    a.n_max = n_max;
    a.Ce.resize(n_max + 1);
    a.Cg.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
      const auto [ce, cg] = amplitudes_adiabatic(t, n, x0, P, W(n), 0.0);
      a.Ce(n) = ce;
      a.Cg(n) = cg;
    }
    const auto rn = reduced_density(a);
    numeric.times.push_back(t);
    numeric.rho.push_back(rn);
    numeric.purity.push_back(purity(rn));
  }
  out.write_with("purity.csv", [&](std::ostream& os) { write_purity_csv(os, closed); });
  out.write_with("density.csv", [&](std::ostream& os) { write_density_csv(os, closed); });
  out.write_with("purity_numeric.csv", [&](std::ostream& os) { write_purity_csv(os, numeric); });
  return {{"grid_mean_purity", mean / (double(nt) * nx)},
          {"minimum_purity_at_x", min_p},
          {"x", x0},
          {"n_max", n_max},
          {"averaged_purity_formula", 1 - 2 * P.Omega0 * P.Omega0 / (P.zeta * P.zeta + 4 * P.Omega0 * P.Omega0)}};
}

double trace_error(const PurityCurve& pc) {
  double e = 0;
  for (const auto& r : pc.rho) e = std::max(e, std::abs(r.rho11 + r.rho22 - 1));
  return e;
}

double window_mean(const PurityCurve& pc, double fraction) {
  const double t_end = pc.times.back();
  double s = 0;
  int n = 0;
  for (std::size_t i = 0; i < pc.times.size(); ++i)
    if (pc.times[i] >= (1 - fraction) * t_end) {
      s += pc.purity[i];
      ++n;
    }
  return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

json run_weak(const RunConfig& cfg, OutputSink& out, InvariantLog& inv, PurityRegime regime) {
  const auto grid = uniform_grid(cfg.integrate.t_max, cfg.integrate.dt_out);
  const auto pc = purity_weak(grid, regime, cfg.params, cfg.quantum.alpha0);
  inv.add("density_trace", trace_error(pc), 1e-9);
  out.write_with("purity.csv", [&](std::ostream& os) { write_purity_csv(os, pc); });
  out.write_with("density.csv", [&](std::ostream& os) { write_density_csv(os, pc); });
  json res = {{"final_window_mean_purity", window_mean(pc, cfg.analysis.final_window)},
              {"final_window_fraction", cfg.analysis.final_window}};
  if (regime == PurityRegime::WeakRegular) {
    const double dt = cfg.integrate.dt_out;
    auto band = [&](double a, double b) -> json {
      std::vector<double> v;
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= a && grid[i] <= b) v.push_back(pc.purity[i]);
      if (v.size() < 8) return nullptr;
      return dominant_frequency(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())), dt);
    };
    res["dominant_frequency_t_below_30"] = band(0, 30);
    res["dominant_frequency_t_above_70"] = band(70, cfg.integrate.t_max);
  } else {
    const double dt = 0.02;
    const int steps = static_cast<int>(std::llround(cfg.quantum.mc_t_max / dt));
    const double a0 = cfg.quantum.alpha0;
    const auto mc = monte_carlo_mean_phase([a0](double tau) { return erf_matched_kernel(tau, a0); }, dt, steps,
                                           cfg.quantum.realizations, cfg.seed);
    double worst = 0;
    out.write_with("mc_phase_average.csv", [&](std::ostream& os) {
      os << "t,mc_re,mc_im,erf_law\n";
      for (int k = 0; k <= steps; ++k) {
        const double t = k * dt, law = q_chaotic_mean(t, a0);
        worst = std::max(worst, std::abs(mc[k].real() - law) / law);
        os << fmt17(t) << ',' << fmt17(mc[k].real()) << ',' << fmt17(mc[k].imag()) << ',' << fmt17(law) << '\n';
      }
    });
    res["monte_carlo_max_relative_error"] = worst;
    res["monte_carlo_realizations"] = cfg.quantum.realizations;
  }
  return res;
}

json run_custom(const RunConfig& cfg, OutputSink& out, InvariantLog& inv) {
  const ModelParams& P = cfg.params;
  if (cfg.integrate.system != CustomSystem::Hybrid) {
    IntegrateOptions io;
    io.rtol = cfg.integrate.rtol;
    io.atol = cfg.integrate.atol;
    const auto sys = cfg.integrate.system == CustomSystem::Full ? System::Full : System::Strong;
    const auto tr = integrate(sys, cfg.initial, cfg.integrate.t_max, cfg.integrate.dt_out, P, io);
    inv.add("semiclassical_invariants", tr.conserved_drift, 10 * cfg.integrate.rtol);
    out.write_with("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); });
    return {{"samples", tr.size()}, {"steps", tr.stats.accepted}};
  }
  const int n_max = cfg.quantum.n_max.value_or(default_n_max(P.n_bar));
  const auto amps = QuantumAmplitudes::excited_coherent(P.n_bar, n_max);
  HybridOptions ho;
  ho.rtol = cfg.integrate.rtol;
  ho.atol = cfg.integrate.atol;
  const auto res = hybrid_evolve(amps, cfg.initial.x(), cfg.initial.p(), cfg.integrate.t_max, cfg.integrate.dt_out, P, ho);
  inv.add("norm", res.norm_drift, 1e-9);
  out.write_with("trajectory_xp.csv", [&](std::ostream& os) {
    os << "t,x,p\n";
    for (std::size_t i = 0; i < res.times.size(); ++i)
      os << fmt17(res.times[i]) << ',' << fmt17(res.x[i]) << ',' << fmt17(res.p[i]) << '\n';
  });
  out.write_with("purity.csv", [&](std::ostream& os) { write_purity_csv(os, res.purity); });
  out.write_with("density.csv", [&](std::ostream& os) { write_density_csv(os, res.purity); });
  const auto& pv = res.purity.purity;
  return {{"n_max", n_max},
          {"max_tail_mass", res.max_tail_mass},
          {"minimum_purity", *std::min_element(pv.begin(), pv.end())},
          {"final_window_mean_purity", window_mean(res.purity, cfg.analysis.final_window)}};
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() { return kCatalog; }

Scenario scenario_from_name(const std::string& name) {
  for (const auto& s : kCatalog)
    if (name == s.name) return s.id;
  config_error("scenario", "unknown scenario '" + name + "'");
}

const char* scenario_name(Scenario s) {
  for (const auto& c : kCatalog)
    if (c.id == s) return c.name;
  return "?";
}

RunConfig default_config(Scenario s) {
  RunConfig c;
  c.scenario = s;
  c.initial = SemiclassicalState(0, 0, 0, 0, 1);
  switch (s) {
    case Scenario::ResonantBifurcation:
      c.params = ModelParams::make(5e-3, -1.0, 2.0, 1.0, 25.0);  // g = 0
      c.integrate.t_max = 15;
      c.integrate.dt_out = 0.005;
      break;
    case Scenario::NonresonantSwitching:
      c.params = ModelParams::make(5e-3, 20.0 - 0.01, 0.02, 1.0, 25.0);  // g = R0 c = 20
      c.integrate.t_max = 1.0;
      c.integrate.dt_out = 1e-4;
      break;
    case Scenario::ChaoticMotion:
      c.params = ModelParams::make(0.5, -0.5, 0.0, 1.0, 50.0);
      c.initial = SemiclassicalState(0, 1, 0, 0, 1);
      c.integrate.t_max = 1000;
      c.integrate.dt_out = 0.02;
      break;
    case Scenario::PurityAdiabatic:
      c.params = ModelParams::make(5e-3, 0.0, 1.0, 1.0, 1.0, 1, 1.0, 1.0);  // delta_q = zeta (resonance)
      c.integrate.t_max = 10;
      c.integrate.dt_out = 0.01;
      break;
    case Scenario::PurityWeakRegular:
      c.params = ModelParams::make(1e-2, 0.0, 0.2, 0.1, 1.0, 1, 1.0);
      c.integrate.t_max = 150;
      c.integrate.dt_out = 0.01;
      break;
    case Scenario::PurityWeakChaotic:
      c.params = ModelParams::make(0.5, 0.0, 0.2, 0.1, 1.0, 1, 1.0);
      c.integrate.t_max = 30;
      c.integrate.dt_out = 0.01;
      break;
    case Scenario::Custom:
      c.params = ModelParams::make(0.5, 0.0, 0.2, 0.1, 1.0, 1, 1.0);
      c.integrate.t_max = 50;
      c.integrate.dt_out = 0.05;
      c.integrate.rtol = 1e-10;
      break;
  }
  return c;
}

RunConfig validate_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::Config,
                "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  check_keys(j, kTopKeys, "");
  if (!j.contains("scenario")) config_error("scenario", "missing");
  RunConfig cfg = default_config(scenario_from_name(get_string(j, "scenario", "")));
  if (j.contains("params")) cfg.params = resolve_params(j["params"], cfg.params, cfg.scenario);

  if (j.contains("initial")) {
    const auto& ji = j["initial"];
    check_keys(ji, kInitialKeys, "initial");
    const char* names[] = {"x", "p", "u", "v", "sz"};
    for (int i = 0; i < 5; ++i)
      if (auto v = opt_number(ji, names[i], "initial")) cfg.initial(i) = *v;
    if (std::abs(cfg.initial.sz()) > cfg.params.s) config_error("initial.sz", "|sz| must not exceed s");
  }
  if (j.contains("integrate")) {
    const auto& ji = j["integrate"];
    check_keys(ji, kIntegrateKeys, "integrate");
    if (auto v = opt_number(ji, "t_max", "integrate")) cfg.integrate.t_max = *v;
    if (auto v = opt_number(ji, "dt_out", "integrate")) cfg.integrate.dt_out = *v;
    if (auto v = opt_number(ji, "rtol", "integrate")) cfg.integrate.rtol = *v;
    if (auto v = opt_number(ji, "atol", "integrate")) cfg.integrate.atol = *v;
    if (ji.contains("system")) {
      const auto s = get_string(ji, "system", "integrate");
      if (s == "hybrid") cfg.integrate.system = CustomSystem::Hybrid;
      else if (s == "full") cfg.integrate.system = CustomSystem::Full;
      else if (s == "strong") cfg.integrate.system = CustomSystem::Strong;
      else config_error("integrate.system", "must be one of hybrid, full, strong");
    }
  }
  if (!(cfg.integrate.t_max > 0)) config_error("integrate.t_max", "must be positive");
  if (!(cfg.integrate.dt_out > 0)) config_error("integrate.dt_out", "must be positive");
  if (!(cfg.integrate.rtol > 0)) config_error("integrate.rtol", "must be positive");
  if (!(cfg.integrate.atol > 0)) config_error("integrate.atol", "must be positive");
  if (cfg.integrate.t_max / cfg.integrate.dt_out > 5e7) config_error("integrate.dt_out", "too many output samples");

  if (j.contains("quantum")) {
    const auto& jq = j["quantum"];
    check_keys(jq, kQuantumKeys, "quantum");
    if (jq.contains("n_max") && !jq["n_max"].is_null()) {
      const int n = get_int(jq, "n_max", "quantum");
      if (n < 0) config_error("quantum.n_max", "must be non-negative");
      cfg.quantum.n_max = n;
    }
    if (auto v = opt_number(jq, "alpha0", "quantum")) cfg.quantum.alpha0 = *v;
    if (jq.contains("realizations")) cfg.quantum.realizations = get_int(jq, "realizations", "quantum");
    if (auto v = opt_number(jq, "mc_t_max", "quantum")) cfg.quantum.mc_t_max = *v;
  }
  if (!(cfg.quantum.alpha0 > 0)) config_error("quantum.alpha0", "must be positive");
  if (cfg.quantum.realizations < 1) config_error("quantum.realizations", "must be at least 1");
  if (!(cfg.quantum.mc_t_max > 0)) config_error("quantum.mc_t_max", "must be positive");

  if (j.contains("analysis")) {
    const auto& ja = j["analysis"];
    check_keys(ja, kAnalysisKeys, "analysis");
    if (auto v = opt_number(ja, "max_lag", "analysis")) cfg.analysis.max_lag = *v;
    if (ja.contains("kappa_form")) {
      const auto s = get_string(ja, "kappa_form", "analysis");
      if (s == "linear") cfg.analysis.kappa_form = KappaForm::Linear;
      else if (s == "sqrt") cfg.analysis.kappa_form = KappaForm::SquareRoot;
      else config_error("analysis.kappa_form", "must be linear or sqrt");
    }
    if (auto v = opt_number(ja, "singularity_multiple", "analysis")) cfg.analysis.singularity_multiple = *v;
    if (ja.contains("switching_convention")) {
      const auto s = get_string(ja, "switching_convention", "analysis");
      if (s == "consistent") cfg.analysis.switching = SwitchingConvention::Consistent;
      else if (s == "as_printed") cfg.analysis.switching = SwitchingConvention::AsPrinted;
      else config_error("analysis.switching_convention", "must be consistent or as_printed");
    }
    if (ja.contains("grid_t")) cfg.analysis.grid_t = get_int(ja, "grid_t", "analysis");
    if (ja.contains("grid_x")) cfg.analysis.grid_x = get_int(ja, "grid_x", "analysis");
    if (auto v = opt_number(ja, "grid_t_max", "analysis")) cfg.analysis.grid_t_max = *v;
    if (auto v = opt_number(ja, "final_window", "analysis")) cfg.analysis.final_window = *v;
  }
  if (!(cfg.analysis.max_lag > 0)) config_error("analysis.max_lag", "must be positive");
  if (!(cfg.analysis.singularity_multiple > 1)) config_error("analysis.singularity_multiple", "must exceed 1");
  if (cfg.analysis.grid_t < 1 || cfg.analysis.grid_x < 1) config_error("analysis.grid_t", "grid sizes must be >= 1");
  if (!(cfg.analysis.grid_t_max > 0)) config_error("analysis.grid_t_max", "must be positive");
  if (!(cfg.analysis.final_window > 0 && cfg.analysis.final_window <= 1))
    config_error("analysis.final_window", "must lie in (0, 1]");

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_error("seed", "must be an unsigned integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) cfg.output_dir = get_string(j, "output_dir", "");
  return cfg;
}

json config_to_json(const RunConfig& c) {
  const auto& P = c.params;
  json params = {{"alpha", P.alpha},   {"delta", P.delta}, {"Delta", P.Delta},       {"N", P.N},
                 {"s", P.s},           {"Omega0", P.Omega0}, {"zeta", P.zeta},     {"n_bar", P.n_bar},
                 {"g_detune", P.g_detune}, {"R0", P.R0},   {"delta_q", P.delta_q}};
  if (P.k_f) params["k_f"] = *P.k_f;
  if (P.mass) params["mass"] = *P.mass;
  const char* sys = c.integrate.system == CustomSystem::Hybrid ? "hybrid"
                    : c.integrate.system == CustomSystem::Full ? "full"
                                                               : "strong";
  return {{"scenario", scenario_name(c.scenario)},
          {"params", params},
          {"initial",
           {{"x", c.initial.x()}, {"p", c.initial.p()}, {"u", c.initial.u()}, {"v", c.initial.v()}, {"sz", c.initial.sz()}}},
          {"integrate",
           {{"t_max", c.integrate.t_max},
            {"dt_out", c.integrate.dt_out},
            {"rtol", c.integrate.rtol},
            {"atol", c.integrate.atol},
            {"system", sys}}},
          {"quantum",
           {{"n_max", c.quantum.n_max ? json(*c.quantum.n_max) : json(nullptr)},
            {"alpha0", c.quantum.alpha0},
            {"realizations", c.quantum.realizations},
            {"mc_t_max", c.quantum.mc_t_max}}},
          {"analysis",
           {{"max_lag", c.analysis.max_lag},
            {"kappa_form", c.analysis.kappa_form == KappaForm::Linear ? "linear" : "sqrt"},
            {"singularity_multiple", c.analysis.singularity_multiple},
            {"switching_convention",
             c.analysis.switching == SwitchingConvention::Consistent ? "consistent" : "as_printed"},
            {"grid_t", c.analysis.grid_t},
            {"grid_x", c.analysis.grid_x},
            {"grid_t_max", c.analysis.grid_t_max},
            {"final_window", c.analysis.final_window}}},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

RunManifest run_scenario(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  OutputSink out(cfg.output_dir);
  InvariantLog inv;
  const json echo = config_to_json(cfg);
  out.write("resolved_config.json", echo.dump(2) + "\n");
  json results;
  try {
    switch (cfg.scenario) {
      case Scenario::ResonantBifurcation: results = run_resonant(cfg, out, inv); break;
      case Scenario::NonresonantSwitching: results = run_switching(cfg, out, inv); break;
      case Scenario::ChaoticMotion: results = run_chaotic(cfg, out, inv); break;
      case Scenario::PurityAdiabatic: results = run_purity_adiabatic(cfg, out, inv); break;
      case Scenario::PurityWeakRegular: results = run_weak(cfg, out, inv, PurityRegime::WeakRegular); break;
      case Scenario::PurityWeakChaotic: results = run_weak(cfg, out, inv, PurityRegime::WeakChaotic); break;
      case Scenario::Custom: results = run_custom(cfg, out, inv); break;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(e.kind(), std::string("scenario ") + scenario_name(cfg.scenario) + ": " + e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunManifest m;
  m.invariants_ok = inv.ok;
  m.doc = {{"library_version", kLibraryVersion},
           {"scenario", scenario_name(cfg.scenario)},
           {"config", echo},
           {"wall_time_s", wall},
           {"outputs", out.files()},
           {"invariant_drift", inv.doc},
           {"invariants_ok", inv.ok},
           {"results", results}};
  std::ofstream f(out.dir() / "manifest.json");
  f << m.doc.dump(2) << "\n";
  return m;
}

}  // namespace tcsim
