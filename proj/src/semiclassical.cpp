#include "tcsim/semiclassical.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace tcsim {

ModelParams ModelParams::make(double alpha, double delta, double zeta, double Omega0, double N, double s,
                              double n_bar, double delta_q) {
  ModelParams p;
  p.alpha = alpha;
  p.delta = delta;
  p.zeta = zeta;
  p.Omega0 = Omega0;
  p.Delta = zeta / Omega0;
  p.N = N;
  p.s = s;
  p.n_bar = n_bar;
  p.g_detune = delta + p.Delta / 2;
  p.R0 = 4 * std::sqrt(N);
  p.delta_q = delta_q;
  p.validate();
  return p;
}

void ModelParams::validate() const {
  auto bad = [](const std::string& f, const std::string& why) { throw Error(ErrorKind::Config, f + ": " + why); };
  for (auto [name, v] : {std::pair{"alpha", alpha}, {"delta", delta}, {"Delta", Delta}, {"N", N}, {"s", s},
                         {"Omega0", Omega0}, {"zeta", zeta}, {"n_bar", n_bar}, {"g_detune", g_detune},
                         {"R0", R0}, {"delta_q", delta_q}})
    if (!std::isfinite(v)) bad(name, "must be finite");
  if (!(N > 0)) bad("N", "must be positive");
  if (!(n_bar >= 0)) bad("n_bar", "must be non-negative");
  if (!(Omega0 > 0)) bad("Omega0", "must be positive");
  if (std::abs(Delta - zeta / Omega0) > 1e-12 * std::max(1.0, std::abs(Delta)))
    bad("Delta", "inconsistent with zeta/Omega0");
  if (std::abs(g_detune - (delta + Delta / 2)) > 1e-12 * std::max(1.0, std::abs(g_detune)))
    bad("g_detune", "inconsistent with delta + Delta/2");
  if (std::abs(R0 - 4 * std::sqrt(N)) > 1e-12 * std::max(1.0, R0)) bad("R0", "inconsistent with 4 sqrt(N)");
}

std::ostream& operator<<(std::ostream& os, const ModelParams& p) {
  return os << "alpha=" << p.alpha << " delta=" << p.delta << " Delta=" << p.Delta << " N=" << p.N << " s=" << p.s
            << " Omega0=" << p.Omega0 << " zeta=" << p.zeta << " n_bar=" << p.n_bar << " g=" << p.g_detune
            << " R0=" << p.R0;
}

double invariant_W_fast(const SemiclassicalState& y, double c, const ModelParams& P) {
  if (P.Delta == 0) throw Error(ErrorKind::DivisionByZero, "invariant_W is undefined for Delta = 0");
  const double w = P.g_detune + P.Delta * y.sz();
  return -y.u() * c + w * w / (2 * P.Delta);
}

Trajectory integrate(System system, const SemiclassicalState& state0, double t_end, double dt_out,
                     const ModelParams& P, const IntegrateOptions& opt) {
  const double c = opt.frozen_c.value_or(std::cos(state0.x()));
  using V5 = Eigen::Matrix<double, 5, 1>;
  auto rhs = [&](double t, const V5& y) -> V5 {
    const SemiclassicalState s(y);
    switch (system) {
      case System::Full: return rhs_full(s, t, P);
      case System::Strong: return rhs_strong(s, t, P);
      case System::FastSubsystem: {
        V5 d = V5::Zero();
        d.tail<3>() = rhs_fast_subsystem(s.u(), s.v(), s.sz(), c, P);
        return d;
      }
    }
    return V5::Zero();
  };

  // invariants tracked per system
  auto invariants = [&](const SemiclassicalState& s) {
    std::vector<double> out;
    switch (system) {
      case System::Full: out.push_back(invariant_full(s, P)); break;
      case System::Strong:
        out.push_back(invariant_R2(s, P));
        if (P.Delta != 0) out.push_back(invariant_W(s, P));
        break;
      case System::FastSubsystem:
        out.push_back(invariant_R2(s, P));
        if (P.Delta != 0) out.push_back(invariant_W_fast(s, c, P));
        break;
    }
    return out;
  };

  std::vector<double> times;
  std::vector<V5> states;
  const auto ref = invariants(state0);
  double drift = 0;
  OdeOptions oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  auto sample = [&](double t, const V5& y) {
    times.push_back(t);
    states.push_back(y);
    const auto now = invariants(SemiclassicalState(y));
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double scale = std::max(std::abs(ref[i]), 1e-300);
      drift = std::max(drift, std::abs(now[i] - ref[i]) / scale);
    }
  };
  Trajectory tr;
  tr.stats = integrate_dense<V5>(rhs, V5(state0), 0.0, t_end, dt_out, oo, sample);
  tr.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  tr.states.resize(static_cast<Eigen::Index>(states.size()), 5);
  for (std::size_t i = 0; i < states.size(); ++i) tr.states.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
  tr.conserved_drift = drift;
  return tr;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "tau,x,p,u,v,sz\n";
  char buf[64];
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times(i));
    os << buf;
    for (int j = 0; j < 5; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.states(i, j));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace tcsim
