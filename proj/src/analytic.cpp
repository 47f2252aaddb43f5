#include "tcsim/analytic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tcsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_cos(double x) {
  const double c = std::cos(x);
  if (std::abs(c) < 1e-12) throw Error(ErrorKind::Node, "cos x vanishes (node of the mode function)");
  return c;
}

// Period of the resonant solution for a given modulus; infinite in the tie band.
double period_for_kappa(double kappa, double c, double R0) {
  if (std::abs(kappa - 1) < ResonantSolutionParams::kTieTolerance) return kInf;
  const double cr = std::abs(c) * R0;
  if (kappa < 1) return 4 * complete_elliptic_k(kappa) / cr;
  return 2 * complete_elliptic_k(1 / kappa) / (cr * kappa);
}

}  // namespace

double kappa_resonant(const ModelParams& P, double x, KappaForm form) {
  const double c = checked_cos(x);
  if (form == KappaForm::Linear) return P.Delta / (2 * c * P.R0);
  const double r = P.zeta / (2 * P.R0 * P.Omega0 * c);
  if (r < 0) throw Error(ErrorKind::Domain, "square-root kappa requires zeta/cos x >= 0");
  return std::sqrt(r);
}

ResonantSolutionParams make_resonant_solution(double c, double R0, double Delta) {
  if (!(std::abs(c) <= 1) || c == 0) throw Error(ErrorKind::Node, "frozen c must lie in [-1,1] and be nonzero");
  if (!(R0 > 0)) throw Error(ErrorKind::Domain, "R0 must be positive");
  ResonantSolutionParams rp;
  rp.c = c;
  rp.R0 = R0;
  rp.Delta = Delta;
  rp.kappa = std::abs(Delta / (2 * c * R0));
  if (std::abs(rp.kappa - 1) < ResonantSolutionParams::kTieTolerance)
    rp.branch = Branch::Soliton;
  else
    rp.branch = rp.kappa < 1 ? Branch::Oscillatory : Branch::Rotational;
  return rp;
}

ResonantSolutionParams resonant_solution(const ModelParams& P, double x) {
  return make_resonant_solution(checked_cos(x), P.R0, P.Delta);
}

double sz_resonant(double tau, const ResonantSolutionParams& rp) {
  const double w = rp.c * rp.R0 * tau;
  switch (rp.branch) {
    case Branch::Oscillatory: return jacobi_elliptic(w, rp.kappa).cn;
    case Branch::Rotational: return jacobi_elliptic(w * rp.kappa, 1 / rp.kappa).dn;
    case Branch::Soliton: return 1 / std::cosh(w);
  }
  return 0;
}

double u_resonant(double tau, const ResonantSolutionParams& rp) {
  const double w = rp.c * rp.R0 * tau;
  const double pre = -rp.Delta / (2 * rp.c);
  switch (rp.branch) {
    case Branch::Oscillatory: {
      const double sn = jacobi_elliptic(w, rp.kappa).sn;
      return pre * sn * sn;
    }
    case Branch::Rotational: {
      const double sn = jacobi_elliptic(w * rp.kappa, 1 / rp.kappa).sn;
      return pre * sn * sn / (rp.kappa * rp.kappa);
    }
    case Branch::Soliton: {
      const double t = std::tanh(w);
      return pre * t * t;
    }
  }
  return 0;
}

double v_resonant(double tau, const ResonantSolutionParams& rp) {
  const double w = rp.c * rp.R0 * tau;
  switch (rp.branch) {
    case Branch::Oscillatory: {
      const auto e = jacobi_elliptic(w, rp.kappa);
      return rp.R0 * e.sn * e.dn;
    }
    case Branch::Rotational: {
      // sn*sqrt(1 - kappa^2 sn^2) with the square root carried by cn, which keeps its sign
      const auto e = jacobi_elliptic(w * rp.kappa, 1 / rp.kappa);
      return rp.R0 / rp.kappa * e.sn * e.cn;
    }
    case Branch::Soliton: return rp.R0 * std::tanh(w) / std::cosh(w);
  }
  return 0;
}

double period_resonant(const ResonantSolutionParams& rp) {
  if (rp.branch == Branch::Soliton) throw Error(ErrorKind::InfinitePeriod, "soliton branch has no period");
  return period_for_kappa(rp.kappa, rp.c, rp.R0);
}

int poincare_index(double x, double zeta, double Omega0, double R0) {
  const double r = zeta / (Omega0 * R0);
  const double c = std::cos(x);
  const double d = c * c - r * r;
  if (std::abs(d) <= 1e-12) throw Error(ErrorKind::BifurcationPoint, "cos^2 x equals (zeta/(Omega0 R0))^2");
  return d > 0 ? 1 : -1;
}

double x_adiabatic(double tau, const ModelParams& P) {
  const double radicand = P.zeta / (P.alpha * P.Omega0) - P.zeta * P.zeta / (8 * P.R0 * P.R0 * P.Omega0 * P.Omega0);
  if (!(radicand >= 0)) throw Error(ErrorKind::Domain, "x_adiabatic growth-rate radicand is negative");
  const double ripple = P.alpha * P.zeta / (4 * P.R0 * P.R0 * P.Omega0);
  return std::sinh(std::sqrt(radicand) * P.alpha * tau) * (1 + ripple * std::cos(2 * P.R0 * tau));
}

double bifurcation_time(const ModelParams& P) {
  const double arg = P.zeta / (2 * P.R0 * P.Omega0);
  if (!(arg < 1) || arg < -1) throw Error(ErrorKind::Domain, "arccos argument zeta/(2 R0 Omega0) must be < 1");
  const double ac = std::acos(arg);
  if (!(ac > 0)) throw Error(ErrorKind::Domain, "logarithm argument must be positive");
  if (!(P.alpha * P.zeta > 0)) throw Error(ErrorKind::Domain, "alpha*zeta must be positive");
  return std::sqrt(P.Omega0 / (P.alpha * P.zeta)) * std::log(ac);
}

SingularityScan detect_singularity(const ModelParams& P, double tau_max, double dtau, double multiple,
                                   KappaForm form) {
  if (!(dtau > 0) || !(tau_max > 0)) throw Error(ErrorKind::Domain, "scan range and step must be positive");
  auto kappa_at = [&](double tau) { return std::abs(kappa_resonant(P, x_adiabatic(tau, P), form)); };
  auto period_at = [&](double tau) {
    return period_for_kappa(kappa_at(tau), std::cos(x_adiabatic(tau, P)), P.R0);
  };
  SingularityScan out;
  out.initial_period = period_at(0);
  const double threshold = multiple * out.initial_period;
  auto flagged = [&](double tau) { return kappa_at(tau) >= 1 || period_at(tau) >= threshold; };
  auto bisect = [](double lo, double hi, auto&& pred) {
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
      const double mid = (lo + hi) / 2;
      (pred(mid) ? hi : lo) = mid;
    }
    return hi;
  };
  const long n = static_cast<long>(std::ceil(tau_max / dtau));
  double prev = 0;
  for (long i = 1; i <= n; ++i) {
    const double tau = std::min(tau_max, i * dtau);
    double c;
    try {
      c = std::cos(x_adiabatic(tau, P));
    } catch (const Error&) {
      break;
    }
    if (std::abs(c) < 1e-12) break;
    if (!out.kappa_one_crossing && kappa_at(tau) >= 1)
      out.kappa_one_crossing = bisect(prev, tau, [&](double t) { return kappa_at(t) >= 1; });
    if (!out.tau && flagged(tau)) out.tau = bisect(prev, tau, flagged);
    if (out.tau && out.kappa_one_crossing) break;
    prev = tau;
  }
  return out;
}

SwitchingSolutionParams weierstrass_coeffs_nonresonant(const ModelParams& P, double x, SwitchingConvention conv) {
  const double c = checked_cos(x);
  if (P.zeta == 0) throw Error(ErrorKind::Resonance, "zeta = 0: the switching solution needs a Stark shift");
  SwitchingSolutionParams sp;
  sp.c = c;
  sp.R0 = P.R0;
  sp.convention = conv;
  const double kappa = P.zeta / (2 * P.Omega0 * P.R0 * c);
  const double h = 2 + 2 * P.g_detune * P.Omega0 / P.zeta;
  const double A2 = -(1 + kappa * kappa * h * h) / 6;
  const double A1 = kappa * kappa / 2 * h;
  const double A0 = -kappa * kappa;
  // reducing the quartic for 1 - s_z gives A0/4 in g3; the printed relation carries A0/2
  const double a0_share = conv == SwitchingConvention::Consistent ? A0 / 4 : A0 / 2;
  sp.coeffs = make_weierstrass_coeffs(3 * A2 * A2 - 2 * A1, A1 * A2 - A2 * A2 * A2 - a0_share);
  sp.coeffs.A0 = A0;
  sp.coeffs.A1 = A1;
  sp.coeffs.A2 = A2;
  sp.kappa_nr = kappa;
  sp.g_over_R0c = P.g_detune / (P.R0 * c);
  if (conv == SwitchingConvention::Consistent) {
    sp.e1 = -A2;
  } else {
    const double r = 1 + sp.g_over_R0c;
    sp.e1 = r * r / 6;
  }
  const double cr = std::abs(c) * P.R0;
  sp.floor = 1 - 1 / (3 * sp.e1);
  sp.period = std::numbers::pi / (2 * cr * std::sqrt(6 * sp.e1));
  sp.oscillation_period = std::numbers::pi / (std::sqrt(1.5 * sp.e1) * cr);
  return sp;
}

double sz_nonresonant(double tau, const SwitchingSolutionParams& sp) {
  const double th = std::sqrt(1.5 * sp.e1) * sp.c * sp.R0 * tau;
  const double s = std::sin(th), co = std::cos(th);
  if (sp.convention == SwitchingConvention::Consistent) return 1 - s * s / (3 * sp.e1);
  // 1 - 1/(3e1 + 1.5 e1 cot^2), multiplied through by sin^2 so the pole is harmless
  return 1 - s * s / (3 * sp.e1 * s * s + 1.5 * sp.e1 * co * co);
}

double sz_nonresonant_general(double tau, const SwitchingSolutionParams& sp) {
  const double z = sp.c * sp.R0 * tau;
  if (std::abs(z) < 1e-9) return 1.0;
  return 1 - 1 / (2 * weierstrass_p(z, sp.coeffs) - sp.coeffs.A2);
}

}  // namespace tcsim
