#pragma once

#include <optional>

#include "tcsim/semiclassical.hpp"
#include "tcsim/specfun.hpp"

namespace tcsim {

// Linear: kappa = Delta/(2 c R0), the form the Jacobi solutions are built on.
// SquareRoot: kappa = sqrt(zeta/(2 R0 Omega0 c)), the variant used when
// locating the bifurcation; both cross 1 at the same position.
enum class KappaForm { Linear, SquareRoot };

double kappa_resonant(const ModelParams& P, double x, KappaForm form = KappaForm::Linear);

enum class Branch { Oscillatory, Soliton, Rotational };

struct ResonantSolutionParams {
  double c = 1;
  double R0 = 4;
  double kappa = 0;  // |Delta/(2 c R0)|
  Branch branch = Branch::Oscillatory;
  double Delta = 0;  // signed; Delta = 2 c R0 kappa up to sign

  static constexpr double kTieTolerance = 1e-6;
};

ResonantSolutionParams make_resonant_solution(double c, double R0, double Delta);
ResonantSolutionParams resonant_solution(const ModelParams& P, double x);

// Resonant (g = 0) solution with s_z(0)=1, u(0)=v(0)=0 and the position frozen.
double sz_resonant(double tau, const ResonantSolutionParams& rp);
double u_resonant(double tau, const ResonantSolutionParams& rp);
double v_resonant(double tau, const ResonantSolutionParams& rp);
double period_resonant(const ResonantSolutionParams& rp);

template <typename Scalar>
Scalar effective_hamiltonian(const Scalar& sz, const Scalar& v, double c, double Delta, double R0) {
  if (c == 0) throw Error(ErrorKind::Node, "effective_hamiltonian at a node of the mode function");
  const Scalar q = 1.0 - sz * sz;
  return c * v * v / 2.0 + (Delta * Delta / (8 * c)) * q * q + (c / 2) * R0 * R0 * sz * sz;
}

int poincare_index(double x, double zeta, double Omega0, double R0);

// Slow centre-of-mass motion in the linearised adiabatic regime.
double x_adiabatic(double tau, const ModelParams& P);
double bifurcation_time(const ModelParams& P);

struct SingularityScan {
  std::optional<double> tau;  // first time T(tau) >= multiple * T(0)
  double initial_period = 0;
  std::optional<double> kappa_one_crossing;  // first time kappa(tau) reaches 1
};

// Walks tau on a uniform grid, composing kappa_resonant with x_adiabatic, and
// bisects the first crossing of the instantaneous-period threshold.
SingularityScan detect_singularity(const ModelParams& P, double tau_max, double dtau, double multiple = 10.0,
                                   KappaForm form = KappaForm::Linear);

// Non-resonant switching solution.
//   Consistent: e1 = (1 + G^2)/6 with G = (g + Delta)/(c R0) (the root of the
//               cubic obtained from the equation of motion); s_z follows the
//               exact degenerate reduction 1 - 1/(3 e1 (1 + cot^2)); the
//               general coefficients use g3 = A1 A2 - A2^3 - A0/4.
//   AsPrinted:  e1 = (1 + g/(R0 c))^2/6, s_z = 1 - 1/(3e1 + 1.5 e1 cot^2) and
//               g3 = A1 A2 - A2^3 - A0/2.
enum class SwitchingConvention { Consistent, AsPrinted };

struct SwitchingSolutionParams {
  WeierstrassCoeffs<double> coeffs;  // full (non-degenerate) coefficients
  double c = 1;
  double R0 = 4;
  double kappa_nr = 0;
  double g_over_R0c = 0;
  double e1 = 0;                  // degenerate root used by the closed form
  double period = 0;              // T = pi/(2 c R0 sqrt(6 e1))
  double oscillation_period = 0;  // spacing between successive floor visits
  double floor = 0;               // 1 - 1/(3 e1)
  SwitchingConvention convention = SwitchingConvention::Consistent;
};

SwitchingSolutionParams weierstrass_coeffs_nonresonant(const ModelParams& P, double x,
                                                       SwitchingConvention conv = SwitchingConvention::Consistent);

double sz_nonresonant(double tau, const SwitchingSolutionParams& sp);
// Non-degenerate evaluation through P(c R0 tau; g2, g3).
double sz_nonresonant_general(double tau, const SwitchingSolutionParams& sp);

}  // namespace tcsim
