#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Core>

#include "tcsim/errors.hpp"
#include "tcsim/ode.hpp"

namespace tcsim {

// Dimensionless model constants. Redundant fields (Delta, g_detune, R0) are
// kept consistent by make()/validate().
struct ModelParams {
  double alpha = 0;     // k_f^2/(m Omega0)
  double delta = 0;     // (omega_f - omega_0)/Omega0
  double Delta = 0;     // zeta/Omega0
  double N = 1;         // a_x^2 + a_y^2 - s_z^2
  double s = 1;         // spin length
  double Omega0 = 1;    // coupling, sets the time unit
  double zeta = 0;      // Stark shift
  double n_bar = 0;     // mean photon number (quantum part)
  double g_detune = 0;  // delta + Delta/2
  double R0 = 4;        // 4 sqrt(N)
  double delta_q = 0;   // omega_0 - 2 omega_f, quantum detuning
  std::optional<double> k_f, mass;

  static ModelParams make(double alpha, double delta, double zeta, double Omega0, double N, double s = 1,
                          double n_bar = 0, double delta_q = 0);
  void validate() const;
};

std::ostream& operator<<(std::ostream& os, const ModelParams& p);

// Phase-space point (x, p, u, v, s_z).
template <typename Scalar>
class PhasePoint : public Eigen::Matrix<Scalar, 5, 1> {
 public:
  using Base = Eigen::Matrix<Scalar, 5, 1>;
  PhasePoint() : Base(Base::Zero()) {}
  PhasePoint(Scalar x, Scalar p, Scalar u, Scalar v, Scalar sz) { *this << x, p, u, v, sz; }
  template <typename OtherDerived>
  PhasePoint(const Eigen::MatrixBase<OtherDerived>& other) : Base(other) {}
  template <typename OtherDerived>
  PhasePoint& operator=(const Eigen::MatrixBase<OtherDerived>& other) {
    this->Base::operator=(other);
    return *this;
  }
  Scalar& x() { return (*this)(0); }
  Scalar& p() { return (*this)(1); }
  Scalar& u() { return (*this)(2); }
  Scalar& v() { return (*this)(3); }
  Scalar& sz() { return (*this)(4); }
  const Scalar& x() const { return (*this)(0); }
  const Scalar& p() const { return (*this)(1); }
  const Scalar& u() const { return (*this)(2); }
  const Scalar& v() const { return (*this)(3); }
  const Scalar& sz() const { return (*this)(4); }
};

using SemiclassicalState = PhasePoint<double>;

template <typename Scalar>
PhasePoint<Scalar> rhs_full(const PhasePoint<Scalar>& y, double /*tau*/, const ModelParams& P) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(y.x());
  const Scalar w = P.delta + P.Delta / 2 + P.Delta * y.sz();
  return PhasePoint<Scalar>(P.alpha * y.p(), -sin(y.x()) * y.u(), -w * y.v(),
                            w * y.u() + 16.0 * c * y.sz() * (P.N - P.s * P.s + 2.0 * y.sz() * y.sz()),
                            -c * y.v());
}

template <typename Scalar>
PhasePoint<Scalar> rhs_strong(const PhasePoint<Scalar>& y, double /*tau*/, const ModelParams& P) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(y.x());
  const Scalar w = P.g_detune + P.Delta * y.sz();
  return PhasePoint<Scalar>(P.alpha * y.p(), -sin(y.x()) * y.u(), -w * y.v(), w * y.u() + 16.0 * c * P.N * y.sz(),
                            -c * y.v());
}

// Spin/field subsystem with the position frozen (c = cos x held constant).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> rhs_fast_subsystem(const Scalar& u, const Scalar& v, const Scalar& sz, double c,
                                               const ModelParams& P) {
  const Scalar w = P.g_detune + P.Delta * sz;
  Eigen::Matrix<Scalar, 3, 1> d;
  d << -w * v, w * u + 16.0 * c * P.N * sz, -c * v;
  return d;
}

template <typename Scalar>
Scalar invariant_W(const PhasePoint<Scalar>& y, const ModelParams& P) {
  using std::cos;
  if (P.Delta == 0) throw Error(ErrorKind::DivisionByZero, "invariant_W is undefined for Delta = 0");
  const Scalar w = P.g_detune + P.Delta * y.sz();
  return P.alpha * y.p() * y.p() / 2.0 - y.u() * cos(y.x()) + w * w / (2.0 * P.Delta);
}

template <typename Scalar>
Scalar invariant_R2(const PhasePoint<Scalar>& y, const ModelParams& P) {
  return y.u() * y.u() + y.v() * y.v() + 16.0 * P.N * y.sz() * y.sz();
}

// Conserved by the full system, reduces to R^2 when N >> s^2.
template <typename Scalar>
Scalar invariant_full(const PhasePoint<Scalar>& y, const ModelParams& P) {
  const Scalar sz2 = y.sz() * y.sz();
  return y.u() * y.u() + y.v() * y.v() + 16.0 * sz2 * (P.N - P.s * P.s + sz2);
}

// W restricted to the frozen-position subsystem.
double invariant_W_fast(const SemiclassicalState& y, double c, const ModelParams& P);

enum class System { Full, Strong, FastSubsystem };

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::Matrix<double, Eigen::Dynamic, 5, Eigen::RowMajor> states;
  double conserved_drift = 0;
  OdeStats stats;

  Eigen::Index size() const { return times.size(); }
  SemiclassicalState state(Eigen::Index i) const { return SemiclassicalState(states.row(i).transpose()); }
};

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  std::optional<double> frozen_c;  // FastSubsystem only; defaults to cos(x0)
};

// Samples at 0, dt_out, 2 dt_out, ... t_end (t_end may be negative for
// backward integration). conserved_drift is the max relative deviation of
// the invariants tracked for the chosen system.
Trajectory integrate(System system, const SemiclassicalState& state0, double t_end, double dt_out,
                     const ModelParams& params, const IntegrateOptions& opt = {});

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace tcsim
