#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "tcsim/errors.hpp"

namespace tcsim {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_initial = 0;  // 0: automatic
  double h_max = 0;      // 0: unbounded
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

// Dormand-Prince 5(4) with the standard 4th-order continuous extension.
// Vector is any Eigen column vector (real or complex scalar). The callback
// `sample(t, y)` is invoked at t0, t0+dt_out, ... up to and including t_end.
template <typename Vector, typename Rhs, typename Sample>
OdeStats integrate_dense(Rhs&& rhs, const Vector& y0, double t0, double t_end, double dt_out,
                         const OdeOptions& opt, Sample&& sample) {
  using std::abs;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  if (!(opt.rtol > 0) || !(opt.atol > 0)) throw Error(ErrorKind::Domain, "rtol and atol must be positive");
  if (!(dt_out > 0)) throw Error(ErrorKind::Domain, "dt_out must be positive");

  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const double span = abs(t_end - t0);
  const long n_out = static_cast<long>(std::floor(span / dt_out * (1 + 1e-12)));
  OdeStats stats;

  auto check_finite = [&](const Vector& y, double t) {
    if (!y.allFinite()) throw IntegrationError(ErrorKind::NonFiniteState, t, "state became non-finite");
  };
  auto err_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
    const auto sc = (opt.atol + opt.rtol * ya.cwiseAbs().cwiseMax(yb.cwiseAbs()).array()).eval();
    return std::sqrt((err.cwiseAbs().array() / sc).square().mean());
  };

  Vector y = y0;
  check_finite(y, t0);
  double t = t0;
  sample(t0, y);
  if (n_out == 0 && span == 0) return stats;

  Vector k1 = rhs(t, y), k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  ++stats.rhs_calls;

  double h = opt.h_initial;
  if (h <= 0) {
    // Hairer's starting-step heuristic
    const auto sc = (opt.atol + opt.rtol * y.cwiseAbs().array()).eval();
    const double dn0 = std::sqrt((y.cwiseAbs().array() / sc).square().mean());
    const double dn1 = std::sqrt((k1.cwiseAbs().array() / sc).square().mean());
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, span);
    ytmp = y + (dir * h0) * k1;
    k2 = rhs(t + dir * h0, ytmp);
    ++stats.rhs_calls;
    const double dn2 = std::sqrt(((k2 - k1).cwiseAbs().array() / sc).square().mean()) / h0;
    const double mx = std::max(dn1, dn2);
    const double h1 = mx <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / mx, 0.2);
    h = std::min(100 * h0, h1);
  }
  if (opt.h_max > 0) h = std::min(h, opt.h_max);
  h = std::min(h, span);

  long next_out = 1;
  const double t_stop = t_end;
  bool last_rejected = false;
  while (next_out <= n_out) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw IntegrationError(ErrorKind::StepUnderflow, t, "maximum step count exceeded");
    const double min_h = 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, abs(t));
    if (h < min_h) throw IntegrationError(ErrorKind::StepUnderflow, t, "step size underflow");
    double remaining = abs(t_stop - t);
    if (h > remaining) h = remaining;
    const double hs = dir * h;

    ytmp = y + hs * (a21 * k1);
    k2 = rhs(t + c2 * hs, ytmp);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    k3 = rhs(t + c3 * hs, ytmp);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = rhs(t + c4 * hs, ytmp);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = rhs(t + c5 * hs, ytmp);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = rhs(t + hs, ytmp);
    ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    k7 = rhs(t + hs, ynew);
    stats.rhs_calls += 6;
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = err_norm(err, y, ynew);
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      check_finite(ynew, t + hs);
      const double t_new = (abs(t_stop - (t + hs)) <= 1e-14 * std::max(1.0, abs(t_stop))) ? t_stop : t + hs;
      // dense output between t and t_new
      const Vector ydiff = ynew - y;
      const Vector bspl = hs * k1 - ydiff;
      const Vector r4 = ydiff - hs * k7 - bspl;
      const Vector r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next_out <= n_out) {
        const double t_out = next_out == n_out && abs(n_out * dt_out - span) < 1e-9 * dt_out
                                 ? t_end
                                 : t0 + dir * next_out * dt_out;
        if (dir * (t_out - t_new) > 0) break;
        const double th = (t_out - t) / hs, th1 = 1 - th;
        Vector yo = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
        if (t_out == t_new) yo = ynew;
        sample(t_out, yo);
        ++next_out;
      }
      y = ynew;
      k1 = k7;
      t = t_new;
      ++stats.accepted;
      double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
    if (opt.h_max > 0) h = std::min(h, opt.h_max);
    if (t == t_stop) break;
  }
  return stats;
}

}  // namespace tcsim
