#include "tcsim/chaos.hpp"

#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

namespace tcsim {

SmallDssParams SmallDssParams::make(double delta, double C0, double alpha, double R0) {
  SmallDssParams sd;
  sd.delta = delta;
  sd.C0 = C0;
  sd.OmegaN = std::hypot(delta, C0);
  sd.omega_pend = sd.OmegaN > 0 ? 4 * R0 * std::sqrt(alpha * std::abs(delta)) / sd.OmegaN : 0;
  return sd;
}

SmallDssParams SmallDssParams::at(const ModelParams& P, double x) {
  return make(P.delta, -P.R0 * std::cos(x), P.alpha, P.R0);
}

Eigen::Vector3d evolve_small_dss(double u0, double v0, double sz0, double tau, const SmallDssParams& sd, double R0) {
  const Eigen::Vector3d X = propagator_matrix(tau, sd) * Eigen::Vector3d(u0, v0, R0 * sz0);
  return {X(0), X(1), X(2) / R0};
}

SeparatrixPoint separatrix_solution(double tau, double tau0, double omega_pend, int sign) {
  if (!(omega_pend > 0)) throw Error(ErrorKind::Domain, "separatrix requires omega > 0");
  const double sg = sign >= 0 ? 1.0 : -1.0;
  const double s = omega_pend * (tau - tau0);
  return {4 * std::atan(std::exp(sg * s)), sg * 2 * omega_pend / std::cosh(s)};
}

double stochastic_layer_width(const SmallDssParams& sd) {
  if (!(sd.omega_pend > 0)) throw Error(ErrorKind::Domain, "stochastic_layer_width requires omega > 0");
  const double W = sd.OmegaN, w = sd.omega_pend;
  const double y = std::numbers::pi * W / w;
  // log sinh(y) without overflow
  const double log_sinh = y > 20 ? y - std::log(2.0) + std::log1p(-std::exp(-2 * y)) : std::log(std::sinh(y));
  const double log_width = std::log(4 * std::numbers::pi) + 3 * std::log(W) - std::log(w) + y / 2 - log_sinh;
  return std::exp(log_width);
}

SpectrumEstimate autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, double dt, double max_lag) {
  if (!(dt > 0) || !(max_lag > 0)) throw Error(ErrorKind::Domain, "dt and max_lag must be positive");
  const Eigen::Index n = series.size();
  const Eigen::Index m = static_cast<Eigen::Index>(std::llround(max_lag / dt));
  if (m < 1 || n < 10 * m)
    throw Error(ErrorKind::InsufficientData, "series needs at least 10*max_lag/dt samples (have " +
                                                 std::to_string(n) + ", need " + std::to_string(10 * m) + ")");
  const Eigen::VectorXd s = series.array() - series.mean();
  SpectrumEstimate est;
  est.lags.resize(m + 1);
  est.autocorr.resize(m + 1);
  const double c0 = s.squaredNorm();
  for (Eigen::Index k = 0; k <= m; ++k) {
    est.lags(k) = k * dt;
    est.autocorr(k) = c0 > 0 ? s.head(n - k).dot(s.tail(n - k)) / c0 : (k == 0 ? 1.0 : 0.0);
  }
  return est;
}

void compute_spectrum(SpectrumEstimate& est) {
  const Eigen::Index m = est.lags.size() - 1;
  if (m < 1) throw Error(ErrorKind::InsufficientData, "autocorrelation has fewer than two lags");
  const double dt = est.lags(1) - est.lags(0);
  const double L = est.lags(m);
  Eigen::VectorXd gw(m + 1);
  for (Eigen::Index j = 0; j <= m; ++j) {
    const double hann = 0.5 * (1 + std::cos(std::numbers::pi * est.lags(j) / L));
    gw(j) = est.autocorr(j) * hann * ((j == 0 || j == m) ? 0.5 : 1.0);
  }
  est.freqs.resize(m + 1);
  est.power.resize(m + 1);
  for (Eigen::Index k = 0; k <= m; ++k) {
    const double w = k * std::numbers::pi / L;
    double acc = 0;
    for (Eigen::Index j = 0; j <= m; ++j) acc += gw(j) * std::cos(std::numbers::pi * double((k * j) % (2 * m)) / m);
    est.freqs(k) = w;
    est.power(k) = 2 * dt * acc;
  }
}

LorentzianFit fit_lorentzian(SpectrumEstimate& est) {
  if (est.power.size() == 0) compute_spectrum(est);
  const Eigen::VectorXd& w = est.freqs;
  const Eigen::VectorXd& S = est.power;
  const Eigen::Index n = S.size();

  // initial guess from the half width at half maximum
  double tau_c, A;
  const double S0 = S(0);
  if (S0 > 0) {
    Eigen::Index k = 1;
    while (k < n && S(k) > S0 / 2) ++k;
    double wh;
    if (k >= n) {
      wh = w(n - 1);
    } else {
      const double f = (S(k - 1) - S0 / 2) / (S(k - 1) - S(k));
      wh = w(k - 1) + f * (w(k) - w(k - 1));
    }
    tau_c = 1 / std::max(wh, w(1) / 2);
    A = S0 / tau_c;
  } else {
    Eigen::Index kmax;
    const double smax = S.maxCoeff(&kmax);
    tau_c = 1 / std::max(w(kmax), w(1));
    A = std::max(smax, 1e-300) / tau_c;
  }

  auto model = [&](double la, double lt) {
    const double a = std::exp(la), t = std::exp(lt);
    return Eigen::VectorXd((a * t / (1 + (w.array() * t).square())).matrix());
  };
  double la = std::log(A), lt = std::log(tau_c);
  Eigen::VectorXd r = model(la, lt) - S;
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  for (; it < 200; ++it) {
    const double t = std::exp(lt);
    const Eigen::VectorXd f = model(la, lt);
    Eigen::MatrixXd J(n, 2);
    J.col(0) = f;
    J.col(1) = (f.array() * (1 - (w.array() * t).square()) / (1 + (w.array() * t).square())).matrix();
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    const Eigen::Vector2d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix2d Aug = JtJ;
      Aug.diagonal() *= (1 + lambda);
      const Eigen::Vector2d step = Aug.ldlt().solve(-g);
      const double la2 = la + step(0), lt2 = lt + step(1);
      const Eigen::VectorXd r2 = model(la2, lt2) - S;
      const double cost2 = r2.squaredNorm();
      if (std::isfinite(cost2) && cost2 < cost) {
        const double rel = (cost - cost2) / std::max(cost, 1e-300);
        la = la2;
        lt = lt2;
        r = r2;
        cost = cost2;
        lambda = std::max(lambda / 10, 1e-12);
        improved = true;
        if (rel < 1e-14 || step.norm() < 1e-12) it = 1000;
        break;
      }
      lambda *= 10;
    }
    if (!improved) break;
  }
  LorentzianFit fit;
  fit.tau_c = std::exp(lt);
  fit.amplitude = std::exp(la);
  const double denom = S.norm();
  fit.residual = denom > 0 ? r.norm() / denom : std::numeric_limits<double>::infinity();
  fit.iterations = std::min(it, 200);
  est.tau_c = fit.tau_c;
  est.amplitude = fit.amplitude;
  est.fit_residual = fit.residual;
  return fit;
}

double correlation_time(SpectrumEstimate& est, double residual_threshold) {
  const auto fit = fit_lorentzian(est);
  if (!(fit.residual < residual_threshold))
    throw Error(ErrorKind::FitFailure, "Lorentzian residual " + std::to_string(fit.residual) + " exceeds " +
                                           std::to_string(residual_threshold));
  return fit.tau_c;
}

ChaosVerdict chaos_verdict(SpectrumEstimate& est, double series_duration, double residual_threshold) {
  const auto fit = fit_lorentzian(est);
  ChaosVerdict v;
  v.tau_c = fit.tau_c;
  v.fit_residual = fit.residual;
  v.chaotic = fit.residual < residual_threshold && fit.tau_c < series_duration / 10;
  return v;
}

double dominant_frequency(const Eigen::Ref<const Eigen::VectorXd>& series, double dt, int n_freq) {
  const Eigen::Index n = series.size();
  if (n < 4) throw Error(ErrorKind::InsufficientData, "dominant_frequency needs at least 4 samples");
  Eigen::VectorXd s = series.array() - series.mean();
  for (Eigen::Index i = 0; i < n; ++i) s(i) *= 0.5 * (1 - std::cos(2 * std::numbers::pi * i / (n - 1)));
  const double w_max = std::numbers::pi / dt;
  double best_w = 0, best_p = -1;
  for (int k = 1; k <= n_freq; ++k) {
    const double w = w_max * k / n_freq;
    // rotate a phasor instead of calling sin/cos per sample
    const std::complex<double> step = std::polar(1.0, -w * dt);
    std::complex<double> ph = 1, acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += s(i) * ph;
      ph *= step;
    }
    const double p = std::norm(acc);
    if (p > best_p) {
      best_p = p;
      best_w = w;
    }
  }
  return best_w;
}

void write_autocorrelation_csv(std::ostream& os, const SpectrumEstimate& est) {
  os << "lag,corr\n";
  char buf[80];
  for (Eigen::Index i = 0; i < est.lags.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", est.lags(i), est.autocorr(i));
    os << buf;
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumEstimate& est) {
  os << "omega,power\n";
  char buf[80];
  for (Eigen::Index i = 0; i < est.freqs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", est.freqs(i), est.power(i));
    os << buf;
  }
}

}  // namespace tcsim
