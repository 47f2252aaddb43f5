#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "tcsim/semiclassical.hpp"

namespace tcsim {

struct SmallDssParams {
  double delta = 0;
  double C0 = 0;          // -R0 cos x
  double OmegaN = 0;      // sqrt(delta^2 + C0^2)
  double omega_pend = 0;  // 4 R0 sqrt(alpha |delta|)/OmegaN

  static SmallDssParams make(double delta, double C0, double alpha, double R0);
  static SmallDssParams at(const ModelParams& P, double x);
};

// Rotation generated by (X, Y, Z) = (u, v, R0 s_z) at fixed x.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 3, 3> propagator_matrix(Scalar tau, const SmallDssParams& sd) {
  using std::cos;
  using std::sin;
  if (!(sd.OmegaN > 0)) throw Error(ErrorKind::Domain, "propagator_matrix requires OmegaN > 0");
  const Scalar W = sd.OmegaN, a = sd.delta / W, b = sd.C0 / W;
  const Scalar c = cos(W * tau), s = sin(W * tau);
  Eigen::Matrix<Scalar, 3, 3> M;
  M << b * b + a * a * c, -a * s, a * b * (1.0 - c),
       a * s,             c,      -b * s,
       a * b * (1.0 - c), b * s,  a * a + b * b * c;
  return M;
}

Eigen::Vector3d evolve_small_dss(double u0, double v0, double sz0, double tau, const SmallDssParams& sd, double R0);

template <typename Scalar>
Scalar pendulum_rhs(const Scalar& x, const Scalar& /*xdot*/, double tau, const SmallDssParams& sd) {
  using std::sin;
  return sd.omega_pend * sd.omega_pend * (1.0 - std::cos(sd.OmegaN * tau)) * sin(x);
}

// Energy of the averaged pendulum x'' = omega^2 sin x; the separatrix sits at
// energy omega^2 in this orientation.
template <typename Scalar>
Scalar pendulum_energy(const Scalar& x, const Scalar& xdot, double omega) {
  using std::cos;
  return xdot * xdot / 2.0 + omega * omega * cos(x);
}

struct SeparatrixPoint {
  double x, xdot;
};

SeparatrixPoint separatrix_solution(double tau, double tau0, double omega_pend, int sign);

double stochastic_layer_width(const SmallDssParams& sd);

struct SpectrumEstimate {
  Eigen::VectorXd lags, autocorr;
  Eigen::VectorXd freqs, power;
  double tau_c = 0;
  double amplitude = 0;
  double fit_residual = 0;
};

// Mean-removed, biased estimator normalised to autocorr[0] = 1.
SpectrumEstimate autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, double dt, double max_lag);

// Hann-windowed cosine transform of the autocorrelation:
// S(w) = 2 * integral_0^L G(t) w(t) cos(w t) dt on w_k = k pi / L.
void compute_spectrum(SpectrumEstimate& est);

struct LorentzianFit {
  double tau_c = 0;
  double amplitude = 0;
  double residual = 0;  // RMS(fit - data)/RMS(data)
  int iterations = 0;
};

// Least squares fit of A tau_c/(1 + w^2 tau_c^2) to est.power (computing the
// spectrum first if absent). Never throws on a poor fit.
LorentzianFit fit_lorentzian(SpectrumEstimate& est);

inline constexpr double kLorentzianResidualThreshold = 0.2;

// Fits and stores tau_c and fit_residual; throws FitFailure when the residual
// exceeds the threshold.
double correlation_time(SpectrumEstimate& est, double residual_threshold = kLorentzianResidualThreshold);

struct ChaosVerdict {
  double tau_c = 0;
  double fit_residual = 0;
  bool chaotic = false;
};

ChaosVerdict chaos_verdict(SpectrumEstimate& est, double series_duration,
                           double residual_threshold = kLorentzianResidualThreshold);

// Angular frequency of the largest Hann-windowed periodogram peak of a
// uniformly sampled series (mean removed), searched on a grid of n_freq
// points in (0, pi/dt].
double dominant_frequency(const Eigen::Ref<const Eigen::VectorXd>& series, double dt, int n_freq = 4000);

void write_autocorrelation_csv(std::ostream& os, const SpectrumEstimate& est);
void write_spectrum_csv(std::ostream& os, const SpectrumEstimate& est);

}  // namespace tcsim
