#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tcsim/semiclassical.hpp"

namespace tcsim {

using cplx = std::complex<double>;

// Amplitudes of |e,n> (Ce[n]) and |g,n+2> (Cg[n]) for n = 0..n_max.
struct QuantumAmplitudes {
  int n_max = 0;
  Eigen::VectorXcd Ce, Cg;
  double t = 0;

  static QuantumAmplitudes excited_coherent(double n_bar, int n_max);
  double norm() const { return Ce.squaredNorm() + Cg.squaredNorm(); }
  double tail_mass() const { return std::norm(Ce(n_max)) + std::norm(Cg(n_max)); }
};

struct ReducedDensityMatrix {
  double rho11 = 1, rho22 = 0;
  cplx rho12 = 0;
  cplx rho21() const { return std::conj(rho12); }
};

enum class PurityRegime { AdiabaticClosedForm, WeakRegular, WeakChaotic, NumericFromAmplitudes };

struct PurityCurve {
  std::vector<double> times;
  std::vector<double> purity;
  std::vector<ReducedDensityMatrix> rho;  // same length as times when recorded
  PurityRegime regime = PurityRegime::NumericFromAmplitudes;
};

int default_n_max(double n_bar);

// sqrt of the Poisson weights, renormalised over 0..n_max.
Eigen::VectorXd coherent_weights(double n_bar, int n_max);

inline double coupling(double x, const ModelParams& P) { return P.Omega0 * std::cos(x); }

// Packed derivative [dCe; dCg] of the two-photon amplitude equations at fixed x.
Eigen::VectorXcd amplitude_rhs(const QuantumAmplitudes& amps, double t, double x, const ModelParams& P);

// Exact solution of the n-th 2x2 block with constant coupling g(x).
std::pair<cplx, cplx> amplitudes_adiabatic(double t, int n, double x, const ModelParams& P, cplx Ce0, cplx Cg0);

double hybrid_mean_u(const QuantumAmplitudes& amps, double t, const ModelParams& P);

struct HybridResult {
  std::vector<double> times, x, p;
  PurityCurve purity;
  std::vector<QuantumAmplitudes> amplitudes;
  double norm_drift = 0;
  double max_tail_mass = 0;
};

struct HybridOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  bool keep_amplitudes = false;
  double tail_limit = 1e-8;
};

HybridResult hybrid_evolve(const QuantumAmplitudes& amps0, double x0, double p0, double t_end, double dt_out,
                           const ModelParams& P, const HybridOptions& opt = {});

ReducedDensityMatrix reduced_density(const QuantumAmplitudes& amps);
// Per-n unit amplitudes weighted by W_n before tracing.
ReducedDensityMatrix reduced_density(const QuantumAmplitudes& amps, const Eigen::VectorXd& weights);

double purity(const ReducedDensityMatrix& rho);

ReducedDensityMatrix density_resonant_closed(double t, double x, const ModelParams& P);
double purity_closed_adiabatic(double t, double x, const ModelParams& P);

std::pair<cplx, cplx> amplitudes_weak_resonant(double t, int n, double phase, cplx Ce0, cplx Cg0,
                                               const ModelParams& P);

ReducedDensityMatrix density_weak(double t, cplx q2, double n_bar, double zeta);

cplx q_regular(double t, const ModelParams& P);
double q_chaotic_mean(double t, double alpha0);

PurityCurve purity_weak(const std::vector<double>& t_grid, PurityRegime regime, const ModelParams& P,
                        double alpha0 = 1.0);

// Monte-Carlo estimate of <exp(i int_0^t w dt')> for a zero-mean stationary
// Gaussian process with covariance `kernel(tau)`, sampled on t_k = k dt.
std::vector<cplx> monte_carlo_mean_phase(const std::function<double(double)>& kernel, double dt, int steps,
                                         int realizations, std::uint64_t seed);

// Covariance whose phase average reproduces the Erf law exactly:
// c(tau) = 2 (1 - alpha0 tau^2) exp(-alpha0 tau^2).
double erf_matched_kernel(double tau, double alpha0);
double gaussian_kernel(double tau, double alpha0);

void write_purity_csv(std::ostream& os, const PurityCurve& pc);
void write_density_csv(std::ostream& os, const PurityCurve& pc);

}  // namespace tcsim
