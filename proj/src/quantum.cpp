#include "tcsim/quantum.hpp"

#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>

#include "tcsim/ode.hpp"
#include "tcsim/specfun.hpp"

namespace tcsim {

namespace {

constexpr cplx I(0, 1);

double pair_coupling(int n) { return std::sqrt((n + 1.0) * (n + 2.0)); }

}  // namespace

int default_n_max(double n_bar) { return static_cast<int>(std::ceil(n_bar + 10 * std::sqrt(n_bar + 1) + 20)); }

Eigen::VectorXd coherent_weights(double n_bar, int n_max) {
  if (!(n_bar >= 0)) throw Error(ErrorKind::Domain, "n_bar must be non-negative");
  if (n_max < 0) throw Error(ErrorKind::Domain, "n_max must be non-negative");
  Eigen::VectorXd w2(n_max + 1);
  // recursion in log space avoids exp(-n_bar) underflow for large n_bar
  double logw = -n_bar;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) logw += n_bar > 0 ? std::log(n_bar / n) : -std::numeric_limits<double>::infinity();
    w2(n) = std::exp(logw);
  }
  const double kept = w2.sum();
  if (1 - kept > 1e-10)
    throw Error(ErrorKind::Truncation, "Poisson tail mass " + std::to_string(1 - kept) + " beyond n_max=" +
                                           std::to_string(n_max));
  return (w2 / kept).cwiseSqrt();
}

QuantumAmplitudes QuantumAmplitudes::excited_coherent(double n_bar, int n_max) {
  QuantumAmplitudes a;
  a.n_max = n_max;
  a.Ce = coherent_weights(n_bar, n_max).cast<cplx>();
  a.Cg = Eigen::VectorXcd::Zero(n_max + 1);
  return a;
}

Eigen::VectorXcd amplitude_rhs(const QuantumAmplitudes& a, double t, double x, const ModelParams& P) {
  const int m = a.n_max + 1;
  const double g = coupling(x, P);
  const cplx ph = std::exp(-I * P.delta_q * t);
  Eigen::VectorXcd d(2 * m);
  for (int n = 0; n < m; ++n) {
    const double b = g * pair_coupling(n);
    // i dCe = zeta n/2 Ce + b e^{-i dq t} Cg ;  i dCg = -zeta (n+2)/2 Cg + b e^{i dq t} Ce
    d(n) = -I * (P.zeta * n / 2 * a.Ce(n) + b * ph * a.Cg(n));
    d(m + n) = -I * (-P.zeta * (n + 2) / 2.0 * a.Cg(n) + b * std::conj(ph) * a.Ce(n));
  }
  return d;
}

std::pair<cplx, cplx> amplitudes_adiabatic(double t, int n, double x, const ModelParams& P, cplx Ce0, cplx Cg0) {
  const double b = coupling(x, P) * pair_coupling(n);
  const double D = (P.zeta * (n + 1) - P.delta_q) / 2;
  const double lam = std::sqrt(D * D + b * b);
  const double c = std::cos(lam * t);
  // sin(lam t)/lam, finite as lam -> 0
  const double s_over = lam > 0 ? std::sin(lam * t) / lam : t;
  const cplx A = (c - I * D * s_over) * Ce0 - I * b * s_over * Cg0;
  const cplx B = -I * b * s_over * Ce0 + (c + I * D * s_over) * Cg0;
  return {std::exp(I * (P.zeta - P.delta_q) * t / 2.0) * A, std::exp(I * (P.zeta + P.delta_q) * t / 2.0) * B};
}

double hybrid_mean_u(const QuantumAmplitudes& a, double t, const ModelParams& P) {
  cplx acc = 0;
  for (int n = 0; n <= a.n_max; ++n) acc += pair_coupling(n) * std::conj(a.Ce(n)) * a.Cg(n);
  return 2 / std::sqrt(P.N) * std::real(std::exp(I * P.delta_q * t) * acc);
}

ReducedDensityMatrix reduced_density(const QuantumAmplitudes& a) {
  ReducedDensityMatrix r;
  r.rho11 = a.Ce.squaredNorm();
  r.rho22 = a.Cg.squaredNorm();
  r.rho12 = (a.Ce.array() * a.Cg.array().conjugate()).sum();
  return r;
}

ReducedDensityMatrix reduced_density(const QuantumAmplitudes& a, const Eigen::VectorXd& weights) {
  QuantumAmplitudes w = a;
  w.Ce = a.Ce.cwiseProduct(weights.cast<cplx>());
  w.Cg = a.Cg.cwiseProduct(weights.cast<cplx>());
  return reduced_density(w);
}

double purity(const ReducedDensityMatrix& r) {
  return r.rho11 * r.rho11 + r.rho22 * r.rho22 + 2 * std::norm(r.rho12);
}

HybridResult hybrid_evolve(const QuantumAmplitudes& amps0, double x0, double p0, double t_end, double dt_out,
                           const ModelParams& P, const HybridOptions& opt) {
  const int m = amps0.n_max + 1;
  Eigen::VectorXcd y0(2 + 2 * m);
  y0(0) = x0;
  y0(1) = p0;
  y0.segment(2, m) = amps0.Ce;
  y0.segment(2 + m, m) = amps0.Cg;

  auto unpack = [&](const Eigen::VectorXcd& y, double t) {
    QuantumAmplitudes a;
    a.n_max = amps0.n_max;
    a.Ce = y.segment(2, m);
    a.Cg = y.segment(2 + m, m);
    a.t = t;
    return a;
  };
  auto rhs = [&](double t, const Eigen::VectorXcd& y) {
    const double x = y(0).real(), p = y(1).real();
    const QuantumAmplitudes a = unpack(y, t);
    Eigen::VectorXcd d(y.size());
    d(0) = P.alpha * p;
    d(1) = -hybrid_mean_u(a, t, P) * std::sin(x);
    d.tail(2 * m) = amplitude_rhs(a, t, x, P);
    return d;
  };

  HybridResult res;
  res.purity.regime = PurityRegime::NumericFromAmplitudes;
  const double norm0 = amps0.norm();
  auto sample = [&](double t, const Eigen::VectorXcd& y) {
    const QuantumAmplitudes a = unpack(y, t);
    const double tail = a.tail_mass();
    res.max_tail_mass = std::max(res.max_tail_mass, tail);
    if (tail > opt.tail_limit)
      throw Error(ErrorKind::Truncation, "tail mass " + std::to_string(tail) + " at t=" + std::to_string(t));
    res.norm_drift = std::max(res.norm_drift, std::abs(a.norm() - norm0));
    res.times.push_back(t);
    res.x.push_back(y(0).real());
    res.p.push_back(y(1).real());
    const auto r = reduced_density(a);
    res.purity.times.push_back(t);
    res.purity.rho.push_back(r);
    res.purity.purity.push_back(purity(r));
    if (opt.keep_amplitudes) res.amplitudes.push_back(a);
  };
  OdeOptions oo;
  oo.rtol = opt.rtol;
  oo.atol = opt.atol;
  integrate_dense<Eigen::VectorXcd>(rhs, y0, 0.0, t_end, dt_out, oo, sample);
  return res;
}

ReducedDensityMatrix density_resonant_closed(double t, double x, const ModelParams& P) {
  const double g = coupling(x, P);
  const double lam2 = P.zeta * P.zeta / 4 + g * g;
  const double lam = std::sqrt(lam2);
  const double E = std::exp(-P.n_bar * (1 - std::cos(2 * t * lam)));
  const double Phi = P.n_bar * std::sin(2 * t * lam);
  const double K = E * std::cos(Phi);
  const cplx ph = std::exp(-I * P.zeta * t);
  ReducedDensityMatrix r;
  if (lam2 == 0) return r;  // no coupling, no Stark shift: nothing evolves
  r.rho11 = 0.5 * (1 + K) + 0.5 * (P.zeta * P.zeta / (4 * lam2)) * (1 - K);
  r.rho22 = 0.5 * (g * g / lam2) * (1 - K);
  r.rho12 = -I * (g / (2 * lam)) * ph * E * std::sin(Phi) + 0.5 * ph * (g * P.zeta / (2 * lam2)) * (1 - K);
  return r;
}

double purity_closed_adiabatic(double t, double x, const ModelParams& P) {
  const double g = coupling(x, P);
  const double lam2 = P.zeta * P.zeta / 4 + g * g;
  if (lam2 == 0) return 1.0;
  const double lam = std::sqrt(lam2);
  return 1 - (g * g / (2 * lam2)) * (1 - std::exp(-2 * P.n_bar * (1 - std::cos(2 * t * lam))));
}

std::pair<cplx, cplx> amplitudes_weak_resonant(double t, int n, double phase, cplx Ce0, cplx Cg0,
                                               const ModelParams& P) {
  const cplx C1 = (Ce0 + Cg0) / 2.0, C2 = (Ce0 - Cg0) / 2.0;
  const cplx Q = std::exp(I * (n * phase));
  const cplx Qs = std::conj(Q);
  return {std::exp(-I * (n * P.zeta * t / 2)) * (C1 * Q + C2 * Qs),
          std::exp(I * ((n + 1) * P.zeta * t / 2)) * (C1 * Q - C2 * Qs)};
}

ReducedDensityMatrix density_weak(double t, cplx q2, double n_bar, double zeta) {
  ReducedDensityMatrix r;
  const double en = std::exp(-n_bar);
  r.rho11 = 0.5 + 0.5 * en * std::real(std::exp(n_bar * q2));
  r.rho22 = 1 - r.rho11;
  const cplx rot = std::exp(-I * t * zeta);
  r.rho12 = 0.25 * rot * (std::exp(n_bar * std::conj(q2) * rot) - std::exp(n_bar * q2 * rot)) * en;
  return r;
}

cplx q_regular(double t, const ModelParams& P) {
  const double a = std::sqrt(P.Omega0 / (P.alpha * P.zeta));
  const double arg = std::exp(t / a);
  return std::exp(2.0 * I * a * (cosine_integral(arg) - cosine_integral(1.0)));
}

double q_chaotic_mean(double t, double alpha0) {
  if (!(alpha0 > 0)) throw Error(ErrorKind::Domain, "alpha0 must be positive");
  return std::exp(-(t / 2) * std::sqrt(std::numbers::pi / alpha0) * error_function(t * std::sqrt(alpha0)));
}

PurityCurve purity_weak(const std::vector<double>& t_grid, PurityRegime regime, const ModelParams& P,
                        double alpha0) {
  if (regime != PurityRegime::WeakRegular && regime != PurityRegime::WeakChaotic)
    throw Error(ErrorKind::Domain, "purity_weak needs the WeakRegular or WeakChaotic regime");
  PurityCurve pc;
  pc.regime = regime;
  for (double t : t_grid) {
    const cplx q = regime == PurityRegime::WeakRegular ? q_regular(t, P) : cplx(q_chaotic_mean(t, alpha0), 0);
    const auto r = density_weak(t, q, P.n_bar, P.zeta);
    pc.times.push_back(t);
    pc.rho.push_back(r);
    pc.purity.push_back(purity(r));
  }
  return pc;
}

double erf_matched_kernel(double tau, double alpha0) {
  const double a = alpha0 * tau * tau;
  return 2 * (1 - a) * std::exp(-a);
}

double gaussian_kernel(double tau, double alpha0) { return std::exp(-alpha0 * tau * tau); }

std::vector<cplx> monte_carlo_mean_phase(const std::function<double(double)>& kernel, double dt, int steps,
                                         int realizations, std::uint64_t seed) {
  if (steps < 1 || realizations < 1 || !(dt > 0)) throw Error(ErrorKind::Domain, "invalid Monte-Carlo grid");
  const int n = steps + 1;
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = kernel((i - j) * dt);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const Eigen::VectorXd sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd L = es.eigenvectors() * sd.asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<cplx> acc(n, 0.0);
  const int chunk = 4096;
  Eigen::MatrixXd Z(n, chunk);
  for (int done = 0; done < realizations; done += chunk) {
    const int cols = std::min(chunk, realizations - done);
    for (int c = 0; c < cols; ++c)
      for (int i = 0; i < n; ++i) Z(i, c) = normal(rng);
    const Eigen::MatrixXd W = L * Z.leftCols(cols);
    for (int c = 0; c < cols; ++c) {
      double phase = 0;
      acc[0] += 1.0;
      for (int k = 1; k < n; ++k) {
        phase += 0.5 * dt * (W(k - 1, c) + W(k, c));
        acc[k] += std::exp(I * phase);
      }
    }
  }
  for (auto& v : acc) v /= double(realizations);
  return acc;
}

void write_purity_csv(std::ostream& os, const PurityCurve& pc) {
  os << "t,purity\n";
  char buf[80];
  for (std::size_t i = 0; i < pc.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pc.times[i], pc.purity[i]);
    os << buf;
  }
}

void write_density_csv(std::ostream& os, const PurityCurve& pc) {
  os << "t,rho11,rho22,re_rho12,im_rho12\n";
  char buf[160];
  for (std::size_t i = 0; i < pc.rho.size(); ++i) {
    const auto& r = pc.rho[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", pc.times[i], r.rho11, r.rho22,
                  r.rho12.real(), r.rho12.imag());
    os << buf;
  }
}

}  // namespace tcsim
