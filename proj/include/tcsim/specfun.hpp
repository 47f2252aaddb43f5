#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <variant>

#include "tcsim/errors.hpp"

namespace tcsim {

template <typename Real>
struct EllipticTriple {
  Real sn, cn, dn;
};

template <typename Real>
struct WeierstrassCoeffs {
  Real g2 = 0, g3 = 0;
  Real e1 = 0, e2 = 0, e3 = 0;  // e1 >= e2 >= e3
  Real A0 = 0, A1 = 0, A2 = 0;  // only meaningful for the switching solution
  // When the cubic has a complex pair, e2 holds the real root, e1 = e3 the
  // real part of the pair and e_imag its imaginary part.
  bool real_roots = true;
  Real e_imag = 0;
};

template <typename Real>
struct RealCubicRoots {
  Real e1, e2, e3;
};

template <typename Real>
struct ComplexCubicRoots {
  Real real_root;
  std::complex<Real> upper;  // conjugate pair, Im > 0 member
};

template <typename Real>
using CubicRoots = std::variant<RealCubicRoots<Real>, ComplexCubicRoots<Real>>;

namespace detail {

template <typename Real>
Real complement(Real k) {
  // k' = sqrt(1-k^2) without cancellation near k = 1
  return std::sqrt((Real(1) - k) * (Real(1) + k));
}

template <typename Real>
Real agm(Real a, Real b) {
  const Real tol = 4 * std::numeric_limits<Real>::epsilon();
  for (int i = 0; i < 64 && std::abs(a - b) > tol * a; ++i) {
    Real an = (a + b) / 2;
    b = std::sqrt(a * b);
    a = an;
  }
  return (a + b) / 2;
}

}  // namespace detail

template <typename Real>
Real complete_elliptic_k(Real k) {
  if (!(k >= 0 && k < 1)) throw Error(ErrorKind::Domain, "complete_elliptic_k requires 0 <= k < 1");
  return std::numbers::pi_v<Real> / (2 * detail::agm(Real(1), detail::complement(k)));
}

// Descending Landen (Gauss) transformation. The AGM sequence is run until the
// transformed modulus c_n/a_n drops below 1e-14, then the amplitude is
// recovered by the backward recurrence.
template <typename Real>
EllipticTriple<Real> jacobi_elliptic(Real u, Real k) {
  if (!(k >= 0 && k <= 1)) throw Error(ErrorKind::Domain, "jacobi_elliptic requires 0 <= k <= 1");
  if (k == 1) {
    Real sech = 1 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }
  if (k == 0) return {std::sin(u), std::cos(u), Real(1)};

  constexpr int kMax = 40;
  std::array<Real, kMax + 1> a{}, c{};
  a[0] = 1;
  Real b = detail::complement(k);
  c[0] = k;
  int n = 0;
  while (std::abs(c[n]) >= Real(1e-14) * a[n] && n < kMax) {
    a[n + 1] = (a[n] + b) / 2;
    c[n + 1] = (a[n] - b) / 2;
    b = std::sqrt(a[n] * b);
    ++n;
  }
  Real phi = std::ldexp(a[n] * u, n);
  Real phi_prev = phi;
  for (int j = n; j > 0; --j) {
    phi_prev = phi;
    phi = (phi + std::asin(c[j] / a[j] * std::sin(phi))) / 2;
  }
  Real sn = std::sin(phi), cn = std::cos(phi);
  Real dn;
  if (n == 0) {
    dn = std::sqrt(1 - k * k * sn * sn);
  } else {
    Real denom = std::cos(phi_prev - phi);
    dn = cn / denom;
    // cn/cos(phi1-phi0) is 0/0 at the quarter period; fall back to the identity there.
    if (std::abs(denom) < Real(1e-3) || !std::isfinite(dn)) dn = std::sqrt(1 - k * k * sn * sn);
  }
  return {sn, cn, dn};
}

template <typename Real>
CubicRoots<Real> depressed_cubic_roots(Real g2, Real g3) {
  // 4x^3 - g2 x - g3 = 0  <=>  x^3 + p x + q = 0
  const Real p = -g2 / 4, q = -g3 / 4;
  const Real disc = g2 * g2 * g2 - 27 * g3 * g3;
  const Real scale = std::max({Real(1), std::abs(g2), std::abs(g3)});
  auto polish = [&](Real x) {
    for (int i = 0; i < 3; ++i) {
      Real f = x * x * x + p * x + q;
      Real df = 3 * x * x + p;
      if (df == 0) break;
      Real dx = f / df;
      if (!std::isfinite(dx)) break;
      x -= dx;
    }
    return x;
  };
  if (g2 == 0 && g3 == 0) return RealCubicRoots<Real>{0, 0, 0};
  if (disc >= -std::numeric_limits<Real>::epsilon() * 64 * scale * scale * scale) {
    if (p >= 0) {
      // only reachable when disc ~ 0 and p ~ 0: triple root at 0
      return RealCubicRoots<Real>{0, 0, 0};
    }
    const Real r = 2 * std::sqrt(-p / 3);
    Real arg = 3 * q / (p * r);  // = (3q/2p) sqrt(-3/p)
    arg = std::clamp(arg, Real(-1), Real(1));
    const Real theta = std::acos(arg) / 3;
    const Real two_pi_3 = 2 * std::numbers::pi_v<Real> / 3;
    std::array<Real, 3> x{r * std::cos(theta), r * std::cos(theta - two_pi_3), r * std::cos(theta - 2 * two_pi_3)};
    std::sort(x.begin(), x.end(), std::greater<Real>());
    // Polishing a double root is ill-conditioned; only polish well-separated roots.
    for (int i = 0; i < 3; ++i) {
      Real gap = std::numeric_limits<Real>::infinity();
      for (int j = 0; j < 3; ++j)
        if (j != i) gap = std::min(gap, std::abs(x[i] - x[j]));
      if (gap > Real(1e-6) * r) x[i] = polish(x[i]);
    }
    // enforce the exact zero sum on the middle root
    x[1] = -(x[0] + x[2]);
    return RealCubicRoots<Real>{x[0], x[1], x[2]};
  }
  // one real root (Cardano), complex pair
  const Real sq = std::sqrt(q * q / 4 + p * p * p / 27);
  Real real_root = polish(std::cbrt(-q / 2 + sq) + std::cbrt(-q / 2 - sq));
  // remaining quadratic x^2 + real_root x + (p + real_root^2) = 0
  const Real re = -real_root / 2;
  const Real im = std::sqrt(std::max(Real(0), 4 * (p + real_root * real_root) - real_root * real_root)) / 2;
  return ComplexCubicRoots<Real>{real_root, {re, im}};
}

template <typename Real>
WeierstrassCoeffs<Real> make_weierstrass_coeffs(Real g2, Real g3) {
  WeierstrassCoeffs<Real> w;
  w.g2 = g2;
  w.g3 = g3;
  auto roots = depressed_cubic_roots(g2, g3);
  if (auto* r = std::get_if<RealCubicRoots<Real>>(&roots)) {
    w.e1 = r->e1;
    w.e2 = r->e2;
    w.e3 = r->e3;
  } else {
    const auto& c = std::get<ComplexCubicRoots<Real>>(roots);
    w.real_roots = false;
    w.e2 = c.real_root;
    w.e1 = w.e3 = c.upper.real();
    w.e_imag = c.upper.imag();
  }
  return w;
}

// P(z; g2, g3) for real z via P = e3 + (e1-e3)/sn^2(z sqrt(e1-e3), k), k^2 = (e2-e3)/(e1-e3).
template <typename Real>
Real weierstrass_p(Real z, const WeierstrassCoeffs<Real>& w, Real pole_threshold = Real(1e-9)) {
  if (std::abs(z) < pole_threshold) throw Error(ErrorKind::Pole, "weierstrass_p evaluated at the lattice pole z=0");
  if (!w.real_roots) {
    // negative discriminant: P = e2 + H (1 + cn)/(1 - cn), cn = cn(2 sqrt(H) z, k)
    const Real H = std::sqrt(3 * w.e2 * w.e2 - w.g2 / 4);
    const Real k = std::sqrt(std::clamp(Real(0.5) - 3 * w.e2 / (4 * H), Real(0), Real(1)));
    const Real cn = jacobi_elliptic(2 * std::sqrt(H) * z, k).cn;
    return w.e2 + H * (1 + cn) / (1 - cn);
  }
  const Real spread = w.e1 - w.e3;
  if (spread <= 0) return 1 / (z * z);  // g2 = g3 = 0
  if (std::abs(w.e2 - w.e3) < Real(1e-9) * std::abs(w.e1) && w.e1 > 0) {
    const Real s = std::sqrt(Real(1.5) * w.e1);
    const Real t = std::tan(s * z);
    return w.e1 + Real(1.5) * w.e1 / (t * t);
  }
  const Real k = std::sqrt(std::clamp((w.e2 - w.e3) / spread, Real(0), Real(1)));
  const Real sn = jacobi_elliptic(z * std::sqrt(spread), k).sn;
  return w.e3 + spread / (sn * sn);
}

// Ci(x): power series for small x, continued fraction for E1(ix) beyond.
template <typename Real>
Real cosine_integral(Real x) {
  if (!(x > 0)) throw Error(ErrorKind::Domain, "cosine_integral requires x > 0");
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real euler = std::numbers::egamma_v<Real>;
  if (x <= 2) {
    Real sum = 0, term = 1;
    const Real x2 = x * x;
    for (int k = 1; k < 100; ++k) {
      term *= -x2 / ((2 * k - 1) * (2 * k));
      Real add = term / (2 * k);
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return euler + std::log(x) + sum;
  }
  using C = std::complex<Real>;
  const Real tiny = std::numeric_limits<Real>::min() / eps;
  C b(1, x);
  C c(1 / tiny, 0);
  C d = C(1) / b;
  C h = d;
  for (int i = 1; i < 1000; ++i) {
    const Real a = -Real(i) * Real(i);
    b += Real(2);
    d = C(1) / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del.real() - 1) + std::abs(del.imag()) < eps) break;
  }
  h *= C(std::cos(x), -std::sin(x));
  return -h.real();
}

template <typename Real>
Real error_function(Real x) {
  return std::erf(x);
}

}  // namespace tcsim
